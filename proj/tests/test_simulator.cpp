#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "tssto/errors.hpp"
#include "tssto/metrics.hpp"
#include "tssto/poisson.hpp"
#include "tssto/simulate.hpp"

using tssto::BlobConfig;
using tssto::ContaminationConfig;
using tssto::ImageStack;
using tssto::Label;
using tssto::LabelMask;

TEST_CASE("coverage lands inside the half-point window") {
  const LabelMask m = tssto::generate_mask(512, 512, 0.1034, 7);
  const auto [cf, sf] = tssto::coverage(m);
  CHECK(cf >= 0.0984);
  CHECK(cf <= 0.1084);
  CHECK(sf == 0.0);
}

TEST_CASE("identical seeds give identical masks") {
  const LabelMask a = tssto::generate_mask(64, 64, 0.2, 99);
  const LabelMask b = tssto::generate_mask(64, 64, 0.2, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) CHECK(a.labels[p] == b.labels[p]);

  const LabelMask c = tssto::generate_mask(64, 64, 0.2, 100);
  bool same = true;
  for (std::size_t p = 0; p < a.size(); ++p) same = same && a.labels[p] == c.labels[p];
  CHECK_FALSE(same);
}

TEST_CASE("a small target with one blob stays connected") {
  BlobConfig cfg;
  cfg.num_blobs = 1;
  const LabelMask m = tssto::generate_mask(64, 64, 0.02, 5, cfg);
  const auto regions = tssto::extract_regions(m);
  CHECK(regions.size() == 1);
}

TEST_CASE("unreachable or degenerate targets are rejected") {
  CHECK_THROWS_AS(tssto::generate_mask(64, 64, 0.0, 1), tssto::InputError);
  CHECK_THROWS_AS(tssto::generate_mask(64, 64, 1.0, 1), tssto::InputError);
  // 2x2 grid quantizes coverage to multiples of 25%: 10% is over half a
  // point away from any reachable value
  CHECK_THROWS_AS(tssto::generate_mask(2, 2, 0.10, 1), tssto::InputError);
}

TEST_CASE("shadow band is the displaced cloud on clear ground") {
  BlobConfig cfg;
  cfg.num_blobs = 2;
  cfg.shadow_di = 5;
  cfg.shadow_dj = 3;
  const LabelMask m = tssto::generate_mask(96, 96, 0.15, 11, cfg);
  const auto [cf, sf] = tssto::coverage(m);
  CHECK(cf >= 0.145);
  CHECK(cf <= 0.155);
  CHECK(sf > 0.0);
  for (int i = 0; i < 96; ++i)
    for (int j = 0; j < 96; ++j)
      if (m.at(i, j) == Label::Shadow) {
        const int si = i - cfg.shadow_di, sj = j - cfg.shadow_dj;
        REQUIRE(si >= 0);
        REQUIRE(sj >= 0);
        CHECK(m.at(si, sj) == Label::Cloud);
      }
}

TEST_CASE("clear pixels survive contamination bit-exact") {
  const ImageStack clean = fix::make_scene(32, 32, 2, 3);
  std::vector<LabelMask> masks = fix::clear_masks(32, 32, 3);
  masks[1] = tssto::generate_mask(32, 32, 0.2, 21);
  masks[1].frame_index = 1;

  const ImageStack dirty = tssto::apply_contamination(clean, masks);
  for (std::size_t b = 0; b < clean.bands.size(); ++b)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
          const double got = dirty.bands[b].at(i, j, k);
          const double want = clean.bands[b].at(i, j, k);
          if (k != 1 || masks[1].at(i, j) == Label::Clear)
            CHECK(got == want);
          else
            CHECK(got != want);
        }
}

TEST_CASE("empty masks are a no-op") {
  const ImageStack clean = fix::make_scene(16, 16, 1, 2);
  const ImageStack dirty = tssto::apply_contamination(clean, fix::clear_masks(16, 16, 2));
  for (std::size_t b = 0; b < clean.bands.size(); ++b)
    for (std::size_t p = 0; p < clean.bands[b].size(); ++p)
      CHECK(dirty.bands[b].data()[p] == clean.bands[b].data()[p]);
}

TEST_CASE("textureless cloud paints a constant level") {
  const ImageStack clean = fix::make_scene(8, 8, 2, 2);
  std::vector<LabelMask> masks = fix::clear_masks(8, 8, 2);
  for (Label& l : masks[0].labels) l = Label::Cloud;
  ContaminationConfig cfg;
  cfg.texture_amp = 0.0;
  const ImageStack dirty = tssto::apply_contamination(clean, masks, cfg);
  for (std::size_t b = 0; b < clean.bands.size(); ++b)
    for (int p = 0; p < 64; ++p) CHECK(dirty.bands[b].frame_data(0)[p] == 0.95);
}

TEST_CASE("shadow darkens multiplicatively") {
  const ImageStack clean = fix::make_scene(8, 8, 1, 2);
  std::vector<LabelMask> masks = fix::clear_masks(8, 8, 2);
  masks[0].at(3, 3) = Label::Shadow;
  const ImageStack dirty = tssto::apply_contamination(clean, masks);
  CHECK(dirty.bands[0].at(3, 3, 0) == 0.4 * clean.bands[0].at(3, 3, 0));
}

TEST_CASE("cloud texture is shared across bands") {
  const ImageStack clean = fix::make_scene(16, 16, 3, 2);
  std::vector<LabelMask> masks = fix::clear_masks(16, 16, 2);
  masks[0] = tssto::generate_mask(16, 16, 0.25, 77);
  const ImageStack dirty = tssto::apply_contamination(clean, masks);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (masks[0].at(i, j) == Label::Cloud) {
        const double v0 = dirty.bands[0].at(i, j, 0);
        CHECK(dirty.bands[1].at(i, j, 0) == v0);
        CHECK(dirty.bands[2].at(i, j, 0) == v0);
      }
}

TEST_CASE("more coverage means lower fidelity through the preset sweep") {
  const ImageStack clean = fix::make_scene(64, 64, 2, 3);
  const double presets[5] = {0.0134, 0.0392, 0.1035, 0.1974, 0.3484};
  double prev = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 5; ++c) {
    std::vector<LabelMask> masks = fix::clear_masks(64, 64, 3);
    // same seed for every preset: the blob field is fixed, only the
    // threshold moves, so masks nest and the comparison is clean
    masks[1] = tssto::generate_mask(64, 64, presets[c], 13);
    masks[1].frame_index = 1;
    const ImageStack dirty = tssto::apply_contamination(clean, masks);
    const double p = tssto::psnr(clean, dirty, 1.0);
    CHECK(p < prev);
    prev = p;
  }
}
