#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "tssto/metrics.hpp"
#include "tssto/poisson.hpp"

using tssto::GuidanceField;
using tssto::Label;
using tssto::LabelMask;
using tssto::PoissonConfig;
using tssto::Region;

TEST_CASE("region extraction") {
  LabelMask clear(5, 5);
  CHECK(tssto::extract_regions(clear).empty());

  LabelMask one(5, 5);
  one.at(2, 2) = Label::Cloud;
  const auto regions = tssto::extract_regions(one);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].pixels.size() == 1);
  CHECK(regions[0].boundary.size() == 4);
  CHECK(regions[0].open_boundary.empty());

  LabelMask diag(5, 5);
  diag.at(1, 1) = Label::Cloud;
  diag.at(2, 2) = Label::Shadow;
  CHECK(tssto::extract_regions(diag).size() == 2);  // diagonals don't join

  // cloud and shadow touching joins into one recovery area
  LabelMask joined(5, 5);
  joined.at(1, 1) = Label::Cloud;
  joined.at(1, 2) = Label::Shadow;
  CHECK(tssto::extract_regions(joined).size() == 1);

  // a pixel on the image edge has no neighbor beyond the frame
  LabelMask corner(3, 3);
  corner.at(0, 0) = Label::Cloud;
  const auto cr = tssto::extract_regions(corner);
  REQUIRE(cr.size() == 1);
  CHECK(cr[0].boundary.size() == 2);
}

TEST_CASE("guidance field of simple planes") {
  const int m = 4, n = 5;
  std::vector<double> flat(m * n, 3.7);
  const GuidanceField w0 = tssto::guidance_field(flat.data(), m, n);
  for (double v : w0.wx) CHECK(v == 0.0);
  for (double v : w0.wy) CHECK(v == 0.0);

  std::vector<double> ramp(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ramp[i * n + j] = static_cast<double>(j);
  const GuidanceField wr = tssto::guidance_field(ramp.data(), m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(wr.wx[i * n + j] == (j + 1 < n ? 1.0 : 0.0));
      CHECK(wr.wy[i * n + j] == 0.0);
    }
}

TEST_CASE("guidance field equals a direct difference pass") {
  const int m = 7, n = 6;
  const tssto::BandTensor r = fix::rand_tensor(m, n, 1, 1200);
  const GuidanceField w = tssto::guidance_field(r.data(), m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double ex = j + 1 < n ? r.data()[i * n + j + 1] - r.data()[i * n + j] : 0.0;
      const double ey = i + 1 < m ? r.data()[(i + 1) * n + j] - r.data()[i * n + j] : 0.0;
      CHECK(w.wx[i * n + j] == ex);
      CHECK(w.wy[i * n + j] == ey);
    }
}

TEST_CASE("harmonic fill of a single pixel") {
  const int m = 3, n = 3;
  std::vector<double> plane(m * n, 10.0);
  plane[4] = -999.0;  // center, to be replaced
  LabelMask mask(m, n);
  mask.at(1, 1) = Label::Cloud;
  const auto regions = tssto::extract_regions(mask);
  REQUIRE(regions.size() == 1);
  GuidanceField w;
  w.rows = m;
  w.cols = n;
  w.wx.assign(m * n, 0.0);
  w.wy.assign(m * n, 0.0);

  auto info = tssto::clone_region(plane.data(), m, n, regions[0], w);
  CHECK(info.converged);
  CHECK(plane[4] == doctest::Approx(10.0));

  // boundary {0, 0, 0, 8}: 4f = 8
  std::vector<double> p2(m * n, 0.0);
  p2[1] = 8.0;
  tssto::clone_region(p2.data(), m, n, regions[0], w);
  CHECK(p2[4] == doctest::Approx(2.0));
}

TEST_CASE("exact quadratic guidance reproduces the quadratic") {
  const int m = 9, n = 9;
  auto g = [](int i, int j) { return 0.02 * i * i - 0.03 * j * j + 0.05 * i * j + 0.1 * i; };
  std::vector<double> truth(m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) truth[i * n + j] = g(i, j);

  LabelMask mask(m, n);
  for (int i = 2; i < 7; ++i)
    for (int j = 2; j < 7; ++j) mask.at(i, j) = Label::Cloud;
  const auto regions = tssto::extract_regions(mask);
  REQUIRE(regions.size() == 1);

  const GuidanceField w = tssto::guidance_field(truth.data(), m, n);
  std::vector<double> plane = truth;
  for (auto [i, j] : regions[0].pixels) plane[i * n + j] = 0.0;  // destroy interior

  const auto info = tssto::clone_region(plane.data(), m, n, regions[0], w);
  CHECK(info.converged);
  for (auto [i, j] : regions[0].pixels)
    CHECK(std::abs(plane[i * n + j] - truth[i * n + j]) < 1e-5);
}

TEST_CASE("zero-guidance fill obeys the maximum principle") {
  const int m = 12, n = 12;
  tssto::BandTensor noise = fix::rand_tensor(m, n, 1, 1300, 0.0, 1.0);
  std::vector<double> plane(noise.data(), noise.data() + m * n);
  LabelMask mask(m, n);
  for (int i = 3; i < 9; ++i)
    for (int j = 4; j < 10; ++j) mask.at(i, j) = Label::Cloud;
  const auto regions = tssto::extract_regions(mask);
  REQUIRE(regions.size() == 1);

  double lo = 1e300, hi = -1e300;
  for (auto [i, j] : regions[0].boundary) {
    lo = std::min(lo, plane[i * n + j]);
    hi = std::max(hi, plane[i * n + j]);
  }
  GuidanceField w;
  w.rows = m;
  w.cols = n;
  w.wx.assign(m * n, 0.0);
  w.wy.assign(m * n, 0.0);
  const auto info = tssto::clone_region(plane.data(), m, n, regions[0], w);
  CHECK(info.converged);
  const double slack = 1e-9;
  for (auto [i, j] : regions[0].pixels) {
    CHECK(plane[i * n + j] >= lo - slack);
    CHECK(plane[i * n + j] <= hi + slack);
  }
}

TEST_CASE("relaxation agrees with the dense direct solve") {
  const int m = 14, n = 14;
  const tssto::BandTensor base = fix::rand_tensor(m, n, 1, 1400, 0.0, 1.0);
  const tssto::BandTensor ref = fix::rand_tensor(m, n, 1, 1401, 0.0, 1.0);
  const GuidanceField w = tssto::guidance_field(ref.data(), m, n);

  LabelMask mask(m, n);
  for (int i = 2; i < 11; ++i)
    for (int j = 3; j < 12; ++j)
      if ((i + 2 * j) % 3 != 0) mask.at(i, j) = Label::Cloud;  // ragged region(s)
  const auto regions = tssto::extract_regions(mask);
  REQUIRE(!regions.empty());

  for (const Region& r : regions) {
    if (r.pixels.size() > 100) continue;
    std::vector<double> dense_plane(base.data(), base.data() + m * n);
    std::vector<double> gs_plane = dense_plane;

    PoissonConfig dense_cfg;
    dense_cfg.dense_limit = 256;  // force direct
    const auto di = tssto::clone_region(dense_plane.data(), m, n, r, w, dense_cfg);
    CHECK(di.dense);

    PoissonConfig gs_cfg;
    gs_cfg.dense_limit = 0;  // force relaxation
    gs_cfg.tol = 1e-9;
    const auto gi = tssto::clone_region(gs_plane.data(), m, n, r, w, gs_cfg);
    CHECK_FALSE(gi.dense);
    CHECK(gi.converged);

    for (auto [i, j] : r.pixels)
      CHECK(std::abs(dense_plane[i * n + j] - gs_plane[i * n + j]) < 1e-6);
  }
}

TEST_CASE("fully enclosed-by-cloud frame is skipped, values kept") {
  const int m = 4, n = 4;
  std::vector<double> plane(m * n, 0.25);
  LabelMask mask(m, n);
  for (Label& l : mask.labels) l = Label::Cloud;  // no Clear anywhere
  const auto regions = tssto::extract_regions(mask);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].boundary.empty());
  GuidanceField w;
  w.rows = m;
  w.cols = n;
  w.wx.assign(m * n, 0.1);
  w.wy.assign(m * n, 0.1);
  const auto info = tssto::clone_region(plane.data(), m, n, regions[0], w);
  CHECK(info.skipped);
  for (double v : plane) CHECK(v == 0.25);
}

TEST_CASE("detail pass leaves clear pixels untouched and fills regions") {
  tssto::ImageStack stack = fix::make_scene(16, 16, 2, 3);
  std::vector<LabelMask> masks = fix::clear_masks(16, 16, 3);
  for (int i = 5; i < 11; ++i)
    for (int j = 5; j < 11; ++j) masks[1].at(i, j) = Label::Cloud;

  // smear the region in frame 1 so there is something to fix
  tssto::ImageStack tos = stack;
  for (auto& band : tos.bands)
    for (int i = 5; i < 11; ++i)
      for (int j = 5; j < 11; ++j) band.at(i, j, 1) = 0.5;

  std::vector<std::vector<tssto::ReferenceChoice>> refs(3);
  const auto regions = tssto::extract_regions(masks[1]);
  REQUIRE(regions.size() == 1);
  refs[1].push_back({0, tssto::ReferenceKind::Full, 1.0});

  tssto::ReconstructionLog log;
  const tssto::ImageStack out = tssto::reconstruct_details(tos, masks, refs, {}, &log);
  CHECK(log.regions_total == 1);
  CHECK(log.regions_cloned == 1);
  CHECK(log.regions_skipped_no_reference == 0);

  for (std::size_t b = 0; b < out.bands.size(); ++b)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
          const bool inside = k == 1 && i >= 5 && i < 11 && j >= 5 && j < 11;
          if (!inside)
            CHECK(out.bands[b].at(i, j, k) == tos.bands[b].at(i, j, k));
          else
            CHECK(out.bands[b].at(i, j, k) != 0.5);
        }

  // texture restored: figure definition close to the reference frame's
  for (std::size_t b = 0; b < out.bands.size(); ++b) {
    std::vector<double> rec(36), want(36);
    int p = 0;
    for (int i = 5; i < 11; ++i)
      for (int j = 5; j < 11; ++j, ++p) {
        rec[p] = out.bands[b].at(i, j, 1);
        want[p] = stack.bands[b].at(i, j, 0);
      }
    const double fd_rec = oracle::fd_naive(rec.data(), 6, 6);
    const double fd_want = oracle::fd_naive(want.data(), 6, 6);
    CHECK(std::abs(fd_rec - fd_want) <= 0.01 * std::max(fd_want, 1e-12));
  }
}

TEST_CASE("empty masks run through the detail pass bit-exact") {
  const tssto::ImageStack stack = fix::make_scene(8, 8, 2, 2);
  const std::vector<std::vector<tssto::ReferenceChoice>> refs(2);
  tssto::ReconstructionLog log;
  const auto out = tssto::reconstruct_details(stack, fix::clear_masks(8, 8, 2), refs, {}, &log);
  CHECK(log.regions_total == 0);
  for (std::size_t b = 0; b < out.bands.size(); ++b)
    for (std::size_t p = 0; p < out.bands[b].size(); ++p)
      CHECK(out.bands[b].data()[p] == stack.bands[b].data()[p]);
}

TEST_CASE("disjoint regions solve independently") {
  const int m = 12, n = 12;
  tssto::ImageStack stack = fix::make_scene(m, n, 1, 2);
  std::vector<LabelMask> masks = fix::clear_masks(m, n, 2);
  for (int i = 1; i < 4; ++i)
    for (int j = 1; j < 4; ++j) masks[0].at(i, j) = Label::Cloud;
  for (int i = 7; i < 10; ++i)
    for (int j = 7; j < 10; ++j) masks[0].at(i, j) = Label::Shadow;
  const auto regions = tssto::extract_regions(masks[0]);
  REQUIRE(regions.size() == 2);

  std::vector<std::vector<tssto::ReferenceChoice>> both(2), first_only(2), second_only(2);
  both[0] = {{1, tssto::ReferenceKind::Full, 1.0}, {1, tssto::ReferenceKind::Full, 1.0}};
  first_only[0] = {{1, tssto::ReferenceKind::Full, 1.0}, {-1, tssto::ReferenceKind::None, 0.0}};
  second_only[0] = {{-1, tssto::ReferenceKind::None, 0.0}, {1, tssto::ReferenceKind::Full, 1.0}};

  const auto out_both = tssto::reconstruct_details(stack, masks, both);
  const auto out_first = tssto::reconstruct_details(stack, masks, first_only);
  const auto out_second = tssto::reconstruct_details(stack, masks, second_only);

  for (auto [i, j] : regions[0].pixels)
    CHECK(out_both.bands[0].at(i, j, 0) == out_first.bands[0].at(i, j, 0));
  for (auto [i, j] : regions[1].pixels)
    CHECK(out_both.bands[0].at(i, j, 0) == out_second.bands[0].at(i, j, 0));
}
