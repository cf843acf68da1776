#pragma once

// Shared desk-scale fixtures: a piecewise-constant multi-band scene with mild
// temporal drift, plus small random-tensor helpers.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <vector>

#include "tssto/band_tensor.hpp"
#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"
#include "tssto/simulate.hpp"

namespace fix {

inline tssto::BandTensor rand_tensor(int m, int n, int t, std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
  tssto::BandTensor x(m, n, t);
  tssto::SplitMix64 rng(seed);
  for (std::size_t p = 0; p < x.size(); ++p) x.data()[p] = rng.uniform(lo, hi);
  return x;
}

// Blocky land cover: a 4x4 grid of patches with per-band reflectance in
// [0.15, 0.7], scaled per frame by 1 + drift*sin(2*pi*k/t). Values stay well
// below typical cloud brightness.
inline tssto::ImageStack make_scene(int m, int n, int bands, int frames, double drift = 0.02,
                                    std::uint64_t seed = 7) {
  tssto::SplitMix64 rng(seed);
  constexpr int kGrid = 4;
  std::vector<std::vector<double>> refl(bands, std::vector<double>(kGrid * kGrid));
  for (auto& band : refl)
    for (double& v : band) v = rng.uniform(0.15, 0.7);

  tssto::ImageStack s;
  s.peak = 255.0;
  s.format = tssto::PixelFormat::F32LE;
  for (int b = 0; b < bands; ++b) {
    tssto::BandTensor bt(m, n, frames);
    for (int k = 0; k < frames; ++k) {
      const double factor =
          1.0 + drift * std::sin(2.0 * std::numbers::pi * k / static_cast<double>(frames));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const int cell = (i * kGrid / m) * kGrid + (j * kGrid / n);
          bt.at(i, j, k) = refl[b][cell] * factor;
        }
    }
    s.bands.push_back(std::move(bt));
  }
  for (int k = 0; k < frames; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "f%03d", k);
    s.frames.push_back({id, std::nullopt, std::nullopt});
  }
  return s;
}

inline std::vector<tssto::LabelMask> clear_masks(int m, int n, int t) {
  std::vector<tssto::LabelMask> masks;
  for (int k = 0; k < t; ++k) masks.emplace_back(m, n, k);
  return masks;
}

}  // namespace fix
