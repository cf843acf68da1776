#pragma once

#include <cstdint>
#include <vector>

#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"

namespace tssto {

// Deterministic 64-bit stream (splitmix64); identical seeds give identical
// sequences on every platform, which the simulator's bit-exactness contract
// relies on.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct BlobConfig {
  int num_blobs = 6;
  double sigma_min_frac = 0.05;  // of min(rows, cols)
  double sigma_max_frac = 0.18;
  // Shadow = cloud region displaced by (shadow_di, shadow_dj); (0,0) disables.
  int shadow_di = 0;
  int shadow_dj = 0;
};

// Threshold a seeded sum-of-Gaussian-blobs field at the exact quantile that
// marks round(target_coverage * rows * cols) pixels Cloud.
LabelMask generate_mask(int rows, int cols, double target_coverage, std::uint64_t seed,
                        const BlobConfig& cfg = {});

struct ContaminationConfig {
  double cloud_level = 0.95;   // of peak, on the normalized scale
  double shadow_factor = 0.4;  // multiplicative darkening
  double texture_amp = 0.02;   // uniform +-amp texture on cloud pixels
  std::uint64_t seed = 0;
};

// Paint masks onto a clean stack: Cloud pixels become cloud_level plus
// texture (shared across bands — the overpainting is spectrally flat),
// Shadow pixels are scaled by shadow_factor, Clear pixels pass through
// bit-exact.
ImageStack apply_contamination(const ImageStack& clean, const std::vector<LabelMask>& masks,
                               const ContaminationConfig& cfg = {});

}  // namespace tssto
