#include "tssto/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tssto/errors.hpp"

namespace tssto {

LabelMask generate_mask(int rows, int cols, double target_coverage, std::uint64_t seed,
                        const BlobConfig& cfg) {
  if (!(target_coverage > 0.0 && target_coverage < 1.0))
    throw InputError("target_coverage must lie in (0,1)");
  if (rows < 1 || cols < 1) throw InputError("mask dims must be positive");
  if (cfg.num_blobs < 1) throw InputError("need at least one blob");

  const std::size_t n_px = static_cast<std::size_t>(rows) * cols;
  const long long k = std::llround(target_coverage * static_cast<double>(n_px));
  if (k < 1 || k >= static_cast<long long>(n_px) ||
      std::abs(static_cast<double>(k) / static_cast<double>(n_px) - target_coverage) > 0.005)
    throw InputError("target coverage unreachable at these dims");

  SplitMix64 rng(seed);
  const double scale = static_cast<double>(std::min(rows, cols));
  std::vector<double> field(n_px, 0.0);
  for (int blob = 0; blob < cfg.num_blobs; ++blob) {
    const double ci = rng.uniform(0.0, rows);
    const double cj = rng.uniform(0.0, cols);
    const double sigma = rng.uniform(cfg.sigma_min_frac, cfg.sigma_max_frac) * scale;
    const double amp = rng.uniform(0.5, 1.0);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        const double di = i - ci, dj = j - cj;
        field[static_cast<std::size_t>(i) * cols + j] += amp * std::exp(-(di * di + dj * dj) * inv);
      }
  }

  // exact-count threshold: the k largest field values become Cloud, ties
  // broken by pixel index so the mask is a pure function of the seed
  std::vector<std::size_t> order(n_px);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [&field](std::size_t a, std::size_t b) {
                     if (field[a] != field[b]) return field[a] > field[b];
                     return a < b;
                   });

  LabelMask mask(rows, cols);
  for (long long r = 0; r < k; ++r) mask.labels[order[static_cast<std::size_t>(r)]] = Label::Cloud;

  if (cfg.shadow_di != 0 || cfg.shadow_dj != 0) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        const int si = i - cfg.shadow_di, sj = j - cfg.shadow_dj;
        if (si < 0 || si >= rows || sj < 0 || sj >= cols) continue;
        if (mask.at(si, sj) == Label::Cloud && mask.at(i, j) == Label::Clear)
          mask.at(i, j) = Label::Shadow;
      }
  }
  return mask;
}

ImageStack apply_contamination(const ImageStack& clean, const std::vector<LabelMask>& masks,
                               const ContaminationConfig& cfg) {
  clean.validate();
  const int m = clean.rows(), n = clean.cols(), t = clean.frame_count();
  if (static_cast<int>(masks.size()) != t)
    throw InputError("apply_contamination: need one mask per frame");
  for (const LabelMask& mask : masks)
    if (mask.rows != m || mask.cols != n)
      throw InputError("apply_contamination: mask dims mismatch");

  ImageStack out = clean;
  for (int k = 0; k < t; ++k) {
    // one texture stream per frame keeps frames independent of each other
    SplitMix64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1));
    const Label* lab = masks[k].labels.data();
    for (int p = 0; p < m * n; ++p) {
      if (lab[p] == Label::Clear) continue;
      if (lab[p] == Label::Cloud) {
        const double v =
            std::clamp(cfg.cloud_level + cfg.texture_amp * rng.uniform(-1.0, 1.0), 0.0, 1.0);
        for (int b = 0; b < clean.band_count(); ++b) out.bands[b].frame_data(k)[p] = v;
      } else {
        for (int b = 0; b < clean.band_count(); ++b) out.bands[b].frame_data(k)[p] *= cfg.shadow_factor;
      }
    }
  }
  return out;
}

}  // namespace tssto
