#include "tssto/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>

#include "tssto/errors.hpp"

namespace tssto {

void ThresholdConfig::validate() const {
  if (!(tau_shadow < tau_cloud)) throw InputError("tau_shadow must be below tau_cloud");
  if (min_region_px < 0) throw InputError("min_region_px must be nonnegative");
  if (dilation_radius_px < 0) throw InputError("dilation_radius_px must be nonnegative");
  if (auto_thresholds && !(auto_percentile > 0.0 && auto_percentile < 1.0))
    throw InputError("auto_percentile must lie in (0,1)");
}

std::pair<double, double> auto_threshold_values(const std::vector<BandTensor>& c_bands,
                                                double percentile, double fallback_cloud,
                                                double fallback_shadow) {
  std::vector<double> pos, neg;
  for (const BandTensor& band : c_bands) {
    const double* v = band.data();
    for (std::size_t p = 0; p < band.size(); ++p) {
      if (v[p] > 0.0) pos.push_back(v[p]);
      else if (v[p] < 0.0) neg.push_back(-v[p]);
    }
  }
  auto nearest_rank = [percentile](std::vector<double>& vals) {
    std::sort(vals.begin(), vals.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(vals.size())));
    return vals[std::min(vals.size() - 1, rank == 0 ? 0 : rank - 1)];
  };
  const double tc = pos.empty() ? fallback_cloud : nearest_rank(pos);
  const double ts = neg.empty() ? fallback_shadow : -nearest_rank(neg);
  return {tc, ts};
}

namespace {

// 4-connected flood fill collecting one component; returns its pixel indices.
void collect_component(const std::vector<std::uint8_t>& bin, int m, int n, int start,
                       std::vector<std::uint8_t>& seen, std::vector<int>& out) {
  out.clear();
  std::vector<int> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const int p = stack.back();
    stack.pop_back();
    out.push_back(p);
    const int i = p / n, j = p % n;
    const int nbr[4] = {i > 0 ? p - n : -1, i < m - 1 ? p + n : -1, j > 0 ? p - 1 : -1,
                        j < n - 1 ? p + 1 : -1};
    for (int q : nbr)
      if (q >= 0 && bin[q] && !seen[q]) {
        seen[q] = 1;
        stack.push_back(q);
      }
  }
}

void remove_small_components(std::vector<std::uint8_t>& bin, int m, int n, int min_px) {
  if (min_px <= 1) return;
  std::vector<std::uint8_t> seen(bin.size(), 0);
  std::vector<int> comp;
  for (int p = 0; p < m * n; ++p) {
    if (!bin[p] || seen[p]) continue;
    collect_component(bin, m, n, p, seen, comp);
    if (static_cast<int>(comp.size()) < min_px)
      for (int q : comp) bin[q] = 0;
  }
}

// Multi-source BFS out to city-block distance `radius`.
void dilate(std::vector<std::uint8_t>& bin, int m, int n, int radius) {
  if (radius <= 0) return;
  std::vector<int> dist(bin.size(), -1);
  std::queue<int> q;
  for (int p = 0; p < m * n; ++p)
    if (bin[p]) {
      dist[p] = 0;
      q.push(p);
    }
  while (!q.empty()) {
    const int p = q.front();
    q.pop();
    if (dist[p] == radius) continue;
    const int i = p / n, j = p % n;
    const int nbr[4] = {i > 0 ? p - n : -1, i < m - 1 ? p + n : -1, j > 0 ? p - 1 : -1,
                        j < n - 1 ? p + 1 : -1};
    for (int w : nbr)
      if (w >= 0 && dist[w] < 0) {
        dist[w] = dist[p] + 1;
        bin[w] = 1;
        q.push(w);
      }
  }
}

}  // namespace

void cleanup_mask(LabelMask& mask, int min_region_px, int dilation_radius_px) {
  const int m = mask.rows, n = mask.cols;
  std::vector<std::uint8_t> cloud(mask.size()), shadow(mask.size());
  for (std::size_t p = 0; p < mask.size(); ++p) {
    cloud[p] = mask.labels[p] == Label::Cloud;
    shadow[p] = mask.labels[p] == Label::Shadow;
  }
  remove_small_components(cloud, m, n, min_region_px);
  remove_small_components(shadow, m, n, min_region_px);
  dilate(cloud, m, n, dilation_radius_px);
  dilate(shadow, m, n, dilation_radius_px);
  for (std::size_t p = 0; p < mask.size(); ++p)
    mask.labels[p] = cloud[p] ? Label::Cloud : (shadow[p] ? Label::Shadow : Label::Clear);
}

std::vector<LabelMask> build_masks(const std::vector<BandTensor>& c_bands,
                                   const ThresholdConfig& cfg) {
  cfg.validate();
  if (c_bands.empty()) throw InputError("build_masks: no bands given");
  for (const BandTensor& b : c_bands)
    if (!b.same_dims(c_bands.front())) throw InputError("build_masks: band dims disagree");

  double tc = cfg.tau_cloud, ts = cfg.tau_shadow;
  if (cfg.auto_thresholds)
    std::tie(tc, ts) = auto_threshold_values(c_bands, cfg.auto_percentile, tc, ts);

  const int m = c_bands.front().rows(), n = c_bands.front().cols();
  const int t = c_bands.front().frames();
  const std::size_t nb = c_bands.size();

  std::vector<LabelMask> masks;
  masks.reserve(t);
  for (int k = 0; k < t; ++k) {
    LabelMask mask(m, n, k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        bool is_cloud = false, is_shadow = false;
        if (cfg.fusion == BandFusion::Any) {
          for (std::size_t b = 0; b < nb; ++b) {
            const double v = c_bands[b].at(i, j, k);
            is_cloud |= v > tc;
            is_shadow |= v < ts;
          }
          if (is_cloud) is_shadow = false;
        } else {
          double sum = 0.0;
          for (std::size_t b = 0; b < nb; ++b) sum += c_bands[b].at(i, j, k);
          const double mean = sum / static_cast<double>(nb);
          is_cloud = mean > tc;
          is_shadow = !is_cloud && mean < ts;
        }
        mask.at(i, j) = is_cloud ? Label::Cloud : (is_shadow ? Label::Shadow : Label::Clear);
      }
    cleanup_mask(mask, cfg.min_region_px, cfg.dilation_radius_px);
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::pair<double, double> coverage(const LabelMask& mask) {
  if (mask.labels.empty()) throw InputError("coverage: empty mask");
  std::size_t nc = 0, ns = 0;
  for (Label l : mask.labels) {
    nc += l == Label::Cloud;
    ns += l == Label::Shadow;
  }
  const double total = static_cast<double>(mask.size());
  return {static_cast<double>(nc) / total, static_cast<double>(ns) / total};
}

}  // namespace tssto
