#include "tssto/compositor.hpp"

#include <cmath>
#include <cstdlib>

namespace tssto {

ImageStack substitute_clean(const ImageStack& original,
                            const std::vector<BandTensor>& preliminary_b,
                            const std::vector<LabelMask>& masks) {
  original.validate();
  const int m = original.rows(), n = original.cols(), t = original.frame_count();
  if (static_cast<int>(preliminary_b.size()) != original.band_count())
    throw InputError("substitute_clean: band count mismatch");
  for (const BandTensor& b : preliminary_b)
    if (b.rows() != m || b.cols() != n || b.frames() != t)
      throw InputError("substitute_clean: clean element dims mismatch");
  if (static_cast<int>(masks.size()) != t)
    throw InputError("substitute_clean: need one mask per frame");
  for (const LabelMask& mask : masks)
    if (mask.rows != m || mask.cols != n) throw InputError("substitute_clean: mask dims mismatch");

  ImageStack out = original;
  for (int b = 0; b < original.band_count(); ++b)
    for (int k = 0; k < t; ++k) {
      double* dst = out.bands[b].frame_data(k);
      const double* rec = preliminary_b[b].frame_data(k);
      const Label* lab = masks[k].labels.data();
      for (int p = 0; p < m * n; ++p)
        if (lab[p] != Label::Clear) dst[p] = rec[p];
    }
  return out;
}

ReferenceChoice select_reference(const std::vector<LabelMask>& masks, int target_frame,
                                 const std::vector<std::pair<int, int>>& region_pixels,
                                 const std::vector<std::optional<std::int64_t>>& frame_times) {
  if (region_pixels.empty()) throw InputError("select_reference: empty region");
  const int t = static_cast<int>(masks.size());
  if (target_frame < 0 || target_frame >= t) throw InputError("select_reference: bad target frame");

  bool use_times = !frame_times.empty() && static_cast<int>(frame_times.size()) == t;
  if (use_times)
    for (const auto& ts : frame_times) use_times &= ts.has_value();

  auto distance = [&](int frame) {
    if (use_times) return std::llabs(*frame_times[frame] - *frame_times[target_frame]);
    return static_cast<long long>(std::abs(frame - target_frame));
  };

  ReferenceChoice best;
  long long best_dist = 0;
  std::size_t best_clear = 0;
  for (int f = 0; f < t; ++f) {
    if (f == target_frame) continue;
    std::size_t clear = 0;
    for (const auto& [i, j] : region_pixels) clear += masks[f].at(i, j) == Label::Clear;
    const bool full = clear == region_pixels.size();
    const long long dist = distance(f);
    bool take = false;
    if (full) {
      // frames scan in temporal order, so strict < keeps the earlier frame on ties
      take = best.kind != ReferenceKind::Full || dist < best_dist;
    } else if (best.kind != ReferenceKind::Full) {
      take = clear > best_clear;
    }
    if (take) {
      best.frame = f;
      best.kind = full ? ReferenceKind::Full : (clear > 0 ? ReferenceKind::Partial : ReferenceKind::None);
      best.clear_fraction = static_cast<double>(clear) / static_cast<double>(region_pixels.size());
      best_dist = dist;
      best_clear = clear;
    }
  }
  if (best.kind == ReferenceKind::None) best.frame = -1;
  return best;
}

}  // namespace tssto
