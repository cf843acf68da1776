#pragma once

#include <utility>
#include <vector>

#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"

namespace tssto {

// Per-frame substitution: Clear pixels come from the original stack bit-exact,
// everything else from the decomposed clean element.
ImageStack substitute_clean(const ImageStack& original,
                            const std::vector<BandTensor>& preliminary_b,
                            const std::vector<LabelMask>& masks);

enum class ReferenceKind {
  Full,     // reference frame Clear on all of the region
  Partial,  // best available frame, but not Clear everywhere on the region
  None      // no frame has any Clear pixel on the region
};

struct ReferenceChoice {
  int frame = -1;
  ReferenceKind kind = ReferenceKind::None;
  double clear_fraction = 0.0;  // of the region, in the chosen frame
};

// Pick the reference frame for one recovery region of target_frame: the
// temporally closest frame that is Clear on every region pixel. Distance is
// frame-index difference, or seconds when epoch_seconds covers every frame;
// ties go to the earlier frame. Without a fully clean candidate, falls back
// to the frame with the largest Clear coverage of the region (Partial), or
// None when no frame has any.
ReferenceChoice select_reference(const std::vector<LabelMask>& masks, int target_frame,
                                 const std::vector<std::pair<int, int>>& region_pixels,
                                 const std::vector<std::optional<std::int64_t>>& frame_times = {});

}  // namespace tssto
