#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tssto/band_tensor.hpp"
#include "tssto/errors.hpp"

namespace tssto {

enum class PixelFormat { F32LE, U16LE, U8 };

struct FrameInfo {
  std::string id;
  std::optional<std::string> timestamp;       // ISO-8601, as read from the manifest
  std::optional<std::int64_t> epoch_seconds;  // parsed form of timestamp
};

// A multi-band temporal stack. Values live on [0,1]: samples are divided by
// `peak` at ingest and multiplied back on write. Frame order in `frames` is
// the temporal order of every band tensor's Z axis.
struct ImageStack {
  std::vector<BandTensor> bands;        // each rows x cols x frame_count
  std::vector<FrameInfo> frames;        // size frame_count
  std::vector<std::string> band_names;  // empty, or one name per band
  double peak = 1.0;
  PixelFormat format = PixelFormat::F32LE;

  int band_count() const { return static_cast<int>(bands.size()); }
  int rows() const { return bands.empty() ? 0 : bands.front().rows(); }
  int cols() const { return bands.empty() ? 0 : bands.front().cols(); }
  int frame_count() const { return bands.empty() ? 0 : bands.front().frames(); }

  // True when every frame carries a parsed timestamp (then temporal distance
  // is measured in seconds instead of frame indices).
  bool fully_timestamped() const {
    if (frames.empty()) return false;
    for (const FrameInfo& f : frames)
      if (!f.epoch_seconds) return false;
    return true;
  }

  void validate() const {
    if (bands.empty()) throw InputError("image stack has no bands");
    for (const BandTensor& b : bands)
      if (!b.same_dims(bands.front())) throw InputError("image stack band dims disagree");
    if (static_cast<int>(frames.size()) != frame_count())
      throw InputError("frame metadata count does not match tensor depth");
    if (!band_names.empty() && band_names.size() != bands.size())
      throw InputError("band_names count does not match band count");
    if (!(peak > 0)) throw InputError("peak must be positive");
  }
};

}  // namespace tssto
