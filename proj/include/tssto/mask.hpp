#pragma once

#include <utility>
#include <vector>

#include "tssto/band_tensor.hpp"

namespace tssto {

enum class Label : unsigned char { Clear = 0, Shadow = 1, Cloud = 2 };

struct LabelMask {
  int rows = 0;
  int cols = 0;
  int frame_index = 0;
  std::vector<Label> labels;  // row-major

  LabelMask() = default;
  LabelMask(int rows_, int cols_, int frame_index_ = 0)
      : rows(rows_), cols(cols_), frame_index(frame_index_),
        labels(static_cast<std::size_t>(rows_) * cols_, Label::Clear) {}

  Label at(int i, int j) const { return labels[static_cast<std::size_t>(i) * cols + j]; }
  Label& at(int i, int j) { return labels[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t size() const { return labels.size(); }
};

enum class BandFusion { Any, Mean };

struct ThresholdConfig {
  double tau_cloud = 0.15;    // on [0,1]-normalized data
  double tau_shadow = -0.15;
  BandFusion fusion = BandFusion::Any;
  int min_region_px = 8;       // components smaller than this are dropped (0 = keep all)
  int dilation_radius_px = 1;  // city-block dilation after removal (0 = off)
  // When set, tau_cloud/tau_shadow are replaced by the auto_percentile quantile
  // of the positive (resp. negated negative) values of the separated element.
  bool auto_thresholds = false;
  double auto_percentile = 0.99;

  void validate() const;  // throws InputError
};

// Percentile-based thresholds from the separated element's value distribution:
// tau_cloud = percentile of the positive values, tau_shadow = -(percentile of
// the magnitudes of the negative values). Falls back to fallback_cloud /
// fallback_shadow when no positive (negative) values exist.
std::pair<double, double> auto_threshold_values(const std::vector<BandTensor>& c_bands,
                                                double percentile, double fallback_cloud,
                                                double fallback_shadow);

// Threshold the separated cloud-and-shadow element into per-frame label masks.
// Any fusion: Cloud if any band exceeds tau_cloud, Shadow if any band falls
// below tau_shadow and no band exceeds tau_cloud. Mean fusion thresholds the
// band average. Cleanup (small-component removal + dilation) runs per label.
std::vector<LabelMask> build_masks(const std::vector<BandTensor>& c_bands,
                                   const ThresholdConfig& cfg);

// Remove 4-connected components under min_region_px, then dilate survivors by
// dilation_radius_px (city-block ball). Cloud and Shadow are cleaned
// independently; Cloud wins where dilated regions collide.
void cleanup_mask(LabelMask& mask, int min_region_px, int dilation_radius_px);

// (cloud_fraction, shadow_fraction) of the mask's pixels.
std::pair<double, double> coverage(const LabelMask& mask);

}  // namespace tssto
