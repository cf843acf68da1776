#pragma once

#include <utility>
#include <vector>

#include "tssto/compositor.hpp"
#include "tssto/image_stack.hpp"
#include "tssto/mask.hpp"

namespace tssto {

// One recovery area: a 4-connected component of non-Clear pixels, its Clear
// boundary, and the subset of its pixels sitting on the image edge with no
// Clear neighbor (those sides get a zero-flux condition instead of a fixed
// boundary value).
struct Region {
  int frame = -1;
  std::vector<std::pair<int, int>> pixels;         // row-major order of discovery
  std::vector<std::pair<int, int>> boundary;       // sorted, unique
  std::vector<std::pair<int, int>> open_boundary;  // subset of pixels
};

std::vector<Region> extract_regions(const LabelMask& mask);

// Forward-difference gradients of a reference plane, zero on the last
// column/row. wx steps along columns, wy along rows.
struct GuidanceField {
  int rows = 0, cols = 0;
  std::vector<double> wx, wy;
};

GuidanceField guidance_field(const double* plane, int rows, int cols);

struct PoissonConfig {
  double tol = 1e-6;           // infinity-norm residual target
  int max_sweeps_per_px = 10;  // iterative budget: max_sweeps_per_px * |region|
  int sweep_cap = 50000;
  int dense_limit = 256;  // regions this small are solved directly
};

struct CloneInfo {
  bool converged = false;
  bool dense = false;
  bool skipped = false;  // no closed boundary anywhere: system has no anchor
  int sweeps = 0;
  double residual_inf = 0.0;
};

// Solve the gradient-matching system on region.pixels and write the solution
// into `plane` in place; boundary and Clear pixels are never touched. For
// every region pixel, (number of in-image neighbors) * f(p) minus the sum of
// f over in-region neighbors equals the sum of boundary values plus the
// guidance projected onto each incident edge.
CloneInfo clone_region(double* plane, int rows, int cols, const Region& region,
                       const GuidanceField& w, const PoissonConfig& cfg = {});

struct ReconstructionLog {
  int regions_total = 0;
  int regions_cloned = 0;
  int regions_skipped_no_reference = 0;
  int regions_not_converged = 0;
};

// Detail pass over a substituted stack: for each frame's regions (in
// extract_regions order, matching refs[frame]) and each band, build guidance
// from the reference frame's plane and clone into the region. Regions whose
// reference is None keep their substituted values.
ImageStack reconstruct_details(const ImageStack& tos, const std::vector<LabelMask>& masks,
                               const std::vector<std::vector<ReferenceChoice>>& refs,
                               const PoissonConfig& cfg = {}, ReconstructionLog* log = nullptr);

}  // namespace tssto
