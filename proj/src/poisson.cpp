#include "tssto/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tssto/errors.hpp"

namespace tssto {

std::vector<Region> extract_regions(const LabelMask& mask) {
  const int m = mask.rows, n = mask.cols;
  std::vector<int> owner(mask.size(), -1);
  std::vector<Region> regions;

  for (int start = 0; start < m * n; ++start) {
    if (mask.labels[start] == Label::Clear || owner[start] >= 0) continue;
    const int id = static_cast<int>(regions.size());
    Region reg;
    reg.frame = mask.frame_index;
    std::vector<int> queue{start};
    owner[start] = id;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int p = queue[head];
      const int i = p / n, j = p % n;
      reg.pixels.emplace_back(i, j);
      const int nbr[4] = {i > 0 ? p - n : -1, i < m - 1 ? p + n : -1, j > 0 ? p - 1 : -1,
                          j < n - 1 ? p + 1 : -1};
      bool clear_neighbor = false;
      for (int q : nbr) {
        if (q < 0) continue;
        if (mask.labels[q] == Label::Clear) {
          clear_neighbor = true;
          reg.boundary.emplace_back(q / n, q % n);
        } else if (owner[q] < 0) {
          owner[q] = id;
          queue.push_back(q);
        }
      }
      const bool at_edge = i == 0 || i == m - 1 || j == 0 || j == n - 1;
      if (at_edge && !clear_neighbor) reg.open_boundary.emplace_back(i, j);
    }
    std::sort(reg.boundary.begin(), reg.boundary.end());
    reg.boundary.erase(std::unique(reg.boundary.begin(), reg.boundary.end()), reg.boundary.end());
    regions.push_back(std::move(reg));
  }
  return regions;
}

GuidanceField guidance_field(const double* plane, int rows, int cols) {
  GuidanceField w;
  w.rows = rows;
  w.cols = cols;
  w.wx.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  w.wy.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * cols + j;
      if (j + 1 < cols) w.wx[p] = plane[p + 1] - plane[p];
      if (i + 1 < rows) w.wy[p] = plane[p + cols] - plane[p];
    }
  return w;
}

namespace {

// Row-reduced Gaussian elimination with partial pivoting; a is n x n row-major.
void dense_solve(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double d = a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / d;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
}

struct RegionSystem {
  int n_px = 0;
  std::vector<double> diag, rhs;
  std::vector<int> nbr_start;  // CSR over in-region neighbor equation indices
  std::vector<int> nbr_idx;
  std::vector<std::uint8_t> parity;  // (i+j) & 1, for red-black sweeps
  std::vector<std::size_t> plane_at;
};

// Assemble |N_p| f(p) - sum_{q in region} f(q) = sum_{boundary} f*(q) + guidance
// edge terms. The guidance contribution of edge (p,q) is the component of W
// along q->p: -wx(p) toward the right neighbor, +wx(p left) toward the left,
// same pattern vertically.
RegionSystem build_system(const double* plane, int rows, int cols, const Region& region,
                          const GuidanceField& w) {
  RegionSystem sys;
  sys.n_px = static_cast<int>(region.pixels.size());
  std::vector<int> eq_of(static_cast<std::size_t>(rows) * cols, -1);
  for (int e = 0; e < sys.n_px; ++e) {
    const auto& [i, j] = region.pixels[e];
    eq_of[static_cast<std::size_t>(i) * cols + j] = e;
  }
  sys.diag.resize(sys.n_px);
  sys.rhs.resize(sys.n_px);
  sys.parity.resize(sys.n_px);
  sys.plane_at.resize(sys.n_px);
  sys.nbr_start.assign(sys.n_px + 1, 0);

  struct Side {
    int di, dj;
  };
  constexpr Side sides[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};

  for (int e = 0; e < sys.n_px; ++e) {
    const auto& [i, j] = region.pixels[e];
    const std::size_t p = static_cast<std::size_t>(i) * cols + j;
    sys.plane_at[e] = p;
    sys.parity[e] = static_cast<std::uint8_t>((i + j) & 1);
    double b = 0.0;
    int degree = 0;
    for (const Side& s : sides) {
      const int qi = i + s.di, qj = j + s.dj;
      if (qi < 0 || qi >= rows || qj < 0 || qj >= cols) continue;  // zero-flux side
      ++degree;
      const std::size_t q = static_cast<std::size_t>(qi) * cols + qj;
      if (s.dj == 1) b -= w.wx[p];
      else if (s.dj == -1) b += w.wx[q];
      else if (s.di == 1) b -= w.wy[p];
      else b += w.wy[q];
      if (eq_of[q] >= 0) {
        sys.nbr_idx.push_back(eq_of[q]);
        ++sys.nbr_start[e + 1];
      } else {
        b += plane[q];  // fixed boundary value
      }
    }
    sys.diag[e] = degree;
    sys.rhs[e] = b;
  }
  for (int e = 0; e < sys.n_px; ++e) sys.nbr_start[e + 1] += sys.nbr_start[e];
  return sys;
}

double residual_inf(const RegionSystem& sys, const std::vector<double>& f) {
  double r = 0.0;
  for (int e = 0; e < sys.n_px; ++e) {
    double s = sys.diag[e] * f[e] - sys.rhs[e];
    for (int c = sys.nbr_start[e]; c < sys.nbr_start[e + 1]; ++c) s -= f[sys.nbr_idx[c]];
    r = std::max(r, std::abs(s));
  }
  return r;
}

}  // namespace

CloneInfo clone_region(double* plane, int rows, int cols, const Region& region,
                       const GuidanceField& w, const PoissonConfig& cfg) {
  CloneInfo info;
  if (region.pixels.empty()) {
    info.converged = true;
    return info;
  }
  if (w.rows != rows || w.cols != cols) throw InputError("clone_region: guidance dims mismatch");
  if (region.boundary.empty()) {
    info.skipped = true;  // every row sums to zero: no boundary anchors the solution
    return info;
  }

  RegionSystem sys = build_system(plane, rows, cols, region, w);
  std::vector<double> f(sys.n_px);
  for (int e = 0; e < sys.n_px; ++e) f[e] = plane[sys.plane_at[e]];

  if (sys.n_px <= cfg.dense_limit) {
    std::vector<double> a(static_cast<std::size_t>(sys.n_px) * sys.n_px, 0.0);
    for (int e = 0; e < sys.n_px; ++e) {
      a[static_cast<std::size_t>(e) * sys.n_px + e] = sys.diag[e];
      for (int c = sys.nbr_start[e]; c < sys.nbr_start[e + 1]; ++c)
        a[static_cast<std::size_t>(e) * sys.n_px + sys.nbr_idx[c]] = -1.0;
    }
    f = sys.rhs;
    dense_solve(a, f, sys.n_px);
    info.dense = true;
    info.residual_inf = residual_inf(sys, f);
    info.converged = true;
  } else {
    const long long budget =
        std::min<long long>(static_cast<long long>(cfg.max_sweeps_per_px) * sys.n_px, cfg.sweep_cap);
    const int max_sweeps = static_cast<int>(std::max<long long>(budget, 1));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      for (int color = 0; color < 2; ++color)
        for (int e = 0; e < sys.n_px; ++e) {
          if (sys.parity[e] != color) continue;
          double s = sys.rhs[e];
          for (int c = sys.nbr_start[e]; c < sys.nbr_start[e + 1]; ++c) s += f[sys.nbr_idx[c]];
          f[e] = s / sys.diag[e];
        }
      info.sweeps = sweep + 1;
      info.residual_inf = residual_inf(sys, f);
      if (info.residual_inf < cfg.tol) {
        info.converged = true;
        break;
      }
    }
  }

  for (int e = 0; e < sys.n_px; ++e) plane[sys.plane_at[e]] = f[e];
  return info;
}

ImageStack reconstruct_details(const ImageStack& tos, const std::vector<LabelMask>& masks,
                               const std::vector<std::vector<ReferenceChoice>>& refs,
                               const PoissonConfig& cfg, ReconstructionLog* log) {
  tos.validate();
  const int m = tos.rows(), n = tos.cols(), t = tos.frame_count();
  if (static_cast<int>(masks.size()) != t)
    throw InputError("reconstruct_details: need one mask per frame");
  if (static_cast<int>(refs.size()) != t)
    throw InputError("reconstruct_details: need one reference list per frame");

  ImageStack out = tos;
  ReconstructionLog local;
  for (int k = 0; k < t; ++k) {
    const std::vector<Region> regions = extract_regions(masks[k]);
    if (refs[k].size() != regions.size())
      throw InputError("reconstruct_details: reference count does not match regions");
    for (std::size_t r = 0; r < regions.size(); ++r) {
      ++local.regions_total;
      const ReferenceChoice& choice = refs[k][r];
      if (choice.kind == ReferenceKind::None || choice.frame < 0) {
        ++local.regions_skipped_no_reference;
        continue;
      }
      bool all_converged = true;
      for (int b = 0; b < tos.band_count(); ++b) {
        const GuidanceField w = guidance_field(tos.bands[b].frame_data(choice.frame), m, n);
        const CloneInfo ci = clone_region(out.bands[b].frame_data(k), m, n, regions[r], w, cfg);
        all_converged &= ci.converged;
      }
      ++local.regions_cloned;
      if (!all_converged) ++local.regions_not_converged;
    }
  }
  if (log) *log = local;
  return out;
}

}  // namespace tssto
