#include <cmath>
#include <cstdint>

#include "tssto/errors.hpp"
#include "tssto/kernels.hpp"

// Reference implementations: same loop order as the parallel set, no
// threading. Kept for the equivalence tests and the benchmark target.

namespace tssto::serial {

void grad(const BandTensor& in, Axis axis, BandTensor& out) {
  if (!in.same_dims(out)) throw InputError("grad: dims mismatch");
  const int m = in.rows(), n = in.cols(), t = in.frames();
  const std::int64_t nrows = static_cast<std::int64_t>(t) * m;
  const double* src = in.data();
  double* dst = out.data();
  switch (axis) {
    case Axis::X:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const double* row = src + r * n;
        double* orow = dst + r * n;
        for (int j = 0; j + 1 < n; ++j) orow[j] = row[j + 1] - row[j];
        orow[n - 1] = row[0] - row[n - 1];
      }
      break;
    case Axis::Y:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const std::int64_t k = r / m, i = r % m;
        const std::int64_t rn = k * m + (i + 1) % m;
        const double* row = src + r * n;
        const double* next = src + rn * n;
        double* orow = dst + r * n;
        for (int j = 0; j < n; ++j) orow[j] = next[j] - row[j];
      }
      break;
    case Axis::Z:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const std::int64_t k = r / m, i = r % m;
        const std::int64_t rn = ((k + 1) % t) * m + i;
        const double* row = src + r * n;
        const double* next = src + rn * n;
        double* orow = dst + r * n;
        for (int j = 0; j < n; ++j) orow[j] = next[j] - row[j];
      }
      break;
  }
}

void grad_adjoint(const BandTensor& in, Axis axis, BandTensor& out) {
  if (!in.same_dims(out)) throw InputError("grad_adjoint: dims mismatch");
  const int m = in.rows(), n = in.cols(), t = in.frames();
  const std::int64_t nrows = static_cast<std::int64_t>(t) * m;
  const double* src = in.data();
  double* dst = out.data();
  switch (axis) {
    case Axis::X:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const double* row = src + r * n;
        double* orow = dst + r * n;
        orow[0] = row[n - 1] - row[0];
        for (int j = 1; j < n; ++j) orow[j] = row[j - 1] - row[j];
      }
      break;
    case Axis::Y:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const std::int64_t k = r / m, i = r % m;
        const std::int64_t rp = k * m + (i + m - 1) % m;
        const double* row = src + r * n;
        const double* prev = src + rp * n;
        double* orow = dst + r * n;
        for (int j = 0; j < n; ++j) orow[j] = prev[j] - row[j];
      }
      break;
    case Axis::Z:
      for (std::int64_t r = 0; r < nrows; ++r) {
        const std::int64_t k = r / m, i = r % m;
        const std::int64_t rp = ((k + t - 1) % t) * m + i;
        const double* row = src + r * n;
        const double* prev = src + rp * n;
        double* orow = dst + r * n;
        for (int j = 0; j < n; ++j) orow[j] = prev[j] - row[j];
      }
      break;
  }
}

void soft_threshold(const double* x, std::size_t n, double omega, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    out[i] = v > omega ? v - omega : (v < -omega ? v + omega : 0.0);
  }
}

void group_shrink_cols(const BandTensor& r, double omega, BandTensor& out) {
  if (!r.same_dims(out)) throw InputError("group_shrink_cols: dims mismatch");
  const int m = r.rows(), n = r.cols(), t = r.frames();
  const std::int64_t ngroups = static_cast<std::int64_t>(n) * t;
  const double* src = r.data();
  double* dst = out.data();
  for (std::int64_t g = 0; g < ngroups; ++g) {
    const std::int64_t k = g / n, j = g % n;
    const std::size_t start = static_cast<std::size_t>(k) * m * n + j;
    double sumsq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = src[start + static_cast<std::size_t>(i) * n];
      sumsq += v * v;
    }
    const double norm = std::sqrt(sumsq);
    const double scale = norm > omega ? (norm - omega) / norm : 0.0;
    for (int i = 0; i < m; ++i) {
      const std::size_t idx = start + static_cast<std::size_t>(i) * n;
      dst[idx] = scale * src[idx];
    }
  }
}

void group_shrink_rows(const BandTensor& r, double omega, BandTensor& out) {
  if (!r.same_dims(out)) throw InputError("group_shrink_rows: dims mismatch");
  const int m = r.rows(), n = r.cols(), t = r.frames();
  const double* src = r.data();
  double* dst = out.data();
  for (int i = 0; i < m; ++i) {
    double sumsq = 0.0;
    for (int k = 0; k < t; ++k) {
      const std::size_t base = (static_cast<std::size_t>(k) * m + i) * n;
      for (int j = 0; j < n; ++j) sumsq += src[base + j] * src[base + j];
    }
    const double norm = std::sqrt(sumsq);
    const double scale = norm > omega ? (norm - omega) / norm : 0.0;
    for (int k = 0; k < t; ++k) {
      const std::size_t base = (static_cast<std::size_t>(k) * m + i) * n;
      for (int j = 0; j < n; ++j) dst[base + j] = scale * src[base + j];
    }
  }
}

void lincomb(double a, const double* x, double b, const double* y, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void add_scaled_diff(double scale, const double* a, const double* b, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += scale * (a[i] - b[i]);
}

void min_with(const double* bound, std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] < bound[i] ? x[i] : bound[i];
}

void complex_divide_real(double* interleaved, const double* sym, std::size_t n_complex) {
  for (std::size_t i = 0; i < n_complex; ++i) {
    interleaved[2 * i] /= sym[i];
    interleaved[2 * i + 1] /= sym[i];
  }
}

}  // namespace tssto::serial
