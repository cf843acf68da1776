#pragma once

#include <cstddef>

#include "tssto/band_tensor.hpp"

// Data-parallel inner loops of the pipeline. Every kernel exists twice with
// identical semantics: tssto::kernels is the OpenMP-parallel set used by the
// solver, tssto::serial is the plain-loop reference kept for testing and for
// the benchmark target. Outputs are bit-identical between the two (each
// element or group is computed independently in a fixed order).

namespace tssto::kernels {

// Forward difference along `axis` with circular wrap:
// out[p] = in[p+1 mod len] - in[p], other indices fixed.
void grad(const BandTensor& in, Axis axis, BandTensor& out);

// Exact adjoint of grad under the standard inner product:
// out[p] = in[p-1 mod len] - in[p].
void grad_adjoint(const BandTensor& in, Axis axis, BandTensor& out);

// out[i] = sign(x[i]) * max(|x[i]| - omega, 0)
void soft_threshold(const double* x, std::size_t n, double omega, double* out);

// Group shrinkage over the columns of the mode-1 unfolding (one group = the
// fiber over the row index for fixed column/frame). Groups with zero norm
// map to zero.
void group_shrink_cols(const BandTensor& r, double omega, BandTensor& out);

// Group shrinkage over the rows of the mode-1 unfolding (one group = all
// entries sharing a row index).
void group_shrink_rows(const BandTensor& r, double omega, BandTensor& out);

// out[i] = a*x[i] + b*y[i]
void lincomb(double a, const double* x, double b, const double* y, std::size_t n, double* out);

// y[i] += scale * (a[i] - b[i])
void add_scaled_diff(double scale, const double* a, const double* b, std::size_t n, double* y);

// x[i] = min(x[i], bound[i])
void min_with(const double* bound, std::size_t n, double* x);

// Divide an interleaved complex buffer elementwise by a real symbol.
void complex_divide_real(double* interleaved, const double* sym, std::size_t n_complex);

}  // namespace tssto::kernels

namespace tssto::serial {

void grad(const BandTensor& in, Axis axis, BandTensor& out);
void grad_adjoint(const BandTensor& in, Axis axis, BandTensor& out);
void soft_threshold(const double* x, std::size_t n, double omega, double* out);
void group_shrink_cols(const BandTensor& r, double omega, BandTensor& out);
void group_shrink_rows(const BandTensor& r, double omega, BandTensor& out);
void lincomb(double a, const double* x, double b, const double* y, std::size_t n, double* out);
void add_scaled_diff(double scale, const double* a, const double* b, std::size_t n, double* y);
void min_with(const double* bound, std::size_t n, double* x);
void complex_divide_real(double* interleaved, const double* sym, std::size_t n_complex);

}  // namespace tssto::serial

namespace tssto {

// Value-returning convenience wrappers over the parallel kernels.
BandTensor grad(const BandTensor& t, Axis axis);
BandTensor grad_adjoint(const BandTensor& t, Axis axis);
BandTensor soft_threshold(const BandTensor& t, double omega);

// Order-fixed pairwise reductions; results do not depend on the thread count.
double frobenius_norm(const double* x, std::size_t n);
double frobenius_norm(const BandTensor& t);
double frobenius_norm_diff(const BandTensor& a, const BandTensor& b);
double dot(const double* x, const double* y, std::size_t n);
double dot(const BandTensor& a, const BandTensor& b);

}  // namespace tssto
