#pragma once

#include <complex>
#include <vector>

#include "tssto/band_tensor.hpp"

namespace tssto {

// Eigenvalues of mu*(I + Gx'Gx + Gy'Gy + Gz'Gz) under the 3-D DFT basis,
// laid out like a BandTensor:
//   sym(i,j,k) = mu * (1 + (2 - 2cos(2*pi*j/n)) + (2 - 2cos(2*pi*i/m))
//                        + (2 - 2cos(2*pi*k/t)))
// Every entry is >= mu > 0, so the operator is always invertible.
BandTensor spectral_symbol(int rows, int cols, int frames, double mu);

// One-axis part of the symbol, 2 - 2cos(2*pi*f/len), on the same layout.
// Used by the diagonalization checks.
BandTensor axis_symbol(int rows, int cols, int frames, Axis axis);

// Applies (mu*(I + Gx'Gx + Gy'Gy + Gz'Gz))^{-1} by pointwise Fourier
// division. Owns FFTW plans and work buffers for one tensor shape; one
// instance serves one solve at a time.
class SpectralSolver {
 public:
  SpectralSolver(int rows, int cols, int frames, double mu);
  ~SpectralSolver();
  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  void solve(const BandTensor& rhs, BandTensor& out);

  int rows() const { return m_; }
  int cols() const { return n_; }
  int frames() const { return t_; }
  double mu() const { return mu_; }

 private:
  int m_, n_, t_;
  double mu_;
  double* real_ = nullptr;
  void* freq_ = nullptr;  // fftw_complex buffer
  std::vector<double> sym_;  // half-spectrum symbol scaled by the FFT norm
  void* fwd_ = nullptr;  // fftw_plan
  void* bwd_ = nullptr;
};

// Half-spectrum 3-D DFT (real-to-complex) of a tensor, frames x rows x
// (cols/2+1) complex values. Diagnostic/test helper.
std::vector<std::complex<double>> dft3_half(const BandTensor& t);

}  // namespace tssto
