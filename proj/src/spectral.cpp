#include "tssto/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "tssto/errors.hpp"
#include "tssto/kernels.hpp"

namespace tssto {

namespace {

// FFTW plan creation/destruction is not thread safe; execution of
// array-bound plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double cos_term(int f, int len) {
  return 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * f / len);
}

}  // namespace

BandTensor spectral_symbol(int rows, int cols, int frames, double mu) {
  if (mu <= 0.0) throw InputError("spectral_symbol: mu must be positive");
  BandTensor sym(rows, cols, frames);
  for (int k = 0; k < frames; ++k) {
    const double cz = cos_term(k, frames);
    for (int i = 0; i < rows; ++i) {
      const double cy = cos_term(i, rows);
      for (int j = 0; j < cols; ++j) {
        sym.at(i, j, k) = mu * (1.0 + cos_term(j, cols) + cy + cz);
      }
    }
  }
  return sym;
}

BandTensor axis_symbol(int rows, int cols, int frames, Axis axis) {
  BandTensor sym(rows, cols, frames);
  for (int k = 0; k < frames; ++k) {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        int f = 0, len = 1;
        switch (axis) {
          case Axis::X: f = j; len = cols; break;
          case Axis::Y: f = i; len = rows; break;
          case Axis::Z: f = k; len = frames; break;
        }
        sym.at(i, j, k) = cos_term(f, len);
      }
    }
  }
  return sym;
}

SpectralSolver::SpectralSolver(int rows, int cols, int frames, double mu)
    : m_(rows), n_(cols), t_(frames), mu_(mu) {
  if (mu <= 0.0) throw InputError("SpectralSolver: mu must be positive");
  if (rows < 1 || cols < 1 || frames < 1) throw InputError("SpectralSolver: dims must be >= 1");
  const std::size_t nreal = static_cast<std::size_t>(t_) * m_ * n_;
  const int nc = n_ / 2 + 1;
  const std::size_t nfreq = static_cast<std::size_t>(t_) * m_ * nc;

  real_ = fftw_alloc_real(nreal);
  fftw_complex* freq = fftw_alloc_complex(nfreq);
  freq_ = freq;
  if (!real_ || !freq_) throw std::bad_alloc();

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps planning deterministic run to run.
    fwd_ = fftw_plan_dft_r2c_3d(t_, m_, n_, real_, freq, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_3d(t_, m_, n_, freq, real_, FFTW_ESTIMATE);
  }
  if (!fwd_ || !bwd_) throw std::runtime_error("SpectralSolver: FFTW planning failed");

  // Fold the inverse-FFT normalization into the symbol.
  const double norm = static_cast<double>(nreal);
  sym_.resize(nfreq);
  std::size_t idx = 0;
  for (int k = 0; k < t_; ++k) {
    const double cz = cos_term(k, t_);
    for (int i = 0; i < m_; ++i) {
      const double cy = cos_term(i, m_);
      for (int j = 0; j < nc; ++j) {
        sym_[idx++] = mu_ * (1.0 + cos_term(j, n_) + cy + cz) * norm;
      }
    }
  }
}

SpectralSolver::~SpectralSolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  if (real_) fftw_free(real_);
  if (freq_) fftw_free(static_cast<fftw_complex*>(freq_));
}

void SpectralSolver::solve(const BandTensor& rhs, BandTensor& out) {
  if (rhs.rows() != m_ || rhs.cols() != n_ || rhs.frames() != t_) {
    throw InputError("SpectralSolver::solve: dims mismatch");
  }
  if (!out.same_dims(rhs)) throw InputError("SpectralSolver::solve: output dims mismatch");
  const std::size_t nreal = static_cast<std::size_t>(t_) * m_ * n_;
  std::memcpy(real_, rhs.data(), nreal * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fwd_));
  kernels::complex_divide_real(reinterpret_cast<double*>(freq_), sym_.data(), sym_.size());
  fftw_execute(static_cast<fftw_plan>(bwd_));
  std::memcpy(out.data(), real_, nreal * sizeof(double));
}

std::vector<std::complex<double>> dft3_half(const BandTensor& t) {
  const int m = t.rows(), n = t.cols(), tt = t.frames();
  const std::size_t nreal = static_cast<std::size_t>(tt) * m * n;
  const std::size_t nfreq = static_cast<std::size_t>(tt) * m * (n / 2 + 1);
  double* real = fftw_alloc_real(nreal);
  fftw_complex* freq = fftw_alloc_complex(nfreq);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_3d(tt, m, n, real, freq, FFTW_ESTIMATE);
  }
  std::memcpy(real, t.data(), nreal * sizeof(double));
  fftw_execute(plan);
  std::vector<std::complex<double>> out(nfreq);
  for (std::size_t i = 0; i < nfreq; ++i) out[i] = {freq[i][0], freq[i][1]};
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(real);
  fftw_free(freq);
  return out;
}

}  // namespace tssto
