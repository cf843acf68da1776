#pragma once

#include <optional>
#include <vector>

#include "tssto/band_tensor.hpp"
#include "tssto/spectral.hpp"

namespace tssto {

// Which fibers of the mode-1 unfolding form a sparsity group. Columns (the
// default) treat one image column of one temporal slice as a group; rows
// treat one unfolding row as a group.
enum class GroupMode { Mode1Cols, Mode1Rows };

struct SolverParams {
  double lambda1 = 0.01;  // horizontal smoothness of the cloud element
  double lambda2 = 0.01;  // vertical smoothness of the cloud element
  double lambda3 = 1.0;   // temporal smoothness of the clean element
  // Group-sparsity weight; unset picks 0.1*sqrt(max(rows, cols)).
  std::optional<double> lambda4;
  double mu = 1.0;   // ADMM penalty
  double rho = 1.0;  // optional multiplicative mu growth per iteration (1 = fixed)
  int max_iters = 200;
  double tol = 1e-5;
  bool enforce_bound = true;  // final projection C <- min(C, D) so B >= 0
  GroupMode group_mode = GroupMode::Mode1Cols;

  double resolve_lambda4(int rows, int cols) const;
  void validate() const;  // throws InputError
};

struct IterationRecord {
  double rel_change;  // ||C_new - C_old||_F / max(||D||_F, eps)
  double res_a;       // ||A - C||_F
  double res_h;       // ||H - Gx C||_F
  double res_v;       // ||V - Gy C||_F
  double res_t;       // ||T - Gz(D - C)||_F
  double mu;
};

struct SolverState {
  BandTensor A, C, H, V, T;
  BandTensor Y1, Y2, Y3, Y4;
  int iter = 0;
  std::vector<IterationRecord> residuals;

  explicit SolverState(int rows, int cols, int frames);
};

struct Decomposition {
  BandTensor B;  // clean element, B = D - C
  BandTensor C;  // cloud-and-shadow element
  bool converged = false;
  int iters_used = 0;
  std::vector<IterationRecord> history;
};

// Group shrinkage step: fold(shrink_groups(unfold(C - Y1/mu), lambda4/mu)).
BandTensor update_a(const BandTensor& c, const BandTensor& y1, double mu, double lambda4,
                    GroupMode mode = GroupMode::Mode1Cols);

// Closed-form least-squares step via pointwise Fourier division. The right
// hand side is mu*A + Y1 + Gx'(mu*H + Y2) + Gy'(mu*V + Y3)
// + Gz'(mu*Gz(D) - mu*T - Y4).
BandTensor update_c(const SolverState& s, const BandTensor& d, double mu, SpectralSolver& fft);

// Elementwise shrinkage steps:
//   H = S_{l1/mu}(Gx C - Y2/mu)
//   V = S_{l2/mu}(Gy C - Y3/mu)
//   T = S_{l3/mu}(Gz(D - C) - Y4/mu)
void update_hvt(const BandTensor& c, const BandTensor& d, const BandTensor& y2,
                const BandTensor& y3, const BandTensor& y4, double mu, double lambda1,
                double lambda2, double lambda3, BandTensor& h, BandTensor& v, BandTensor& t);

// Dual ascent on the four multipliers from the current iterates; returns the
// four constraint residual norms measured before the update.
IterationRecord update_multipliers(SolverState& s, const BandTensor& d, double mu);

// Full ADMM loop. Converged means the relative change of C and all four
// constraint residuals dropped below tol (residuals relative to ||D||_F).
Decomposition solve(const BandTensor& d, const SolverParams& params);

}  // namespace tssto
