#include "tssto/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tssto/errors.hpp"
#include "tssto/kernels.hpp"

namespace tssto {

double SolverParams::resolve_lambda4(int rows, int cols) const {
  if (lambda4.has_value()) return *lambda4;
  return 0.1 * std::sqrt(static_cast<double>(std::max(rows, cols)));
}

void SolverParams::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
    throw InputError("smoothness weights must be nonnegative");
  if (lambda4.has_value() && *lambda4 < 0)
    throw InputError("group sparsity weight must be nonnegative");
  if (mu <= 0) throw InputError("penalty mu must be positive");
  if (rho < 1.0) throw InputError("penalty growth rho must be >= 1");
  if (max_iters < 1) throw InputError("max_iters must be >= 1");
  if (!(tol > 0)) throw InputError("tol must be positive");
}

SolverState::SolverState(int rows, int cols, int frames)
    : A(rows, cols, frames),
      C(rows, cols, frames),
      H(rows, cols, frames),
      V(rows, cols, frames),
      T(rows, cols, frames),
      Y1(rows, cols, frames),
      Y2(rows, cols, frames),
      Y3(rows, cols, frames),
      Y4(rows, cols, frames) {}

BandTensor update_a(const BandTensor& c, const BandTensor& y1, double mu, double lambda4,
                    GroupMode mode) {
  // R = C - Y1/mu
  BandTensor r(c.rows(), c.cols(), c.frames());
  kernels::lincomb(1.0, c.data(), -1.0 / mu, y1.data(), c.size(), r.data());
  BandTensor out(c.rows(), c.cols(), c.frames());
  if (mode == GroupMode::Mode1Cols)
    kernels::group_shrink_cols(r, lambda4 / mu, out);
  else
    kernels::group_shrink_rows(r, lambda4 / mu, out);
  return out;
}

BandTensor update_c(const SolverState& s, const BandTensor& d, double mu, SpectralSolver& fft) {
  const int m = d.rows(), n = d.cols(), t = d.frames();
  const std::size_t sz = d.size();

  BandTensor rhs(m, n, t);
  BandTensor tmp(m, n, t);
  BandTensor adj(m, n, t);

  // mu*A + Y1
  kernels::lincomb(mu, s.A.data(), 1.0, s.Y1.data(), sz, rhs.data());

  // + Gx'(mu*H + Y2)
  kernels::lincomb(mu, s.H.data(), 1.0, s.Y2.data(), sz, tmp.data());
  kernels::grad_adjoint(tmp, Axis::X, adj);
  kernels::lincomb(1.0, rhs.data(), 1.0, adj.data(), sz, rhs.data());

  // + Gy'(mu*V + Y3)
  kernels::lincomb(mu, s.V.data(), 1.0, s.Y3.data(), sz, tmp.data());
  kernels::grad_adjoint(tmp, Axis::Y, adj);
  kernels::lincomb(1.0, rhs.data(), 1.0, adj.data(), sz, rhs.data());

  // + Gz'(mu*Gz(D) - mu*T - Y4)
  BandTensor gzd(m, n, t);
  kernels::grad(d, Axis::Z, gzd);
  kernels::lincomb(mu, gzd.data(), -mu, s.T.data(), sz, tmp.data());
  kernels::lincomb(1.0, tmp.data(), -1.0, s.Y4.data(), sz, tmp.data());
  kernels::grad_adjoint(tmp, Axis::Z, adj);
  kernels::lincomb(1.0, rhs.data(), 1.0, adj.data(), sz, rhs.data());

  BandTensor out(m, n, t);
  fft.solve(rhs, out);
  return out;
}

void update_hvt(const BandTensor& c, const BandTensor& d, const BandTensor& y2,
                const BandTensor& y3, const BandTensor& y4, double mu, double lambda1,
                double lambda2, double lambda3, BandTensor& h, BandTensor& v, BandTensor& t) {
  const std::size_t sz = c.size();
  BandTensor g(c.rows(), c.cols(), c.frames());
  BandTensor arg(c.rows(), c.cols(), c.frames());

  kernels::grad(c, Axis::X, g);
  kernels::lincomb(1.0, g.data(), -1.0 / mu, y2.data(), sz, arg.data());
  kernels::soft_threshold(arg.data(), sz, lambda1 / mu, h.data());

  kernels::grad(c, Axis::Y, g);
  kernels::lincomb(1.0, g.data(), -1.0 / mu, y3.data(), sz, arg.data());
  kernels::soft_threshold(arg.data(), sz, lambda2 / mu, v.data());

  BandTensor bmat(c.rows(), c.cols(), c.frames());
  kernels::lincomb(1.0, d.data(), -1.0, c.data(), sz, bmat.data());
  kernels::grad(bmat, Axis::Z, g);
  kernels::lincomb(1.0, g.data(), -1.0 / mu, y4.data(), sz, arg.data());
  kernels::soft_threshold(arg.data(), sz, lambda3 / mu, t.data());
}

IterationRecord update_multipliers(SolverState& s, const BandTensor& d, double mu) {
  const std::size_t sz = d.size();
  BandTensor res(d.rows(), d.cols(), d.frames());
  BandTensor g(d.rows(), d.cols(), d.frames());
  IterationRecord rec{};
  rec.mu = mu;

  // Y1 += mu*(A - C)
  kernels::lincomb(1.0, s.A.data(), -1.0, s.C.data(), sz, res.data());
  rec.res_a = frobenius_norm(res.data(), sz);
  kernels::lincomb(1.0, s.Y1.data(), mu, res.data(), sz, s.Y1.data());

  // Y2 += mu*(H - Gx C)
  kernels::grad(s.C, Axis::X, g);
  kernels::lincomb(1.0, s.H.data(), -1.0, g.data(), sz, res.data());
  rec.res_h = frobenius_norm(res.data(), sz);
  kernels::lincomb(1.0, s.Y2.data(), mu, res.data(), sz, s.Y2.data());

  // Y3 += mu*(V - Gy C)
  kernels::grad(s.C, Axis::Y, g);
  kernels::lincomb(1.0, s.V.data(), -1.0, g.data(), sz, res.data());
  rec.res_v = frobenius_norm(res.data(), sz);
  kernels::lincomb(1.0, s.Y3.data(), mu, res.data(), sz, s.Y3.data());

  // Y4 += mu*(T - Gz(D - C))
  BandTensor bmat(d.rows(), d.cols(), d.frames());
  kernels::lincomb(1.0, d.data(), -1.0, s.C.data(), sz, bmat.data());
  kernels::grad(bmat, Axis::Z, g);
  kernels::lincomb(1.0, s.T.data(), -1.0, g.data(), sz, res.data());
  rec.res_t = frobenius_norm(res.data(), sz);
  kernels::lincomb(1.0, s.Y4.data(), mu, res.data(), sz, s.Y4.data());

  return rec;
}

Decomposition solve(const BandTensor& d, const SolverParams& params) {
  params.validate();
  if (!d.all_finite()) throw InputError("input tensor contains non-finite values");
  if (d.frames() < 2) throw InputError("temporal decomposition needs at least 2 frames");

  const int m = d.rows(), n = d.cols(), t = d.frames();
  const std::size_t sz = d.size();
  const double lambda4 = params.resolve_lambda4(m, n);
  const double d_norm = std::max(frobenius_norm(d.data(), sz), 1e-12);

  SolverState s(m, n, t);
  double mu = params.mu;
  auto fft = std::make_unique<SpectralSolver>(m, n, t, mu);

  Decomposition result{BandTensor(m, n, t), BandTensor(m, n, t), false, 0, {}};
  bool converged = false;
  int iter = 0;

  for (; iter < params.max_iters; ++iter) {
    s.A = update_a(s.C, s.Y1, mu, lambda4, params.group_mode);
    BandTensor c_new = update_c(s, d, mu, *fft);
    const double rel = frobenius_norm_diff(c_new, s.C) / d_norm;
    s.C = std::move(c_new);
    update_hvt(s.C, d, s.Y2, s.Y3, s.Y4, mu, params.lambda1, params.lambda2, params.lambda3, s.H,
               s.V, s.T);
    IterationRecord rec = update_multipliers(s, d, mu);
    rec.rel_change = rel;
    s.residuals.push_back(rec);

    const double res_max = std::max({rec.res_a, rec.res_h, rec.res_v, rec.res_t});
    if (rel < params.tol && res_max <= params.tol * d_norm) {
      converged = true;
      ++iter;
      break;
    }
    if (params.rho > 1.0) {
      mu *= params.rho;
      fft = std::make_unique<SpectralSolver>(m, n, t, mu);
    }
  }

  result.C = s.C;
  if (params.enforce_bound) kernels::min_with(d.data(), sz, result.C.data());
  kernels::lincomb(1.0, d.data(), -1.0, result.C.data(), sz, result.B.data());
  result.converged = converged;
  result.iters_used = iter;
  result.history = std::move(s.residuals);
  return result;
}

}  // namespace tssto
