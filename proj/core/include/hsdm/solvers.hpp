#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hsdm/fixed_point_maps.hpp"
#include "hsdm/linalg.hpp"
#include "hsdm/prox.hpp"

namespace hsdm {

/// Step-size configuration of the hybrid steepest descent iteration.
/// Construction enforces alpha in [0.5, 1) and 0 < lambda < 2(1-alpha)/L.
/// When the smooth loss f is absent, `lipschitz` is a free positive surrogate.
class SolverParams {
 public:
  SolverParams(double alpha, double lambda, double lipschitz);

  /// lambda = fraction * 2(1-alpha)/L, fraction in (0, 1).
  static SolverParams from_fraction(double alpha, double fraction, double lipschitz);

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  double lipschitz() const { return lipschitz_; }
  double lambda_bound() const { return 2.0 * (1.0 - alpha_) / lipschitz_; }

 private:
  double alpha_;
  double lambda_;
  double lipschitz_;
};

/// Iterates x_{n-1}, x_n, x_{n-1/2} plus the quantities of step n-1 that the
/// next step subtracts. For the generic engine buf_t holds T^(alpha)_{n-1}
/// x_{n-1} and buf_grad holds grad f_{n-1}(x_{n-1}); the HRLSa stepper keeps
/// (R_{n-1} x_{n-1} - r_{n-1}) / varpi_{n-1} in buf_t instead.
struct SolverState {
  Vec x_prev;
  Vec x_cur;
  Vec x_half;
  Vec buf_t;
  Vec buf_grad;
  std::size_t n = 0;
};

/// Stochastic oracle: T_n, grad f_n and prox_{lambda(h_n + g)} at time n.
struct Oracles {
  std::function<AffineMap(std::size_t)> map_at;
  std::function<Vec(std::size_t, const Vec&)> grad_at;
  std::function<ProxOracle(std::size_t)> prox_at;
};

/// grad_at returning zero (f = 0).
std::function<Vec(std::size_t, const Vec&)> zero_gradient();

/// Throws NonFinite if x has a NaN/Inf entry or ||x|| exceeds 1e12.
void check_iterate(const Vec& x, std::size_t n);

// ---------------------------------------------------------------------------
// Generic iteration.
//
//   x_{1/2}   = T_0^(a) x_0 - lambda grad f_0(x_0)
//   x_1       = prox_{lambda(h_0+g)}(x_{1/2})
//   x_{n+1/2} = x_{n-1/2} - [T_{n-1}^(a) x_{n-1} - lambda grad f_{n-1}(x_{n-1})]
//                         + [T_n x_n - lambda grad f_n(x_n)]
//   x_{n+1}   = prox_{lambda(h_n+g)}(x_{n+1/2})
//
// The subtracted bracket uses the averaged map, the added one the plain
// T_n. T_n and grad f_n are evaluated once per step; T_n^(a) x_n is formed
// from T_n x_n and buffered for the next step.
// ---------------------------------------------------------------------------

SolverState engine_init(const SolverParams& params, const Oracles& oracles, const Vec& x0);
SolverState engine_step(const SolverState& state, const SolverParams& params,
                        const Oracles& oracles);

// ---------------------------------------------------------------------------
// Specialized steppers. Each one consumes (R_n, r_n) for the current step.
// ---------------------------------------------------------------------------

/// HRLSa initialization from (R_0, r_0, varpi_0).
SolverState hrlsa_init(const Vec& x0, const SymMat& r0_mat, const Vec& r0_vec, double varpi0,
                       double alpha, double lambda);
/// x_{n+1/2} = x_n + x_{n-1/2} - x_{n-1} + alpha c_{n-1} - c_n,
/// c_n = (R_n x_n - r_n)/varpi_n, followed by soft-thresholding at lambda.
SolverState hrlsa_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                       double varpi, double alpha, double lambda);

/// HRLSb: the generic iteration with T_n = (I + kappa R_n)^{-1}(. + kappa r_n),
/// f = h = 0 and g = ||.||_1, evaluating T_n through one Cholesky solve.
SolverState hrlsb_init(const Vec& x0, const SymMat& r0_mat, const Vec& r0_vec, double alpha,
                       double lambda, double kappa);
SolverState hrlsb_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                       double alpha, double lambda, double kappa);

/// Split-variable CRegLS iteration on R^D x R^D. State vectors hold the two
/// blocks stacked; the estimate is their mean (see cregls_estimate).
SolverState cregls_init(const Vec& x0_first, const Vec& x0_second, const SymMat& r0_mat,
                        const Vec& r0_vec, double alpha, double lambda, double rho);
SolverState cregls_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                        double alpha, double lambda, double rho);
Vec cregls_estimate(const Vec& stacked);

/// Exponentially weighted RLS:
///   k = P a / (gamma + a'P a); w += k (b - a'w); P = (P - k a'P) / gamma.
std::pair<SymMat, Vec> classical_rls_step(const SymMat& p, const Vec& w, const Vec& a, double b,
                                          double gamma);

// ---------------------------------------------------------------------------
// Fejer diagnostics for runs where the exact mapping T and a solution x* are
// known. Tracks v_{n+1} = v_n + (1-alpha) U (x_{n+1} - x*), U = sqrt(I - Q),
// and the weighted distance
//   (x - x*)' Q^(alpha) (x - x*) + ||v - v*||^2 / (1 - alpha).
// v* solves U v* = -lambda (grad f(x*) + xi*) in the least-squares sense; if
// that system is inconsistent only the x-part is traced.
// ---------------------------------------------------------------------------

class FejerDiag {
 public:
  /// `subgradient_at_solution` is grad f(x*) + xi* with xi* in d(h+g)(x*).
  FejerDiag(const AffineMap& exact_map, Vec x_star, double alpha, double lambda,
            const Vec& subgradient_at_solution, const Vec& x0);

  void update(const Vec& x_next);

  const Vec& x_star() const { return x_star_; }
  const SymMat& u() const { return u_; }
  const Vec& v() const { return v_; }
  const Vec& v_star() const { return v_star_; }
  bool v_star_available() const { return v_star_ok_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& theta_norm_trace() const { return trace_; }

 private:
  double theta_norm(const Vec& x) const;

  Vec x_star_;
  SymMat u_;
  SymMat q_alpha_;
  double alpha_;
  double lambda_;
  Vec v_;
  Vec v_star_;
  bool v_star_ok_ = false;
  std::vector<double> trace_;
};

FejerDiag fejer_diag_update(FejerDiag diag, const Vec& x_next);

/// Minimal-norm element of the subdifferential of weight * ||.||_1 at x.
Vec l1_min_norm_subgradient(const Vec& x, double weight = 1.0);

}  // namespace hsdm
