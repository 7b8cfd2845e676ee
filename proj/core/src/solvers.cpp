#include "hsdm/solvers.hpp"

#include <cmath>
#include <sstream>

#include "hsdm/error.hpp"

namespace hsdm {

namespace {

constexpr double kDivergenceNorm = 1e12;

Vec averaged_value(const Vec& tx, const Vec& x, double alpha) {
  return alpha * tx + (1.0 - alpha) * x;
}

Vec hrlsb_map(const Vec& x, const SymMat& r_mat, const Vec& r_vec, double kappa) {
  Mat shifted = kappa * r_mat.matrix();
  shifted.diagonal().array() += 1.0;
  return chol_solve(SymMat(shifted), x + kappa * r_vec);
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidParams, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

SolverParams::SolverParams(double alpha, double lambda, double lipschitz)
    : alpha_(alpha), lambda_(lambda), lipschitz_(lipschitz) {
  check_alpha(alpha);
  check_positive(lipschitz, "Lipschitz constant");
  if (!(lambda > 0.0 && lambda < lambda_bound())) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " outside (0, 2(1-alpha)/L) = (0, " << lambda_bound() << ")";
    throw Error(ErrorCode::InvalidParams, msg.str());
  }
}

SolverParams SolverParams::from_fraction(double alpha, double fraction, double lipschitz) {
  check_alpha(alpha);
  check_positive(lipschitz, "Lipschitz constant");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "step fraction must lie in (0, 1)");
  }
  return SolverParams(alpha, fraction * 2.0 * (1.0 - alpha) / lipschitz, lipschitz);
}

std::function<Vec(std::size_t, const Vec&)> zero_gradient() {
  return [](std::size_t, const Vec& x) { return Vec::Zero(x.size()); };
}

void check_iterate(const Vec& x, std::size_t n) {
  if (!x.allFinite() || x.norm() > kDivergenceNorm) {
    throw Error(ErrorCode::NonFinite, "iterate diverged at step " + std::to_string(n));
  }
}

SolverState engine_init(const SolverParams& params, const Oracles& oracles, const Vec& x0) {
  check_iterate(x0, 0);
  const double alpha = params.alpha();
  const double lambda = params.lambda();

  const Vec tx = oracles.map_at(0).apply(x0);
  Vec grad = oracles.grad_at(0, x0);

  SolverState s;
  s.buf_t = averaged_value(tx, x0, alpha);
  s.x_half = s.buf_t - lambda * grad;
  s.buf_grad = std::move(grad);
  s.x_prev = x0;
  s.x_cur = oracles.prox_at(0)(s.x_half, lambda);
  s.n = 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState engine_step(const SolverState& state, const SolverParams& params,
                        const Oracles& oracles) {
  const double alpha = params.alpha();
  const double lambda = params.lambda();
  const std::size_t n = state.n;

  const Vec tx = oracles.map_at(n).apply(state.x_cur);
  Vec grad = oracles.grad_at(n, state.x_cur);

  SolverState s;
  s.x_half = state.x_half - (state.buf_t - lambda * state.buf_grad) + (tx - lambda * grad);
  s.x_prev = state.x_cur;
  s.x_cur = oracles.prox_at(n)(s.x_half, lambda);
  s.buf_t = averaged_value(tx, state.x_cur, alpha);
  s.buf_grad = std::move(grad);
  s.n = n + 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState hrlsa_init(const Vec& x0, const SymMat& r0_mat, const Vec& r0_vec, double varpi0,
                       double alpha, double lambda) {
  check_alpha(alpha);
  check_positive(varpi0, "varpi_0");
  check_iterate(x0, 0);
  SolverState s;
  s.buf_t = (r0_mat * x0 - r0_vec) / varpi0;
  s.x_half = x0 - alpha * s.buf_t;
  s.x_prev = x0;
  s.x_cur = soft_threshold(s.x_half, lambda);
  s.n = 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState hrlsa_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                       double varpi, double alpha, double lambda) {
  check_positive(varpi, "varpi");
  SolverState s;
  Vec residual = (r_mat * state.x_cur - r_vec) / varpi;
  s.x_half = state.x_cur + state.x_half - state.x_prev + alpha * state.buf_t - residual;
  s.x_prev = state.x_cur;
  s.x_cur = soft_threshold(s.x_half, lambda);
  s.buf_t = std::move(residual);
  s.n = state.n + 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState hrlsb_init(const Vec& x0, const SymMat& r0_mat, const Vec& r0_vec, double alpha,
                       double lambda, double kappa) {
  check_alpha(alpha);
  check_positive(kappa, "kappa");
  check_iterate(x0, 0);
  SolverState s;
  s.buf_t = averaged_value(hrlsb_map(x0, r0_mat, r0_vec, kappa), x0, alpha);
  s.x_half = s.buf_t;
  s.x_prev = x0;
  s.x_cur = soft_threshold(s.x_half, lambda);
  s.n = 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState hrlsb_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                       double alpha, double lambda, double kappa) {
  const Vec tx = hrlsb_map(state.x_cur, r_mat, r_vec, kappa);
  SolverState s;
  s.x_half = state.x_half - state.buf_t + tx;
  s.x_prev = state.x_cur;
  s.x_cur = soft_threshold(s.x_half, lambda);
  s.buf_t = averaged_value(tx, state.x_cur, alpha);
  s.n = state.n + 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

Vec cregls_estimate(const Vec& stacked) {
  const Eigen::Index d = stacked.size() / 2;
  return 0.5 * (stacked.head(d) + stacked.tail(d));
}

namespace {

Vec cregls_prox(const Vec& half, const SymMat& r_mat, const Vec& r_vec, double lambda,
                double rho) {
  const Eigen::Index d = half.size() / 2;
  Vec out(2 * d);
  out.head(d) = quad_prox(half.head(d), r_mat, r_vec, lambda);
  out.tail(d) = soft_threshold(half.tail(d), lambda * rho);
  return out;
}

}  // namespace

SolverState cregls_init(const Vec& x0_first, const Vec& x0_second, const SymMat& r0_mat,
                        const Vec& r0_vec, double alpha, double lambda, double rho) {
  check_alpha(alpha);
  check_positive(rho, "rho");
  if (x0_first.size() != x0_second.size()) {
    throw Error(ErrorCode::DimensionMismatch, "CRegLS blocks differ in length");
  }
  const Eigen::Index d = x0_first.size();
  Vec stacked(2 * d);
  stacked << x0_first, x0_second;
  check_iterate(stacked, 0);
  const Vec mean = cregls_estimate(stacked);

  SolverState s;
  s.x_half.resize(2 * d);
  s.x_half.head(d) = alpha * mean + (1.0 - alpha) * x0_first;
  s.x_half.tail(d) = alpha * mean + (1.0 - alpha) * x0_second;
  s.x_prev = std::move(stacked);
  s.x_cur = cregls_prox(s.x_half, r0_mat, r0_vec, lambda, rho);
  s.n = 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

SolverState cregls_step(const SolverState& state, const SymMat& r_mat, const Vec& r_vec,
                        double alpha, double lambda, double rho) {
  const Eigen::Index d = state.x_cur.size() / 2;
  const Vec mean_prev = cregls_estimate(state.x_prev);
  const Vec mean_cur = cregls_estimate(state.x_cur);

  SolverState s;
  s.x_half.resize(2 * d);
  for (Eigen::Index b = 0; b < 2; ++b) {
    s.x_half.segment(b * d, d) = state.x_half.segment(b * d, d) - alpha * mean_prev -
                                 (1.0 - alpha) * state.x_prev.segment(b * d, d) + mean_cur;
  }
  s.x_prev = state.x_cur;
  s.x_cur = cregls_prox(s.x_half, r_mat, r_vec, lambda, rho);
  s.n = state.n + 1;
  check_iterate(s.x_cur, s.n);
  return s;
}

std::pair<SymMat, Vec> classical_rls_step(const SymMat& p, const Vec& w, const Vec& a, double b,
                                          double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "forgetting coefficient must lie in (0, 1]");
  }
  const Vec pa = p * a;
  const double denom = gamma + a.dot(pa);
  const Vec k = pa / denom;
  Vec w_next = w + k * (b - a.dot(w));
  SymMat p_next(Mat((p.matrix() - k * pa.transpose()) / gamma));
  return {std::move(p_next), std::move(w_next)};
}

FejerDiag::FejerDiag(const AffineMap& exact_map, Vec x_star, double alpha, double lambda,
                     const Vec& subgradient_at_solution, const Vec& x0)
    : x_star_(std::move(x_star)),
      u_(sqrt_psd(SymMat::identity(exact_map.dim()) - exact_map.q())),
      q_alpha_(AveragedMap(exact_map, alpha).as_affine().q()),
      alpha_(alpha),
      lambda_(lambda),
      v_(Vec::Zero(static_cast<Eigen::Index>(exact_map.dim()))) {
  const Vec rhs = -lambda * subgradient_at_solution;
  v_star_ = pinv_solve(u_, rhs);
  const double residual = (u_ * v_star_ - rhs).norm();
  v_star_ok_ = residual <= 1e-8 * (1.0 + rhs.norm());
  if (!v_star_ok_) v_star_.setZero();
  trace_.push_back(theta_norm(x0));
}

double FejerDiag::theta_norm(const Vec& x) const {
  const Vec dx = x - x_star_;
  double value = dx.dot(q_alpha_ * dx);
  if (v_star_ok_) value += (v_ - v_star_).squaredNorm() / (1.0 - alpha_);
  return value;
}

void FejerDiag::update(const Vec& x_next) {
  v_ += (1.0 - alpha_) * (u_ * (x_next - x_star_));
  trace_.push_back(theta_norm(x_next));
}

FejerDiag fejer_diag_update(FejerDiag diag, const Vec& x_next) {
  diag.update(x_next);
  return diag;
}

Vec l1_min_norm_subgradient(const Vec& x, double weight) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g(i) = x(i) > 0.0 ? weight : (x(i) < 0.0 ? -weight : 0.0);
  }
  return g;
}

}  // namespace hsdm
