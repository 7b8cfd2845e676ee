#include "hsdm/filters.hpp"

#include <algorithm>
#include <cmath>

#include "hsdm/error.hpp"

namespace hsdm {

std::string_view to_string(VarpiMode mode) {
  switch (mode) {
    case VarpiMode::PowerIteration: return "power";
    case VarpiMode::Exact: return "exact";
    case VarpiMode::Fixed: return "fixed";
  }
  return "power";
}

VarpiMode varpi_mode_from_string(std::string_view s) {
  if (s == "power") return VarpiMode::PowerIteration;
  if (s == "exact") return VarpiMode::Exact;
  if (s == "fixed") return VarpiMode::Fixed;
  throw Error(ErrorCode::Config, "unknown varpi mode '" + std::string(s) + "'");
}

VarpiTracker::VarpiTracker(std::size_t dim, VarpiPolicy policy)
    : policy_(policy),
      p_(Vec::Constant(static_cast<Eigen::Index>(dim), 1.0 / std::sqrt(static_cast<double>(dim)))) {
  if (!(policy_.eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps_varpi must be positive");
  if (!(policy_.initial > 0.0)) throw Error(ErrorCode::InvalidParams, "varpi_0 must be positive");
  if (policy_.mode == VarpiMode::Fixed && !(policy_.fixed > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "fixed varpi must be positive");
  }
}

double VarpiTracker::next(const SymMat& r_mat) {
  switch (policy_.mode) {
    case VarpiMode::PowerIteration: {
      PowerEstimate est = power_iter_estimate(r_mat, p_, policy_.eps, policy_.inner_steps);
      p_ = std::move(est.p);
      return est.varpi;
    }
    case VarpiMode::Exact:
      return std::max(lambda_max(r_mat), policy_.eps);
    case VarpiMode::Fixed:
      return policy_.fixed;
  }
  return policy_.fixed;
}

namespace {

Vec initial_point(std::size_t dim, const HrlsOptions& opts) {
  if (opts.x0.size() == 0) return Vec::Zero(static_cast<Eigen::Index>(dim));
  if (static_cast<std::size_t>(opts.x0.size()) != dim) {
    throw Error(ErrorCode::DimensionMismatch, "x0 length differs from dimension");
  }
  return opts.x0;
}

}  // namespace

HrlsaFilter::HrlsaFilter(std::size_t dim, SolverParams params, VarpiPolicy varpi, HrlsOptions opts)
    : params_(params),
      moments_(dim, opts.forgetting, opts.r0_scale),
      tracker_(dim, varpi),
      varpi_(varpi.initial) {
  if (varpi.initial < opts.r0_scale) {
    throw Error(ErrorCode::NotDominating, "varpi_0 must dominate ||R_0||");
  }
  state_ = hrlsa_init(initial_point(dim, opts), moments_.R(), moments_.r(), varpi_,
                      params_.alpha(), params_.lambda());
}

void HrlsaFilter::observe(const Vec& a, double b) {
  moments_.update(a, b);
  varpi_ = tracker_.next(moments_.R());
  state_ = hrlsa_step(state_, moments_.R(), moments_.r(), varpi_, params_.alpha(),
                      params_.lambda());
}

HrlsbFilter::HrlsbFilter(std::size_t dim, SolverParams params, double kappa, HrlsOptions opts)
    : params_(params),
      kappa_(kappa > 0.0 ? kappa : params.lambda()),
      moments_(dim, opts.forgetting, opts.r0_scale) {
  state_ = hrlsb_init(initial_point(dim, opts), moments_.R(), moments_.r(), params_.alpha(),
                      params_.lambda(), kappa_);
}

void HrlsbFilter::observe(const Vec& a, double b) {
  moments_.update(a, b);
  state_ = hrlsb_step(state_, moments_.R(), moments_.r(), params_.alpha(), params_.lambda(),
                      kappa_);
}

CreglsFilter::CreglsFilter(std::size_t dim, SolverParams params, double rho, HrlsOptions opts)
    : params_(params), rho_(rho), moments_(dim, opts.forgetting, opts.r0_scale) {
  const Vec x0 = initial_point(dim, opts);
  state_ = cregls_init(x0, x0, moments_.R(), moments_.r(), params_.alpha(), params_.lambda(),
                       rho_);
}

void CreglsFilter::observe(const Vec& a, double b) {
  moments_.update(a, b);
  state_ = cregls_step(state_, moments_.R(), moments_.r(), params_.alpha(), params_.lambda(),
                       rho_);
}

RlsFilter::RlsFilter(std::size_t dim, RlsOptions opts)
    : opts_(opts),
      p_((1.0 / opts.delta) * SymMat::identity(dim)),
      w_(Vec::Zero(static_cast<Eigen::Index>(dim))) {
  if (!(opts.delta > 0.0)) throw Error(ErrorCode::InvalidParams, "RLS delta must be positive");
  if (!(opts.forgetting > 0.0 && opts.forgetting <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "forgetting coefficient must lie in (0, 1]");
  }
}

void RlsFilter::observe(const Vec& a, double b) {
  auto [p, w] = classical_rls_step(p_, w_, a, b, opts_.forgetting);
  ++n_;
  check_iterate(w, n_);
  delta_ = (w - w_).norm();
  p_ = std::move(p);
  w_ = std::move(w);
}

}  // namespace hsdm
