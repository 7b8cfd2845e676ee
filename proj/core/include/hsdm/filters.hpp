#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>

#include "hsdm/linalg.hpp"
#include "hsdm/solvers.hpp"
#include "hsdm/stream_stats.hpp"

namespace hsdm {

/// How the spectral over-estimate varpi_n >= ||R_n|| is produced.
enum class VarpiMode {
  PowerIteration,  // p'R_n p + eps after warm-started power steps (may under-estimate)
  Exact,           // max(lambda_max(R_n), eps) from eig_sym; O(D^3) per step
  Fixed,           // constant supplied by the user
};

std::string_view to_string(VarpiMode mode);
VarpiMode varpi_mode_from_string(std::string_view s);

struct VarpiPolicy {
  VarpiMode mode = VarpiMode::PowerIteration;
  double eps = 0.05;
  std::size_t inner_steps = 1;
  double fixed = 1.0;
  double initial = 1.0;  // varpi_0, paired with R_0
};

/// Tracks varpi_n across steps (the power-iteration vector is warm-started).
class VarpiTracker {
 public:
  VarpiTracker(std::size_t dim, VarpiPolicy policy);
  double next(const SymMat& r_mat);
  const VarpiPolicy& policy() const { return policy_; }

 private:
  VarpiPolicy policy_;
  Vec p_;
};

/// A streaming estimator fed one (a_n, b_n) pair at a time.
class OnlineFilter {
 public:
  virtual ~OnlineFilter() = default;
  virtual void observe(const Vec& a, double b) = 0;
  virtual Vec estimate() const = 0;
  /// ||estimate after this sample - estimate before it||.
  virtual double step_delta() const = 0;
  /// varpi_n used at the last step, NaN where not applicable.
  virtual double varpi() const { return std::numeric_limits<double>::quiet_NaN(); }
  virtual std::string_view kind() const = 0;
};

struct HrlsOptions {
  double forgetting = 1.0;  // gamma_f
  double r0_scale = 0.0;    // R_0 = r0_scale * I, r_0 = 0
  Vec x0;                   // empty -> zero vector
};

class HrlsaFilter final : public OnlineFilter {
 public:
  HrlsaFilter(std::size_t dim, SolverParams params, VarpiPolicy varpi, HrlsOptions opts = {});
  void observe(const Vec& a, double b) override;
  Vec estimate() const override { return state_.x_cur; }
  double step_delta() const override { return (state_.x_cur - state_.x_prev).norm(); }
  double varpi() const override { return varpi_; }
  std::string_view kind() const override { return "hrlsa"; }
  const SolverState& state() const { return state_; }
  const RunningMoments& moments() const { return moments_; }

 private:
  SolverParams params_;
  RunningMoments moments_;
  VarpiTracker tracker_;
  SolverState state_;
  double varpi_;
};

class HrlsbFilter final : public OnlineFilter {
 public:
  /// kappa <= 0 selects kappa = lambda.
  HrlsbFilter(std::size_t dim, SolverParams params, double kappa = 0.0, HrlsOptions opts = {});
  void observe(const Vec& a, double b) override;
  Vec estimate() const override { return state_.x_cur; }
  double step_delta() const override { return (state_.x_cur - state_.x_prev).norm(); }
  std::string_view kind() const override { return "hrlsb"; }
  double kappa() const { return kappa_; }

 private:
  SolverParams params_;
  double kappa_;
  RunningMoments moments_;
  SolverState state_;
};

class CreglsFilter final : public OnlineFilter {
 public:
  CreglsFilter(std::size_t dim, SolverParams params, double rho, HrlsOptions opts = {});
  void observe(const Vec& a, double b) override;
  Vec estimate() const override { return cregls_estimate(state_.x_cur); }
  double step_delta() const override {
    return (cregls_estimate(state_.x_cur) - cregls_estimate(state_.x_prev)).norm();
  }
  std::string_view kind() const override { return "cregls"; }

 private:
  SolverParams params_;
  double rho_;
  RunningMoments moments_;
  SolverState state_;
};

struct RlsOptions {
  double forgetting = 1.0;
  double delta = 1e-2;  // P_0 = I / delta
};

class RlsFilter final : public OnlineFilter {
 public:
  RlsFilter(std::size_t dim, RlsOptions opts = {});
  void observe(const Vec& a, double b) override;
  Vec estimate() const override { return w_; }
  double step_delta() const override { return delta_; }
  std::string_view kind() const override { return "rls"; }

 private:
  RlsOptions opts_;
  SymMat p_;
  Vec w_;
  double delta_ = 0.0;
  std::size_t n_ = 0;
};

}  // namespace hsdm
