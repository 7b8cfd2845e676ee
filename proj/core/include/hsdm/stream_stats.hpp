#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hsdm/linalg.hpp"

namespace hsdm {

/// Running second-moment estimates
///   R_n = sum_v gamma^(n-v) a_v a_v' / Gamma_n,
///   r_n = sum_v gamma^(n-v) b_v a_v  / Gamma_n,
/// with Gamma_n = sum_v gamma^(n-v). gamma = 1 gives the plain averages,
/// updated as R_n = (n-1)/n R_{n-1} + a a'/n.
///
/// The n = 0 state (R_0, r_0) is user-chosen and only seeds solver
/// initialization: it carries zero weight once the first sample arrives.
class RunningMoments {
 public:
  explicit RunningMoments(std::size_t dim, double gamma = 1.0, double delta = 0.0);

  void update(const Vec& a, double b);

  std::size_t dim() const { return r_mat_.dim(); }
  const SymMat& R() const { return r_mat_; }
  const Vec& r() const { return r_vec_; }
  std::uint64_t count() const { return n_; }
  double gamma() const { return gamma_; }
  double weight_sum() const { return weight_sum_; }

 private:
  friend RunningMoments batch_recompute(const std::vector<std::pair<Vec, double>>&, double);

  SymMat r_mat_;
  Vec r_vec_;
  std::uint64_t n_ = 0;
  double gamma_;
  double weight_sum_ = 0.0;
};

/// Direct summation of the weighted averages; reference for RunningMoments.
RunningMoments batch_recompute(const std::vector<std::pair<Vec, double>>& samples, double gamma);

}  // namespace hsdm
