#include "hsdm/stream_stats.hpp"

#include <cmath>

#include "hsdm/error.hpp"

namespace hsdm {

RunningMoments::RunningMoments(std::size_t dim, double gamma, double delta)
    : r_mat_(delta * SymMat::identity(dim)),
      r_vec_(Vec::Zero(static_cast<Eigen::Index>(dim))),
      gamma_(gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "forgetting coefficient must lie in (0, 1]");
  }
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidParams, "R_0 scale must be nonnegative");
}

void RunningMoments::update(const Vec& a, double b) {
  if (static_cast<std::size_t>(a.size()) != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "regressor length differs from moments");
  }
  if (!a.allFinite() || !std::isfinite(b)) {
    throw Error(ErrorCode::NonFinite, "non-finite sample");
  }
  ++n_;
  if (gamma_ == 1.0) {
    const double n = static_cast<double>(n_);
    weight_sum_ = n;
    r_mat_ = SymMat(Mat((n - 1.0) * r_mat_.matrix() / n + a * a.transpose() / n));
    r_vec_ = (n - 1.0) * r_vec_ / n + b * a / n;
  } else {
    const double carried = gamma_ * weight_sum_;
    weight_sum_ = carried + 1.0;
    r_mat_ = SymMat(Mat((carried * r_mat_.matrix() + a * a.transpose()) / weight_sum_));
    r_vec_ = (carried * r_vec_ + b * a) / weight_sum_;
  }
}

RunningMoments batch_recompute(const std::vector<std::pair<Vec, double>>& samples, double gamma) {
  if (samples.empty()) throw Error(ErrorCode::InvalidParams, "batch needs at least one sample");
  const auto d = samples.front().first.size();
  const std::size_t n = samples.size();
  Mat acc_r = Mat::Zero(d, d);
  Vec acc_v = Vec::Zero(d);
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double w = std::pow(gamma, static_cast<double>(n - 1 - v));
    acc_r += w * samples[v].first * samples[v].first.transpose();
    acc_v += w * samples[v].second * samples[v].first;
    total += w;
  }
  RunningMoments out(static_cast<std::size_t>(d), gamma);
  out.r_mat_ = SymMat(Mat(acc_r / total));
  out.r_vec_ = acc_v / total;
  out.n_ = n;
  out.weight_sum_ = total;
  return out;
}

}  // namespace hsdm
