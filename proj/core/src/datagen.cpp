#include "hsdm/datagen.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "hsdm/error.hpp"

namespace hsdm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::mix_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParams, "empty integer range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

void Scenario::validate() const {
  if (dim == 0) throw Error(ErrorCode::Config, "scenario dimension must be positive");
  support_size(dim, sparsity_pct);
  if (input == InputModel::Ar1 && !(std::abs(ar_delta) < 1.0)) {
    throw Error(ErrorCode::InvalidDelta, "AR(1) coefficient must satisfy |delta| < 1");
  }
  if (std::isnan(snr_db)) throw Error(ErrorCode::Config, "SNR must be a number or +inf");
  if (horizon == 0) throw Error(ErrorCode::Config, "horizon must be positive");
  if (change) {
    if (change->at < 1) throw Error(ErrorCode::Config, "change step must be >= 1");
    support_size(dim, change->sparsity_pct);
  }
}

std::size_t support_size(std::size_t dim, double sparsity_pct) {
  const double s = std::round(sparsity_pct * static_cast<double>(dim) / 100.0);
  if (!(s >= 1.0 && s <= static_cast<double>(dim))) {
    throw Error(ErrorCode::InvalidSparsity,
                "sparsity " + std::to_string(sparsity_pct) + "% of D = " + std::to_string(dim) +
                    " gives no valid support size");
  }
  return static_cast<std::size_t>(s);
}

Vec make_sparse_system(std::size_t dim, double sparsity_pct, Rng& rng) {
  const std::size_t s = support_size(dim, sparsity_pct);
  std::vector<std::size_t> pos(dim);
  for (std::size_t i = 0; i < dim; ++i) pos[i] = i;
  // Partial Fisher-Yates: the first s slots end up a uniform s-subset.
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(dim - i));
    std::swap(pos[i], pos[j]);
  }
  Vec theta = Vec::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < s; ++i) {
    theta(static_cast<Eigen::Index>(pos[i])) = rng.coin() ? 1.0 : -1.0;
  }
  return theta;
}

Vec iid_stream(std::size_t dim, Rng& rng) {
  Vec a(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
  return a;
}

double ar1_delta_from_ratio_db(double ratio_db) {
  if (!(ratio_db > 0.0)) throw Error(ErrorCode::InvalidDelta, "AR variance ratio must exceed 0 dB");
  return std::sqrt(1.0 - std::pow(10.0, -ratio_db / 10.0));
}

Ar1Stream::Ar1Stream(std::size_t dim, double delta, Rng& rng)
    : delta_(delta), innov_sd_(std::sqrt(1.0 - delta * delta)) {
  if (!(std::abs(delta) < 1.0)) {
    throw Error(ErrorCode::InvalidDelta, "AR(1) coefficient must satisfy |delta| < 1");
  }
  state_ = delta == 0.0 ? Vec::Zero(static_cast<Eigen::Index>(dim))
                        : Vec(innov_sd_ * iid_stream(dim, rng));
}

Vec Ar1Stream::next(Rng& rng) {
  Vec innov = iid_stream(static_cast<std::size_t>(state_.size()), rng);
  if (delta_ == 0.0) {
    state_ = innov;
  } else {
    state_ = delta_ * state_ + innov_sd_ * innov;
  }
  return state_;
}

double noise_sigma(double snr_db, const Vec& theta, double input_var) {
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return std::sqrt(std::pow(10.0, -snr_db / 10.0) * theta.squaredNorm() * input_var);
}

ScenarioStream::ScenarioStream(const Scenario& sc, std::uint64_t trial)
    : sc_(sc),
      system_rng_(Rng::substream(Rng::mix_seed(sc.seed, trial), 0)),
      input_rng_(Rng::substream(Rng::mix_seed(sc.seed, trial), 1)),
      noise_rng_(Rng::substream(Rng::mix_seed(sc.seed, trial), 2)),
      input_(sc.dim, sc.input == InputModel::Ar1 ? sc.ar_delta : 0.0, input_rng_) {
  sc_.validate();
  theta_ = make_sparse_system(sc_.dim, sc_.sparsity_pct, system_rng_);
  sigma_ = noise_sigma(sc_.snr_db, theta_);
}

Sample ScenarioStream::next() {
  ++count_;
  if (sc_.change && count_ == sc_.change->at) {
    theta_ = make_sparse_system(sc_.dim, sc_.change->sparsity_pct, system_rng_);
    sigma_ = noise_sigma(sc_.snr_db, theta_);
  }
  Sample s;
  s.a = input_.next(input_rng_);
  s.b = s.a.dot(theta_);
  if (sigma_ > 0.0) s.b += sigma_ * noise_rng_.normal();
  return s;
}

}  // namespace hsdm
