#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>

#include "hsdm/linalg.hpp"

namespace hsdm {

/// Seeded 64-bit generator. The engine is std::mt19937_64 (its output
/// sequence is fixed by the standard); uniform, normal and bounded-integer
/// draws are implemented here so streams replay identically on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Independent substream: seeded with mix_seed(seed, index).
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix_seed(seed, index));
  }
  /// splitmix64(splitmix64(seed) + (index + 1) * 0x9E3779B97F4A7C15).
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return eng_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (cosine branch, one pair of uniforms
  /// per draw).
  double normal();
  /// Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (eng_() >> 63) != 0; }

 private:
  std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class InputModel { Iid, Ar1 };

struct SystemChange {
  std::size_t at = 0;  // first (1-based) sample generated by the new system
  double sparsity_pct = 0.0;
};

struct Scenario {
  std::size_t dim = 100;
  double sparsity_pct = 1.0;
  InputModel input = InputModel::Iid;
  double ar_delta = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();
  std::size_t horizon = 1000;
  std::optional<SystemChange> change;
  std::uint64_t seed = 1;

  void validate() const;
};

/// round(pct * D / 100); throws InvalidSparsity unless it lies in [1, D].
std::size_t support_size(std::size_t dim, double sparsity_pct);

/// +-1 entries at support_size(D, pct) positions drawn without replacement.
Vec make_sparse_system(std::size_t dim, double sparsity_pct, Rng& rng);

/// One IID N(0, 1) regressor.
Vec iid_stream(std::size_t dim, Rng& rng);

/// delta such that E[a^2] / E[v^2] = 1 / (1 - delta^2) equals `ratio_db`.
double ar1_delta_from_ratio_db(double ratio_db);

/// a_n = delta a_{n-1} + v_n with a_{-1} = v_{-1}; v has per-entry variance
/// 1 - delta^2 so the stationary variance of a is 1. delta = 0 draws no
/// a_{-1} and replays iid_stream exactly.
class Ar1Stream {
 public:
  Ar1Stream(std::size_t dim, double delta, Rng& rng);
  Vec next(Rng& rng);
  double delta() const { return delta_; }

 private:
  double delta_;
  double innov_sd_;
  Vec state_;
};

/// sigma with sigma^2 = 10^(-snr/10) * ||theta||^2 * input_var; +inf SNR -> 0.
double noise_sigma(double snr_db, const Vec& theta, double input_var = 1.0);

struct Sample {
  Vec a;
  double b = 0.0;
};

/// Deterministic data stream of one Monte Carlo trial. System, regressors and
/// noise come from separate substreams of mix_seed(scenario.seed, trial), so
/// changing the SNR does not alter the regressors or the system.
class ScenarioStream {
 public:
  ScenarioStream(const Scenario& sc, std::uint64_t trial);

  Sample next();
  /// System that generated the most recent sample (the initial one before
  /// any sample is drawn).
  const Vec& theta() const { return theta_; }
  double sigma() const { return sigma_; }
  std::size_t count() const { return count_; }

 private:
  Scenario sc_;
  Rng system_rng_;
  Rng input_rng_;
  Rng noise_rng_;
  Ar1Stream input_;
  Vec theta_;
  double sigma_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace hsdm
