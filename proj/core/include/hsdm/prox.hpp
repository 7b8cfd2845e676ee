#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hsdm/linalg.hpp"

namespace hsdm {

/// A proximal mapping x -> prox_{lambda*phi}(x), carried with a tag that
/// names phi.
class ProxOracle {
 public:
  using Fn = std::function<Vec(const Vec&, double)>;

  ProxOracle(std::string tag, Fn fn) : tag_(std::move(tag)), fn_(std::move(fn)) {}

  Vec operator()(const Vec& x, double lambda) const;
  const std::string& tag() const { return tag_; }

  static ProxOracle identity();
  /// phi = weight * ||.||_1, i.e. soft-thresholding at lambda * weight.
  static ProxOracle l1(double weight = 1.0);
  /// phi(x) = x'Rx/2 - r'x.
  static ProxOracle quadratic(SymMat r_mat, Vec r_vec);

 private:
  std::string tag_;
  Fn fn_;
};

/// out_d = x_d * (1 - tau / max(tau, |x_d|)).
Vec soft_threshold(const Vec& x, double tau);
/// out_d = sign(x_d) * max(|x_d| - tau, 0). Kept alongside the form above
/// so the two can be checked against each other.
Vec soft_threshold_shrinkage(const Vec& x, double tau);

/// (I + lambda R)^{-1} (x + lambda r).
Vec quad_prox(const Vec& x, const SymMat& r_mat, const Vec& r_vec, double lambda);

struct Slice {
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct ProxPart {
  ProxOracle prox;
  Slice slice;
};

/// Separable prox on a product space; the slices must tile [0, N).
ProxOracle product_prox(std::vector<ProxPart> parts);

struct Grid {
  double lo;
  double hi;
  std::size_t steps;
};

/// Grid argmin of (a - x)^2 / 2 + lambda * phi(a) over `steps + 1` equally
/// spaced points in [lo, hi].
double brute_prox_oracle(const std::function<double(double)>& phi, double x, double lambda,
                         const Grid& grid);

}  // namespace hsdm
