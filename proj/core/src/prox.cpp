#include "hsdm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsdm/error.hpp"

namespace hsdm {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidTau, "threshold must be positive, got " + std::to_string(tau));
  }
}

}  // namespace

Vec ProxOracle::operator()(const Vec& x, double lambda) const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "prox parameter must be positive");
  return fn_(x, lambda);
}

ProxOracle ProxOracle::identity() {
  return ProxOracle("zero", [](const Vec& x, double) { return x; });
}

ProxOracle ProxOracle::l1(double weight) {
  check_tau(weight);
  return ProxOracle("l1", [weight](const Vec& x, double lambda) {
    return soft_threshold(x, lambda * weight);
  });
}

ProxOracle ProxOracle::quadratic(SymMat r_mat, Vec r_vec) {
  return ProxOracle("quadratic", [r_mat = std::move(r_mat), r_vec = std::move(r_vec)](
                                     const Vec& x, double lambda) {
    return quad_prox(x, r_mat, r_vec, lambda);
  });
}

Vec soft_threshold(const Vec& x, double tau) {
  check_tau(tau);
  Vec out(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    out(d) = x(d) * (1.0 - tau / std::max(tau, std::abs(x(d))));
  }
  return out;
}

Vec soft_threshold_shrinkage(const Vec& x, double tau) {
  check_tau(tau);
  Vec out(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double mag = std::max(std::abs(x(d)) - tau, 0.0);
    out(d) = std::copysign(mag, x(d));
    if (mag == 0.0) out(d) = 0.0;
  }
  return out;
}

Vec quad_prox(const Vec& x, const SymMat& r_mat, const Vec& r_vec, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "prox parameter must be positive");
  if (static_cast<std::size_t>(x.size()) != r_mat.dim() || r_vec.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "quad_prox operand sizes differ");
  }
  Mat shifted = lambda * r_mat.matrix();
  shifted.diagonal().array() += 1.0;
  return chol_solve(SymMat(shifted), x + lambda * r_vec);
}

ProxOracle product_prox(std::vector<ProxPart> parts) {
  if (parts.empty()) throw Error(ErrorCode::SliceMismatch, "product prox needs at least one part");
  std::vector<Slice> sorted;
  sorted.reserve(parts.size());
  for (const auto& p : parts) sorted.push_back(p.slice);
  std::sort(sorted.begin(), sorted.end(),
            [](const Slice& a, const Slice& b) { return a.offset < b.offset; });
  std::size_t cursor = 0;
  for (const Slice& s : sorted) {
    if (s.offset != cursor || s.size == 0) {
      throw Error(ErrorCode::SliceMismatch, "slices do not partition the product vector");
    }
    cursor += s.size;
  }
  const std::size_t total = cursor;

  std::string tag = "product(";
  for (std::size_t i = 0; i < parts.size(); ++i) tag += (i ? "," : "") + parts[i].prox.tag();
  tag += ")";

  return ProxOracle(tag, [parts = std::move(parts), total](const Vec& x, double lambda) {
    if (static_cast<std::size_t>(x.size()) != total) {
      throw Error(ErrorCode::SliceMismatch, "product prox applied to vector of wrong length");
    }
    Vec out(x.size());
    for (const auto& part : parts) {
      const auto off = static_cast<Eigen::Index>(part.slice.offset);
      const auto len = static_cast<Eigen::Index>(part.slice.size);
      Vec block = part.prox(x.segment(off, len), lambda);
      if (block.size() != len) {
        throw Error(ErrorCode::SliceMismatch, "prox part changed its block length");
      }
      out.segment(off, len) = block;
    }
    return out;
  });
}

double brute_prox_oracle(const std::function<double(double)>& phi, double x, double lambda,
                         const Grid& grid) {
  double best_a = grid.lo;
  double best = std::numeric_limits<double>::infinity();
  const double h = (grid.hi - grid.lo) / static_cast<double>(grid.steps);
  for (std::size_t i = 0; i <= grid.steps; ++i) {
    const double a = grid.lo + h * static_cast<double>(i);
    const double v = 0.5 * (a - x) * (a - x) + lambda * phi(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace hsdm
