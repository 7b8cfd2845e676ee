#include "hsdm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsdm/datagen.hpp"
#include "hsdm/fixed_point_maps.hpp"
#include "hsdm/prox.hpp"
#include "hsdm/stream_stats.hpp"

namespace hsdm {

namespace {

class Tally {
 public:
  explicit Tally(std::string name) { res_.name = std::move(name); }

  void check(bool ok, double residual, const std::string& what) {
    ++res_.checks;
    if (std::isfinite(residual)) res_.worst = std::max(res_.worst, residual);
    if (!ok) {
      if (res_.failures == 0) res_.detail = what;
      ++res_.failures;
    }
  }

  SuiteResult finish() {
    res_.passed = res_.failures == 0;
    return res_;
  }

 private:
  SuiteResult res_;
};

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Vec random_vec(std::size_t dim, Rng& rng) { return iid_stream(dim, rng); }

/// R = A A' / k with A of size D x k; k < D yields a singular R.
SymMat random_psd(std::size_t dim, std::size_t rank, Rng& rng) {
  Mat a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = random_vec(dim, rng);
  return SymMat(Mat(a * a.transpose() / static_cast<double>(rank)));
}

void check_nonexpansive(Tally& t, const AffineMap& map, Rng& rng, const std::string& tag) {
  const std::size_t dim = map.dim();
  for (int k = 0; k < 200; ++k) {
    const Vec x = 3.0 * random_vec(dim, rng);
    const Vec y = 3.0 * random_vec(dim, rng);
    const double lhs = (map.apply(x) - map.apply(y)).norm();
    const double rhs = (x - y).norm();
    t.check(lhs <= (1.0 + 1e-10) * rhs, lhs / rhs - 1.0, tag + ": nonexpansiveness violated");
  }
}

void check_member(Tally& t, const AffineMap& map, const SymMat& r_mat, const Vec& r_vec,
                  const std::string& tag) {
  const MembershipReport rep = verify_family_membership(map, std::make_pair(r_mat, r_vec));
  t.check(rep.passed, rep.fixed_point_residual, tag + ": " + rep.failure);
}

}  // namespace

SuiteResult verify_mapping_suite(std::uint64_t seed) {
  Tally t("mapping");
  Rng rng(Rng::mix_seed(seed, 0));
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(30));
    const bool singular = inst % 4 == 3 && dim > 1;
    const std::size_t rank = singular ? 1 + static_cast<std::size_t>(rng.below(dim - 1)) : dim + 5;
    const SymMat r_mat = random_psd(dim, rank, rng);
    // r in range(R) so that {x : R x = r} is nonempty.
    const Vec r_vec = r_mat * random_vec(dim, rng);
    const double mu = uniform(rng, 0.05, 1.0);
    const double varpi = lambda_max(r_mat) * uniform(rng, 1.0, 2.0) + 1e-3;
    const double kappa = uniform(rng, 0.1, 10.0);

    std::ostringstream tag;
    tag << "instance " << inst << " (D=" << dim << (singular ? ", singular" : "") << ")";
    const AffineMap g = grad_map(r_mat, r_vec, mu, varpi, true);
    const AffineMap p = prox_map(r_mat, r_vec, kappa);
    check_member(t, g, r_mat, r_vec, tag.str() + " grad_map");
    check_member(t, p, r_mat, r_vec, tag.str() + " prox_map");
    check_nonexpansive(t, g, rng, tag.str() + " grad_map");
    check_nonexpansive(t, p, rng, tag.str() + " prox_map");
    for (double beta : {0.0, 0.3, 1.0}) {
      check_member(t, convex_combination(beta, g, p), r_mat, r_vec, tag.str() + " combination");
    }
  }
  return t.finish();
}

SuiteResult verify_prox_suite(std::uint64_t seed) {
  Tally t("prox");
  Rng rng(Rng::mix_seed(seed, 0));
  constexpr double kGridAccuracy = 1e-5;

  // Grid argmin in two stages. The objective is convex, so its minimizer is
  // within one coarse spacing of the coarse argmin; the fine grid then has
  // spacing 1e-5.
  auto oracle = [](const std::function<double(double)>& phi, double x, double lambda, double lo,
                   double hi) {
    const double coarse = brute_prox_oracle(phi, x, lambda, Grid{lo, hi, 10000});
    const double h = (hi - lo) / 10000.0;
    const double span = std::ceil(2.0 * h / kGridAccuracy) * kGridAccuracy / 2.0;
    return brute_prox_oracle(phi, x, lambda,
                             Grid{coarse - span, coarse + span,
                                  static_cast<std::size_t>(std::llround(2.0 * span / kGridAccuracy))});
  };

  for (int inst = 0; inst < 1000; ++inst) {
    const double x = uniform(rng, -10.0, 10.0);
    const double tau = 5.0 * (1.0 - rng.uniform());  // (0, 5]
    const Vec xv = Vec::Constant(1, x);

    // soft-thresholding: phi = |.|, lambda = tau.
    const auto abs_fn = [](double a) { return std::abs(a); };
    const double z_soft = soft_threshold(xv, tau)(0);
    const double z_brute = oracle(abs_fn, x, tau, -10.0, 10.0);
    t.check(std::abs(z_soft - z_brute) <= kGridAccuracy, std::abs(z_soft - z_brute),
            "soft_threshold vs grid oracle at x=" + std::to_string(x));
    const double z_shrink = soft_threshold_shrinkage(xv, tau)(0);
    t.check(std::abs(z_soft - z_shrink) <= 1e-15 * std::max(1.0, std::abs(x)),
            std::abs(z_soft - z_shrink), "soft-threshold forms disagree");

    // quadratic: phi(a) = R a^2 / 2 - r a with R in [0, 4].
    const double rq = uniform(rng, 0.0, 4.0);
    const double rr = uniform(rng, -4.0, 4.0);
    const double lam = uniform(rng, 0.05, 2.0);
    const SymMat r_mat = SymMat::diagonal(Vec::Constant(1, rq));
    const Vec r_vec = Vec::Constant(1, rr);
    const auto quad_fn = [rq, rr](double a) { return 0.5 * rq * a * a - rr * a; };
    const double z_quad = quad_prox(xv, r_mat, r_vec, lam)(0);
    const double z_qbrute = oracle(quad_fn, x, lam, -30.0, 30.0);
    t.check(std::abs(z_quad - z_qbrute) <= kGridAccuracy, std::abs(z_quad - z_qbrute),
            "quad_prox vs grid oracle at x=" + std::to_string(x));
    const double ident = std::abs(z_quad + lam * (rq * z_quad - rr) - x);
    t.check(ident <= 1e-8, ident, "quad_prox subgradient identity");
  }

  // Optimality inequality in R^D for both proxes.
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(10));
    const Vec x = 3.0 * random_vec(dim, rng);
    const double lam = uniform(rng, 0.05, 3.0);
    const SymMat r_mat = random_psd(dim, dim + 2, rng);
    const Vec r_vec = random_vec(dim, rng);
    const auto obj_l1 = [&](const Vec& a) { return 0.5 * (a - x).squaredNorm() + lam * a.lpNorm<1>(); };
    const auto obj_q = [&](const Vec& a) {
      return 0.5 * (a - x).squaredNorm() + lam * (0.5 * a.dot(r_mat * a) - r_vec.dot(a));
    };
    const Vec z1 = soft_threshold(x, lam);
    const Vec z2 = quad_prox(x, r_mat, r_vec, lam);
    for (int k = 0; k < 100; ++k) {
      const double scale = std::pow(10.0, uniform(rng, -4.0, 1.0));
      const Vec d = scale * random_vec(dim, rng);
      const double g1 = obj_l1(z1 + d) - obj_l1(z1);
      const double g2 = obj_q(z2 + d) - obj_q(z2);
      t.check(g1 >= -1e-9, -g1, "l1 prox optimality inequality");
      t.check(g2 >= -1e-9, -g2, "quadratic prox optimality inequality");
    }
  }
  return t.finish();
}

SuiteResult verify_stats_suite(std::uint64_t seed) {
  Tally t("stats");
  Rng rng(Rng::mix_seed(seed, 0));
  const std::size_t dim = 8;
  const Vec theta = make_sparse_system(dim, 50.0, rng);
  for (double gamma : {1.0, 0.9}) {
    const double tol = gamma == 1.0 ? 1e-10 : 1e-9;
    RunningMoments m(dim, gamma);
    std::vector<std::pair<Vec, double>> samples;
    for (int n = 0; n < 1000; ++n) {
      const Vec a = random_vec(dim, rng);
      const double b = a.dot(theta);
      samples.emplace_back(a, b);
      m.update(a, b);
      const double ident = (m.R() * theta - m.r()).norm();
      t.check(ident <= 1e-10, ident, "noiseless identity R_n theta = r_n");
    }
    const RunningMoments ref = batch_recompute(samples, gamma);
    const double err_r = (m.R().matrix() - ref.R().matrix()).norm() / ref.R().frobenius();
    const double err_v = (m.r() - ref.r()).norm() / ref.r().norm();
    t.check(err_r <= tol, err_r, "streaming R_n differs from batch sum");
    t.check(err_v <= tol, err_v, "streaming r_n differs from batch sum");
  }
  return t.finish();
}

std::vector<SuiteResult> verify_all(std::uint64_t seed) {
  return {verify_mapping_suite(seed), verify_prox_suite(seed + 1), verify_stats_suite(seed + 2)};
}

}  // namespace hsdm
