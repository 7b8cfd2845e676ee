#include <gtest/gtest.h>

#include <cmath>

#include "hsdm/error.hpp"
#include "hsdm/filters.hpp"
#include "hsdm/solvers.hpp"
#include "hsdm/stream_stats.hpp"
#include "test_util.hpp"

namespace hsdm {
namespace {

using test::vec;

Oracles constant_oracles(AffineMap t, ProxOracle prox,
                         std::function<Vec(std::size_t, const Vec&)> grad = zero_gradient()) {
  return Oracles{[t](std::size_t) { return t; }, std::move(grad),
                 [prox](std::size_t) { return prox; }};
}

TEST(SolverParams, StepBoxEnforced) {
  EXPECT_NO_THROW(SolverParams(0.5, 9.9, 0.1));
  EXPECT_THROW(SolverParams(0.5, 10.0, 0.1), Error);
  EXPECT_THROW(SolverParams(0.5, 0.0, 0.1), Error);
  EXPECT_THROW(SolverParams(0.4, 0.1, 0.1), Error);
  EXPECT_THROW(SolverParams(1.0, 0.1, 0.1), Error);
  EXPECT_THROW(SolverParams(0.5, 0.1, 0.0), Error);
  const SolverParams p = SolverParams::from_fraction(0.75, 0.5, 2.0);
  EXPECT_DOUBLE_EQ(p.lambda(), 0.125);
  EXPECT_THROW(SolverParams::from_fraction(0.5, 1.0, 1.0), Error);
}

TEST(Engine, InitExamples) {
  const SolverParams params(0.5, 0.1, 1.0);
  const Oracles trivial = constant_oracles(AffineMap::identity(2), ProxOracle::identity());
  const SolverState s0 = engine_init(params, trivial, vec({3, -4}));
  EXPECT_EQ(s0.x_half, vec({3, -4}));
  EXPECT_EQ(s0.x_cur, vec({3, -4}));

  const auto grad = [](std::size_t, const Vec& x) { return x; };
  const SolverState s1 =
      engine_init(params, constant_oracles(AffineMap::identity(1), ProxOracle::identity(), grad), vec({1}));
  EXPECT_NEAR(s1.x_half(0), 0.9, 1e-15);
  EXPECT_NEAR(s1.x_cur(0), 0.9, 1e-15);

  const SolverState s2 =
      engine_init(params, constant_oracles(AffineMap::identity(1), ProxOracle::l1(), grad), vec({1}));
  EXPECT_NEAR(s2.x_cur(0), 0.8, 1e-15);
}

TEST(Engine, TrivialOraclesAreStationary) {
  const SolverParams params(0.6, 0.5, 1.0);
  const Oracles trivial = constant_oracles(AffineMap::identity(3), ProxOracle::identity());
  SolverState s = engine_init(params, trivial, vec({1, 2, 3}));
  for (int n = 0; n < 20; ++n) {
    s = engine_step(s, params, trivial);
    EXPECT_EQ(s.x_cur, vec({1, 2, 3}));
  }
}

TEST(Engine, HandTraceScalarContraction) {
  const SolverParams params(0.5, 0.1, 1.0);
  const Oracles o = constant_oracles(AffineMap(SymMat::diagonal(vec({0.5})), vec({0.5})),
                                     ProxOracle::identity());
  SolverState s = engine_init(params, o, vec({0}));
  EXPECT_DOUBLE_EQ(s.x_half(0), 0.25);
  EXPECT_DOUBLE_EQ(s.x_cur(0), 0.25);
  s = engine_step(s, params, o);
  EXPECT_DOUBLE_EQ(s.x_half(0), 0.625);
  EXPECT_DOUBLE_EQ(s.x_cur(0), 0.625);
  // The raw distance to Fix T = {1} overshoots (x_3 = 1, x_4 = 1.28125); the
  // monotone quantity is the weighted distance of the Fejer diagnostic.
  s = engine_step(s, params, o);
  EXPECT_DOUBLE_EQ(s.x_cur(0), 1.0);
  s = engine_step(s, params, o);
  EXPECT_DOUBLE_EQ(s.x_cur(0), 1.28125);

  SolverState r = engine_init(params, o, vec({0}));
  FejerDiag d(o.map_at(0), vec({1}), 0.5, 0.1, vec({0}), vec({0}));
  ASSERT_TRUE(d.v_star_available());
  d.update(r.x_cur);
  for (int n = 0; n < 200; ++n) {
    r = engine_step(r, params, o);
    d.update(r.x_cur);
  }
  const auto& tr = d.theta_norm_trace();
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LE(tr[i], tr[i - 1] + 1e-12) << i;
  EXPECT_NEAR(r.x_cur(0), 1.0, 1e-10);
}

TEST(Engine, BufferDiscipline) {
  const SolverParams params(0.5, 0.2, 1.0);
  std::size_t maps = 0, grads = 0, proxes = 0;
  std::vector<std::size_t> grad_steps;
  const AffineMap t(SymMat::diagonal(vec({0.5, 0.2})), vec({0.1, 0.3}));
  const Oracles o{[&](std::size_t) {
                    ++maps;
                    return t;
                  },
                  [&](std::size_t n, const Vec& x) {
                    ++grads;
                    grad_steps.push_back(n);
                    return Vec(0.1 * x);
                  },
                  [&](std::size_t) {
                    ++proxes;
                    return ProxOracle::l1();
                  }};
  SolverState s = engine_init(params, o, vec({1, 1}));
  EXPECT_EQ(maps, 1u);
  EXPECT_EQ(grads, 1u);
  for (std::size_t n = 1; n <= 30; ++n) {
    s = engine_step(s, params, o);
    EXPECT_EQ(maps, n + 1);
    EXPECT_EQ(grads, n + 1);
    EXPECT_EQ(proxes, n + 1);
  }
  for (std::size_t i = 0; i < grad_steps.size(); ++i) EXPECT_EQ(grad_steps[i], i);
}

TEST(Engine, DivergenceRaisesNonFinite) {
  // lambda * grad of a steep quadratic far outside the step box: iterates explode.
  const SolverParams params(0.5, 0.9, 1.0);
  const auto grad = [](std::size_t, const Vec& x) { return Vec(50.0 * x); };
  const Oracles o = constant_oracles(AffineMap::identity(1), ProxOracle::identity(), grad);
  SolverState s = engine_init(params, o, vec({1}));
  try {
    for (int n = 0; n < 1000; ++n) s = engine_step(s, params, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
}

TEST(Hrlsa, LineFiveExamples) {
  const double c = 0.3;
  SolverState st;
  st.x_prev = vec({c});
  st.x_cur = vec({c});
  st.x_half = vec({c});
  st.buf_t = vec({c});  // (R x - r)/varpi at step n-1 with R = I, r = 0, varpi = 1
  const SolverState next = hrlsa_step(st, SymMat::identity(1), vec({0}), 1.0, 0.5, 1e-3);
  EXPECT_DOUBLE_EQ(next.x_half(0), 0.5 * c);

  SolverState z;
  z.x_prev = vec({1, 2});
  z.x_cur = vec({2, 0});
  z.x_half = vec({3, -1});
  z.buf_t = Vec::Zero(2);
  const SolverState zn = hrlsa_step(z, SymMat::zero(2), Vec::Zero(2), 0.05, 0.5, 0.1);
  EXPECT_EQ(zn.x_half, vec({4, -3}));
}

/// Moments, varpi and a fixed data stream shared by the equivalence tests.
struct Stream {
  std::vector<SymMat> r_mat;
  std::vector<Vec> r_vec;
  std::vector<double> varpi;
};

Stream make_stream(std::size_t dim, std::size_t steps, std::uint64_t seed, double snr_db) {
  Scenario sc;
  sc.dim = dim;
  sc.sparsity_pct = 100.0 / static_cast<double>(dim);
  sc.snr_db = snr_db;
  sc.seed = seed;
  ScenarioStream data(sc, 0);
  RunningMoments m(dim);
  VarpiTracker tracker(dim, VarpiPolicy{});
  Stream s;
  s.r_mat.push_back(m.R());
  s.r_vec.push_back(m.r());
  s.varpi.push_back(1.0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const Sample smp = data.next();
    m.update(smp.a, smp.b);
    s.r_mat.push_back(m.R());
    s.r_vec.push_back(m.r());
    s.varpi.push_back(tracker.next(m.R()));
  }
  return s;
}

double max_abs(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

class Equivalence : public ::testing::TestWithParam<std::tuple<std::size_t, std::uint64_t>> {};

TEST_P(Equivalence, HrlsaMatchesEngine) {
  const auto [dim, seed] = GetParam();
  const Stream st = make_stream(dim, 200, seed, 20.0);
  const SolverParams params = SolverParams::from_fraction(0.5, 0.99, 0.1);
  const Oracles o{[&](std::size_t n) { return grad_map(st.r_mat[n], st.r_vec[n], 1.0, st.varpi[n]); },
                  zero_gradient(), [](std::size_t) { return ProxOracle::l1(); }};
  const Vec x0 = Vec::Zero(static_cast<Eigen::Index>(dim));
  SolverState e = engine_init(params, o, x0);
  SolverState h = hrlsa_init(x0, st.r_mat[0], st.r_vec[0], st.varpi[0], 0.5, params.lambda());
  double worst = max_abs(e.x_cur, h.x_cur);
  for (std::size_t n = 1; n < 200; ++n) {
    e = engine_step(e, params, o);
    h = hrlsa_step(h, st.r_mat[n], st.r_vec[n], st.varpi[n], 0.5, params.lambda());
    worst = std::max(worst, max_abs(e.x_cur, h.x_cur));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST_P(Equivalence, HrlsbMatchesEngine) {
  const auto [dim, seed] = GetParam();
  const Stream st = make_stream(dim, 200, seed, 20.0);
  const SolverParams params = SolverParams::from_fraction(0.5, 0.5, 1.0);
  const double kappa = 0.8;
  const Oracles o{[&](std::size_t n) { return prox_map(st.r_mat[n], st.r_vec[n], kappa); },
                  zero_gradient(), [](std::size_t) { return ProxOracle::l1(); }};
  const Vec x0 = Vec::Constant(static_cast<Eigen::Index>(dim), 0.1);
  SolverState e = engine_init(params, o, x0);
  SolverState h = hrlsb_init(x0, st.r_mat[0], st.r_vec[0], 0.5, params.lambda(), kappa);
  double worst = max_abs(e.x_cur, h.x_cur);
  for (std::size_t n = 1; n < 200; ++n) {
    e = engine_step(e, params, o);
    h = hrlsb_step(h, st.r_mat[n], st.r_vec[n], 0.5, params.lambda(), kappa);
    worst = std::max(worst, max_abs(e.x_cur, h.x_cur));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST_P(Equivalence, CreglsMatchesEngine) {
  const auto [dim, seed] = GetParam();
  const Stream st = make_stream(dim, 200, seed, 20.0);
  const SolverParams params = SolverParams::from_fraction(0.6, 0.9, 1.0);
  const double rho = 0.05;
  const Slice first{0, dim}, second{dim, dim};
  const Oracles o{[&](std::size_t) { return consensus_projection(2, dim); }, zero_gradient(),
                  [&](std::size_t n) {
                    return product_prox({{ProxOracle::quadratic(st.r_mat[n], st.r_vec[n]), first},
                                         {ProxOracle::l1(rho), second}});
                  }};
  const Vec x0 = Vec::Constant(static_cast<Eigen::Index>(2 * dim), 0.2);
  SolverState e = engine_init(params, o, x0);
  SolverState c = cregls_init(x0.head(dim), x0.tail(dim), st.r_mat[0], st.r_vec[0], 0.6,
                              params.lambda(), rho);
  double worst = max_abs(e.x_cur, c.x_cur);
  for (std::size_t n = 1; n < 200; ++n) {
    e = engine_step(e, params, o);
    c = cregls_step(c, st.r_mat[n], st.r_vec[n], 0.6, params.lambda(), rho);
    worst = std::max(worst, max_abs(e.x_cur, c.x_cur));
  }
  EXPECT_LE(worst, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Dims, Equivalence,
                         ::testing::Combine(::testing::Values(std::size_t{5}, std::size_t{20}),
                                            ::testing::Values(std::uint64_t{1}, std::uint64_t{2})));

TEST(Hrlsb, SingleStepMatchesEngineOnIdentity) {
  const Vec r = vec({1, -2});
  const AffineMap t = prox_map(SymMat::identity(2), r, 1.0);
  EXPECT_LE((t.q().matrix() - 0.5 * Mat::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((t.pi() - 0.5 * r).norm(), 1e-15);
  const SolverParams params(0.5, 0.1, 1.0);
  const Oracles o = constant_oracles(t, ProxOracle::l1());
  const Vec x0 = vec({0.3, 0.9});
  SolverState e = engine_step(engine_init(params, o, x0), params, o);
  SolverState h = hrlsb_step(hrlsb_init(x0, SymMat::identity(2), r, 0.5, 0.1, 1.0),
                             SymMat::identity(2), r, 0.5, 0.1, 1.0);
  EXPECT_LE(max_abs(e.x_cur, h.x_cur), 1e-15);
}

TEST(Hrlsb, ZeroDataIsIteratedThresholding) {
  SolverState s = hrlsb_init(vec({2, -0.05}), SymMat::zero(2), Vec::Zero(2), 0.5, 0.1, 1.0);
  EXPECT_NEAR(s.x_cur(0), 1.9, 1e-15);
  EXPECT_EQ(s.x_cur(1), 0.0);
  for (int n = 0; n < 5; ++n) s = hrlsb_step(s, SymMat::zero(2), Vec::Zero(2), 0.5, 0.1, 1.0);
  EXPECT_TRUE(s.x_cur.allFinite());
}

TEST(Hrlsb, ConvergesOnStationaryNoiselessData) {
  Rng rng(51);
  const std::size_t dim = 20;
  const SymMat r = test::random_spd(dim, rng);
  const Vec theta = make_sparse_system(dim, 15, rng);
  const Vec rv = r * theta;
  const double lambda = 0.1;
  SolverState s = hrlsb_init(Vec::Zero(dim), r, rv, 0.5, lambda, lambda);
  for (int n = 1; n < 5000; ++n) s = hrlsb_step(s, r, rv, 0.5, lambda, lambda);
  EXPECT_LE((s.x_cur - theta).norm() / theta.norm(), 1e-6);
}

TEST(Cregls, HugeRhoPinsSecondBlock) {
  const std::size_t dim = 3;
  const Vec c = vec({1, -2, 0.5});
  SolverState s = cregls_init(c, Vec::Zero(dim), SymMat::zero(dim), Vec::Zero(dim), 0.5, 0.1, 1e9);
  for (int n = 0; n < 50; ++n) {
    EXPECT_EQ(s.x_cur.tail(dim), Vec::Zero(dim));
    EXPECT_EQ(cregls_estimate(s.x_cur), 0.5 * Vec(s.x_cur.head(dim)));
    s = cregls_step(s, SymMat::zero(dim), Vec::Zero(dim), 0.5, 0.1, 1e9);
  }
}

TEST(Cregls, TinyRhoReachesLeastSquares) {
  Rng rng(52);
  const std::size_t dim = 10;
  const SymMat r = test::random_spd(dim, rng);
  const Vec theta = iid_stream(dim, rng);
  const Vec rv = r * theta;
  SolverState s = cregls_init(Vec::Zero(dim), Vec::Zero(dim), r, rv, 0.5, 1.0, 1e-12);
  for (int n = 1; n < 3000; ++n) s = cregls_step(s, r, rv, 0.5, 1.0, 1e-12);
  EXPECT_LE((cregls_estimate(s.x_cur) - theta).norm(), 1e-6);
}

TEST(ClassicalRls, Examples) {
  const Vec a = vec({1, 2, -1});
  const Vec w = vec({0.5, 0.25, 1});
  auto [p1, w1] = classical_rls_step(SymMat::identity(3), w, a, a.dot(w), 0.98);
  EXPECT_EQ(w1, w);

  auto [p2, w2] = classical_rls_step(SymMat::identity(3), Vec::Zero(3), vec({1, 0, 0}), 1.0, 1.0);
  EXPECT_EQ(w2, vec({0.5, 0, 0}));
  EXPECT_EQ(p2.matrix(), Vec(vec({0.5, 1, 1})).asDiagonal().toDenseMatrix());
}

TEST(ClassicalRls, MatchesNormalEquations) {
  Rng rng(53);
  const std::size_t dim = 8;
  const Vec theta = iid_stream(dim, rng);
  RlsFilter f(dim, RlsOptions{1.0, 1e-8});
  Mat ata = Mat::Zero(dim, dim);
  Vec atb = Vec::Zero(dim);
  for (std::size_t n = 0; n < 2 * dim; ++n) {
    const Vec a = iid_stream(dim, rng);
    f.observe(a, a.dot(theta));
    ata += a * a.transpose();
    atb += a * a.dot(theta);
  }
  const Vec ls = ata.ldlt().solve(atb);
  EXPECT_LE((f.estimate() - ls).norm(), 1e-6);
  EXPECT_LE((f.estimate() - theta).norm(), 1e-6);
}

TEST(Fejer, StationaryAtSolution) {
  const Vec xs = vec({1, 0});
  const AffineMap t = grad_map(SymMat::identity(2), xs, 1.0, 1.0);
  FejerDiag d(t, xs, 0.5, 0.3, l1_min_norm_subgradient(xs), xs);
  const Vec v0 = d.v();
  for (int n = 0; n < 5; ++n) d = fejer_diag_update(d, xs);
  EXPECT_EQ(d.v(), v0);
  for (double v : d.theta_norm_trace()) EXPECT_EQ(v, d.theta_norm_trace().front());
}

TEST(Fejer, VIncrementFormula) {
  const Vec xs = vec({0, 0});
  const AffineMap t = grad_map(SymMat::identity(2), xs, 1.0, 1.0);  // Q = 0, U = I
  FejerDiag d(t, xs, 0.5, 0.7, l1_min_norm_subgradient(xs), xs);
  EXPECT_LE((d.u().matrix() - Mat::Identity(2, 2)).norm(), 1e-15);
  d.update(vec({1, 0}));
  EXPECT_EQ(d.v(), vec({0.5, 0}));
  EXPECT_TRUE(d.v_star_available());
}

TEST(Fejer, VStarUnavailableWhenInconsistent) {
  // Q = diag(0, 1) -> U = diag(1, 0); the subgradient has mass on the kernel.
  const SymMat r = SymMat::diagonal(vec({2, 0}));
  const AffineMap t = grad_map(r, vec({2, 0}), 1.0, 2.0);
  const Vec xs = vec({1, 1});
  FejerDiag d(t, xs, 0.5, 0.1, l1_min_norm_subgradient(xs), Vec::Zero(2));
  EXPECT_FALSE(d.v_star_available());
  EXPECT_EQ(d.v_star(), Vec::Zero(2));
}

TEST(Fejer, ExactHrlsaTraceNonIncreasing) {
  Rng rng(54);
  const std::size_t dim = 10;
  const SymMat r = test::random_spd(dim, rng);
  const Vec theta = make_sparse_system(dim, 30, rng);
  const Vec rv = r * theta;
  const double varpi = test::eigen_oracle_values(r)(0);
  const AffineMap t = grad_map(r, rv, 1.0, varpi);
  const double lambda = 0.05;
  SolverState s = hrlsa_init(Vec::Zero(dim), r, rv, varpi, 0.5, lambda);
  FejerDiag d(t, theta, 0.5, lambda, l1_min_norm_subgradient(theta), Vec::Zero(dim));
  ASSERT_TRUE(d.v_star_available());
  d.update(s.x_cur);
  for (int n = 1; n < 2000; ++n) {
    s = hrlsa_step(s, r, rv, varpi, 0.5, lambda);
    d.update(s.x_cur);
  }
  const auto& tr = d.theta_norm_trace();
  for (std::size_t i = 2; i < tr.size(); ++i) EXPECT_LE(tr[i], tr[i - 1] + 1e-9) << i;
  EXPECT_LE((s.x_cur - theta).norm(), 1e-6);
}

TEST(Hrlsa, WindowedStepSizesDecrease) {
  // Eigenvalues spread over three decades and a dense solution keep the run
  // above rounding level past n = 1000.
  Rng rng(55);
  const std::size_t dim = 20;
  Mat basis(dim, dim);
  for (Eigen::Index j = 0; j < basis.cols(); ++j) basis.col(j) = iid_stream(dim, rng);
  const Mat v = Eigen::HouseholderQR<Mat>(basis).householderQ();
  Vec spectrum(dim);
  for (std::size_t i = 0; i < dim; ++i) spectrum(i) = std::pow(10.0, -3.0 * i / (dim - 1.0));
  const SymMat r(Mat(v * spectrum.asDiagonal() * v.transpose()));
  const Vec theta = make_sparse_system(dim, 100, rng);
  const Vec rv = r * theta;
  const double varpi = test::eigen_oracle_values(r)(0);
  const AffineMap t = grad_map(r, rv, 1.0, varpi);
  const double lambda = 0.01;
  SolverState s = hrlsa_init(Vec::Zero(dim), r, rv, varpi, 0.5, lambda);
  std::vector<double> deltas{(s.x_cur - s.x_prev).norm()};
  for (int n = 1; n < 60000; ++n) {
    s = hrlsa_step(s, r, rv, varpi, 0.5, lambda);
    deltas.push_back((s.x_cur - s.x_prev).norm());
  }
  const auto window_max = [&](std::size_t n) {
    return *std::max_element(deltas.begin() + n, deltas.begin() + n + 51);
  };
  EXPECT_GT(window_max(1000), 1e-12);
  EXPECT_GT(window_max(100), window_max(500));
  EXPECT_GT(window_max(500), window_max(1000));
  EXPECT_LE((t.apply(s.x_cur) - s.x_cur).norm(), 1e-6);
}

TEST(L1Subgradient, MinimalNorm) {
  EXPECT_EQ(l1_min_norm_subgradient(vec({2, 0, -0.1}), 3.0), vec({3, 0, -3}));
}

}  // namespace
}  // namespace hsdm
