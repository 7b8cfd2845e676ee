#include <gtest/gtest.h>

#include "hsdm/error.hpp"
#include "hsdm/fixed_point_maps.hpp"
#include "test_util.hpp"

namespace hsdm {
namespace {

using test::vec;

void expect_mat_near(const Mat& a, const Mat& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << a << "\nvs\n" << b;
}

TEST(GradMap, Examples) {
  const AffineMap t0 = grad_map(SymMat::identity(2), Vec::Zero(2), 1.0, 1.0);
  expect_mat_near(t0.q().matrix(), Mat::Zero(2, 2), 0.0);
  EXPECT_EQ(t0.pi(), Vec::Zero(2));

  const AffineMap t1 = grad_map(2.0 * SymMat::identity(2), vec({2, 2}), 1.0, 2.0);
  expect_mat_near(t1.q().matrix(), Mat::Zero(2, 2), 0.0);
  EXPECT_EQ(t1.apply(vec({5, -7})), vec({1, 1}));

  // Fix T = {(1, t)}: solve (I - Q) x = pi by hand; Q = diag(0, 1), pi = (1, 0).
  const SymMat r = SymMat::diagonal(vec({2, 0}));
  const AffineMap t2 = grad_map(r, vec({2, 0}), 1.0, 2.0);
  expect_mat_near(t2.q().matrix(), Vec(vec({0, 1})).asDiagonal().toDenseMatrix(), 0.0);
  EXPECT_EQ(t2.pi(), vec({1, 0}));
  for (double t : {-3.0, 0.0, 4.5}) {
    EXPECT_EQ(t2.apply(vec({1, t})), vec({1, t}));
    EXPECT_EQ((r * vec({1, t}) - vec({2, 0})).norm(), 0.0);
  }
  EXPECT_NE(t2.apply(vec({0, 0})), vec({0, 0}));
}

TEST(GradMap, Errors) {
  const SymMat r = SymMat::diagonal(vec({2, 1}));
  for (double mu : {0.0, -0.1, 1.5}) {
    try {
      grad_map(r, Vec::Zero(2), mu, 2.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidMu);
    }
  }
  try {
    grad_map(r, Vec::Zero(2), 1.0, 1.5, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDominating);
  }
  // Unverified construction accepts the same data.
  EXPECT_NO_THROW(grad_map(r, Vec::Zero(2), 1.0, 1.5));
}

TEST(GradMap, EigenvaluesInUnitBox) {
  Rng rng(21);
  for (int k = 0; k < 30; ++k) {
    const std::size_t dim = 1 + rng.below(20);
    const SymMat r = test::random_psd(dim, 1 + rng.below(dim + 2), rng);
    const double varpi = test::eigen_oracle_values(r)(0) * (1.0 + rng.uniform());
    const double mu = 1.0 - rng.uniform();
    const Vec ev = test::eigen_oracle_values(grad_map(r, Vec::Zero(dim), mu, varpi + 1e-12).q());
    EXPECT_LE(ev(0), 1.0 + 1e-12);
    EXPECT_GE(ev(ev.size() - 1), -1e-12);
  }
}

TEST(ProxMap, Examples) {
  const AffineMap t0 = prox_map(SymMat::zero(2), Vec::Zero(2), 1.0);
  expect_mat_near(t0.q().matrix(), Mat::Identity(2, 2), 1e-15);
  EXPECT_EQ(t0.pi(), Vec::Zero(2));

  const AffineMap t1 = prox_map(SymMat::identity(2), vec({1, 1}), 1.0);
  expect_mat_near(t1.q().matrix(), 0.5 * Mat::Identity(2, 2), 1e-15);
  EXPECT_NEAR((t1.pi() - vec({0.5, 0.5})).norm(), 0.0, 1e-15);
  EXPECT_NEAR((t1.apply(vec({1, 1})) - vec({1, 1})).norm(), 0.0, 1e-15);

  const AffineMap t2 = prox_map(SymMat::diagonal(vec({3, 1})), vec({3, 1}), 1.0);
  expect_mat_near(t2.q().matrix(), Vec(vec({0.25, 0.5})).asDiagonal().toDenseMatrix(), 1e-15);
  EXPECT_NEAR((t2.pi() - vec({0.75, 0.5})).norm(), 0.0, 1e-15);
  EXPECT_NEAR((t2.apply(vec({1, 1})) - vec({1, 1})).norm(), 0.0, 1e-15);
}

TEST(Maps, FixedPointIsNormalEquationSolution) {
  Rng rng(22);
  for (int k = 0; k < 100; ++k) {
    const std::size_t dim = 1 + rng.below(30);
    const SymMat r = test::random_spd(dim, rng);
    const Vec rv = iid_stream(dim, rng);
    // Oracle: normal-equation solution via Eigen's LDLT, independent of chol_solve.
    const Vec z = r.matrix().ldlt().solve(rv);
    const double varpi = test::eigen_oracle_values(r)(0);
    EXPECT_LE((grad_map(r, rv, 1.0, varpi).apply(z) - z).norm(), 1e-7);
    EXPECT_LE((prox_map(r, rv, 0.7).apply(z) - z).norm(), 1e-7);
  }
}

TEST(ConsensusProjection, Examples) {
  const AffineMap p2 = consensus_projection(2, 1);
  EXPECT_EQ(p2.apply(vec({1, 3})), vec({2, 2}));
  const AffineMap p2d = consensus_projection(2, 3);
  const Vec x = vec({1, -2, 5});
  Vec xx(6);
  xx << x, x;
  EXPECT_NEAR((p2d.apply(xx) - xx).norm(), 0.0, 1e-15);
  const AffineMap p3 = consensus_projection(3, 1);
  EXPECT_NEAR((p3.apply(vec({0, 3, 6})) - vec({3, 3, 3})).norm(), 0.0, 1e-14);
  for (const AffineMap* p : {&p2, &p2d, &p3}) {
    const Mat& q = p->q().matrix();
    expect_mat_near(q * q, q, 1e-12);
    expect_mat_near(q.transpose(), q, 1e-12);
    EXPECT_EQ(p->pi(), Vec::Zero(q.rows()));
  }
}

TEST(Averaged, Examples) {
  const AveragedMap id = averaged(AffineMap::identity(3), 0.5);
  EXPECT_EQ(id.apply(vec({1, 2, 3})), vec({1, 2, 3}));

  const AffineMap constant(SymMat::zero(1), vec({2}));
  const AveragedMap half = averaged(constant, 0.5);
  EXPECT_DOUBLE_EQ(half.apply(vec({0}))(0), 1.0);
  EXPECT_DOUBLE_EQ(half.apply(vec({2}))(0), 2.0);

  const AveragedMap a75 = averaged(grad_map(SymMat::identity(4), Vec::Zero(4), 1.0, 1.0), 0.75);
  EXPECT_EQ(a75.apply(Vec::Ones(4)), Vec::Constant(4, 0.25));
  const AffineMap as = a75.as_affine();
  EXPECT_EQ(as.apply(Vec::Ones(4)), Vec::Constant(4, 0.25));
}

TEST(Averaged, AlphaOutsideRangeRejected) {
  for (double a : {0.49, 1.0, -1.0}) {
    try {
      averaged(AffineMap::identity(1), a);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidAlpha);
    }
  }
}

TEST(Membership, Examples) {
  const MembershipReport r0 = verify_family_membership(
      grad_map(SymMat::identity(2), Vec::Zero(2), 1.0, 1.0),
      std::make_pair(SymMat::identity(2), Vec(Vec::Zero(2))));
  EXPECT_TRUE(r0.passed) << r0.failure;
  EXPECT_EQ(r0.q_norm, 0.0);

  const SymMat r = SymMat::diagonal(vec({2, 1}));
  const MembershipReport r1 =
      verify_family_membership(grad_map(r, vec({2, 1}), 1.0, 2.0), std::make_pair(r, vec({2, 1})));
  EXPECT_TRUE(r1.passed) << r1.failure;
  EXPECT_TRUE(r1.fixed_point_checked);
  EXPECT_FALSE(r1.r_singular);

  const MembershipReport bad =
      verify_family_membership(AffineMap(1.2 * SymMat::identity(2), Vec::Zero(2)));
  EXPECT_FALSE(bad.passed);
  EXPECT_NEAR(bad.q_norm, 1.2, 1e-12);
}

TEST(Membership, SingularConstraintAndWrongFixedPoints) {
  const SymMat r = SymMat::diagonal(vec({2, 0}));
  const MembershipReport ok =
      verify_family_membership(grad_map(r, vec({2, 0}), 1.0, 2.0), std::make_pair(r, vec({2, 0})));
  EXPECT_TRUE(ok.passed) << ok.failure;
  EXPECT_TRUE(ok.r_singular);

  // A valid member of the family, but for a different constraint.
  const MembershipReport wrong = verify_family_membership(
      grad_map(r, vec({4, 0}), 1.0, 2.0), std::make_pair(r, vec({2, 0})));
  EXPECT_FALSE(wrong.passed);

  // Negative Q is not positive.
  const MembershipReport neg =
      verify_family_membership(AffineMap(-0.5 * SymMat::identity(2), Vec::Zero(2)));
  EXPECT_FALSE(neg.passed);
  EXPECT_LT(neg.q_min_eig, 0.0);
}

TEST(Membership, ConvexCombinationsStayInFamily) {
  Rng rng(23);
  for (int k = 0; k < 20; ++k) {
    const std::size_t dim = 2 + rng.below(10);
    const SymMat r = test::random_psd(dim, k % 2 == 0 ? dim + 2 : dim - 1, rng);
    const Vec rv = r * iid_stream(dim, rng);
    const AffineMap g = grad_map(r, rv, 0.8, test::eigen_oracle_values(r)(0) + 0.1);
    const AffineMap p = prox_map(r, rv, 2.0);
    for (double beta : {0.0, 0.3, 1.0}) {
      const MembershipReport rep =
          verify_family_membership(convex_combination(beta, g, p), std::make_pair(r, rv));
      EXPECT_TRUE(rep.passed) << rep.failure;
    }
  }
}

TEST(Maps, Nonexpansive) {
  Rng rng(24);
  const SymMat r = test::random_psd(12, 20, rng);
  const Vec rv = iid_stream(12, rng);
  const AffineMap maps[] = {grad_map(r, rv, 1.0, test::eigen_oracle_values(r)(0)),
                            prox_map(r, rv, 3.0), consensus_projection(3, 4)};
  for (const AffineMap& t : maps) {
    for (int k = 0; k < 200; ++k) {
      const Vec x = iid_stream(12, rng);
      const Vec y = iid_stream(12, rng);
      EXPECT_LE((t.apply(x) - t.apply(y)).norm(), (1 + 1e-10) * (x - y).norm());
    }
  }
}

}  // namespace
}  // namespace hsdm
