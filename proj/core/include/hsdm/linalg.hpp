#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace hsdm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Numerical constants shared by the dense kernels.
struct LinalgTolerances {
  // Cholesky shift escalation, as multiples of trace(A)/D.
  static constexpr double kShiftStart = 1e-12;
  static constexpr double kShiftMax = 1e-6;
  static constexpr double kShiftFactor = 10.0;
  // Power iteration treats ||A p|| below this as a zero matrix.
  static constexpr double kZeroMatrix = 1e-14;
  // Jacobi stops once the off-diagonal Frobenius mass drops below this
  // fraction of ||A||_F; the sweep cap is kSweepFactor * D^2.
  static constexpr double kJacobiRelTol = 1e-15;
  static constexpr std::size_t kSweepFactor = 10;
  // sqrt_psd rejects eigenvalues below -kPsdTol * ||A|| and zeroes those
  // within kPsdTol * ||A|| of zero.
  static constexpr double kPsdTol = 1e-10;
  // Symmetry residual tolerated when adopting an arbitrary dense matrix.
  static constexpr double kSymmetryTol = 1e-10;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Dense symmetric matrix. The lower triangle is authoritative; the upper
/// triangle is mirrored from it on construction so that A(i,j) == A(j,i)
/// holds bit-for-bit.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(std::size_t dim);
  /// Adopts the lower triangle of `m`. Throws NonFinite on NaN/Inf entries
  /// and DimensionMismatch if `m` is not square.
  explicit SymMat(const Mat& m);

  static SymMat identity(std::size_t dim);
  static SymMat zero(std::size_t dim);
  static SymMat diagonal(const Vec& d);
  /// Adopts `m` only if it is symmetric to within kSymmetryTol * (1 + ||m||_F).
  static SymMat checked(const Mat& m);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  Vec operator*(const Vec& x) const { return m_ * x; }
  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }

 private:
  void mirror_lower();
  Mat m_;
};

SymMat operator+(const SymMat& a, const SymMat& b);
SymMat operator-(const SymMat& a, const SymMat& b);
SymMat operator*(double s, const SymMat& a);

struct CholFactor {
  Mat lower;
  double shift = 0.0;

  Vec solve(const Vec& b) const;
};

/// Cholesky factorization of A + shift*I. The shift starts at zero and, on
/// failure, escalates from 1e-12 to 1e-6 times trace(A)/D in decades.
/// Throws NotPositiveDefinite when every shift fails.
CholFactor cholesky(const SymMat& a);

/// Solves (A + shift*I) x = b with the shift policy of `cholesky`.
Vec chol_solve(const SymMat& a, const Vec& b);

struct EigenDecomposition {
  Vec values;   // descending
  Mat vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Cyclic Jacobi eigen-solver for symmetric matrices.
EigenDecomposition eig_sym(const SymMat& a);

/// Principal square root of a PSD matrix. Eigenvalues within
/// kPsdTol * ||A|| of zero are treated as zero.
SymMat sqrt_psd(const SymMat& a);

/// Moore-Penrose pseudoinverse applied to `b`, eigenvalues below
/// `rel_tol * max|lambda|` treated as zero.
Vec pinv_solve(const SymMat& a, const Vec& b, double rel_tol = 1e-10);

double spectral_norm(const SymMat& a);
double lambda_max(const SymMat& a);

struct PowerEstimate {
  double varpi = 0.0;
  Vec p;
};

/// Runs `inner_steps` rounds of q = A p, p = q/||q|| from `p_prev` and
/// returns varpi = p'Ap + eps_w with the final p. A numerically zero A
/// returns varpi = eps_w and leaves p untouched.
PowerEstimate power_iter_estimate(const SymMat& a, const Vec& p_prev, double eps_w,
                                  std::size_t inner_steps = 1);

}  // namespace hsdm
