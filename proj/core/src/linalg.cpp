#include "hsdm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "hsdm/error.hpp"

namespace hsdm {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

SymMat::SymMat(std::size_t dim) : m_(Mat::Zero(idx(dim), idx(dim))) {}

SymMat::SymMat(const Mat& m) : m_(m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, "symmetric matrix has non-finite entries");
  }
  mirror_lower();
}

SymMat SymMat::identity(std::size_t dim) {
  return SymMat(Mat::Identity(idx(dim), idx(dim)));
}

SymMat SymMat::zero(std::size_t dim) { return SymMat(dim); }

SymMat SymMat::diagonal(const Vec& d) { return SymMat(Mat(d.asDiagonal())); }

SymMat SymMat::checked(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  }
  const double residual = (m - m.transpose()).norm();
  if (residual > LinalgTolerances::kSymmetryTol * (1.0 + m.norm())) {
    throw Error(ErrorCode::InvalidParams,
                "matrix is not symmetric (residual " + std::to_string(residual) + ")");
  }
  return SymMat(m);
}

void SymMat::mirror_lower() {
  const Eigen::Index n = m_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) m_(j, i) = m_(i, j);
  }
}

SymMat operator+(const SymMat& a, const SymMat& b) { return SymMat(Mat(a.matrix() + b.matrix())); }
SymMat operator-(const SymMat& a, const SymMat& b) { return SymMat(Mat(a.matrix() - b.matrix())); }
SymMat operator*(double s, const SymMat& a) { return SymMat(Mat(s * a.matrix())); }

Vec CholFactor::solve(const Vec& b) const {
  if (b.size() != lower.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length differs from factor");
  }
  Vec y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

CholFactor cholesky(const SymMat& a) {
  const std::size_t d = a.dim();
  if (d == 0) return CholFactor{Mat(0, 0), 0.0};

  double scale = a.trace() / static_cast<double>(d);
  if (!(scale > 0.0)) scale = 1.0;

  auto attempt = [&](double shift) -> std::optional<CholFactor> {
    Mat shifted = a.matrix();
    shifted.diagonal().array() += shift;
    Eigen::LLT<Mat> llt(shifted);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Mat lower = llt.matrixL();
    if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any()) return std::nullopt;
    return CholFactor{std::move(lower), shift};
  };

  if (auto f = attempt(0.0)) return *f;
  for (double rel = LinalgTolerances::kShiftStart;
       rel <= LinalgTolerances::kShiftMax * (1.0 + 1e-9);
       rel *= LinalgTolerances::kShiftFactor) {
    if (auto f = attempt(rel * scale)) return *f;
  }
  throw Error(ErrorCode::NotPositiveDefinite,
              "Cholesky failed for every shift up to 1e-6*trace/D");
}

Vec chol_solve(const SymMat& a, const Vec& b) { return cholesky(a).solve(b); }

EigenDecomposition eig_sym(const SymMat& a) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.dim());
  Mat w = a.matrix();
  Mat v = Mat::Identity(n, n);

  const double fro = w.norm();
  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += w(i, j) * w(i, j);
    return std::sqrt(s);
  };

  if (fro > 0.0) {
    const std::size_t cap =
        LinalgTolerances::kSweepFactor * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    const double target = LinalgTolerances::kJacobiRelTol * fro;
    std::size_t sweep = 0;
    while (off_norm() > target) {
      if (sweep++ >= cap) {
        throw Error(ErrorCode::NoConvergence, "Jacobi sweep cap reached");
      }
      for (Eigen::Index p = 0; p + 1 < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const double apq = w(p, q);
          if (apq == 0.0) continue;
          if (std::abs(apq) < 1e-18 * (std::abs(w(p, p)) + std::abs(w(q, q)))) {
            w(p, q) = 0.0;
            w(q, p) = 0.0;
            continue;
          }
          const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (Eigen::Index k = 0; k < n; ++k) {
            const double wkp = w(k, p);
            const double wkq = w(k, q);
            w(k, p) = c * wkp - s * wkq;
            w(k, q) = s * wkp + c * wkq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const double wpk = w(p, k);
            const double wqk = w(q, k);
            w(p, k) = c * wpk - s * wqk;
            w(q, k) = s * wpk + c * wqk;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
          w(p, q) = 0.0;
          w(q, p) = 0.0;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return w(i, i) > w(j, j); });

  EigenDecomposition out{Vec(n), Mat(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = w(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

SymMat sqrt_psd(const SymMat& a) {
  const EigenDecomposition e = eig_sym(a);
  if (e.values.size() == 0) return a;
  const double norm = e.values.cwiseAbs().maxCoeff();
  const double floor = -LinalgTolerances::kPsdTol * norm;
  if (e.values.minCoeff() < floor) {
    throw Error(ErrorCode::NotPSD,
                "matrix has eigenvalue " + std::to_string(e.values.minCoeff()));
  }
  // Eigenvalues within the tolerance band around zero are rounding noise; a
  // noise value of 1e-16 would otherwise contribute a 1e-8 root.
  Vec roots(e.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = e.values(i) > -floor ? std::sqrt(e.values(i)) : 0.0;
  }
  return SymMat(Mat(e.vectors * roots.asDiagonal() * e.vectors.transpose()));
}

Vec pinv_solve(const SymMat& a, const Vec& b, double rel_tol) {
  const EigenDecomposition e = eig_sym(a);
  if (e.values.size() == 0) return Vec(0);
  const double cutoff = rel_tol * e.values.cwiseAbs().maxCoeff();
  Vec coeff = e.vectors.transpose() * b;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff(i) = std::abs(e.values(i)) > cutoff ? coeff(i) / e.values(i) : 0.0;
  }
  return e.vectors * coeff;
}

double spectral_norm(const SymMat& a) {
  const EigenDecomposition e = eig_sym(a);
  return e.values.size() == 0 ? 0.0 : e.values.cwiseAbs().maxCoeff();
}

double lambda_max(const SymMat& a) {
  const EigenDecomposition e = eig_sym(a);
  return e.values.size() == 0 ? 0.0 : e.values(0);
}

PowerEstimate power_iter_estimate(const SymMat& a, const Vec& p_prev, double eps_w,
                                  std::size_t inner_steps) {
  if (!(eps_w > 0.0)) throw Error(ErrorCode::InvalidParams, "eps_varpi must be positive");
  if (inner_steps == 0) throw Error(ErrorCode::InvalidParams, "power iteration needs >= 1 step");
  if (static_cast<std::size_t>(p_prev.size()) != a.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "power-iteration vector length differs from matrix");
  }
  Vec p = p_prev;
  for (std::size_t k = 0; k < inner_steps; ++k) {
    Vec q = a * p;
    const double qn = q.norm();
    if (qn < LinalgTolerances::kZeroMatrix) return PowerEstimate{eps_w, p};
    p = q / qn;
  }
  return PowerEstimate{p.dot(a * p) + eps_w, std::move(p)};
}

}  // namespace hsdm
