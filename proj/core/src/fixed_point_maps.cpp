#include "hsdm/fixed_point_maps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsdm/error.hpp"

namespace hsdm {

AffineMap::AffineMap(SymMat q, Vec pi) : q_(std::move(q)), pi_(std::move(pi)) {
  if (static_cast<std::size_t>(pi_.size()) != q_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "affine offset length differs from linear part");
  }
  if (!pi_.allFinite()) throw Error(ErrorCode::NonFinite, "affine offset has non-finite entries");
}

AffineMap AffineMap::identity(std::size_t dim) {
  return AffineMap(SymMat::identity(dim), Vec::Zero(static_cast<Eigen::Index>(dim)));
}

Vec AffineMap::apply(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "affine map applied to vector of wrong length");
  }
  return q_.matrix() * x + pi_;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.5 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidAlpha, "alpha must lie in [0.5, 1), got " + std::to_string(alpha));
  }
}

AveragedMap::AveragedMap(AffineMap base, double alpha) : base_(std::move(base)), alpha_(alpha) {
  check_alpha(alpha);
}

Vec AveragedMap::apply(const Vec& x) const {
  return alpha_ * base_.apply(x) + (1.0 - alpha_) * x;
}

AffineMap AveragedMap::as_affine() const {
  Mat q = alpha_ * base_.q().matrix();
  q.diagonal().array() += 1.0 - alpha_;
  return AffineMap(SymMat(q), alpha_ * base_.pi());
}

AffineMap grad_map(const SymMat& r_mat, const Vec& r_vec, double mu, double varpi, bool verify) {
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw Error(ErrorCode::InvalidMu, "mu must lie in (0, 1], got " + std::to_string(mu));
  }
  if (!(varpi > 0.0) || !std::isfinite(varpi)) {
    throw Error(ErrorCode::NotDominating, "varpi must be positive and finite");
  }
  if (static_cast<std::size_t>(r_vec.size()) != r_mat.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "r length differs from R");
  }
  if (verify) {
    const double norm = spectral_norm(r_mat);
    if (varpi < norm - 1e-10) {
      std::ostringstream msg;
      msg << "varpi " << varpi << " below ||R|| = " << norm;
      throw Error(ErrorCode::NotDominating, msg.str());
    }
  }
  const double step = mu / varpi;
  Mat q = -step * r_mat.matrix();
  q.diagonal().array() += 1.0;
  return AffineMap(SymMat(q), step * r_vec);
}

AffineMap prox_map(const SymMat& r_mat, const Vec& r_vec, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::InvalidParams, "kappa must be positive");
  }
  if (static_cast<std::size_t>(r_vec.size()) != r_mat.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "r length differs from R");
  }
  const auto d = static_cast<Eigen::Index>(r_mat.dim());
  Mat shifted = kappa * r_mat.matrix();
  shifted.diagonal().array() += 1.0;
  const CholFactor chol = cholesky(SymMat(shifted));

  Mat q(d, d);
  for (Eigen::Index j = 0; j < d; ++j) q.col(j) = chol.solve(Vec::Unit(d, j));
  SymMat qs(q);
  Vec pi = kappa * (qs.matrix() * r_vec);
  return AffineMap(std::move(qs), std::move(pi));
}

AffineMap consensus_projection(std::size_t blocks, std::size_t block_dim) {
  if (blocks < 2 || block_dim < 1) {
    throw Error(ErrorCode::InvalidParams, "consensus projection needs >= 2 blocks of dim >= 1");
  }
  const auto k = static_cast<Eigen::Index>(blocks);
  const auto d = static_cast<Eigen::Index>(block_dim);
  Mat q = Mat::Zero(k * d, k * d);
  const double w = 1.0 / static_cast<double>(blocks);
  for (Eigen::Index bi = 0; bi < k; ++bi)
    for (Eigen::Index bj = 0; bj < k; ++bj)
      for (Eigen::Index i = 0; i < d; ++i) q(bi * d + i, bj * d + i) = w;
  return AffineMap(SymMat(q), Vec::Zero(k * d));
}

AveragedMap averaged(const AffineMap& map, double alpha) { return AveragedMap(map, alpha); }

AffineMap convex_combination(double beta, const AffineMap& t1, const AffineMap& t2) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "convex weight must lie in [0, 1]");
  }
  if (t1.dim() != t2.dim()) throw Error(ErrorCode::DimensionMismatch, "maps differ in dimension");
  return AffineMap(SymMat(Mat(beta * t1.q().matrix() + (1.0 - beta) * t2.q().matrix())),
                   beta * t1.pi() + (1.0 - beta) * t2.pi());
}

MembershipReport verify_family_membership(const AffineMap& map,
                                          const std::optional<std::pair<SymMat, Vec>>& constraint,
                                          const MembershipTolerances& tol) {
  MembershipReport rep;
  const Mat& q = map.q().matrix();
  rep.symmetry_residual = (q - q.transpose()).norm();

  const EigenDecomposition qe = eig_sym(map.q());
  if (qe.values.size() > 0) {
    rep.q_min_eig = qe.values.minCoeff();
    rep.q_norm = qe.values.cwiseAbs().maxCoeff();
  }

  std::ostringstream why;
  if (rep.symmetry_residual > tol.symmetry) why << "Q not symmetric; ";
  if (rep.q_min_eig < tol.min_eig) why << "Q not positive (min eig " << rep.q_min_eig << "); ";
  if (rep.q_norm > tol.norm) why << "||Q|| = " << rep.q_norm << " exceeds 1; ";

  if (constraint) {
    const SymMat& r_mat = constraint->first;
    const Vec& r_vec = constraint->second;
    if (r_mat.dim() != map.dim()) throw Error(ErrorCode::DimensionMismatch, "R differs from map");
    rep.fixed_point_checked = true;

    const EigenDecomposition re = eig_sym(r_mat);
    const double r_norm = re.values.size() > 0 ? re.values.cwiseAbs().maxCoeff() : 0.0;
    const double kernel_cut = 1e-9 * std::max(r_norm, 1e-300);
    std::vector<Eigen::Index> kernel;
    for (Eigen::Index i = 0; i < re.values.size(); ++i) {
      if (std::abs(re.values(i)) <= kernel_cut) kernel.push_back(i);
    }
    rep.r_singular = !kernel.empty();

    Vec z;
    if (!rep.r_singular) {
      z = chol_solve(r_mat, r_vec);
    } else {
      Vec coeff = re.vectors.transpose() * r_vec;
      for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        coeff(i) = std::abs(re.values(i)) > kernel_cut ? coeff(i) / re.values(i) : 0.0;
      }
      z = re.vectors * coeff;
    }
    rep.normal_eq_residual = (r_mat * z - r_vec).norm();
    if (rep.normal_eq_residual > 1e-8 * (1.0 + r_vec.norm())) {
      why << "normal equations inconsistent (residual " << rep.normal_eq_residual << "); ";
    }

    auto probe = [&](const Vec& point) {
      const double res = (map.apply(point) - point).norm() / std::max(1.0, point.norm());
      rep.fixed_point_residual = std::max(rep.fixed_point_residual, res);
    };
    probe(z);
    for (Eigen::Index k : kernel) probe(z + re.vectors.col(k));
    if (rep.fixed_point_residual > tol.fixed_point) {
      why << "fixed-point residual " << rep.fixed_point_residual << "; ";
    }

    std::size_t fix_dim = 0;
    for (Eigen::Index i = 0; i < qe.values.size(); ++i) {
      if (std::abs(1.0 - qe.values(i)) <= 1e-9) ++fix_dim;
    }
    rep.kernel_dims_match = fix_dim == kernel.size();
    if (!rep.kernel_dims_match) {
      why << "dim ker(I-Q) = " << fix_dim << " but dim ker R = " << kernel.size() << "; ";
    }
  }

  rep.failure = why.str();
  rep.passed = rep.failure.empty();
  return rep;
}

}  // namespace hsdm
