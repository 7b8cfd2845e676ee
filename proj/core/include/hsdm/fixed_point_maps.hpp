#pragma once

#include <optional>

#include "hsdm/linalg.hpp"

namespace hsdm {

/// Affine mapping T x = Q x + pi with Q symmetric.
///
/// Members of the nonexpansive family additionally satisfy Q positive and
/// ||Q|| <= 1; construction does not enforce that (a violating map must be
/// representable so that verify_family_membership can report it).
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(SymMat q, Vec pi);

  static AffineMap identity(std::size_t dim);

  std::size_t dim() const { return q_.dim(); }
  const SymMat& q() const { return q_; }
  const Vec& pi() const { return pi_; }

  Vec apply(const Vec& x) const;

 private:
  SymMat q_;
  Vec pi_;
};

/// T^(alpha) = alpha T + (1 - alpha) Id, alpha in [0.5, 1).
class AveragedMap {
 public:
  AveragedMap(AffineMap base, double alpha);

  const AffineMap& base() const { return base_; }
  double alpha() const { return alpha_; }

  Vec apply(const Vec& x) const;
  /// The averaged map written as an AffineMap: (alpha Q + (1-alpha) I, alpha pi).
  AffineMap as_affine() const;

 private:
  AffineMap base_;
  double alpha_;
};

void check_alpha(double alpha);

/// Gradient-type mapping (I - (mu/varpi) R) + (mu/varpi) r. With `verify`
/// set, varpi >= ||R|| is checked through eig_sym.
AffineMap grad_map(const SymMat& r_mat, const Vec& r_vec, double mu, double varpi,
                   bool verify = false);

/// Resolvent-type mapping (I + kappa R)^{-1} + kappa (I + kappa R)^{-1} r.
/// Q is materialized column by column with one Cholesky factorization.
AffineMap prox_map(const SymMat& r_mat, const Vec& r_vec, double kappa);

/// Orthogonal projection of R^{blocks*block_dim} onto the diagonal
/// subspace {(x, ..., x)}.
AffineMap consensus_projection(std::size_t blocks, std::size_t block_dim);

AveragedMap averaged(const AffineMap& map, double alpha);

/// beta * T1 + (1 - beta) * T2.
AffineMap convex_combination(double beta, const AffineMap& t1, const AffineMap& t2);

struct MembershipTolerances {
  double symmetry = 1e-10;
  double min_eig = -1e-10;
  double norm = 1.0 + 1e-10;
  double fixed_point = 1e-7;  // relative to max(1, ||z||)
};

struct MembershipReport {
  double symmetry_residual = 0.0;
  double q_min_eig = 0.0;
  double q_norm = 0.0;
  // Populated when (R, r) is supplied.
  bool fixed_point_checked = false;
  bool r_singular = false;
  double normal_eq_residual = 0.0;   // ||R z - r|| at the (pseudo-)solution z
  double fixed_point_residual = 0.0; // max ||T z' - z'|| / max(1, ||z'||)
  bool kernel_dims_match = true;     // dim ker(I - Q) == dim ker R
  bool passed = false;
  std::string failure;
};

/// Checks Q symmetric, positive, ||Q|| <= 1 and, when the normal-equation
/// pair (R, r) is given, that Fix T coincides with {x : R x = r}. For
/// singular R the affine set is probed at the pseudoinverse solution and
/// along each kernel direction.
MembershipReport verify_family_membership(
    const AffineMap& map, const std::optional<std::pair<SymMat, Vec>>& constraint = std::nullopt,
    const MembershipTolerances& tol = {});

}  // namespace hsdm
