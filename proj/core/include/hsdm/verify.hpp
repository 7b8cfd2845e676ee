#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsdm {

/// Outcome of one randomized property suite.
struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest residual observed, in the suite's own units
  std::string detail;  // first failure, if any
};

/// 100 random (R, r) pairs with D <= 30 (a quarter of them rank-deficient):
/// grad_map and prox_map pass verify_family_membership and are nonexpansive
/// on 200 random pairs each; convex combinations stay in the family.
SuiteResult verify_mapping_suite(std::uint64_t seed = 1);

/// soft_threshold and quad_prox against the grid oracle on 1000 scalar
/// instances, the prox optimality inequality on 100 perturbations per
/// instance, and the quad_prox subgradient identity.
SuiteResult verify_prox_suite(std::uint64_t seed = 2);

/// Streaming moments against batch summation over 1000 samples (gamma = 1
/// and 0.9) and the noiseless identity R_n theta = r_n.
SuiteResult verify_stats_suite(std::uint64_t seed = 3);

std::vector<SuiteResult> verify_all(std::uint64_t seed = 1);

}  // namespace hsdm
