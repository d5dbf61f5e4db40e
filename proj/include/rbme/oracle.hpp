#pragma once

#include <cstddef>
#include <vector>

#include "rbme/linalg.hpp"
#include "rbme/model.hpp"

namespace rbme {

struct OracleResult {
  std::vector<std::size_t> chosen_users;
  std::vector<std::vector<std::size_t>> chosen_samples;  // two-level only, parallel to chosen_users
  double objective = 0.0;  // top eigenvalue of the selection's covariance
  Vector mean;
  bool feasible = true;  // two-level: pooled constraint met by the returned selection
};

inline constexpr std::size_t kSubsetOracleMaxUsers = 20;
inline constexpr std::size_t kTwoLevelOracleMaxUsers = 8;
inline constexpr std::size_t kTwoLevelOracleMaxSamples = 6;

/// Exhaustive search over all k-subsets of the batch means for the one whose
/// mean-centered covariance has the smallest top eigenvalue. Ties go to the
/// lexicographically first subset.
OracleResult brute_force_subset_mean(const PointSet& batch_means, std::size_t k);

/// Exhaustive two-level search: ceil((1-eps)N) users, ceil((1-alpha)n)
/// samples each, minimizing the covariance of the cleaned user means subject
/// to pooled-sample covariance <= 2. Falls back to the unconstrained minimizer
/// (feasible = false) when no selection meets the pooled constraint.
OracleResult brute_force_two_level(const BatchDataset& ds, double eps, double alpha);

/// ceil(fraction * total) with a guard against representation noise.
std::size_t ceil_count(double fraction, std::size_t total);

}  // namespace rbme
