#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbme/linalg.hpp"
#include "rbme/model.hpp"

namespace rbme {

/// User weights U_i (and W_i for the batch-level system) and sample weights
/// W_{i,j}, all relaxed from {0,1} to [0,1].
struct FilterWeights {
  std::vector<double> user_weights;    // N
  std::vector<double> sample_weights;  // N*n; empty for estimators that never touch samples
  double retained_user_mass = 0.0;
  double retained_sample_mass = 0.0;
};

struct EstimateReport {
  std::string estimator;
  Vector estimate;
  double certificate_user = 0.0;
  double certificate_sample = 0.0;
  double target_user = 0.0;
  double target_sample = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  FilterWeights weights;
};

/// eps' = min{max{eps, n alpha}, 1/10}: the enlarged user-discard budget.
double eps_prime(double eps, double alpha, std::size_t n);

/// tau = alpha / eps, with eps floored at 1/N so the user-level target stays finite at eps = 0.
double tau_rule(double eps, double alpha, std::size_t N);

/// Per-group mass floor for points stored group-contiguously (group g owns
/// points [g*group_size, (g+1)*group_size)).
struct GroupFloor {
  std::size_t group_size = 1;
  double floor = 0.0;
};

struct FilterOptions {
  std::size_t max_iter = 1000;
  PowerOptions power;
  std::span<const double> point_scale;  // fixed multipliers; effective weight = scale * w
  std::optional<GroupFloor> group_floor;
};

struct FilterResult {
  std::vector<double> weights;
  Vector mean;          // weighted mean at the returned weights
  EigenResult certificate;  // top eigenpair of the weighted covariance at the returned weights
  double mass = 0.0;    // sum of effective weights
  std::size_t iterations = 0;
  bool converged = false;
};

/// Multiplicative spectral filter: while the top eigenvalue of the weighted
/// covariance exceeds target, scale every weight by (1 - s_k / s_max) where
/// s_k is the squared projection on the top eigenvector. Stops, unconverged,
/// before the effective mass would drop below min_mass. Weights never increase.
FilterResult spectral_filter(const PointSet& points, double target, double min_mass,
                             std::span<const double> initial_weights = {}, const FilterOptions& options = {});

EstimateReport estimate_naive(const BatchDataset& ds);

/// Filters all Nn samples as one (eps + alpha)-corrupted set: target 2,
/// mass floor (1 - 2(eps + alpha)) N n.
EstimateReport estimate_pooled(const BatchDataset& ds, double eps, double alpha);

/// Batch-mean filter: target 2(1/n + alpha), mass floor (1 - 2 eps') N.
EstimateReport estimate_mean_shift(const BatchDataset& ds, double eps, double alpha);

struct TwoLevelOptions {
  std::size_t max_rounds = 25;
  std::size_t max_filter_iter = 1000;
};

/// User-level covariance target of the two-level filter: max(1/n + tau, 2/n).
double two_level_user_target(double eps, double alpha, std::size_t n, std::size_t N);

/// Alternating two-level filter: a crude pooled-sample level (target 2, per
/// user sample floor (1 - 2 alpha) n) and a user level over cleaned batch
/// means (target two_level_user_target, mass floor (1 - 2 eps) N).
EstimateReport estimate_two_level(const BatchDataset& ds, double eps, double alpha,
                                  const TwoLevelOptions& options = {});

enum class Estimator { naive, pooled, mean_shift, two_level };

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view s);
inline constexpr Estimator kAllEstimators[] = {Estimator::naive, Estimator::pooled, Estimator::mean_shift,
                                               Estimator::two_level};

EstimateReport run_estimator(Estimator e, const BatchDataset& ds, double eps, double alpha);

}  // namespace rbme
