#pragma once

#include <cstddef>
#include <cstdint>

#include "rbme/estimators.hpp"
#include "rbme/model.hpp"

namespace rbme {

/// Two hypotheses whose post-corruption observations coincide.
struct HypothesisPair {
  BatchDataset dataset_a;
  BatchDataset dataset_b;
  Vector mean_a;
  Vector mean_b;
  double separation = 0.0;
  bool coupled = false;
  double eps = 0.0;    // corruption levels the construction used
  double alpha = 0.0;
  std::size_t attempts = 0;  // draws needed before the budget event held
};

inline constexpr std::size_t kMaxCouplingAttempts = 100;

/// H0: each sample is 1/sqrt(eps/n) on coordinate 1 with probability eps/n, else 0.
/// H1: all zeros. The adversary zeroes every user holding a nonzero sample
/// (at most floor(eps N) users; the draw is repeated until that holds).
HypothesisPair build_h0_h1(double eps, std::size_t n, std::size_t N, std::size_t d, std::uint64_t seed);

/// H2: each sample is 1/sqrt(alpha) on coordinate 1 with probability alpha, else 0.
/// H3: all zeros. The adversary zeroes the nonzero samples of each user; a
/// user with more than floor(3 alpha n) of them is redrawn.
HypothesisPair build_h2_h3(double alpha, std::size_t n, std::size_t N, std::size_t d, std::uint64_t seed);

struct IndistinguishabilityResult {
  double error_a = 0.0;
  double error_b = 0.0;
  double max_error = 0.0;
  Vector estimate_a;
  Vector estimate_b;
};

IndistinguishabilityResult indistinguishability_check(const HypothesisPair& pair, Estimator estimator);

/// Uniform permutation of users and independent permutations of the samples
/// inside each user; every per-user and per-sample field moves with its data.
BatchDataset symmetrize(const BatchDataset& ds, std::uint64_t seed);

}  // namespace rbme
