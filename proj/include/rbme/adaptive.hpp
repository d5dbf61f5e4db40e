#pragma once

#include <cstddef>
#include <span>

#include "rbme/linalg.hpp"
#include "rbme/model.hpp"

namespace rbme {

struct AdaptiveOptions {
  double eps0 = 1.0 / 18.0;
  double alpha0 = 1.0 / 90.0;
  double tolerance_constant = 4.0;  // c in c * (sqrt(eps/n) + sqrt(alpha) + sqrt(d/nN))
};

struct AdaptiveOutcome {
  Vector estimate;
  double eps_hat = 0.0;
  double alpha_hat = 0.0;
  std::size_t guesses_tried = 0;
  bool accepted = false;
};

/// Accepts iff ||candidate - mean(holdout)|| <= tolerance + 3 sqrt(d/m).
bool holdout_verifier(std::span<const double> candidate, const PointSet& holdout, double tolerance);

/// Smallest guess the search descends to: max(sqrt(d/(N n)), 1/(N n)).
double adaptive_resolution(std::size_t d, std::size_t n, std::size_t N);

/// Halving search over (eps, alpha) guesses for the two-level estimator,
/// eps axis first (alpha held at alpha0), then the alpha axis; each axis
/// stops at its first rejection or at the resolution floor.
AdaptiveOutcome adaptive_estimate(const BatchDataset& ds, const PointSet& holdout,
                                  const AdaptiveOptions& options = {});

}  // namespace rbme
