#include "rbme/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "rbme/errors.hpp"
#include "rbme/estimators.hpp"

namespace rbme {

bool holdout_verifier(std::span<const double> candidate, const PointSet& holdout, double tolerance) {
  if (holdout.empty()) throw ParameterError("holdout_verifier: empty holdout");
  if (!(tolerance > 0.0)) throw ParameterError("holdout_verifier: tolerance must be positive");
  if (candidate.size() != holdout.dim()) throw SizingError("holdout_verifier: candidate has wrong dimension");
  const Vector center = empirical_mean(holdout);
  const double slack = 3.0 * std::sqrt(static_cast<double>(holdout.dim()) / static_cast<double>(holdout.size()));
  return distance(candidate, center) <= tolerance + slack;
}

double adaptive_resolution(std::size_t d, std::size_t n, std::size_t N) {
  const double total = static_cast<double>(n * N);
  return std::max(std::sqrt(static_cast<double>(d) / total), 1.0 / total);
}

AdaptiveOutcome adaptive_estimate(const BatchDataset& ds, const PointSet& holdout, const AdaptiveOptions& options) {
  if (holdout.empty()) throw ParameterError("adaptive_estimate: empty holdout");
  if (holdout.dim() != ds.d) throw SizingError("adaptive_estimate: holdout has wrong dimension");
  if (!(options.eps0 > 0.0 && options.alpha0 > 0.0)) throw ParameterError("adaptive_estimate: eps0 and alpha0 must be positive");

  const double n = static_cast<double>(ds.n);
  const double baseline = std::sqrt(static_cast<double>(ds.d) / (n * static_cast<double>(ds.N)));
  const double floor = adaptive_resolution(ds.d, ds.n, ds.N);

  AdaptiveOutcome outcome;
  auto attempt = [&](double eps, double alpha) {
    ++outcome.guesses_tried;
    const EstimateReport report = estimate_two_level(ds, eps, alpha);
    const double tolerance =
        options.tolerance_constant * (std::sqrt(eps / n) + std::sqrt(alpha) + baseline);
    return std::pair{report.estimate, holdout_verifier(report.estimate, holdout, tolerance)};
  };

  auto [first_estimate, first_ok] = attempt(options.eps0, options.alpha0);
  outcome.estimate = first_estimate;
  outcome.eps_hat = options.eps0;
  outcome.alpha_hat = options.alpha0;
  if (!first_ok) return outcome;
  outcome.accepted = true;

  for (double eps = options.eps0 / 2.0; eps >= floor; eps /= 2.0) {
    auto [estimate, ok] = attempt(eps, outcome.alpha_hat);
    if (!ok) break;
    outcome.estimate = estimate;
    outcome.eps_hat = eps;
  }
  for (double alpha = options.alpha0 / 2.0; alpha >= floor; alpha /= 2.0) {
    auto [estimate, ok] = attempt(outcome.eps_hat, alpha);
    if (!ok) break;
    outcome.estimate = estimate;
    outcome.alpha_hat = alpha;
  }
  return outcome;
}

}  // namespace rbme
