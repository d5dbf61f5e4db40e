#include "rbme/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "rbme/errors.hpp"

namespace rbme {

double eps_prime(double eps, double alpha, std::size_t n) {
  return std::min(std::max(eps, static_cast<double>(n) * alpha), 0.1);
}

double tau_rule(double eps, double alpha, std::size_t N) {
  return alpha / std::max(eps, 1.0 / static_cast<double>(N));
}

double two_level_user_target(double eps, double alpha, std::size_t n, std::size_t N) {
  const double inv_n = 1.0 / static_cast<double>(n);
  return std::max(inv_n + tau_rule(eps, alpha, N), 2.0 * inv_n);
}

namespace {

void clamp_to_group_floor(std::span<const double> before, std::span<double> after, const GroupFloor& floor) {
  const std::size_t groups = before.size() / floor.group_size;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * floor.group_size;
    const std::size_t hi = lo + floor.group_size;
    double prev = 0.0;
    double next = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      prev += before[k];
      next += after[k];
    }
    if (next >= floor.floor) continue;
    // Scale this group's decrement so it lands exactly on the floor.
    const double s = prev > floor.floor ? (prev - floor.floor) / (prev - next) : 0.0;
    for (std::size_t k = lo; k < hi; ++k) after[k] = before[k] - s * (before[k] - after[k]);
  }
}

}  // namespace

FilterResult spectral_filter(const PointSet& points, double target, double min_mass,
                             std::span<const double> initial_weights, const FilterOptions& options) {
  const std::size_t m = points.size();
  const std::size_t d = points.dim();
  if (m == 0) throw SizingError("spectral_filter: no points");
  if (!(target > 0.0)) throw ParameterError("spectral_filter: target must be positive");
  if (min_mass > static_cast<double>(m)) throw ParameterError("spectral_filter: min_mass exceeds the point count");
  if (!initial_weights.empty() && initial_weights.size() != m)
    throw SizingError("spectral_filter: initial weight count does not match point count");
  if (!options.point_scale.empty() && options.point_scale.size() != m)
    throw SizingError("spectral_filter: point_scale count does not match point count");
  if (options.group_floor && (options.group_floor->group_size == 0 || m % options.group_floor->group_size != 0))
    throw SizingError("spectral_filter: group size does not divide the point count");

  FilterResult result;
  result.weights = initial_weights.empty() ? std::vector<double>(m, 1.0)
                                           : std::vector<double>(initial_weights.begin(), initial_weights.end());
  for (double w : result.weights)
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("spectral_filter: weights must lie in [0, 1]");

  auto scale = [&](std::size_t k) { return options.point_scale.empty() ? 1.0 : options.point_scale[k]; };
  std::vector<double> effective(m);
  std::vector<double> proposal(m);
  std::vector<double> scores(m);

  for (std::size_t iter = 0;; ++iter) {
    double mass = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      effective[k] = scale(k) * result.weights[k];
      mass += effective[k];
    }
    result.mass = mass;
    result.iterations = iter;
    const CovOperator cov = CovOperator::centered(points, effective);
    result.mean = cov.center();
    result.certificate = top_eigen(cov, options.power);
    if (result.certificate.value <= target) {
      result.converged = true;
      return result;
    }
    if (iter >= options.max_iter) return result;

    const auto& v = result.certificate.vector;
    double s_max = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const auto p = points.point(k);
      double proj = 0.0;
      for (std::size_t c = 0; c < d; ++c) proj += (p[c] - result.mean[c]) * v[c];
      scores[k] = proj * proj;
      if (effective[k] > 0.0) s_max = std::max(s_max, scores[k]);
    }
    if (!(s_max > 0.0)) return result;

    for (std::size_t k = 0; k < m; ++k)
      proposal[k] = effective[k] > 0.0 ? result.weights[k] * (1.0 - scores[k] / s_max) : result.weights[k];
    if (options.group_floor) clamp_to_group_floor(result.weights, proposal, *options.group_floor);

    double next_mass = 0.0;
    for (std::size_t k = 0; k < m; ++k) next_mass += scale(k) * proposal[k];
    if (next_mass < min_mass) return result;
    if (mass - next_mass <= 1e-12 * mass) return result;  // stalled on floors
    result.weights.swap(proposal);
  }
}

namespace {

double top_of(const std::vector<double>& points, std::size_t d, std::span<const double> weights = {}) {
  return top_eigen(CovOperator::centered(PointSet(points, d), weights)).value;
}

}  // namespace

EstimateReport estimate_naive(const BatchDataset& ds) {
  EstimateReport report;
  report.estimator = "naive";
  report.estimate = empirical_mean(ds.all_samples());
  report.certificate_sample = top_of(ds.data, ds.d);
  report.certificate_user = top_of(ds.batch_means(), ds.d);
  report.weights.user_weights.assign(ds.N, 1.0);
  report.weights.retained_user_mass = static_cast<double>(ds.N);
  report.weights.retained_sample_mass = static_cast<double>(ds.N * ds.n);
  return report;
}

EstimateReport estimate_pooled(const BatchDataset& ds, double eps, double alpha) {
  if (!(eps >= 0.0 && alpha >= 0.0 && eps + alpha < 0.5))
    throw ParameterError("estimate_pooled: requires eps, alpha >= 0 and eps + alpha < 1/2");
  const double total = static_cast<double>(ds.N * ds.n);
  const FilterResult filter = spectral_filter(ds.all_samples(), 2.0, (1.0 - 2.0 * (eps + alpha)) * total);

  EstimateReport report;
  report.estimator = "pooled";
  report.estimate = filter.mean;
  report.certificate_sample = filter.certificate.value;
  report.target_sample = 2.0;
  report.iterations = filter.iterations;
  report.converged = filter.converged;
  report.weights.sample_weights = filter.weights;
  report.weights.user_weights.assign(ds.N, 0.0);
  for (std::size_t i = 0; i < ds.N; ++i) {
    for (std::size_t j = 0; j < ds.n; ++j) report.weights.user_weights[i] += filter.weights[i * ds.n + j];
    report.weights.user_weights[i] /= static_cast<double>(ds.n);
  }
  report.weights.retained_sample_mass = filter.mass;
  report.weights.retained_user_mass = filter.mass / static_cast<double>(ds.n);
  return report;
}

EstimateReport estimate_mean_shift(const BatchDataset& ds, double eps, double alpha) {
  if (!(eps >= 0.0 && alpha >= 0.0)) throw ParameterError("estimate_mean_shift: eps and alpha must be nonnegative");
  const std::vector<double> means = ds.batch_means();
  const double budget = eps_prime(eps, alpha, ds.n);
  const double target = 2.0 * (1.0 / static_cast<double>(ds.n) + alpha);
  const FilterResult filter =
      spectral_filter(PointSet(means, ds.d), target, (1.0 - 2.0 * budget) * static_cast<double>(ds.N));

  EstimateReport report;
  report.estimator = "mean-shift";
  report.estimate = filter.mean;
  report.certificate_user = filter.certificate.value;
  report.target_user = target;
  report.iterations = filter.iterations;
  report.converged = filter.converged;
  report.weights.user_weights = filter.weights;
  report.weights.retained_user_mass = filter.mass;
  report.weights.retained_sample_mass = filter.mass * static_cast<double>(ds.n);
  return report;
}

EstimateReport estimate_two_level(const BatchDataset& ds, double eps, double alpha, const TwoLevelOptions& options) {
  if (!(eps >= 0.0 && alpha >= 0.0 && alpha < 0.5 && eps < 0.5))
    throw ParameterError("estimate_two_level: requires eps, alpha in [0, 1/2)");
  if (options.max_rounds < 1) throw ParameterError("estimate_two_level: max_rounds must be at least 1");
  const std::size_t N = ds.N;
  const std::size_t n = ds.n;
  const std::size_t d = ds.d;
  const PointSet samples = ds.all_samples();
  const double sample_target = 2.0;
  const double user_target = two_level_user_target(eps, alpha, n, N);
  const double sample_floor = (1.0 - 2.0 * alpha) * static_cast<double>(n);
  const double user_floor = (1.0 - 2.0 * eps) * static_cast<double>(N);

  std::vector<double> W(N * n, 1.0);
  std::vector<double> U(N, 1.0);
  std::vector<double> scale(N * n);
  std::vector<double> cleaned(N * d);
  std::vector<double> effective(N * n);

  FilterOptions crude_options;
  crude_options.max_iter = options.max_filter_iter;
  crude_options.group_floor = GroupFloor{n, sample_floor};
  FilterOptions user_options;
  user_options.max_iter = options.max_filter_iter;

  auto update_cleaned_means = [&] {
    for (std::size_t i = 0; i < N; ++i) {
      double mass = 0.0;
      double* y = cleaned.data() + i * d;
      std::fill(y, y + d, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = W[i * n + j];
        mass += w;
        const auto x = ds.sample(i, j);
        for (std::size_t c = 0; c < d; ++c) y[c] += w * x[c];
      }
      for (std::size_t c = 0; c < d; ++c) y[c] /= mass;
    }
  };

  EstimateReport report;
  report.estimator = "two-level";
  report.target_sample = sample_target;
  report.target_user = user_target;
  report.converged = false;

  FilterResult user;
  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    const std::vector<double> W_before = W;
    const std::vector<double> U_before = U;

    double user_mass = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      user_mass += U[i];
      for (std::size_t j = 0; j < n; ++j) scale[i * n + j] = U[i];
    }
    crude_options.point_scale = scale;
    const FilterResult crude =
        spectral_filter(samples, sample_target, sample_floor * user_mass * (1.0 - 1e-12), W, crude_options);
    W = crude.weights;
    report.iterations += crude.iterations;

    update_cleaned_means();
    user = spectral_filter(PointSet(cleaned, d), user_target, user_floor, U, user_options);
    U = user.weights;
    report.iterations += user.iterations;

    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < n; ++j) effective[i * n + j] = U[i] * W[i * n + j];
    report.certificate_sample = top_eigen(CovOperator::centered(samples, effective)).value;
    report.certificate_user = user.certificate.value;
    if (report.certificate_sample <= sample_target && report.certificate_user <= user_target) {
      report.converged = true;
      break;
    }
    if (W == W_before && U == U_before) break;
  }

  report.estimate = user.mean;
  report.weights.user_weights = U;
  report.weights.sample_weights = W;
  report.weights.retained_user_mass = 0.0;
  report.weights.retained_sample_mass = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    report.weights.retained_user_mass += U[i];
    for (std::size_t j = 0; j < n; ++j) report.weights.retained_sample_mass += effective[i * n + j];
  }
  return report;
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::naive: return "naive";
    case Estimator::pooled: return "pooled";
    case Estimator::mean_shift: return "mean-shift";
    case Estimator::two_level: return "two-level";
  }
  return "?";
}

Estimator parse_estimator(std::string_view s) {
  for (Estimator e : kAllEstimators)
    if (to_string(e) == s) return e;
  throw ParameterError("unknown estimator: " + std::string(s));
}

EstimateReport run_estimator(Estimator e, const BatchDataset& ds, double eps, double alpha) {
  switch (e) {
    case Estimator::naive: return estimate_naive(ds);
    case Estimator::pooled: return estimate_pooled(ds, eps, alpha);
    case Estimator::mean_shift: return estimate_mean_shift(ds, eps, alpha);
    case Estimator::two_level: return estimate_two_level(ds, eps, alpha);
  }
  throw ParameterError("unknown estimator");
}

}  // namespace rbme
