#include "rbme/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rbme/errors.hpp"

namespace rbme {

namespace {

// Exact top eigenvalue through a dense symmetric solver, independent of the
// power-iteration path the estimators use.
double dense_top_eigenvalue(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  return std::max(solver.eigenvalues().maxCoeff(), 0.0);
}

// Advances a k-combination of {0..m-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& comb, std::size_t m) {
  const std::size_t k = comb.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (comb[pos] < m - k + pos) {
      ++comb[pos];
      for (std::size_t q = pos + 1; q < k; ++q) comb[q] = comb[q - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> first_combination(std::size_t k) {
  std::vector<std::size_t> comb(k);
  for (std::size_t q = 0; q < k; ++q) comb[q] = q;
  return comb;
}

bool improves(double candidate, double best) {
  if (std::isinf(best)) return std::isfinite(candidate);
  return candidate < best - 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

std::size_t ceil_count(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
}

OracleResult brute_force_subset_mean(const PointSet& batch_means, std::size_t k) {
  const std::size_t N = batch_means.size();
  const std::size_t d = batch_means.dim();
  if (N > kSubsetOracleMaxUsers) throw SizingError("brute_force_subset_mean: N exceeds the enumeration guard of 20");
  if (k < 1 || k > N) throw ParameterError("brute_force_subset_mean: k must lie in [1, N]");

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> comb = first_combination(k);
  Eigen::VectorXd mean(d);
  Eigen::MatrixXd cov(d, d);
  do {
    mean.setZero();
    for (std::size_t i : comb) mean += Eigen::Map<const Eigen::VectorXd>(batch_means.point(i).data(), static_cast<Eigen::Index>(d));
    mean /= static_cast<double>(k);
    cov.setZero();
    for (std::size_t i : comb) {
      const Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(batch_means.point(i).data(), static_cast<Eigen::Index>(d)) - mean;
      cov.noalias() += diff * diff.transpose();
    }
    cov /= static_cast<double>(k);
    const double objective = dense_top_eigenvalue(cov);
    if (improves(objective, best.objective)) {
      best.objective = objective;
      best.chosen_users = comb;
      best.mean.assign(mean.data(), mean.data() + d);
    }
  } while (next_combination(comb, N));
  return best;
}

OracleResult brute_force_two_level(const BatchDataset& ds, double eps, double alpha) {
  const std::size_t N = ds.N;
  const std::size_t n = ds.n;
  const auto d = static_cast<Eigen::Index>(ds.d);
  if (N > kTwoLevelOracleMaxUsers || n > kTwoLevelOracleMaxSamples)
    throw SizingError("brute_force_two_level: requires N <= 8 and n <= 6");
  if (!(eps >= 0.0 && eps < 1.0 && alpha >= 0.0 && alpha < 1.0))
    throw ParameterError("brute_force_two_level: eps and alpha must lie in [0, 1)");
  const std::size_t k_users = std::max<std::size_t>(1, ceil_count(1.0 - eps, N));
  const std::size_t k_samples = std::max<std::size_t>(1, ceil_count(1.0 - alpha, n));

  // Every sample subset of every user, with its cleaned mean and the raw sums
  // needed for the pooled covariance.
  struct Choice {
    std::vector<std::size_t> samples;
    Eigen::VectorXd mean;
    Eigen::VectorXd sum;
    Eigen::MatrixXd outer;
  };
  std::vector<std::vector<Choice>> choices(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<std::size_t> comb = first_combination(k_samples);
    do {
      Choice c{comb, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
      for (std::size_t j : comb) {
        const Eigen::Map<const Eigen::VectorXd> x(ds.sample(i, j).data(), d);
        c.sum += x;
        c.outer.noalias() += x * x.transpose();
      }
      c.mean = c.sum / static_cast<double>(k_samples);
      choices[i].push_back(std::move(c));
    } while (next_combination(comb, n));
  }

  OracleResult best_feasible;
  best_feasible.objective = std::numeric_limits<double>::infinity();
  OracleResult best_any = best_feasible;
  std::vector<std::size_t> picks;
  auto record = [&](OracleResult& slot, const std::vector<std::size_t>& users, double objective,
                    const Eigen::VectorXd& mean, bool feasible) {
    slot.objective = objective;
    slot.chosen_users = users;
    slot.chosen_samples.clear();
    for (std::size_t u = 0; u < users.size(); ++u) slot.chosen_samples.push_back(choices[users[u]][picks[u]].samples);
    slot.mean.assign(mean.data(), mean.data() + d);
    slot.feasible = feasible;
  };

  const double pooled_count = static_cast<double>(k_users * k_samples);
  Eigen::VectorXd user_mean(d);
  Eigen::MatrixXd user_cov(d, d);
  Eigen::VectorXd pooled_sum(d);
  Eigen::MatrixXd pooled_outer(d, d);
  std::vector<std::size_t> users = first_combination(k_users);
  do {
    picks.assign(k_users, 0);
    while (true) {
      user_mean.setZero();
      pooled_sum.setZero();
      pooled_outer.setZero();
      for (std::size_t u = 0; u < k_users; ++u) {
        const Choice& c = choices[users[u]][picks[u]];
        user_mean += c.mean;
        pooled_sum += c.sum;
        pooled_outer += c.outer;
      }
      user_mean /= static_cast<double>(k_users);
      user_cov.setZero();
      for (std::size_t u = 0; u < k_users; ++u) {
        const Eigen::VectorXd diff = choices[users[u]][picks[u]].mean - user_mean;
        user_cov.noalias() += diff * diff.transpose();
      }
      user_cov /= static_cast<double>(k_users);
      const double objective = dense_top_eigenvalue(user_cov);
      const Eigen::VectorXd pooled_mean = pooled_sum / pooled_count;
      const Eigen::MatrixXd pooled_cov = pooled_outer / pooled_count - pooled_mean * pooled_mean.transpose();
      const bool feasible = dense_top_eigenvalue(pooled_cov) <= 2.0;
      if (improves(objective, best_any.objective)) record(best_any, users, objective, user_mean, feasible);
      if (feasible && improves(objective, best_feasible.objective))
        record(best_feasible, users, objective, user_mean, true);

      // mixed-radix increment over the per-user sample choices
      std::size_t pos = k_users;
      while (pos-- > 0) {
        if (++picks[pos] < choices[users[pos]].size()) break;
        picks[pos] = 0;
      }
      if (pos == static_cast<std::size_t>(-1)) break;
    }
  } while (next_combination(users, N));

  if (std::isfinite(best_feasible.objective)) return best_feasible;
  best_any.feasible = false;
  return best_any;
}

}  // namespace rbme
