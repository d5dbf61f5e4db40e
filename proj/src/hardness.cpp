#include "rbme/hardness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rbme/errors.hpp"
#include "rbme/rng.hpp"

namespace rbme {

namespace {

BatchDataset all_zero(std::size_t N, std::size_t n, std::size_t d, std::uint64_t seed) {
  BatchDataset ds;
  ds.N = N;
  ds.n = n;
  ds.d = d;
  ds.seed = seed;
  ds.data.assign(N * n * d, 0.0);
  ds.clean = ds.data;
  ds.good_user.assign(N, 1);
  ds.sample_clean_flag.assign(N * n, 1);
  ds.user_means.assign(N * d, 0.0);
  ds.target_mean.assign(d, 0.0);
  return ds;
}

// Spike on coordinate 0: value 1/sqrt(p) with probability p.
void draw_spike_user(BatchDataset& ds, std::size_t i, double p, Engine& engine) {
  std::bernoulli_distribution spike(p);
  const double height = 1.0 / std::sqrt(p);
  for (std::size_t j = 0; j < ds.n; ++j) {
    const std::size_t base = (i * ds.n + j) * ds.d;
    std::fill(ds.clean.begin() + static_cast<std::ptrdiff_t>(base),
              ds.clean.begin() + static_cast<std::ptrdiff_t>(base + ds.d), 0.0);
    ds.clean[base] = spike(engine) ? height : 0.0;
  }
}

std::size_t nonzero_in_user(const BatchDataset& ds, std::size_t i) {
  std::size_t count = 0;
  for (std::size_t j = 0; j < ds.n; ++j) count += ds.clean[(i * ds.n + j) * ds.d] != 0.0 ? 1 : 0;
  return count;
}

void check_sizes(std::size_t n, std::size_t N, std::size_t d) {
  if (n < 1 || N < 1 || d < 1) throw SizingError("hardness: N, n and d must all be at least 1");
}

}  // namespace

HypothesisPair build_h0_h1(double eps, std::size_t n, std::size_t N, std::size_t d, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("build_h0_h1: eps must lie in (0, 1)");
  check_sizes(n, N, d);
  const double p = eps / static_cast<double>(n);
  const auto budget = static_cast<std::size_t>(std::floor(eps * static_cast<double>(N) + 1e-9));

  HypothesisPair pair;
  pair.eps = eps;
  pair.dataset_b = all_zero(N, n, d, seed);
  BatchDataset a = all_zero(N, n, d, seed);
  a.target_mean[0] = std::sqrt(p);
  for (std::size_t i = 0; i < N; ++i) a.user_means[i * d] = a.target_mean[0];

  std::vector<std::size_t> touched;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == kMaxCouplingAttempts)
      throw ConstructionError("build_h0_h1: more than floor(eps N) users held nonzero samples in every attempt");
    Engine engine = make_engine(derive_seed(seed, attempt));
    touched.clear();
    for (std::size_t i = 0; i < N; ++i) {
      draw_spike_user(a, i, p, engine);
      if (nonzero_in_user(a, i) > 0) touched.push_back(i);
    }
    pair.attempts = attempt + 1;
    if (touched.size() <= budget) break;
  }

  // Observed data start as the clean draw; the adversary zeroes every touched user.
  a.data = a.clean;
  for (std::size_t i : touched) {
    a.good_user[i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      a.sample_clean_flag[i * n + j] = 0;
      auto x = a.sample(i, j);
      std::fill(x.begin(), x.end(), 0.0);
    }
  }
  pair.dataset_a = std::move(a);
  pair.mean_a = pair.dataset_a.target_mean;
  pair.mean_b = pair.dataset_b.target_mean;
  pair.separation = std::sqrt(p);
  pair.coupled = pair.dataset_a.data == pair.dataset_b.data;
  return pair;
}

HypothesisPair build_h2_h3(double alpha, std::size_t n, std::size_t N, std::size_t d, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("build_h2_h3: alpha must lie in (0, 1)");
  check_sizes(n, N, d);
  const auto budget = static_cast<std::size_t>(std::floor(3.0 * alpha * static_cast<double>(n) + 1e-9));

  HypothesisPair pair;
  pair.alpha = alpha;
  pair.dataset_b = all_zero(N, n, d, seed);
  BatchDataset a = all_zero(N, n, d, seed);
  a.target_mean[0] = std::sqrt(alpha);
  for (std::size_t i = 0; i < N; ++i) a.user_means[i * d] = a.target_mean[0];

  Engine engine = make_engine(seed);
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxCouplingAttempts)
        throw ConstructionError("build_h2_h3: a user kept more than floor(3 alpha n) nonzero samples");
      draw_spike_user(a, i, alpha, engine);
      if (nonzero_in_user(a, i) <= budget) break;
    }
    pair.attempts = std::max(pair.attempts, attempt + 1);
  }

  a.data = a.clean;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto x = a.sample(i, j);
      if (x[0] != 0.0) {
        x[0] = 0.0;
        a.sample_clean_flag[i * n + j] = 0;
      }
    }
  }
  pair.dataset_a = std::move(a);
  pair.mean_a = pair.dataset_a.target_mean;
  pair.mean_b = pair.dataset_b.target_mean;
  pair.separation = std::sqrt(alpha);
  pair.coupled = pair.dataset_a.data == pair.dataset_b.data;
  return pair;
}

IndistinguishabilityResult indistinguishability_check(const HypothesisPair& pair, Estimator estimator) {
  if (!pair.coupled) throw ParameterError("indistinguishability_check: pair is not coupled");
  IndistinguishabilityResult result;
  result.estimate_a = run_estimator(estimator, pair.dataset_a, pair.eps, pair.alpha).estimate;
  result.estimate_b = run_estimator(estimator, pair.dataset_b, pair.eps, pair.alpha).estimate;
  result.error_a = distance(result.estimate_a, pair.mean_a);
  result.error_b = distance(result.estimate_b, pair.mean_b);
  result.max_error = std::max(result.error_a, result.error_b);
  return result;
}

BatchDataset symmetrize(const BatchDataset& ds, std::uint64_t seed) {
  Engine engine = make_engine(seed);
  std::vector<std::size_t> users(ds.N);
  std::iota(users.begin(), users.end(), std::size_t{0});
  std::shuffle(users.begin(), users.end(), engine);

  BatchDataset out = ds;
  const std::size_t n = ds.n;
  const std::size_t d = ds.d;
  std::vector<std::size_t> samples(n);
  for (std::size_t dst = 0; dst < ds.N; ++dst) {
    const std::size_t src = users[dst];
    std::iota(samples.begin(), samples.end(), std::size_t{0});
    std::shuffle(samples.begin(), samples.end(), engine);
    out.good_user[dst] = ds.good_user[src];
    std::copy_n(ds.user_means.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                out.user_means.begin() + static_cast<std::ptrdiff_t>(dst * d));
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t from = src * n + samples[j];
      const std::size_t to = dst * n + j;
      out.sample_clean_flag[to] = ds.sample_clean_flag[from];
      std::copy_n(ds.data.begin() + static_cast<std::ptrdiff_t>(from * d), d,
                  out.data.begin() + static_cast<std::ptrdiff_t>(to * d));
      std::copy_n(ds.clean.begin() + static_cast<std::ptrdiff_t>(from * d), d,
                  out.clean.begin() + static_cast<std::ptrdiff_t>(to * d));
    }
  }
  return out;
}

}  // namespace rbme
