// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rbme/adaptive.hpp"
#include "rbme/estimators.hpp"
#include "rbme/hardness.hpp"
#include "rbme/harness.hpp"
#include "rbme/linalg.hpp"
#include "rbme/model.hpp"
#include "rbme/oracle.hpp"
#include "rbme/rng.hpp"

using namespace rbme;

namespace {

constexpr std::size_t kWorkers = 4;
constexpr std::uint64_t kBaseSeed = 20240601;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) body(k);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < kWorkers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double e = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, e);
  return buf;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.trials = 100;
  cfg.base_seed = kBaseSeed;
  cfg.workers = kWorkers;
  return cfg;
}

bool all_ones(const std::vector<double>& w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return x == 1.0; });
}

// P(X >= k) for X ~ Binomial(m, 1/2)
double sign_test_p(std::size_t k, std::size_t m) {
  double p = 0.0;
  for (std::size_t j = k; j <= m; ++j)
    p += std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) - m * std::log(2.0));
  return std::min(1.0, p);
}

void criterion_1() {
  ExperimentConfig cfg = base_config();
  const GridPoint point{16, 16, 200, 0.0, 0.0, Variant::two_level, Adversary::mean_pull};
  const auto seeds = trial_seeds(cfg, 1);
  std::vector<double> err_ms(cfg.trials), err_tl(cfg.trials);
  std::vector<int> ones_ms(cfg.trials), ones_tl(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    const BatchDataset ds = make_trial_dataset(cfg, point, seeds[t]);
    const auto ms = estimate_mean_shift(ds, 0.0, 0.0);
    const auto tl = estimate_two_level(ds, 0.0, 0.0);
    err_ms[t] = distance(ms.estimate, ds.target_mean);
    err_tl[t] = distance(tl.estimate, ds.target_mean);
    ones_ms[t] = all_ones(ms.weights.user_weights);
    ones_tl[t] = all_ones(tl.weights.user_weights) && all_ones(tl.weights.sample_weights);
  });
  const double bound = 3.0 * std::sqrt(16.0 / (16.0 * 200.0));
  const double m_ms = median(err_ms), m_tl = median(err_tl);
  const int k_ms = std::count(ones_ms.begin(), ones_ms.end(), 1);
  const int k_tl = std::count(ones_tl.begin(), ones_tl.end(), 1);
  const bool pass = m_ms <= bound && m_tl <= bound && k_ms >= 95 && k_tl >= 95;
  report(1, pass,
         fmt("clean rate: median err mean-shift %.4f, two-level %.4f (<= %.4f)", m_ms, m_tl, bound) +
             fmt("; untouched weights %.0f/100, %.0f/100 (>= 95)", k_ms, k_tl));
}

void criterion_2() {
  ExperimentConfig cfg = base_config();
  cfg.d = {16};
  cfg.n = {16};
  cfg.N = {400};
  cfg.eps = {0.01, 0.02, 0.04, 0.08};
  cfg.alpha = {0.0};
  cfg.variant = {Variant::two_level};
  cfg.adversary = {Adversary::mean_pull};
  cfg.magnitude = PullMagnitude::edge();
  cfg.estimators = {Estimator::two_level};
  const auto rows = run_experiment(cfg);
  const ScalingFit fit = fit_scaling(rows, "eps", "two-level");
  std::ostringstream med;
  for (double m : fit.median_error) med << ' ' << fmt("%.4f", m);
  report(2, fit.slope >= 0.35 && fit.slope <= 0.65,
         fmt("eps-scaling slope %.3f (in [0.35, 0.65]), r2 %.3f; medians", fit.slope, fit.r2) + med.str());
}

void criterion_3() {
  ExperimentConfig cfg = base_config();
  cfg.d = {16};
  cfg.n = {100};
  cfg.N = {100};
  cfg.eps = {0.0};
  cfg.alpha = {0.01, 0.02, 0.04, 0.08};
  cfg.adversary = {Adversary::mean_pull};

  ExperimentConfig shift = cfg;
  shift.variant = {Variant::mean_shift};
  shift.direction = "e1";
  shift.estimators = {Estimator::mean_shift};
  const ScalingFit f_shift = fit_scaling(run_experiment(shift), "alpha", "mean-shift");

  ExperimentConfig two = cfg;
  two.variant = {Variant::two_level};
  two.magnitude = PullMagnitude::edge();
  two.estimators = {Estimator::two_level};
  const ScalingFit f_two = fit_scaling(run_experiment(two), "alpha", "two-level");

  auto in_band = [](double s) { return s >= 0.35 && s <= 0.65; };
  report(3, in_band(f_shift.slope) && in_band(f_two.slope),
         fmt("alpha-scaling slope mean-shift model %.3f, two-level model %.3f (in [0.35, 0.65])", f_shift.slope,
             f_two.slope));
}

void criterion_4() {
  ExperimentConfig cfg = base_config();
  const GridPoint point{16, 25, 400, 0.08, 1.0 / 25.0, Variant::two_level, Adversary::mean_pull};
  cfg.magnitude = PullMagnitude::pooled_edge();
  const auto seeds = trial_seeds(cfg, 1);
  std::vector<double> err_tl(cfg.trials), err_pool(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    const BatchDataset ds = make_trial_dataset(cfg, point, seeds[t]);
    err_tl[t] = distance(estimate_two_level(ds, point.eps, point.alpha).estimate, ds.target_mean);
    err_pool[t] = distance(estimate_pooled(ds, point.eps, point.alpha).estimate, ds.target_mean);
  });
  std::size_t wins = 0, ties = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    if (err_tl[t] < err_pool[t]) ++wins;
    else if (err_tl[t] == err_pool[t]) ++ties;
  }
  const double p = sign_test_p(wins, cfg.trials - ties);
  const double m_tl = median(err_tl), m_pool = median(err_pool);
  report(4, m_tl < m_pool && p < 0.05,
         fmt("median err two-level %.4f < pooled %.4f; two-level better in %.0f trials, sign-test p %.2g (< 0.05)", m_tl,
             m_pool, static_cast<double>(wins), p));
}

void criterion_5() {
  constexpr std::size_t kInstances = 50;
  std::vector<int> ok_a(kInstances), ok_b(kInstances);
  parallel_for(kInstances, [&](std::size_t k) {
    CleanSpec spec;
    spec.d = 3;
    {
      const double eps = 0.1, alpha = 0.01;
      const BatchDataset clean = sample_clean(spec, 10, 4, derive_seed(kBaseSeed, 5, k));
      CorruptionPlan plan;
      plan.variant = Variant::mean_shift;
      plan.eps = eps;
      plan.alpha = alpha;
      plan.seed = derive_seed(kBaseSeed, 6, k);
      const BatchDataset ds = apply_plan(clean, plan);
      const std::vector<double> means = ds.batch_means();
      const auto oracle =
          brute_force_subset_mean(PointSet(means, ds.d), ceil_count(1.0 - eps_prime(eps, alpha, ds.n), ds.N));
      const double e_filter = distance(estimate_mean_shift(ds, eps, alpha).estimate, ds.target_mean);
      ok_a[k] = e_filter <= 1.5 * distance(oracle.mean, ds.target_mean) + 1e-6;
    }
    {
      const double eps = 1.0 / 8.0, alpha = 1.0 / 4.0;
      const BatchDataset clean = sample_clean(spec, 8, 4, derive_seed(kBaseSeed, 7, k));
      CorruptionPlan plan;
      plan.variant = Variant::two_level;
      plan.eps = eps;
      plan.alpha = alpha;
      plan.seed = derive_seed(kBaseSeed, 8, k);
      const BatchDataset ds = apply_plan(clean, plan);
      const auto oracle = brute_force_two_level(ds, eps, alpha);
      const double e_filter = distance(estimate_two_level(ds, eps, alpha).estimate, ds.target_mean);
      ok_b[k] = e_filter <= 1.5 * distance(oracle.mean, ds.target_mean) + 1e-6;
    }
  });
  const int a = std::count(ok_a.begin(), ok_a.end(), 1);
  const int b = std::count(ok_b.begin(), ok_b.end(), 1);
  report(5, a >= 45 && b >= 45,
         fmt("filter within 1.5x oracle error: mean-shift model %.0f/50, two-level model %.0f/50 (>= 45)", a, b));
}

void criterion_6() {
  constexpr std::size_t d = 8, m = 200, reps = 1000;
  const double eps = 0.1;
  const double radius = 2.0 * std::sqrt(d / eps);
  double fraction_sum = 0.0, worst_shift = 0.0, shift_sum = 0.0;
  const Vector mu(d, 0.0);
  CleanSpec spec;
  spec.d = d;
  for (std::size_t r = 0; r < reps; ++r) {
    const BatchDataset ds = sample_clean(spec, 1, m, derive_seed(kBaseSeed, 9, r));
    const TruncationResult t = truncate(ds.all_samples(), mu, radius);
    fraction_sum += static_cast<double>(t.changed_count) / m;
    const double shift = distance(empirical_mean(PointSet(t.points, d)), mu);
    worst_shift = std::max(worst_shift, shift);
    shift_sum += shift;
  }
  const double fraction = fraction_sum / reps;
  const double bound = 2.0 * std::sqrt(eps);
  report(6, fraction <= eps / 3.0 && worst_shift <= bound,
         fmt("truncation: mean fraction changed %.2g (<= %.4f); mean shift %.4f, worst %.4f", fraction, eps / 3.0,
             shift_sum / reps, worst_shift) +
             fmt(" (<= %.4f)", bound));
}

void criterion_7() {
  const double eps = 0.05, alpha = 0.01;
  const std::size_t d = 16, n = 16, N = 1000;  // N n = 16000 >= 10 d / alpha
  const double user_bound = 1.0 / n + tau_rule(eps, alpha, N);
  constexpr std::size_t kSeeds = 100;
  std::vector<int> ok(kSeeds);
  std::vector<double> worst(kSeeds);
  parallel_for(kSeeds, [&](std::size_t s) {
    CleanSpec spec;
    spec.d = d;
    const BatchDataset ds = sample_clean(spec, N, n, derive_seed(kBaseSeed, 10, s));
    const auto r = estimate_two_level(ds, eps, alpha);
    ok[s] = r.certificate_sample <= 2.0 && r.certificate_user <= user_bound;
    worst[s] = r.certificate_user;
  });
  const int k = std::count(ok.begin(), ok.end(), 1);
  report(7, k >= 95,
         fmt("clean certificates hold in %.0f/100 seeds (>= 95); max user certificate %.4f vs 1/n+tau %.4f", k,
             *std::max_element(worst.begin(), worst.end()), user_bound));
}

void criterion_8() {
  bool coupled = true, bounds = true, separation = true;
  double worst_sep_err = 0.0;
  const double eps_values[] = {0.04, 0.1, 0.2};
  const double alpha_values[] = {0.04, 0.05, 0.1};
  std::size_t k = 0;
  for (double eps : eps_values) {
    for (std::size_t n : {4, 16}) {
      const HypothesisPair p = build_h0_h1(eps, n, 200, 4, derive_seed(kBaseSeed, 11, k++));
      coupled = coupled && p.coupled && p.dataset_a.data == p.dataset_b.data;
      const double err = std::abs(p.separation - std::sqrt(eps / n));
      worst_sep_err = std::max(worst_sep_err, err);
      separation = separation && err <= 1e-15;
      for (Estimator e : kAllEstimators) bounds = bounds && indistinguishability_check(p, e).max_error >= p.separation / 2.0;
    }
  }
  for (double alpha : alpha_values) {
    for (std::size_t n : {20, 50}) {
      const HypothesisPair p = build_h2_h3(alpha, n, 100, 4, derive_seed(kBaseSeed, 12, k++));
      coupled = coupled && p.coupled && p.dataset_a.data == p.dataset_b.data;
      const double err = std::abs(p.separation - std::sqrt(alpha));
      worst_sep_err = std::max(worst_sep_err, err);
      separation = separation && err <= 1e-15;
      for (Estimator e : kAllEstimators) bounds = bounds && indistinguishability_check(p, e).max_error >= p.separation / 2.0;
    }
  }
  report(8, coupled && bounds && separation,
         std::string("hardness: observations bit-identical ") + (coupled ? "yes" : "no") + ", max error >= separation/2 " +
             (bounds ? "yes" : "no") + fmt(", worst separation deviation %.1e", worst_sep_err));
}

void criterion_9() {
  ExperimentConfig cfg = base_config();
  const GridPoint point{16, 25, 1000, 0.04, 0.0, Variant::two_level, Adversary::mean_pull};
  const auto seeds = trial_seeds(cfg, 1);
  const AdaptiveOptions options;
  const double nN = 25.0 * 1000.0;
  const double guess_bound = std::log2(options.eps0 * nN) + std::log2(options.alpha0 * nN) + 2.0;
  constexpr std::size_t kHoldout = 1000;
  std::vector<int> eps_ok(cfg.trials), err_ok(cfg.trials), guesses_ok(cfg.trials), both(cfg.trials);
  std::vector<double> eps_hat(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    const BatchDataset ds = make_trial_dataset(cfg, point, seeds[t]);
    CleanSpec spec;
    spec.d = point.d;
    const BatchDataset holdout = sample_clean(spec, kHoldout, 1, derive_seed(seeds[t], 99));
    const AdaptiveOutcome out = adaptive_estimate(ds, holdout.all_samples(), options);
    const double known = distance(estimate_two_level(ds, point.eps, point.alpha).estimate, ds.target_mean);
    const double err = distance(out.estimate, ds.target_mean);
    eps_hat[t] = out.eps_hat;
    eps_ok[t] = out.accepted && out.eps_hat >= point.eps / 2.0 && out.eps_hat <= 4.0 * point.eps;
    err_ok[t] = err <= 2.0 * known;
    both[t] = eps_ok[t] && err_ok[t];
    guesses_ok[t] = static_cast<double>(out.guesses_tried) <= guess_bound;
  });
  const int k_both = std::count(both.begin(), both.end(), 1);
  const int k_eps = std::count(eps_ok.begin(), eps_ok.end(), 1);
  const int k_err = std::count(err_ok.begin(), err_ok.end(), 1);
  const bool guesses = std::all_of(guesses_ok.begin(), guesses_ok.end(), [](int v) { return v == 1; });
  report(9, k_both >= 80 && guesses,
         fmt("adaptive: eps_hat in range and error within 2x in %.0f/100 (>= 80) [eps %.0f, error %.0f]", k_both, k_eps,
             k_err) +
             fmt("; median eps_hat %.4f; guess budget %.1f ", median(eps_hat), guess_bound) +
             (guesses ? "respected" : "EXCEEDED"));
}

void criterion_10() {
  ExperimentConfig cfg = base_config();
  cfg.trials = 5;
  cfg.N = {100};
  cfg.n = {10};
  cfg.d = {8};
  cfg.eps = {0.0, 0.05};
  cfg.alpha = {0.0, 0.02};
  cfg.variant = {Variant::mean_shift, Variant::two_level};
  cfg.adversary = {Adversary::mean_pull, Adversary::cluster, Adversary::zero_out};
  cfg.estimators = {std::begin(kAllEstimators), std::end(kAllEstimators)};
  auto csv_of = [&](std::size_t workers) {
    ExperimentConfig c = cfg;
    c.workers = workers;
    std::ostringstream out;
    write_csv(out, run_experiment(c));
    return out.str();
  };
  const std::string first = csv_of(4);
  const bool identical = first == csv_of(4) && first == csv_of(1);

  constexpr std::size_t kDatasets = 20;
  std::vector<double> worst(kDatasets, 0.0);
  parallel_for(kDatasets, [&](std::size_t k) {
    const GridPoint point{8, 10, 100, 0.05, 0.02, k % 2 ? Variant::mean_shift : Variant::two_level,
                          static_cast<Adversary>(k % 3)};
    const BatchDataset ds = make_trial_dataset(cfg, point, derive_seed(kBaseSeed, 13, k));
    const BatchDataset perm = symmetrize(ds, derive_seed(kBaseSeed, 14, k));
    for (Estimator e : kAllEstimators) {
      const auto a = run_estimator(e, ds, point.eps, point.alpha);
      const auto b = run_estimator(e, perm, point.eps, point.alpha);
      worst[k] = std::max(worst[k], distance(a.estimate, b.estimate));
    }
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  report(10, identical && w <= 1e-6,
         std::string("determinism: repeated CSV byte-identical (workers 1 and 4) ") + (identical ? "yes" : "no") +
             fmt("; worst symmetrize change %.2e (<= 1e-6)", w));
}

using Check = void (*)();

}  // namespace

int main(int argc, char** argv) {
  const Check checks[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                          criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  for (int id = 1; id <= 10; ++id) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    checks[id - 1]();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "  (criterion %d took %.1f s)\n", id, secs);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
