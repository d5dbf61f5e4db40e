// rbme_cli: generate datasets, run estimators, experiments, adaptive search,
// hardness constructions and scaling fits.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "rbme/adaptive.hpp"
#include "rbme/dataset_io.hpp"
#include "rbme/errors.hpp"
#include "rbme/estimators.hpp"
#include "rbme/hardness.hpp"
#include "rbme/harness.hpp"
#include "rbme/model.hpp"
#include "rbme/rng.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw rbme::IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json report_json(const rbme::EstimateReport& r) {
  return {{"estimator", r.estimator},
          {"estimate", r.estimate},
          {"certificate_user", r.certificate_user},
          {"certificate_sample", r.certificate_sample},
          {"target_user", r.target_user},
          {"target_sample", r.target_sample},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"retained_user_mass", r.weights.retained_user_mass},
          {"retained_sample_mass", r.weights.retained_sample_mass}};
}

struct GenerateArgs {
  std::size_t N = 200, n = 16, d = 16;
  double eps = 0.0, alpha = 0.0;
  std::string variant = "two-level", adversary = "mean-pull", magnitude = "auto", direction = "auto";
  std::string family = "isotropic-gaussian";
  double spike_p = 0.5;
  std::string csv_path, holdout_path;
  std::size_t holdout_m = 0;
};

struct EstimateArgs {
  std::string dataset, estimator = "two-level";
  double eps = 0.0, alpha = 0.0;
};

struct AdaptiveArgs {
  std::string dataset, holdout;
  double eps0 = 1.0 / 18.0, alpha0 = 1.0 / 90.0, c = 4.0;
};

struct HardnessArgs {
  std::string kind = "h0h1";
  double eps = 0.1, alpha = 0.05;
  std::size_t N = 200, n = 16, d = 4;
  std::string prefix;
};

struct FitArgs {
  std::string csv, x = "eps", estimator;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust batch mean estimation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 0;
  std::string out_path;
  std::string config_path;
  bool strict = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; seed_set = true; },
                                            "random seed");
    sub->add_option("--out", out_path, "output path (JSON defaults to stdout)");
    sub->add_flag("--strict", strict, "exit 3 when an estimator does not converge");
  };

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample and corrupt a dataset");
  add_common(generate);
  generate->add_option("--N", gen.N, "users")->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "samples per user")->check(CLI::PositiveNumber);
  generate->add_option("--d", gen.d, "dimension")->check(CLI::PositiveNumber);
  generate->add_option("--eps", gen.eps, "bad-user fraction");
  generate->add_option("--alpha", gen.alpha, "mean-shift radius squared or bad-sample fraction");
  generate->add_option("--variant", gen.variant, "mean-shift | two-level");
  generate->add_option("--adversary", gen.adversary, "mean-pull | cluster | zero-out");
  generate->add_option("--magnitude", gen.magnitude, "auto | edge | pooled-edge | <radius>");
  generate->add_option("--direction", gen.direction, "auto | e<k>");
  generate->add_option("--family", gen.family, "isotropic-gaussian | scaled-bernoulli-spike");
  generate->add_option("--spike-p", gen.spike_p, "spike probability");
  generate->add_option("--csv", gen.csv_path, "also write the observed samples as CSV");
  generate->add_option("--holdout", gen.holdout_path, "write clean holdout vectors as CSV");
  generate->add_option("--holdout-m", gen.holdout_m, "holdout size");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "run one estimator on a dataset file");
  add_common(estimate);
  estimate->add_option("dataset", est.dataset, "dataset file")->required();
  estimate->add_option("--estimator", est.estimator, "naive | pooled | mean-shift | two-level");
  estimate->add_option("--eps", est.eps);
  estimate->add_option("--alpha", est.alpha);

  auto* experiment = app.add_subcommand("experiment", "run a configured grid and write CSV");
  add_common(experiment);
  std::string svg_path;
  experiment->add_option("--config", config_path, "INI config")->required();
  experiment->add_option("--workers", workers, "worker threads (overrides config)");
  experiment->add_option("--svg", svg_path, "also write an SVG chart");

  AdaptiveArgs ad;
  auto* adaptive = app.add_subcommand("adaptive", "unknown-corruption search with a holdout verifier");
  add_common(adaptive);
  adaptive->add_option("dataset", ad.dataset, "dataset file")->required();
  adaptive->add_option("--holdout", ad.holdout, "holdout CSV")->required();
  adaptive->add_option("--eps0", ad.eps0);
  adaptive->add_option("--alpha0", ad.alpha0);
  adaptive->add_option("--tolerance-constant", ad.c);

  HardnessArgs hd;
  auto* hardness = app.add_subcommand("hardness", "build a coupled hypothesis pair and check estimators");
  add_common(hardness);
  hardness->add_option("--kind", hd.kind, "h0h1 | h2h3");
  hardness->add_option("--eps", hd.eps);
  hardness->add_option("--alpha", hd.alpha);
  hardness->add_option("--N", hd.N)->check(CLI::PositiveNumber);
  hardness->add_option("--n", hd.n)->check(CLI::PositiveNumber);
  hardness->add_option("--d", hd.d)->check(CLI::PositiveNumber);
  hardness->add_option("--prefix", hd.prefix, "write <prefix>_a.rbme and <prefix>_b.rbme");

  FitArgs ft;
  auto* fit = app.add_subcommand("fit", "log-log slope of median error from an experiment CSV");
  add_common(fit);
  fit->add_option("csv", ft.csv, "experiment CSV")->required();
  fit->add_option("--x", ft.x, "grid parameter on the x axis");
  fit->add_option("--estimator", ft.estimator, "estimator name (default: every estimator in the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (generate->parsed()) {
      rbme::CleanSpec spec;
      spec.d = gen.d;
      spec.family = rbme::parse_family(gen.family);
      spec.spike_p = gen.spike_p;
      const rbme::BatchDataset clean = rbme::sample_clean(spec, gen.N, gen.n, rbme::derive_seed(seed, 0));
      rbme::CorruptionPlan plan;
      plan.variant = rbme::parse_variant(gen.variant);
      plan.eps = gen.eps;
      plan.alpha = gen.alpha;
      plan.adversary = rbme::parse_adversary(gen.adversary);
      plan.pull_magnitude = rbme::parse_magnitude(gen.magnitude);
      plan.pull_direction = rbme::parse_direction(gen.direction, gen.d);
      plan.seed = rbme::derive_seed(seed, 1);
      if (rbme::plan_outside_guarantees(plan))
        std::cerr << "warning: corruption levels lie outside the estimators' guarantees\n";
      const rbme::BatchDataset ds = rbme::apply_plan(clean, plan);
      if (out_path.empty()) throw rbme::ValidationError("generate: --out is required");
      rbme::save_dataset(out_path, ds);
      if (!gen.csv_path.empty()) {
        std::ofstream csv(gen.csv_path);
        if (!csv) throw rbme::IoError("cannot write " + gen.csv_path);
        rbme::write_dataset_csv(csv, ds);
      }
      if (!gen.holdout_path.empty()) {
        if (gen.holdout_m == 0) throw rbme::ValidationError("generate: --holdout-m must be positive");
        const rbme::BatchDataset extra = rbme::sample_clean(spec, gen.holdout_m, 1, rbme::derive_seed(seed, 2));
        std::ofstream csv(gen.holdout_path);
        if (!csv) throw rbme::IoError("cannot write " + gen.holdout_path);
        rbme::write_vectors_csv(csv, extra.data, gen.d);
      }
      return kExitOk;
    }

    if (estimate->parsed()) {
      const rbme::BatchDataset ds = rbme::load_dataset(est.dataset);
      const auto report = rbme::run_estimator(rbme::parse_estimator(est.estimator), ds, est.eps, est.alpha);
      json j = report_json(report);
      j["error_l2"] = rbme::distance(report.estimate, ds.target_mean);
      emit_json(j, out_path);
      return strict && !report.converged ? kExitNotConverged : kExitOk;
    }

    if (experiment->parsed()) {
      rbme::ExperimentConfig cfg = rbme::load_config(config_path);
      if (seed_set) cfg.base_seed = seed;
      if (workers > 0) cfg.workers = workers;
      if (!out_path.empty()) cfg.output_path = out_path;
      if (!svg_path.empty()) cfg.svg_path = svg_path;
      if (cfg.output_path.empty()) throw rbme::ValidationError("experiment: no output path (--out or run.output)");
      std::ofstream probe(cfg.output_path);
      if (!probe) throw rbme::IoError("cannot write " + cfg.output_path);
      const auto rows = rbme::run_experiment(cfg);
      rbme::write_csv(probe, rows);
      probe.close();
      if (!cfg.svg_path.empty()) rbme::emit_svg(rows, cfg.svg_x, cfg.svg_path);
      bool all_converged = true;
      for (const auto& r : rows) all_converged = all_converged && r.converged;
      return strict && !all_converged ? kExitNotConverged : kExitOk;
    }

    if (adaptive->parsed()) {
      const rbme::BatchDataset ds = rbme::load_dataset(ad.dataset);
      std::ifstream hin(ad.holdout);
      if (!hin) throw rbme::IoError("cannot open " + ad.holdout);
      std::size_t d = 0;
      const std::vector<double> holdout = rbme::read_vectors_csv(hin, d);
      if (d != ds.d) throw rbme::SizingError("adaptive: holdout dimension differs from dataset");
      rbme::AdaptiveOptions options{ad.eps0, ad.alpha0, ad.c};
      const auto outcome = rbme::adaptive_estimate(ds, rbme::PointSet(holdout, d), options);
      json j = {{"estimate", outcome.estimate},
                {"eps_hat", outcome.eps_hat},
                {"alpha_hat", outcome.alpha_hat},
                {"guesses_tried", outcome.guesses_tried},
                {"accepted", outcome.accepted},
                {"error_l2", outcome.estimate.empty() ? json(nullptr)
                                                      : json(rbme::distance(outcome.estimate, ds.target_mean))}};
      emit_json(j, out_path);
      return strict && !outcome.accepted ? kExitNotConverged : kExitOk;
    }

    if (hardness->parsed()) {
      rbme::HypothesisPair pair;
      if (hd.kind == "h0h1") pair = rbme::build_h0_h1(hd.eps, hd.n, hd.N, hd.d, seed);
      else if (hd.kind == "h2h3") pair = rbme::build_h2_h3(hd.alpha, hd.n, hd.N, hd.d, seed);
      else throw rbme::ValidationError("hardness: --kind must be h0h1 or h2h3");
      if (!hd.prefix.empty()) {
        rbme::save_dataset(hd.prefix + "_a.rbme", pair.dataset_a);
        rbme::save_dataset(hd.prefix + "_b.rbme", pair.dataset_b);
      }
      json checks = json::array();
      bool all_hold = true;
      for (rbme::Estimator e : rbme::kAllEstimators) {
        const auto r = rbme::indistinguishability_check(pair, e);
        const bool holds = r.max_error >= pair.separation / 2.0;
        all_hold = all_hold && holds;
        checks.push_back({{"estimator", std::string(rbme::to_string(e))},
                          {"error_a", r.error_a},
                          {"error_b", r.error_b},
                          {"max_error", r.max_error},
                          {"bound_holds", holds}});
      }
      json j = {{"kind", hd.kind},          {"separation", pair.separation}, {"coupled", pair.coupled},
                {"eps", pair.eps},          {"alpha", pair.alpha},           {"attempts", pair.attempts},
                {"all_bounds_hold", all_hold}, {"checks", checks}};
      emit_json(j, out_path);
      return kExitOk;
    }

    if (fit->parsed()) {
      std::ifstream in(ft.csv);
      if (!in) throw rbme::IoError("cannot open " + ft.csv);
      const auto rows = rbme::read_csv(in);
      std::vector<std::string> names;
      if (!ft.estimator.empty()) {
        names.push_back(ft.estimator);
      } else {
        for (const auto& r : rows)
          if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
      }
      json fits = json::array();
      for (const auto& name : names) {
        const auto f = rbme::fit_scaling(rows, ft.x, name);
        fits.push_back({{"estimator", name},
                        {"x", ft.x},
                        {"slope", f.slope},
                        {"intercept", f.intercept},
                        {"r2", f.r2},
                        {"x_values", f.x},
                        {"median_error", f.median_error}});
      }
      emit_json(json{{"fits", fits}}, out_path);
      return kExitOk;
    }
  } catch (const rbme::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
