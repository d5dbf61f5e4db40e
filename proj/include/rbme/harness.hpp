#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbme/estimators.hpp"
#include "rbme/model.hpp"

namespace rbme {

/// Cartesian grid of experiment parameters plus run settings.
struct ExperimentConfig {
  std::vector<std::size_t> d{16};
  std::vector<std::size_t> n{16};
  std::vector<std::size_t> N{200};
  std::vector<double> eps{0.0};
  std::vector<double> alpha{0.0};
  std::vector<Variant> variant{Variant::two_level};
  std::vector<Adversary> adversary{Adversary::mean_pull};
  PullMagnitude magnitude;
  std::string direction = "auto";  // "auto" or "e<k>"
  std::vector<Estimator> estimators{Estimator::naive};
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  bool record_runtime = false;  // off keeps the CSV a pure function of the config
  std::string output_path;
  std::string svg_path;
  std::string svg_x = "eps";
};

struct GridPoint {
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t N = 0;
  double eps = 0.0;
  double alpha = 0.0;
  Variant variant = Variant::two_level;
  Adversary adversary = Adversary::mean_pull;
};

struct ExperimentRow {
  GridPoint point;
  std::string estimator;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double error_l2 = 0.0;
  double certificate_user = 0.0;
  double certificate_sample = 0.0;
  bool converged = true;
  double runtime_ms = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "d,n,N,eps,alpha,variant,adversary,estimator,trial,seed,error_l2,certificate_user,certificate_sample,converged,"
    "runtime_ms";

/// Parses the INI-style config ([grid] / [run] sections, comma-separated lists).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Validates and expands the grid in (d, n, N, eps, alpha, variant, adversary) order.
std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

/// Per-(point, trial) seed; throws if two units collide.
std::vector<std::uint64_t> trial_seeds(const ExperimentConfig& cfg, std::size_t points);

/// Generates, corrupts and estimates every (point, trial) unit across a
/// worker pool; rows come back in (point, trial, estimator) order.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

/// One trial's dataset; exposed so acceptance checks can reuse the exact data.
BatchDataset make_trial_dataset(const ExperimentConfig& cfg, const GridPoint& point, std::uint64_t seed);

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_csv(std::istream& in);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> x;
  std::vector<double> median_error;
};

/// Grid parameter value by name: d, n, N, eps, alpha.
double grid_value(const GridPoint& p, std::string_view name);

/// OLS of log(median error) on log(x) over the rows of one estimator.
ScalingFit fit_scaling(const std::vector<ExperimentRow>& rows, std::string_view x_param, std::string_view estimator);

double median(std::vector<double> values);

/// Log-log line chart of median error against x_param, one polyline per estimator.
std::string render_svg(const std::vector<ExperimentRow>& rows, std::string_view x_param);
void emit_svg(const std::vector<ExperimentRow>& rows, std::string_view x_param, const std::string& path);

}  // namespace rbme
