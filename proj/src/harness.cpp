#include "rbme/harness.hpp"

#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "rbme/errors.hpp"
#include "rbme/numfmt.hpp"
#include "rbme/rng.hpp"

namespace rbme {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t\r");
    if (first == std::string::npos) continue;
    items.push_back(item.substr(first, last - first + 1));
  }
  if (items.empty()) throw ValidationError("config: empty list");
  return items;
}

std::size_t parse_count(const std::string& s) {
  const double v = parse_double(s);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ValidationError("config: not a count: " + s);
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') throw ValidationError("config: not an unsigned integer: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("config: not a boolean: " + s);
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& text, F&& parse_one) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_one(item));
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (section != "grid" && section != "run") throw ValidationError("config: unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (section == "grid") {
        if (key == "d") cfg.d = parse_list<std::size_t>(value, parse_count);
        else if (key == "n") cfg.n = parse_list<std::size_t>(value, parse_count);
        else if (key == "N") cfg.N = parse_list<std::size_t>(value, parse_count);
        else if (key == "eps") cfg.eps = parse_list<double>(value, [](const std::string& s) { return parse_double(s); });
        else if (key == "alpha") cfg.alpha = parse_list<double>(value, [](const std::string& s) { return parse_double(s); });
        else if (key == "variant") cfg.variant = parse_list<Variant>(value, [](const std::string& s) { return parse_variant(s); });
        else if (key == "adversary") cfg.adversary = parse_list<Adversary>(value, [](const std::string& s) { return parse_adversary(s); });
        else if (key == "magnitude") cfg.magnitude = parse_magnitude(value);
        else if (key == "direction") cfg.direction = value;
        else if (key == "estimators") cfg.estimators = parse_list<Estimator>(value, [](const std::string& s) { return parse_estimator(s); });
        else throw ValidationError("config: unknown key grid." + key);
      } else {
        if (key == "trials") cfg.trials = parse_count(value);
        else if (key == "base_seed") cfg.base_seed = parse_u64(value);
        else if (key == "workers") cfg.workers = parse_count(value);
        else if (key == "record_runtime") cfg.record_runtime = parse_bool(value);
        else if (key == "output") cfg.output_path = value;
        else if (key == "svg") cfg.svg_path = value;
        else if (key == "svg_x") cfg.svg_x = value;
        else throw ValidationError("config: unknown key run." + key);
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  return parse_config(in);
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ValidationError("config: trials must be at least 1");
  if (cfg.estimators.empty()) throw ValidationError("config: no estimators");
  for (std::size_t v : cfg.d) if (v < 1) throw ValidationError("config: d must be at least 1");
  for (std::size_t v : cfg.n) if (v < 1) throw ValidationError("config: n must be at least 1");
  for (std::size_t v : cfg.N) if (v < 1) throw ValidationError("config: N must be at least 1");
  for (double v : cfg.eps) if (!(v >= 0.0 && v < 0.5)) throw ValidationError("config: eps must lie in [0, 1/2)");
  for (double v : cfg.alpha) if (!(v >= 0.0 && v < 0.5)) throw ValidationError("config: alpha must lie in [0, 1/2)");

  std::vector<GridPoint> points;
  for (std::size_t d : cfg.d) {
    parse_direction(cfg.direction, d);  // validates against each d
    for (std::size_t n : cfg.n)
      for (std::size_t N : cfg.N)
        for (double eps : cfg.eps)
          for (double alpha : cfg.alpha)
            for (Variant variant : cfg.variant)
              for (Adversary adversary : cfg.adversary) points.push_back({d, n, N, eps, alpha, variant, adversary});
  }
  return points;
}

std::vector<std::uint64_t> trial_seeds(const ExperimentConfig& cfg, std::size_t points) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(points * cfg.trials);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const std::uint64_t s = derive_seed(cfg.base_seed, p, t);
      if (!seen.insert(s).second) throw ValidationError("config: seed collision in grid; change base_seed");
      seeds.push_back(s);
    }
  }
  return seeds;
}

BatchDataset make_trial_dataset(const ExperimentConfig& cfg, const GridPoint& point, std::uint64_t seed) {
  CleanSpec spec;
  spec.d = point.d;
  const BatchDataset clean = sample_clean(spec, point.N, point.n, derive_seed(seed, 0));
  CorruptionPlan plan;
  plan.variant = point.variant;
  plan.eps = point.eps;
  plan.alpha = point.alpha;
  plan.adversary = point.adversary;
  plan.pull_direction = parse_direction(cfg.direction, point.d);
  plan.pull_magnitude = cfg.magnitude;
  plan.seed = derive_seed(seed, 1);
  return apply_plan(clean, plan);
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  const std::vector<GridPoint> points = expand_grid(cfg);
  const std::vector<std::uint64_t> seeds = trial_seeds(cfg, points.size());
  const std::size_t units = seeds.size();
  std::vector<std::vector<ExperimentRow>> slots(units);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t unit = next.fetch_add(1);
      if (unit >= units) return;
      try {
        const GridPoint& point = points[unit / cfg.trials];
        const BatchDataset ds = make_trial_dataset(cfg, point, seeds[unit]);
        for (Estimator e : cfg.estimators) {
          const auto start = std::chrono::steady_clock::now();
          const EstimateReport report = run_estimator(e, ds, point.eps, point.alpha);
          const auto stop = std::chrono::steady_clock::now();
          ExperimentRow row;
          row.point = point;
          row.estimator = std::string(to_string(e));
          row.trial = unit % cfg.trials;
          row.seed = seeds[unit];
          row.error_l2 = distance(report.estimate, ds.target_mean);
          row.certificate_user = report.certificate_user;
          row.certificate_sample = report.certificate_sample;
          row.converged = report.converged;
          if (cfg.record_runtime) row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
          slots[unit].push_back(std::move(row));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(units);
        return;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, units));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<ExperimentRow> rows;
  rows.reserve(units * cfg.estimators.size());
  for (auto& slot : slots)
    for (auto& row : slot) rows.push_back(std::move(row));
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.point.d << ',' << r.point.n << ',' << r.point.N << ',' << format_double(r.point.eps) << ','
        << format_double(r.point.alpha) << ',' << to_string(r.point.variant) << ',' << to_string(r.point.adversary)
        << ',' << r.estimator << ',' << r.trial << ',' << r.seed << ',' << format_double(r.error_l2) << ','
        << format_double(r.certificate_user) << ',' << format_double(r.certificate_sample) << ','
        << (r.converged ? "true" : "false") << ',' << format_double(r.runtime_ms) << '\n';
  }
}

std::vector<ExperimentRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw IoError("csv: unexpected header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 15) throw IoError("csv: expected 15 columns");
    ExperimentRow r;
    r.point.d = parse_count(f[0]);
    r.point.n = parse_count(f[1]);
    r.point.N = parse_count(f[2]);
    r.point.eps = parse_double(f[3]);
    r.point.alpha = parse_double(f[4]);
    r.point.variant = parse_variant(f[5]);
    r.point.adversary = parse_adversary(f[6]);
    r.estimator = f[7];
    r.trial = parse_count(f[8]);
    r.seed = parse_u64(f[9]);
    r.error_l2 = parse_double(f[10]);
    r.certificate_user = parse_double(f[11]);
    r.certificate_sample = parse_double(f[12]);
    r.converged = f[13] == "true";
    r.runtime_ms = parse_double(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

double grid_value(const GridPoint& p, std::string_view name) {
  if (name == "d") return static_cast<double>(p.d);
  if (name == "n") return static_cast<double>(p.n);
  if (name == "N") return static_cast<double>(p.N);
  if (name == "eps") return p.eps;
  if (name == "alpha") return p.alpha;
  throw ValidationError("unknown grid parameter: " + std::string(name));
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientDataError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

ScalingFit fit_scaling(const std::vector<ExperimentRow>& rows, std::string_view x_param, std::string_view estimator) {
  std::map<double, std::vector<double>> groups;
  for (const auto& r : rows)
    if (r.estimator == estimator) groups[grid_value(r.point, x_param)].push_back(r.error_l2);

  ScalingFit fit;
  std::vector<double> lx;
  std::vector<double> ly;
  for (auto& [x, errors] : groups) {
    const double m = median(errors);
    if (!(x > 0.0) || !(m > 0.0)) continue;
    fit.x.push_back(x);
    fit.median_error.push_back(m);
    lx.push_back(std::log(x));
    ly.push_back(std::log(m));
  }
  if (lx.size() < 3) throw InsufficientDataError("fit_scaling: fewer than 3 distinct positive x values");

  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace rbme
