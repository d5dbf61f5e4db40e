#include "rbme/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "rbme/errors.hpp"
#include "rbme/rng.hpp"

namespace rbme {

namespace {

std::size_t budget_count(double fraction, std::size_t total) {
  // floor with a guard against 0.1 * 20 = 1.9999...
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
}

Vector normalized(const Vector& v) {
  const double len = norm2(v);
  if (!(len > 0.0)) throw ParameterError("pull direction must be nonzero");
  Vector u(v);
  for (auto& x : u) x /= len;
  return u;
}

Vector resolve_direction(const std::optional<Vector>& direction, std::size_t d, std::uint64_t seed) {
  if (direction) {
    if (direction->size() != d) throw SizingError("pull direction has wrong dimension");
    return normalized(*direction);
  }
  Engine engine = make_engine(derive_seed(seed, 0x64697265ULL));
  return random_unit(d, engine);
}

Vector clean_grand_mean(const BatchDataset& ds) { return empirical_mean(PointSet(ds.clean, ds.d)); }

// Indices ordered by key ascending, ties by index.
std::vector<std::size_t> order_by(const std::vector<double>& key) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return idx;
}

double top_cov_eigen(const std::vector<double>& points, std::size_t d, std::span<const double> weights = {}) {
  return top_eigen(CovOperator::centered(PointSet(points, d), weights)).value;
}

// Largest r in [0, r_max] with certificate(r) <= target, by bisection.
template <typename Certificate>
double edge_radius(Certificate&& certificate, double target, double r_max) {
  if (certificate(0.0) > target) return 0.0;
  if (certificate(r_max) <= target) return r_max;
  double lo = 0.0;
  double hi = r_max;
  for (int it = 0; it < 48 && hi - lo > 1e-9 * r_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (certificate(mid) <= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double auto_magnitude(std::size_t d) { return 10.0 * std::sqrt(static_cast<double>(d)); }

}  // namespace

std::vector<double> BatchDataset::batch_means() const {
  std::vector<double> means(N * d, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double* m = means.data() + i * d;
    for (std::size_t j = 0; j < n; ++j) {
      const auto x = sample(i, j);
      for (std::size_t c = 0; c < d; ++c) m[c] += x[c];
    }
    for (std::size_t c = 0; c < d; ++c) m[c] /= static_cast<double>(n);
  }
  return means;
}

std::size_t BatchDataset::bad_user_count() const {
  return static_cast<std::size_t>(std::count(good_user.begin(), good_user.end(), std::uint8_t{0}));
}

std::size_t BatchDataset::corrupted_sample_count(std::size_t i) const {
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) count += sample_clean_flag[sample_index(i, j)] == 0 ? 1 : 0;
  return count;
}

bool plan_outside_guarantees(const CorruptionPlan& plan) {
  if (plan.variant == Variant::mean_shift) return !(plan.eps < 0.1 && plan.alpha < 0.1);
  return !(plan.eps + 5.0 * plan.alpha < 1.0 / 18.0);
}

BatchDataset sample_clean(const CleanSpec& spec, std::size_t N, std::size_t n, std::uint64_t seed) {
  if (N < 1 || n < 1 || spec.d < 1) throw SizingError("sample_clean: N, n and d must all be at least 1");
  if (!spec.mean.empty() && spec.mean.size() != spec.d)
    throw SizingError("sample_clean: mean has wrong dimension");
  if (!(spec.covariance_scale > 0.0 && spec.covariance_scale <= 1.0))
    throw ParameterError("sample_clean: covariance_scale must lie in (0, 1]");
  if (spec.family == Family::scaled_bernoulli_spike) {
    if (!(spec.spike_p > 0.0 && spec.spike_p <= 1.0)) throw ParameterError("sample_clean: spike_p must lie in (0, 1]");
    if (spec.spike_coordinate >= spec.d) throw SizingError("sample_clean: spike coordinate out of range");
  }

  BatchDataset ds;
  ds.N = N;
  ds.n = n;
  ds.d = spec.d;
  ds.seed = seed;
  ds.target_mean = spec.mean.empty() ? Vector(spec.d, 0.0) : spec.mean;
  ds.clean.resize(N * n * spec.d);

  Engine engine = make_engine(seed);
  const double scale = std::sqrt(spec.covariance_scale);
  if (spec.family == Family::isotropic_gaussian) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < N * n; ++k)
      for (std::size_t c = 0; c < spec.d; ++c) ds.clean[k * spec.d + c] = ds.target_mean[c] + scale * gauss(engine);
  } else {
    std::bernoulli_distribution spike(spec.spike_p);
    const double height = 1.0 / std::sqrt(spec.spike_p);
    const double center = std::sqrt(spec.spike_p);
    for (std::size_t k = 0; k < N * n; ++k) {
      for (std::size_t c = 0; c < spec.d; ++c) ds.clean[k * spec.d + c] = ds.target_mean[c];
      const double offset = (spike(engine) ? height : 0.0) - center;
      ds.clean[k * spec.d + spec.spike_coordinate] += scale * offset;
    }
  }
  ds.data = ds.clean;
  ds.good_user.assign(N, 1);
  ds.sample_clean_flag.assign(N * n, 1);
  ds.user_means.resize(N * spec.d);
  for (std::size_t i = 0; i < N; ++i)
    std::copy(ds.target_mean.begin(), ds.target_mean.end(), ds.user_means.begin() + static_cast<std::ptrdiff_t>(i * spec.d));
  return ds;
}

BatchDataset apply_mean_shift(const BatchDataset& ds, double alpha, std::uint64_t seed,
                              const std::optional<Vector>& direction) {
  if (!(alpha >= 0.0)) throw ParameterError("apply_mean_shift: alpha must be nonnegative");
  BatchDataset out = ds;
  if (alpha == 0.0) return out;
  const std::size_t d = ds.d;
  const double radius = std::sqrt(alpha);
  std::optional<Vector> shared;
  if (direction) {
    if (direction->size() != d) throw SizingError("apply_mean_shift: direction has wrong dimension");
    shared = normalized(*direction);
  }
  Engine engine = make_engine(seed);
  for (std::size_t i = 0; i < ds.N; ++i) {
    const Vector u = shared ? *shared : random_unit(d, engine);
    if (!ds.good_user[i]) continue;
    Vector shift(d);
    for (std::size_t c = 0; c < d; ++c) shift[c] = radius * u[c];
    for (std::size_t j = 0; j < ds.n; ++j) {
      const std::size_t base = (i * ds.n + j) * d;
      for (std::size_t c = 0; c < d; ++c) {
        out.clean[base + c] += shift[c];
        out.data[base + c] += shift[c];
      }
    }
    for (std::size_t c = 0; c < d; ++c) out.user_means[i * d + c] = ds.target_mean[c] + shift[c];
  }
  return out;
}

BatchDataset corrupt_users(const BatchDataset& ds, double eps, Adversary adversary, std::uint64_t seed,
                           const PullSpec& pull) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ParameterError("corrupt_users: eps must lie in [0, 1)");
  BatchDataset out = ds;
  const std::size_t k = budget_count(eps, ds.N);
  if (k == 0) return out;
  const std::size_t d = ds.d;
  const std::size_t n = ds.n;

  const Vector u = resolve_direction(pull.direction, d, seed);
  const Vector center = clean_grand_mean(ds);
  Engine engine = make_engine(derive_seed(seed, 1));

  // The adversary inspects the clean tensor before choosing whom to replace.
  std::vector<double> clean_means(ds.N * d, 0.0);
  for (std::size_t i = 0; i < ds.N; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) clean_means[i * d + c] += ds.clean[(i * n + j) * d + c] / static_cast<double>(n);

  std::vector<std::size_t> chosen;
  switch (adversary) {
    case Adversary::mean_pull: {
      std::vector<double> key(ds.N);
      for (std::size_t i = 0; i < ds.N; ++i) {
        double proj = 0.0;
        for (std::size_t c = 0; c < d; ++c) proj += (clean_means[i * d + c] - center[c]) * u[c];
        key[i] = proj;
      }
      const auto order = order_by(key);
      chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
    case Adversary::zero_out: {
      std::vector<double> key(ds.N);
      for (std::size_t i = 0; i < ds.N; ++i) key[i] = -norm2({clean_means.data() + i * d, d});
      const auto order = order_by(key);
      chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
    case Adversary::cluster: {
      std::vector<std::size_t> all(ds.N);
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::shuffle(all.begin(), all.end(), engine);
      chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
  }
  std::sort(chosen.begin(), chosen.end());

  // Offsets around center + r u before scaling by r: zero for mean-pull, unit gaussian for cluster.
  std::vector<double> jitter(k * n * d, 0.0);
  if (adversary == Adversary::cluster) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : jitter) x = gauss(engine);
  }

  double r = 0.0;
  if (adversary != Adversary::zero_out) {
    switch (pull.magnitude.kind) {
      case PullMagnitude::Kind::automatic: r = auto_magnitude(d); break;
      case PullMagnitude::Kind::fixed: r = pull.magnitude.value; break;
      case PullMagnitude::Kind::edge: {
        std::vector<double> means = ds.batch_means();
        std::vector<double> jitter_means(k * d, 0.0);
        for (std::size_t b = 0; b < k; ++b)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t c = 0; c < d; ++c) jitter_means[b * d + c] += jitter[(b * n + j) * d + c] / static_cast<double>(n);
        const double target = kEdgeFraction * 2.0 * (1.0 / static_cast<double>(n) + pull.alpha_hint);
        auto certificate = [&](double radius) {
          for (std::size_t b = 0; b < k; ++b)
            for (std::size_t c = 0; c < d; ++c)
              means[chosen[b] * d + c] = center[c] + radius * u[c] + jitter_means[b * d + c];
          return top_cov_eigen(means, d);
        };
        r = edge_radius(certificate, target, 10.0 * auto_magnitude(d));
        break;
      }
      case PullMagnitude::Kind::pooled_edge: {
        std::vector<double> pooled = ds.data;
        auto certificate = [&](double radius) {
          for (std::size_t b = 0; b < k; ++b)
            for (std::size_t j = 0; j < n; ++j)
              for (std::size_t c = 0; c < d; ++c)
                pooled[(chosen[b] * n + j) * d + c] = center[c] + radius * u[c] + jitter[(b * n + j) * d + c];
          return top_cov_eigen(pooled, d);
        };
        r = edge_radius(certificate, kEdgeFraction * 2.0, 10.0 * auto_magnitude(d));
        break;
      }
    }
  }

  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t i = chosen[b];
    out.good_user[i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      out.sample_clean_flag[i * n + j] = 0;
      auto x = out.sample(i, j);
      for (std::size_t c = 0; c < d; ++c)
        x[c] = adversary == Adversary::zero_out ? 0.0 : center[c] + r * u[c] + jitter[(b * n + j) * d + c];
    }
  }
  return out;
}

BatchDataset corrupt_samples(const BatchDataset& ds, double alpha, Adversary adversary, std::uint64_t seed,
                             const PullSpec& pull) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("corrupt_samples: alpha must lie in [0, 1)");
  BatchDataset out = ds;
  const std::size_t m = budget_count(alpha, ds.n);
  if (m == 0) return out;
  const std::size_t d = ds.d;
  const std::size_t n = ds.n;

  const Vector u = resolve_direction(pull.direction, d, seed);
  const Vector center = clean_grand_mean(ds);
  Engine engine = make_engine(derive_seed(seed, 1));

  // (user, sample) pairs to replace, grouped by user
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < ds.N; ++i) {
    if (!ds.good_user[i]) continue;
    std::vector<std::size_t> pick;
    switch (adversary) {
      case Adversary::mean_pull: {
        std::vector<double> key(n);
        for (std::size_t j = 0; j < n; ++j) {
          const auto v = ds.clean_sample(i, j);
          double proj = 0.0;
          for (std::size_t c = 0; c < d; ++c) proj += (v[c] - center[c]) * u[c];
          key[j] = proj;
        }
        const auto order = order_by(key);
        pick.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
        break;
      }
      case Adversary::zero_out: {
        std::vector<double> key(n);
        for (std::size_t j = 0; j < n; ++j) key[j] = -norm2(ds.clean_sample(i, j));
        const auto order = order_by(key);
        pick.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
        break;
      }
      case Adversary::cluster: {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::shuffle(all.begin(), all.end(), engine);
        pick.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
        break;
      }
    }
    std::sort(pick.begin(), pick.end());
    for (std::size_t j : pick) chosen.push_back(i * n + j);
  }

  std::vector<double> jitter(chosen.size() * d, 0.0);
  if (adversary == Adversary::cluster) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : jitter) x = gauss(engine);
  }

  double r = 0.0;
  if (adversary != Adversary::zero_out) {
    switch (pull.magnitude.kind) {
      case PullMagnitude::Kind::automatic: r = auto_magnitude(d); break;
      case PullMagnitude::Kind::fixed: r = pull.magnitude.value; break;
      case PullMagnitude::Kind::edge:
      case PullMagnitude::Kind::pooled_edge: {
        // Pooled certificate over the good users' samples.
        std::vector<double> pooled;
        std::vector<std::size_t> slot(chosen.size());
        std::size_t next = 0;
        for (std::size_t i = 0; i < ds.N; ++i) {
          if (!ds.good_user[i]) continue;
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t flat = i * n + j;
            if (next < chosen.size() && chosen[next] == flat) slot[next++] = pooled.size() / d;
            const auto x = ds.sample(i, j);
            pooled.insert(pooled.end(), x.begin(), x.end());
          }
        }
        const double target = kEdgeFraction * 2.0;
        auto certificate = [&](double radius) {
          for (std::size_t b = 0; b < chosen.size(); ++b)
            for (std::size_t c = 0; c < d; ++c)
              pooled[slot[b] * d + c] = center[c] + radius * u[c] + jitter[b * d + c];
          return top_cov_eigen(pooled, d);
        };
        r = edge_radius(certificate, target, 10.0 * auto_magnitude(d));
        break;
      }
    }
  }

  for (std::size_t b = 0; b < chosen.size(); ++b) {
    const std::size_t flat = chosen[b];
    out.sample_clean_flag[flat] = 0;
    auto x = out.sample(flat / n, flat % n);
    for (std::size_t c = 0; c < d; ++c)
      x[c] = adversary == Adversary::zero_out ? 0.0 : center[c] + r * u[c] + jitter[b * d + c];
  }
  return out;
}

BatchDataset apply_plan(const BatchDataset& clean, const CorruptionPlan& plan) {
  // One direction for both levels so the two adversaries pull together.
  const Vector u = resolve_direction(plan.pull_direction, clean.d, plan.seed);
  PullSpec pull{u, plan.pull_magnitude, plan.alpha};
  if (plan.variant == Variant::mean_shift) {
    BatchDataset shifted = apply_mean_shift(clean, plan.alpha, derive_seed(plan.seed, 1), plan.pull_direction);
    return corrupt_users(shifted, plan.eps, plan.adversary, derive_seed(plan.seed, 2), pull);
  }
  BatchDataset users = corrupt_users(clean, plan.eps, plan.adversary, derive_seed(plan.seed, 2), pull);
  return corrupt_samples(users, plan.alpha, plan.adversary, derive_seed(plan.seed, 3), pull);
}

std::string_view to_string(Variant v) { return v == Variant::mean_shift ? "mean-shift" : "two-level"; }

std::string_view to_string(Adversary a) {
  switch (a) {
    case Adversary::mean_pull: return "mean-pull";
    case Adversary::cluster: return "cluster";
    case Adversary::zero_out: return "zero-out";
  }
  return "?";
}

std::string_view to_string(Family f) {
  return f == Family::isotropic_gaussian ? "isotropic-gaussian" : "scaled-bernoulli-spike";
}

Variant parse_variant(std::string_view s) {
  if (s == "mean-shift") return Variant::mean_shift;
  if (s == "two-level") return Variant::two_level;
  throw ParameterError("unknown variant: " + std::string(s));
}

Adversary parse_adversary(std::string_view s) {
  if (s == "mean-pull") return Adversary::mean_pull;
  if (s == "cluster") return Adversary::cluster;
  if (s == "zero-out") return Adversary::zero_out;
  throw ParameterError("unknown adversary: " + std::string(s));
}

Family parse_family(std::string_view s) {
  if (s == "isotropic-gaussian") return Family::isotropic_gaussian;
  if (s == "scaled-bernoulli-spike") return Family::scaled_bernoulli_spike;
  throw ParameterError("unknown family: " + std::string(s));
}

PullMagnitude parse_magnitude(std::string_view s) {
  if (s == "auto") return PullMagnitude::automatic();
  if (s == "edge") return PullMagnitude::edge();
  if (s == "pooled-edge") return PullMagnitude::pooled_edge();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(value > 0.0))
    throw ParameterError("pull magnitude must be 'auto', 'edge', 'pooled-edge' or a positive number: " + std::string(s));
  return PullMagnitude::fixed(value);
}

std::string to_string(const PullMagnitude& m) {
  switch (m.kind) {
    case PullMagnitude::Kind::automatic: return "auto";
    case PullMagnitude::Kind::edge: return "edge";
    case PullMagnitude::Kind::pooled_edge: return "pooled-edge";
    case PullMagnitude::Kind::fixed: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", m.value);
      return buf;
    }
  }
  return "?";
}

std::optional<Vector> parse_direction(std::string_view s, std::size_t d) {
  if (s == "auto") return std::nullopt;
  if (s.size() >= 2 && s[0] == 'e') {
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), k);
    if (ec == std::errc() && ptr == s.data() + s.size() && k >= 1 && k <= d) {
      Vector u(d, 0.0);
      u[k - 1] = 1.0;
      return u;
    }
  }
  throw ParameterError("direction must be 'auto' or e<k> with 1 <= k <= d: " + std::string(s));
}

}  // namespace rbme
