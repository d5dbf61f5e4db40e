#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbme/linalg.hpp"

namespace rbme {

enum class Family { isotropic_gaussian, scaled_bernoulli_spike };

struct CleanSpec {
  std::size_t d = 1;
  Vector mean;  // empty means the origin
  Family family = Family::isotropic_gaussian;
  double covariance_scale = 1.0;  // population covariance is at most scale * I
  // Spike family: the spike coordinate equals mean_c + p^{-1/2} with
  // probability p and mean_c otherwise, recentered so its mean is mean_c.
  double spike_p = 0.5;
  std::size_t spike_coordinate = 0;
};

/// N users x n samples x d coordinates, plus the latent clean values and
/// ground-truth corruption bookkeeping.
struct BatchDataset {
  std::size_t N = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;   // observed x_{i,j}, N*n*d row-major
  std::vector<double> clean;  // latent v_{i,j}
  std::vector<std::uint8_t> good_user;          // N
  std::vector<std::uint8_t> sample_clean_flag;  // N*n
  std::vector<double> user_means;               // N*d
  Vector target_mean;
  std::uint64_t seed = 0;

  std::size_t sample_index(std::size_t i, std::size_t j) const { return i * n + j; }
  std::span<const double> sample(std::size_t i, std::size_t j) const {
    return {data.data() + (i * n + j) * d, d};
  }
  std::span<double> sample(std::size_t i, std::size_t j) {
    return {data.data() + (i * n + j) * d, d};
  }
  std::span<const double> clean_sample(std::size_t i, std::size_t j) const {
    return {clean.data() + (i * n + j) * d, d};
  }
  std::span<const double> batch(std::size_t i) const { return {data.data() + i * n * d, n * d}; }
  std::span<const double> user_mean(std::size_t i) const { return {user_means.data() + i * d, d}; }

  PointSet all_samples() const { return PointSet(data, d); }
  PointSet batch_points(std::size_t i) const { return PointSet(batch(i), d); }

  /// Observed empirical mean of every batch, N*d row-major.
  std::vector<double> batch_means() const;

  std::size_t bad_user_count() const;
  std::size_t corrupted_sample_count(std::size_t i) const;
};

enum class Variant { mean_shift, two_level };
enum class Adversary { mean_pull, cluster, zero_out };

/// How far the adversary pulls corrupted points.
struct PullMagnitude {
  // edge: largest pull under kEdgeFraction of the certificate the matching
  // filter checks (batch means for users, pooled samples for samples).
  // pooled_edge: users are instead calibrated against the pooled-sample
  // certificate, i.e. the strongest user-level pull a pooled filter cannot see.
  enum class Kind { automatic, edge, pooled_edge, fixed };
  Kind kind = Kind::automatic;
  double value = 0.0;

  static PullMagnitude automatic() { return {}; }
  static PullMagnitude edge() { return {Kind::edge, 0.0}; }
  static PullMagnitude pooled_edge() { return {Kind::pooled_edge, 0.0}; }
  static PullMagnitude fixed(double r) { return {Kind::fixed, r}; }
};

/// Corruption parameters shared by the user- and sample-level adversaries.
struct PullSpec {
  std::optional<Vector> direction;  // unset: seeded random unit vector
  PullMagnitude magnitude;
  double alpha_hint = 0.0;  // the adversary's knowledge of alpha for the user-level edge
};

struct CorruptionPlan {
  Variant variant = Variant::two_level;
  double eps = 0.0;
  double alpha = 0.0;
  Adversary adversary = Adversary::mean_pull;
  std::optional<Vector> pull_direction;
  PullMagnitude pull_magnitude;
  std::uint64_t seed = 0;
};

/// Fraction of the edge certificate the edge adversary stays under.
inline constexpr double kEdgeFraction = 0.98;

/// True when the plan violates the preconditions of its variant
/// (mean-shift: eps, alpha < 0.1; two-level: eps + 5 alpha < 1/18).
bool plan_outside_guarantees(const CorruptionPlan& plan);

BatchDataset sample_clean(const CleanSpec& spec, std::size_t N, std::size_t n, std::uint64_t seed);

/// Shifts every good user's batch so its mean is mu + sqrt(alpha) u_i.
/// With a direction, all users share it; otherwise u_i is drawn per user.
BatchDataset apply_mean_shift(const BatchDataset& ds, double alpha, std::uint64_t seed,
                              const std::optional<Vector>& direction = std::nullopt);

/// Replaces floor(eps N) whole users.
BatchDataset corrupt_users(const BatchDataset& ds, double eps, Adversary adversary, std::uint64_t seed,
                           const PullSpec& pull = {});

/// Replaces floor(alpha n) samples inside every user still flagged good.
BatchDataset corrupt_samples(const BatchDataset& ds, double alpha, Adversary adversary,
                             std::uint64_t seed, const PullSpec& pull = {});

/// Runs the plan's variant: mean shift then user corruption, or user then
/// sample corruption.
BatchDataset apply_plan(const BatchDataset& clean, const CorruptionPlan& plan);

std::string_view to_string(Variant v);
std::string_view to_string(Adversary a);
std::string_view to_string(Family f);
Variant parse_variant(std::string_view s);
Adversary parse_adversary(std::string_view s);
Family parse_family(std::string_view s);
PullMagnitude parse_magnitude(std::string_view s);
std::string to_string(const PullMagnitude& m);

/// "auto" -> nullopt, "e<k>" -> k-th standard basis vector (1-based).
std::optional<Vector> parse_direction(std::string_view s, std::size_t d);

}  // namespace rbme
