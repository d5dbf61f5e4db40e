#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rbme/errors.hpp"
#include "rbme/model.hpp"
#include "rbme/oracle.hpp"
#include "rbme/rng.hpp"

using namespace rbme;

namespace {

double subset_objective(const std::vector<double>& pts, std::size_t d, const std::vector<std::size_t>& pick) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(pick.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < pick.size(); ++r)
    for (std::size_t c = 0; c < d; ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pts[pick[r] * d + c];
  const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = C.transpose() * C / static_cast<double>(pick.size());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().maxCoeff();
}

BatchDataset tiny(std::size_t N, std::size_t n, std::size_t d, std::uint64_t seed) {
  CleanSpec spec;
  spec.d = d;
  return sample_clean(spec, N, n, seed);
}

}  // namespace

TEST_CASE("brute_force_subset_mean picks the inliers") {
  const std::vector<double> pts{0, 0, 0, 0, 0, 0, 100, 0};
  const auto r = brute_force_subset_mean(PointSet(pts, 2), 3);
  CHECK(r.chosen_users == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.mean == Vector{0, 0});
}

TEST_CASE("identical points tie to the lexicographically first subset") {
  const std::vector<double> pts(12, 1.5);
  const auto r = brute_force_subset_mean(PointSet(pts, 2), 4);
  CHECK(r.chosen_users == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("subset oracle agrees with a reversed-order enumeration") {
  const BatchDataset ds = tiny(1, 10, 3, 3);
  const auto r = brute_force_subset_mean(ds.all_samples(), 8);
  // second enumeration: every 2-subset to drop, last to first
  double best = HUGE_VAL;
  for (std::size_t a = 10; a-- > 0;)
    for (std::size_t b = a; b-- > 0;) {
      std::vector<std::size_t> keep;
      for (std::size_t k = 0; k < 10; ++k)
        if (k != a && k != b) keep.push_back(k);
      best = std::min(best, subset_objective(ds.data, 3, keep));
    }
  CHECK(r.objective == doctest::Approx(best).epsilon(1e-10));
  CHECK(r.objective == doctest::Approx(subset_objective(ds.data, 3, r.chosen_users)).epsilon(1e-10));
  CHECK(r.chosen_users.size() == 8);
}

TEST_CASE("oracle guards") {
  const std::vector<double> pts(21, 0.0);
  CHECK_THROWS_AS(brute_force_subset_mean(PointSet(pts, 1), 3), SizingError);
  const std::vector<double> five(5, 0.0);
  CHECK_THROWS_AS(brute_force_subset_mean(PointSet(five, 1), 0), ParameterError);
  CHECK_THROWS_AS(brute_force_two_level(tiny(9, 2, 1, 1), 0.1, 0.1), SizingError);
  CHECK_THROWS_AS(brute_force_two_level(tiny(4, 7, 1, 1), 0.1, 0.1), SizingError);
  CHECK(ceil_count(0.9, 10) == 9);
  CHECK(ceil_count(1.0 - 1.0 / 8.0, 8) == 7);
}

TEST_CASE("two-level oracle on clean data keeps everything") {
  const BatchDataset ds = tiny(5, 4, 2, 4);
  const auto r = brute_force_two_level(ds, 0.0, 0.0);
  CHECK(r.feasible);
  CHECK(r.chosen_users.size() == 5);
  CHECK(distance(r.mean, empirical_mean(ds.all_samples())) <= 1e-12);
}

TEST_CASE("two-level oracle drops planted outlier samples") {
  BatchDataset ds = tiny(4, 4, 2, 5);
  const std::size_t planted[] = {2, 0, 3, 1};
  for (std::size_t i = 0; i < 4; ++i) ds.sample(i, planted[i])[0] = 100.0;
  const auto r = brute_force_two_level(ds, 0.0, 0.25);
  REQUIRE(r.chosen_samples.size() == 4);
  for (std::size_t u = 0; u < 4; ++u) {
    const auto& keep = r.chosen_samples[u];
    CHECK(keep.size() == 3);
    CHECK(std::find(keep.begin(), keep.end(), planted[r.chosen_users[u]]) == keep.end());
  }
}

TEST_CASE("two-level oracle drops a fully corrupted user") {
  CorruptionPlan plan;
  plan.eps = 1.0 / 6.0;
  plan.seed = 6;
  const BatchDataset ds = apply_plan(tiny(6, 3, 2, 6), plan);
  const auto r = brute_force_two_level(ds, 1.0 / 6.0, 0.0);
  REQUIRE(r.chosen_users.size() == 5);
  for (std::size_t i : r.chosen_users) CHECK(ds.good_user[i] == 1);
}

TEST_CASE("two-level oracle optimality against re-enumeration of user subsets") {
  const BatchDataset ds = tiny(5, 2, 2, 7);
  const auto r = brute_force_two_level(ds, 0.2, 0.0);  // 4 of 5 users, all samples
  const auto means = ds.batch_means();
  for (std::size_t drop = 0; drop < 5; ++drop) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < 5; ++i)
      if (i != drop) keep.push_back(i);
    CHECK(r.objective <= subset_objective(means, 2, keep) + 1e-12);
  }
}
