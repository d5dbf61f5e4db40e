#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rbme {

using Vector = std::vector<double>;

/// Row-major view over m points in R^dim.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::span<const double> values, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return size() == 0; }
  std::span<const double> point(std::size_t k) const { return values_.subspan(k * dim_, dim_); }
  std::span<const double> values() const { return values_; }

 private:
  std::span<const double> values_;
  std::size_t dim_ = 0;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

/// (sum_k w_k p_k) / (sum_k w_k); an empty weight span means w == 1.
/// Throws DegenerateMassError when the total weight is not positive.
Vector empirical_mean(const PointSet& points, std::span<const double> weights = {});

/// Dense symmetric d x d matrix, row-major.
struct SymMatrix {
  std::size_t dim = 0;
  std::vector<double> entries;

  explicit SymMatrix(std::size_t d = 0) : dim(d), entries(d * d, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return entries[r * dim + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
  void apply(std::span<const double> v, std::span<double> out) const;
};

/// Weighted second-moment operator about a fixed center:
///   v -> (1/normalization) * sum_k w_k <p_k - c, v> (p_k - c).
/// Positive semidefinite by construction. Holds views: the points and
/// weights must outlive the operator.
class CovOperator {
 public:
  /// normalization defaults to the total weight.
  CovOperator(PointSet points, std::span<const double> weights, Vector center,
              double normalization = 0.0);

  /// Centered at the weighted mean.
  static CovOperator centered(PointSet points, std::span<const double> weights = {});

  std::size_t dim() const { return points_.dim(); }
  double normalization() const { return normalization_; }
  const Vector& center() const { return center_; }

  void apply(std::span<const double> v, std::span<double> out) const;

  /// The same operator as an explicit matrix; O(m d^2).
  SymMatrix materialize() const;

 private:
  double weight(std::size_t k) const { return weights_.empty() ? 1.0 : weights_[k]; }

  PointSet points_;
  std::span<const double> weights_;
  Vector center_;
  double normalization_ = 1.0;
};

struct EigenResult {
  double value = 0.0;
  Vector vector;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct PowerOptions {
  double tol = 1e-8;
  std::size_t max_iter = 0;  // 0 selects 10 * d + 200
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Dominant eigenpair of a symmetric PSD map by power iteration from the
/// all-ones direction, checked by one restart from a fixed vector orthogonal
/// to the first result. Non-convergence is reported, not thrown.
EigenResult top_eigen(const LinearMap& op, std::size_t dim, const PowerOptions& options = {});
EigenResult top_eigen(const SymMatrix& matrix, const PowerOptions& options = {});
EigenResult top_eigen(const CovOperator& op, const PowerOptions& options = {});

struct TruncationResult {
  std::vector<double> points;  // row-major, same layout as the input
  std::size_t changed_count = 0;
};

/// Replaces every point strictly farther than radius from center by center.
TruncationResult truncate(const PointSet& points, std::span<const double> center, double radius);

/// Checks sum (z - zbar)(z - zbar)^T <= sum (z - mu)(z - mu)^T in the Loewner order
/// (smallest eigenvalue of the difference >= -1e-9).
bool recentered_cov_dominance_check(const PointSet& points, std::span<const double> mu);

}  // namespace rbme
