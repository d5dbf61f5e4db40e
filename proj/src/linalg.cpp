#include "rbme/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "rbme/errors.hpp"

namespace rbme {

PointSet::PointSet(std::span<const double> values, std::size_t dim) : values_(values), dim_(dim) {
  if (dim == 0) throw SizingError("PointSet: dimension must be positive");
  if (values.size() % dim != 0) throw SizingError("PointSet: value count is not a multiple of dim");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

Vector empirical_mean(const PointSet& points, std::span<const double> weights) {
  if (points.empty()) throw SizingError("empirical_mean: no points");
  if (!weights.empty() && weights.size() != points.size())
    throw SizingError("empirical_mean: weight count does not match point count");
  const std::size_t d = points.dim();
  Vector mean(d, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (w == 0.0) continue;
    const auto p = points.point(k);
    for (std::size_t c = 0; c < d; ++c) mean[c] += w * p[c];
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateMassError("empirical_mean: total weight is not positive");
  for (auto& x : mean) x /= total;
  return mean;
}

void SymMatrix::apply(std::span<const double> v, std::span<double> out) const {
  for (std::size_t r = 0; r < dim; ++r) {
    double s = 0.0;
    const double* row = entries.data() + r * dim;
    for (std::size_t c = 0; c < dim; ++c) s += row[c] * v[c];
    out[r] = s;
  }
}

CovOperator::CovOperator(PointSet points, std::span<const double> weights, Vector center,
                         double normalization)
    : points_(points), weights_(weights), center_(std::move(center)) {
  if (!weights_.empty() && weights_.size() != points_.size())
    throw SizingError("CovOperator: weight count does not match point count");
  if (center_.size() != points_.dim()) throw SizingError("CovOperator: center has wrong dimension");
  if (normalization <= 0.0) {
    normalization = 0.0;
    for (std::size_t k = 0; k < points_.size(); ++k) normalization += weight(k);
  }
  if (!(normalization > 0.0)) throw DegenerateMassError("CovOperator: total weight is not positive");
  normalization_ = normalization;
}

CovOperator CovOperator::centered(PointSet points, std::span<const double> weights) {
  return CovOperator(points, weights, empirical_mean(points, weights));
}

void CovOperator::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t d = dim();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const double w = weight(k);
    if (w == 0.0) continue;
    const auto p = points_.point(k);
    double proj = 0.0;
    for (std::size_t c = 0; c < d; ++c) proj += (p[c] - center_[c]) * v[c];
    proj *= w;
    for (std::size_t c = 0; c < d; ++c) out[c] += proj * (p[c] - center_[c]);
  }
  for (auto& x : out) x /= normalization_;
}

SymMatrix CovOperator::materialize() const {
  const std::size_t d = dim();
  SymMatrix m(d);
  Vector diff(d);
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const double w = weight(k);
    if (w == 0.0) continue;
    const auto p = points_.point(k);
    for (std::size_t c = 0; c < d; ++c) diff[c] = p[c] - center_[c];
    for (std::size_t r = 0; r < d; ++r) {
      const double wr = w * diff[r];
      double* row = m.entries.data() + r * d;
      for (std::size_t c = r; c < d; ++c) row[c] += wr * diff[c];
    }
  }
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r; c < d; ++c) {
      m(r, c) /= normalization_;
      m(c, r) = m(r, c);
    }
  }
  return m;
}

namespace {

EigenResult power_iterate(const LinearMap& op, Vector v, const PowerOptions& options,
                          std::size_t max_iter) {
  const std::size_t d = v.size();
  EigenResult result;
  Vector w(d);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op(v, w);
    const double value = dot(v, w);
    double residual = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double t = w[c] - value * v[c];
      residual += t * t;
    }
    residual = std::sqrt(residual);
    result.value = value;
    result.vector = v;
    result.iterations = it;
    result.residual = residual;
    if (residual <= options.tol) {
      result.converged = true;
      break;
    }
    const double wn = norm2(w);
    if (wn == 0.0) {
      // v lies in the kernel: it is an eigenvector for 0.
      result.value = 0.0;
      result.residual = 0.0;
      result.converged = true;
      break;
    }
    for (std::size_t c = 0; c < d; ++c) v[c] = w[c] / wn;
  }
  result.value = std::max(result.value, 0.0);
  return result;
}

// Deterministic, irregular vector used for the restart.
Vector restart_vector(std::size_t d) {
  Vector s(d);
  for (std::size_t c = 0; c < d; ++c) s[c] = std::cos(1.0 + 2.399963229728653 * static_cast<double>(c));
  return s;
}

}  // namespace

EigenResult top_eigen(const LinearMap& op, std::size_t dim, const PowerOptions& options) {
  if (dim == 0) throw SizingError("top_eigen: dimension must be positive");
  if (!(options.tol > 0.0)) throw ParameterError("top_eigen: tol must be positive");
  const std::size_t max_iter = options.max_iter == 0 ? 10 * dim + 200 : options.max_iter;

  Vector start(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  EigenResult first = power_iterate(op, start, options, max_iter);
  if (dim == 1) return first;

  Vector s = restart_vector(dim);
  const double proj = dot(s, first.vector);
  for (std::size_t c = 0; c < dim; ++c) s[c] -= proj * first.vector[c];
  const double sn = norm2(s);
  if (sn < 1e-12) return first;
  for (auto& x : s) x /= sn;
  EigenResult second = power_iterate(op, s, options, max_iter);

  const std::size_t total = first.iterations + second.iterations;
  EigenResult& best =
second.value > first.value * (1.0 + 1e-12) ? second : first;
  best.iterations = total;
  return best;
}

EigenResult top_eigen(const SymMatrix& matrix, const PowerOptions& options) {
  return top_eigen([&matrix](std::span<const double> v, std::span<double> out) { matrix.apply(v, out); },
                   matrix.dim, options);
}

EigenResult top_eigen(const CovOperator& op, const PowerOptions& options) {
  return top_eigen(op.materialize(), options);
}

TruncationResult truncate(const PointSet& points, std::span<const double> center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("truncate: radius must be positive");
  if (center.size() != points.dim()) throw SizingError("truncate: center has wrong dimension");
  TruncationResult out;
  out.points.assign(points.values().begin(), points.values().end());
  const std::size_t d = points.dim();
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (distance(points.point(k), center) > radius) {
      std::copy(center.begin(), center.end(), out.points.begin() + static_cast<std::ptrdiff_t>(k * d));
      ++out.changed_count;
    }
  }
  return out;
}

bool recentered_cov_dominance_check(const PointSet& points, std::span<const double> mu) {
  if (points.empty()) throw SizingError("recentered_cov_dominance_check: no points");
  const Vector mu_vec(mu.begin(), mu.end());
  const CovOperator about_mu(points, {}, mu_vec);
  const CovOperator about_mean = CovOperator::centered(points);
  const SymMatrix a = about_mu.materialize();
  const SymMatrix b = about_mean.materialize();
  const std::size_t d = points.dim();

  // smallest eigenvalue of D = A - B via the top eigenvalue of (shift I - D)
  SymMatrix diff(d);
  double shift = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      diff(r, c) = a(r, c) - b(r, c);
      row += std::abs(diff(r, c));
    }
    shift = std::max(shift, row);
  }
  SymMatrix flipped(d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) flipped(r, c) = (r == c ? shift : 0.0) - diff(r, c);
  PowerOptions opts;
  opts.tol = 1e-12 * std::max(1.0, shift);
  opts.max_iter = 100 * d + 1000;
  const double min_eig = shift - top_eigen(flipped, opts).value;
  return min_eig >= -1e-9 * std::max(1.0, shift);
}

}  // namespace rbme
