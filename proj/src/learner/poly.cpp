#include <algorithm>
#include <cmath>
#include <numeric>

#include "camal/errors.hpp"
#include "camal/kernels.hpp"
#include "camal/learner.hpp"

namespace camal {

namespace {

constexpr double kPivotTolerance = 1e-10;
constexpr int kRefinementSteps = 6;

// Row-major square matrix helpers.
struct Square {
  std::size_t n;
  std::vector<double> a;
  explicit Square(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  std::span<double> row(std::size_t i) { return {a.data() + i * n, n}; }
  std::span<const double> row(std::size_t i) const { return {a.data() + i * n, n}; }
};

// Symmetric pivoting on the Gram matrix. Returns the columns whose residual
// diagonal stays above tolerance, in pivot order.
std::vector<std::size_t> independent_columns(const Square& g) {
  const std::size_t p = g.n;
  Square work = g;
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  double scale = 0.0;
  for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, work(i, i));
  std::vector<std::size_t> kept;
  if (scale <= 0.0) return kept;
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < p; ++i) {
      if (work(perm[i], perm[i]) > work(perm[best], perm[best])) best = i;
    }
    std::swap(perm[k], perm[best]);
    const std::size_t c = perm[k];
    const double d = work(c, c);
    if (d <= kPivotTolerance * scale) break;
    kept.push_back(c);
    const double root = std::sqrt(d);
    // Column c of L, scattered over the remaining pivots.
    std::vector<double> l(p, 0.0);
    for (std::size_t i = k + 1; i < p; ++i) l[perm[i]] = work(perm[i], c) / root;
    for (std::size_t i = k + 1; i < p; ++i) {
      const std::size_t ri = perm[i];
      if (l[ri] == 0.0) continue;
      kernels::axpy(-l[ri], l, work.row(ri));
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Plain Cholesky in place; returns false if not positive definite.
bool cholesky(Square& m) {
  for (std::size_t j = 0; j < m.n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
    if (!(d > 0.0)) return false;
    m(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < m.n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
      m(i, j) = s / m(j, j);
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const Square& l, std::vector<double> b) {
  const std::size_t n = l.n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
    b[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l(k, i) * b[k];
    b[i] /= l(i, i);
  }
  return b;
}

// Ridge-damped Cholesky solve of g[idx, idx] s = b[idx], refined against the
// undamped system.
std::vector<double> solve_subset(const Square& g, const std::vector<double>& b,
                                 const std::vector<std::size_t>& idx) {
  const std::size_t k = idx.size();
  Square sub(k);
  std::vector<double> rhs(k);
  for (std::size_t a = 0; a < k; ++a) {
    rhs[a] = b[idx[a]];
    for (std::size_t c = 0; c < k; ++c) sub(a, c) = g(idx[a], idx[c]);
  }
  Square damped = sub;
  for (std::size_t a = 0; a < k; ++a) damped(a, a) += kRidge;
  if (!cholesky(damped)) throw RankDeficientError("normal equations are not positive definite", {});
  std::vector<double> beta = cholesky_solve(damped, rhs);
  std::vector<double> residual(k);
  for (int step = 0; step < kRefinementSteps; ++step) {
    for (std::size_t a = 0; a < k; ++a) residual[a] = rhs[a] - kernels::dot(sub.row(a), beta);
    const auto delta = cholesky_solve(damped, residual);
    for (std::size_t a = 0; a < k; ++a) beta[a] += delta[a];
  }
  return beta;
}

// Lawson-Hanson active set on the normal equations over the columns in
// `cols`. Returns coefficients indexed like g.
std::vector<double> nonnegative_solve(const Square& g, const std::vector<double>& b,
                                      const std::vector<std::size_t>& cols) {
  const std::size_t p = g.n;
  std::vector<double> beta(p, 0.0);
  std::vector<bool> in_p(p, false);
  double bscale = 0.0;
  for (auto c : cols) bscale = std::max(bscale, std::abs(b[c]));
  const double tol = 1e-12 * std::max(bscale, 1.0);
  for (std::size_t outer = 0; outer < 3 * p; ++outer) {
    // Gradient of the objective at beta.
    std::size_t enter = p;
    double best = tol;
    for (auto c : cols) {
      if (in_p[c]) continue;
      const double grad = b[c] - kernels::dot(g.row(c), beta);
      if (grad > best) {
        best = grad;
        enter = c;
      }
    }
    if (enter == p) break;
    in_p[enter] = true;
    for (std::size_t inner = 0; inner < p + 1; ++inner) {
      std::vector<std::size_t> idx;
      for (auto c : cols) {
        if (in_p[c]) idx.push_back(c);
      }
      const auto s = solve_subset(g, b, idx);
      double alpha = 1.0;
      bool feasible = true;
      for (std::size_t a = 0; a < idx.size(); ++a) {
        if (s[a] <= 0.0) {
          feasible = false;
          const double denom = beta[idx[a]] - s[a];
          if (denom > 0.0) alpha = std::min(alpha, beta[idx[a]] / denom);
        }
      }
      if (feasible) {
        for (std::size_t a = 0; a < idx.size(); ++a) beta[idx[a]] = s[a];
        break;
      }
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const std::size_t c = idx[a];
        beta[c] += alpha * (s[a] - beta[c]);
        if (beta[c] <= 1e-15) {
          beta[c] = 0.0;
          in_p[c] = false;
        }
      }
    }
  }
  return beta;
}

}  // namespace

TrainedModel fit_poly(std::span<const FeatureVector> x, std::span<const double> y,
                      RankHandling rank, CoefficientSign sign) {
  if (x.size() != y.size()) throw ConfigError("feature and label counts differ");
  if (x.empty()) throw ConfigError("no training samples");
  constexpr std::size_t p = kBasisCount;
  const std::size_t n = x.size();

  std::vector<BasisVector> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = poly_basis(x[i]);

  std::vector<double> norm(p, 0.0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < p; ++j) norm[j] += row[j] * row[j];
  }
  for (auto& c : norm) c = std::sqrt(c);

  // Gram matrix and right-hand side of the unit-column-norm design.
  Square gram(p);
  std::vector<double> rhs(p, 0.0);
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[j] = norm[j] > 0.0 ? rows[i][j] / norm[j] : 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (z[j] != 0.0) kernels::axpy(z[j], z, gram.row(j));
    }
    kernels::axpy(y[i], z, rhs);
  }

  const auto kept = independent_columns(gram);
  if (kept.size() < p) {
    std::vector<std::size_t> missing;
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::binary_search(kept.begin(), kept.end(), j)) missing.push_back(j);
    }
    if (rank == RankHandling::Strict) {
      std::string cols;
      for (auto c : missing) cols += (cols.empty() ? "" : ",") + std::to_string(c);
      throw RankDeficientError("design matrix is rank deficient in basis columns " + cols,
                               missing);
    }
  }

  TrainedModel model;
  model.kind = ModelKind::Poly;
  model.features_hash = feature_hash();
  model.samples = n;
  model.coefficients.assign(p, 0.0);
  const std::size_t k = kept.size();
  if (k == 0) return model;

  if (sign == CoefficientSign::NonNegative) {
    const auto beta = nonnegative_solve(gram, rhs, kept);
    for (auto c : kept) model.coefficients[c] = beta[c] / norm[c];
    return model;
  }
  const auto beta = solve_subset(gram, rhs, kept);
  for (std::size_t a = 0; a < k; ++a) model.coefficients[kept[a]] = beta[a] / norm[kept[a]];
  return model;
}

double TrainedModel::predict(const FeatureVector& x) const {
  if (kind == ModelKind::Poly) {
    if (coefficients.size() != kBasisCount) throw ConfigError("poly model has wrong coefficient count");
    const auto basis = poly_basis(x);
    return kernels::dot(coefficients, basis);
  }
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(x);
  return base + learning_rate * sum;
}

}  // namespace camal
