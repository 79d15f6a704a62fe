#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "errors.hpp"

namespace epibifi {

using RandomSample = std::vector<double>;

/// Box I_z = Π [lower_k, upper_k] carrying the uniform probability measure.
struct RandomDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  static RandomDomain box(int dim, double lo, double hi) {
    return RandomDomain{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  int dim() const { return static_cast<int>(lower.size()); }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size()) throw ConfigError("RandomDomain: bounds must be non-empty and aligned");
    for (int k = 0; k < dim(); ++k)
      if (!(lower[k] < upper[k])) throw ConfigError("RandomDomain: empty interval");
  }

  bool contains(const RandomSample& z) const {
    if (static_cast<int>(z.size()) != dim()) return false;
    for (int k = 0; k < dim(); ++k)
      if (!(z[k] >= lower[k] && z[k] <= upper[k])) return false;
    return true;
  }

  /// Maps t ∈ [-1, 1] onto component k.
  double from_reference(int k, double t) const { return 0.5 * (lower[k] + upper[k]) + 0.5 * (upper[k] - lower[k]) * t; }
};

struct QuadratureRule {
  std::vector<RandomSample> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Nested Clenshaw–Curtis rule of index i ≥ 1 on [-1, 1]: m_1 = 1,
/// m_i = 2^{i-1} + 1 points x_j = -cos(π j / (m - 1)), weights summing to 2.
struct CC1D {
  std::vector<double> x;
  std::vector<double> w;
};

inline int cc_points(int index) { return index == 1 ? 1 : (1 << (index - 1)) + 1; }

inline CC1D clenshaw_curtis(int index) {
  if (index < 1) throw ConfigError("clenshaw_curtis: index must be >= 1");
  const int m = cc_points(index);
  CC1D rule;
  if (m == 1) {
    rule.x = {0.0};
    rule.w = {2.0};
    return rule;
  }
  const int n = m - 1;
  rule.x.resize(m);
  rule.w.resize(m);
  for (int j = 0; j < m; ++j) {
    const double theta = std::numbers::pi * j / n;
    rule.x[j] = -std::cos(theta);
    double s = 0.0;
    for (int k = 1; k <= n / 2; ++k) {
      const double b = (2 * k == n) ? 1.0 : 2.0;
      s += b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
    }
    const double c = (j == 0 || j == n) ? 1.0 : 2.0;
    rule.w[j] = c / n * (1.0 - s);
  }
  // Exact symmetry and an exact zero at the midpoint.
  if (m % 2 == 1) rule.x[m / 2] = 0.0;
  for (int j = 0; j < m / 2; ++j) rule.x[m - 1 - j] = -rule.x[j];
  return rule;
}

namespace detail {
inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls f(index vector) for every multi-index i ≥ 1 with lo ≤ |i| ≤ hi.
template <class F>
void for_each_multi_index(int dim, int lo, int hi, F&& f) {
  std::vector<int> idx(dim, 1);
  while (true) {
    int sum = 0;
    for (int v : idx) sum += v;
    if (sum >= lo && sum <= hi) f(idx);
    int k = 0;
    while (k < dim) {
      ++idx[k];
      int s = 0;
      for (int v : idx) s += v;
      if (s <= hi) break;
      idx[k] = 1;
      ++k;
    }
    if (k == dim) return;
  }
}
}  // namespace detail

/// Smolyak combination of nested Clenshaw–Curtis rules with total index
/// |i| ≤ level + dim, mapped to the domain, probability weights.
inline QuadratureRule cc_sparse_grid(int level, const RandomDomain& domain) {
  if (level < 0) throw ConfigError("cc_sparse_grid: level must be >= 0");
  domain.validate();
  const int d = domain.dim();
  const int finest = cc_points(level + 1);
  std::vector<CC1D> rules;
  for (int i = 1; i <= level + 1; ++i) rules.push_back(clenshaw_curtis(i));

  // Nested nodes are identified by their position on the finest 1D rule.
  std::map<std::vector<int>, double> acc;
  detail::for_each_multi_index(d, std::max(d, level + 1), level + d, [&](const std::vector<int>& idx) {
    int sum = 0;
    for (int v : idx) sum += v;
    const double coef = ((level + d - sum) % 2 == 0 ? 1.0 : -1.0) * detail::binomial(d - 1, level + d - sum);
    std::vector<int> j(d, 0), key(d);
    while (true) {
      double w = coef;
      for (int k = 0; k < d; ++k) {
        const int m = cc_points(idx[k]);
        key[k] = m == 1 ? (finest - 1) / 2 : j[k] * ((finest - 1) / (m - 1));
        w *= rules[idx[k] - 1].w[j[k]] / 2.0;
      }
      acc[key] += w;
      int k = 0;
      while (k < d && ++j[k] == cc_points(idx[k])) j[k++] = 0;
      if (k == d) break;
    }
  });

  const CC1D& fine = rules.back();
  QuadratureRule rule;
  for (const auto& [key, w] : acc) {
    RandomSample z(d);
    for (int k = 0; k < d; ++k) z[k] = domain.from_reference(k, fine.x[key[k]]);
    rule.nodes.push_back(std::move(z));
    rule.weights.push_back(w);
  }
  return rule;
}

/// Per-entry mean and standard deviation of a vector-valued quantity.
struct StatField {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Quadrature mean and standard deviation; the variance Σ w u² - mean² is
/// clamped at 0.
inline StatField estimate_stats(const std::vector<std::vector<double>>& evaluations, const QuadratureRule& rule) {
  if (evaluations.size() != rule.size() || evaluations.empty())
    throw ConfigError("estimate_stats: evaluations must align with the rule nodes");
  const std::size_t n = evaluations.front().size();
  std::vector<double> m1(n, 0.0), m2(n, 0.0);
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    if (evaluations[i].size() != n) throw ConfigError("estimate_stats: evaluations differ in length");
    const double w = rule.weights[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double u = evaluations[i][k];
      m1[k] += w * u;
      m2[k] += w * u * u;
    }
  }
  StatField out{m1, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) out.std[k] = std::sqrt(std::max(0.0, m2[k] - m1[k] * m1[k]));
  return out;
}

/// Reproducible uniform samples on the domain box.
inline std::vector<RandomSample> uniform_candidates(int n, const RandomDomain& domain, std::uint64_t seed) {
  if (n < 1) throw ConfigError("uniform_candidates: need at least one sample");
  domain.validate();
  std::mt19937_64 gen(seed);
  std::vector<RandomSample> out(n, RandomSample(domain.dim()));
  for (auto& z : out)
    for (int k = 0; k < domain.dim(); ++k) {
      std::uniform_real_distribution<double> dist(domain.lower[k], domain.upper[k]);
      z[k] = dist(gen);
    }
  return out;
}

}  // namespace epibifi
