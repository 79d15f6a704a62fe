#pragma once

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace epibifi {

/// Velocities advanced by the relaxation stepper: one entry per non-negative
/// ordinate, with `mass` the total quadrature weight the entry stands for
/// (2w for a ±ζ pair, w for ζ = 0).
struct VelocityNodes {
  std::vector<double> speed;
  std::vector<double> mass;

  int size() const { return static_cast<int>(speed.size()); }
  double total_mass() const {
    double m = 0.0;
    for (double v : mass) m += v;
    return m;
  }

  /// The two-velocity model: a single ±1 pair whose moment is the density itself.
  static VelocityNodes two_velocity() { return VelocityNodes{{1.0}, {1.0}}; }
};

/// Gauss–Legendre rule on [-1, 1], nodes ascending.
class VelocityQuadrature {
 public:
  explicit VelocityQuadrature(int n_nodes) : n_(n_nodes) {
    if (n_nodes < 1) throw ConfigError("VelocityQuadrature: need at least one node");
    const auto zeros = boost::math::legendre_p_zeros<double>(n_nodes);  // non-negative zeros, ascending
    std::vector<double> positive;
    for (double z : zeros) positive.push_back(z);
    for (auto it = positive.rbegin(); it != positive.rend(); ++it)
      if (*it > 0.0) nodes_.push_back(-*it);
    for (double z : positive) nodes_.push_back(z);
    weights_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double x = nodes_[i];
      const double dp = boost::math::legendre_p_prime(n_nodes, x);
      weights_[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  int n_nodes() const { return n_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
    return s;
  }

  /// Non-negative half of the rule, with each ±ζ pair folded into one entry.
  VelocityNodes half_nodes() const {
    VelocityNodes out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i] < 0.0) continue;
      out.speed.push_back(nodes_[i]);
      out.mass.push_back(nodes_[i] == 0.0 ? weights_[i] : 2.0 * weights_[i]);
    }
    return out;
  }

 private:
  int n_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace epibifi
