#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace epibifi {

using Matrix = std::vector<std::vector<double>>;

/// Double Butcher tableau of an IMEX Runge–Kutta method: a diagonally implicit
/// part (A, b) and an explicit part (Ã, b̃) sharing the stage count.
struct ImexTableau {
  std::string name;
  int stages = 0;
  Matrix a_impl;
  Matrix a_expl;
  std::vector<double> b_impl;
  std::vector<double> b_expl;
  int order = 0;

  /// Shape and triangularity. Throws ConfigError.
  void validate() const {
    const auto s = static_cast<std::size_t>(stages);
    if (stages < 1) throw ConfigError("ImexTableau: need at least one stage");
    if (a_impl.size() != s || a_expl.size() != s || b_impl.size() != s || b_expl.size() != s)
      throw ConfigError("ImexTableau '" + name + "': dimensions do not match stage count");
    for (std::size_t k = 0; k < s; ++k) {
      if (a_impl[k].size() != s || a_expl[k].size() != s)
        throw ConfigError("ImexTableau '" + name + "': rows must have length s");
      for (std::size_t j = k + 1; j < s; ++j)
        if (a_impl[k][j] != 0.0) throw ConfigError("ImexTableau '" + name + "': implicit part must be lower triangular");
      for (std::size_t j = k; j < s; ++j)
        if (a_expl[k][j] != 0.0)
          throw ConfigError("ImexTableau '" + name + "': explicit part must be strictly lower triangular");
    }
  }

  double c_impl(int k) const {
    double c = 0.0;
    for (double v : a_impl[k]) c += v;
    return c;
  }
  double c_expl(int k) const {
    double c = 0.0;
    for (double v : a_expl[k]) c += v;
    return c;
  }
};

/// Globally stiffly accurate: the last rows of A and Ã reproduce b and b̃
/// (the explicit row over its first s-1 entries).
inline bool gsa_check(const ImexTableau& tab, double tol = 1e-14) {
  tab.validate();
  const int s = tab.stages;
  for (int j = 0; j < s; ++j)
    if (std::abs(tab.a_impl[s - 1][j] - tab.b_impl[j]) > tol) return false;
  for (int j = 0; j < s - 1; ++j)
    if (std::abs(tab.a_expl[s - 1][j] - tab.b_expl[j]) > tol) return false;
  return true;
}

/// GSA with b̃_s = 0: the step result is the last stage, nothing to add.
inline bool last_stage_is_solution(const ImexTableau& tab) {
  return gsa_check(tab) && tab.b_expl[tab.stages - 1] == 0.0;
}

/// Σb = Σb̃ = 1.
inline bool consistency_check(const ImexTableau& tab, double tol = 1e-14) {
  double sb = 0.0, sbt = 0.0;
  for (int j = 0; j < tab.stages; ++j) {
    sb += tab.b_impl[j];
    sbt += tab.b_expl[j];
  }
  return std::abs(sb - 1.0) <= tol && std::abs(sbt - 1.0) <= tol;
}

/// Order-two conditions, including the coupling conditions b·c̃ = b̃·c = 1/2.
inline bool second_order_check(const ImexTableau& tab, double tol = 1e-13) {
  if (!consistency_check(tab, tol)) return false;
  double bc = 0.0, btct = 0.0, bct = 0.0, btc = 0.0;
  for (int k = 0; k < tab.stages; ++k) {
    bc += tab.b_impl[k] * tab.c_impl(k);
    btct += tab.b_expl[k] * tab.c_expl(k);
    bct += tab.b_impl[k] * tab.c_expl(k);
    btc += tab.b_expl[k] * tab.c_impl(k);
  }
  return std::abs(bc - 0.5) <= tol && std::abs(btct - 0.5) <= tol && std::abs(bct - 0.5) <= tol &&
         std::abs(btc - 0.5) <= tol;
}

namespace tableaux {

/// ARS(2,2,2): three-stage GSA pair, second order, L-stable implicit part,
/// first implicit column zero.
inline ImexTableau ars222() {
  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  const double d = 1.0 - 1.0 / (2.0 * g);
  ImexTableau t;
  t.name = "ARS(2,2,2)";
  t.stages = 3;
  t.order = 2;
  t.a_impl = {{0.0, 0.0, 0.0}, {0.0, g, 0.0}, {0.0, 1.0 - g, g}};
  t.b_impl = {0.0, 1.0 - g, g};
  t.a_expl = {{0.0, 0.0, 0.0}, {g, 0.0, 0.0}, {d, 1.0 - d, 0.0}};
  t.b_expl = {d, 1.0 - d, 0.0};
  return t;
}

/// Three-stage GSA pair, second order, whose explicit part is the optimal
/// SSP(3,2) method (real stability interval [-4.5, 0]); stiffly accurate,
/// L-stable implicit part with a zero first column.
inline ImexTableau gsa332() {
  ImexTableau t;
  t.name = "GSA-SSP(3,3,2)";
  t.stages = 4;
  t.order = 2;
  t.a_impl = {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.5, 0.5, 0.0}, {0.0, 1.0, -0.5, 0.5}};
  t.b_impl = {0.0, 1.0, -0.5, 0.5};
  const double third = 1.0 / 3.0;
  t.a_expl = {{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.0}, {third, third, third, 0.0}};
  t.b_expl = {third, third, third, 0.0};
  return t;
}

/// Implicit/explicit Euler written as a two-stage GSA pair, first order.
inline ImexTableau euler() {
  ImexTableau t;
  t.name = "Euler(1,1,1)";
  t.stages = 2;
  t.order = 1;
  t.a_impl = {{0.0, 0.0}, {0.0, 1.0}};
  t.b_impl = {0.0, 1.0};
  t.a_expl = {{0.0, 0.0}, {1.0, 0.0}};
  t.b_expl = {1.0, 0.0};
  return t;
}

inline ImexTableau by_name(const std::string& name) {
  if (name == "ars222" || name == "ARS(2,2,2)") return ars222();
  if (name == "gsa332" || name == "GSA-SSP(3,3,2)") return gsa332();
  if (name == "euler" || name == "Euler(1,1,1)") return euler();
  throw ConfigError("unknown IMEX tableau '" + name + "'");
}

}  // namespace tableaux

/// Parses "p/q", "-p/q" or a decimal literal.
inline double parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  auto to_double = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("cannot parse number '" + text + "'");
    return v;
  };
  if (slash == std::string::npos) return to_double(text);
  const double den = to_double(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("zero denominator in '" + text + "'");
  return to_double(text.substr(0, slash)) / den;
}

namespace detail {
inline std::vector<double> parse_row(const std::string& row) {
  std::istringstream in(row);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_rational(tok));
  return out;
}

inline Matrix parse_matrix(const std::string& text) {
  Matrix m;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto end = text.find(';', start);
    const auto row = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (row.find_first_not_of(" \t") != std::string::npos) m.push_back(parse_row(row));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return m;
}
}  // namespace detail

/// Builds a tableau from a flat key/value block. Matrices are row-major with
/// rows separated by ';', entries by whitespace, each entry a decimal or p/q:
///
///   tableau.name   = ARS-like
///   tableau.stages = 2
///   tableau.order  = 1
///   tableau.a_impl = 0 0; 0 1
///   tableau.a_expl = 0 0; 1 0
///   tableau.b_impl = 0 1
///   tableau.b_expl = 1 0
inline ImexTableau tableau_from_config(const std::map<std::string, std::string>& kv,
                                       const std::string& prefix = "tableau.") {
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(prefix + key);
    if (it == kv.end()) throw ConfigError("tableau config: missing key '" + prefix + key + "'");
    return it->second;
  };
  ImexTableau t;
  const auto name_it = kv.find(prefix + "name");
  t.name = name_it == kv.end() ? "custom" : name_it->second;
  t.stages = std::stoi(get("stages"));
  const auto order_it = kv.find(prefix + "order");
  t.order = order_it == kv.end() ? 0 : std::stoi(order_it->second);
  t.a_impl = detail::parse_matrix(get("a_impl"));
  t.a_expl = detail::parse_matrix(get("a_expl"));
  t.b_impl = detail::parse_row(get("b_impl"));
  t.b_expl = detail::parse_row(get("b_expl"));
  t.validate();
  return t;
}

/// Stiff relaxation -(y - y_eq)/τ_i per component. `equilibrium` receives the
/// stage value before relaxation; it must be invariant under the relaxation
/// (moments conserved by it), which makes every stage solve explicit.
/// τ_i = +inf marks a non-stiff component.
struct Relaxation {
  std::vector<double> tau;
  std::function<std::vector<double>(std::span<const double>)> equilibrium;

  double tau_of(std::size_t i) const { return tau.size() == 1 ? tau[0] : tau[i]; }
};

/// One IMEX step of y' = explicit_rhs(y) - (y - y_eq)/τ.
template <class ExplicitRhs>
std::vector<double> imex_advance(std::span<const double> y0, double dt, const ImexTableau& tab,
                                 ExplicitRhs&& explicit_rhs, const Relaxation& relax) {
  if (!(dt > 0.0)) throw ConfigError("imex_advance: dt must be positive");
  tab.validate();
  const std::size_t n = y0.size();
  if (relax.tau.size() != 1 && relax.tau.size() != n)
    throw ConfigError("imex_advance: tau must have one entry or one per component");
  for (double t : relax.tau)
    if (!(t > 0.0)) throw ConfigError("imex_advance: relaxation time must be positive");

  const int s = tab.stages;
  std::vector<std::vector<double>> ex(s), stiff(s);
  std::vector<double> x(n), y;
  for (int k = 0; k < s; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = y0[i];
      for (int l = 0; l < k; ++l) v += dt * (tab.a_expl[k][l] * ex[l][i] - tab.a_impl[k][l] * stiff[l][i]);
      x[i] = v;
    }
    const std::vector<double> eq =
        relax.equilibrium ? relax.equilibrium(x) : std::vector<double>(n, 0.0);
    y.assign(n, 0.0);
    stiff[k].assign(n, 0.0);
    const double akk = tab.a_impl[k][k];
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = relax.tau_of(i);
      if (std::isinf(tau)) {
        y[i] = x[i];
      } else {
        const double denom = tau + dt * akk;
        y[i] = (tau * x[i] + dt * akk * eq[i]) / denom;
        stiff[k][i] = (x[i] - eq[i]) / denom;
      }
      if (!std::isfinite(y[i])) throw NumericError("imex_advance: non-finite stage value", -1, k);
    }
    ex[k] = explicit_rhs(std::span<const double>(y));
    if (ex[k].size() != n) throw ConfigError("imex_advance: explicit rhs returned wrong size");
  }
  if (last_stage_is_solution(tab)) return y;
  std::vector<double> out(y0.begin(), y0.end());
  for (int k = 0; k < s; ++k)
    for (std::size_t i = 0; i < n; ++i) out[i] += dt * (tab.b_expl[k] * ex[k][i] - tab.b_impl[k] * stiff[k][i]);
  return out;
}

/// Hyperbolic and parabolic step bounds; the larger one is taken, since the
/// scheme only needs the parabolic bound once the relaxation is stiff.
inline constexpr double hyperbolic_cfl = 0.9;
inline constexpr double parabolic_cfl = 1.0;

inline double compute_dt(const Grid1D& grid, double lambda_max, double d_max) {
  if (!(lambda_max > 0.0) && !(d_max > 0.0))
    throw ConfigError("compute_dt: need a positive speed or a positive diffusivity");
  const double dx = grid.dx();
  const double hyperbolic = lambda_max > 0.0 ? hyperbolic_cfl * dx / lambda_max : 0.0;
  const double parabolic = d_max > 0.0 ? parabolic_cfl * dx * dx / (2.0 * d_max) : 0.0;
  return std::max(hyperbolic, parabolic);
}

}  // namespace epibifi
