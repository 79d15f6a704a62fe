#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <span>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "state.hpp"

namespace epibifi {

/// A coefficient field evaluated at a cell center and a time. Random inputs are
/// bound when the field is built, so a field describes one realization.
using Field = std::function<double(double x, double t)>;

inline Field constant_field(double value) {
  return [value](double, double) { return value; };
}

/// Incidence F(g, I) = β g I^p / (1 + κ I).
inline double incidence(double g, double infectious, double beta, double kappa, double p) {
  if (infectious < 0.0) throw DomainError("incidence: infectious density must be non-negative");
  if (infectious == 0.0) return 0.0;
  const double ip = p == 1.0 ? infectious : std::pow(infectious, p);
  return beta * g * ip / (1.0 + kappa * infectious);
}

/// Transmission, recovery and progression coefficients. SIR uses beta, kappa,
/// gamma; SEIAR uses beta (symptomatic contact rate), kappa, beta_a, kappa_a,
/// gamma_i, gamma_a, latency_rate and sigma.
struct EpidemicParameters {
  CompartmentKind kind = CompartmentKind::SIR;
  Field beta = constant_field(0.0);
  Field kappa = constant_field(0.0);
  double p = 1.0;
  Field gamma = constant_field(0.0);

  Field beta_a = constant_field(0.0);
  Field kappa_a = constant_field(0.0);
  Field gamma_i = constant_field(0.0);
  Field gamma_a = constant_field(0.0);
  Field latency_rate = constant_field(0.0);
  Field sigma = constant_field(0.0);

  /// When false the fields are sampled once per run instead of once per stage.
  bool time_dependent = false;
};

/// Coefficient fields sampled at the cell centers of a grid.
struct CellCoefficients {
  CompartmentKind kind = CompartmentKind::SIR;
  double p = 1.0;
  std::vector<double> beta, kappa, gamma;
  std::vector<double> beta_a, kappa_a, gamma_i, gamma_a, latency_rate, sigma;

  static CellCoefficients sample(const EpidemicParameters& params, const Grid1D& grid, double t) {
    if (!(params.p >= 1.0)) throw ConfigError("epidemic parameters: exponent p must be >= 1");
    CellCoefficients out;
    out.kind = params.kind;
    out.p = params.p;
    const int n = grid.n_cells();
    auto fill = [&](const Field& f, std::vector<double>& dst, const char* name, double lo, double hi) {
      dst.resize(n);
      for (int i = 0; i < n; ++i) {
        const double v = f(grid.center(i), t);
        if (!(v >= lo && v <= hi))
          throw ConfigError(std::string("epidemic parameters: field '") + name + "' out of range at x=" +
                            std::to_string(grid.center(i)));
        dst[i] = v;
      }
    };
    constexpr double inf = std::numeric_limits<double>::infinity();
    fill(params.beta, out.beta, "beta", 0.0, inf);
    fill(params.kappa, out.kappa, "kappa", 0.0, inf);
    if (params.kind == CompartmentKind::SIR) {
      fill(params.gamma, out.gamma, "gamma", 0.0, inf);
    } else {
      fill(params.beta_a, out.beta_a, "beta_a", 0.0, inf);
      fill(params.kappa_a, out.kappa_a, "kappa_a", 0.0, inf);
      fill(params.gamma_i, out.gamma_i, "gamma_i", 0.0, inf);
      fill(params.gamma_a, out.gamma_a, "gamma_a", 0.0, inf);
      fill(params.latency_rate, out.latency_rate, "latency_rate", 0.0, inf);
      fill(params.sigma, out.sigma, "sigma", 0.0, 1.0);
    }
    return out;
  }
};

/// Largest first-order loss rate (recovery, progression) over the cells.
inline double max_loss_rate(const CellCoefficients& k) {
  double r = 0.0;
  for (const auto* v : {&k.gamma, &k.gamma_i, &k.gamma_a, &k.latency_rate})
    for (double x : *v) r = std::max(r, x);
  return r;
}

/// Explicit reactions keep the stages non-negative while rate·dt stays below
/// the real stability bound of the explicit part; 1.5 leaves a margin.
inline constexpr double reaction_cfl = 1.5;

/// dt capped so that max_loss_rate·dt ≤ reaction_cfl. Time-dependent fields
/// are sampled at t = 0.
inline double reaction_limited_dt(double dt, const EpidemicParameters& params, const Grid1D& grid) {
  const double rate = max_loss_rate(CellCoefficients::sample(params, grid, 0.0));
  return rate > 0.0 ? std::min(dt, reaction_cfl / rate) : dt;
}

namespace detail {

inline double infection_rate(double g, double infectious, double beta, double kappa, double p) {
  // Tiny negative undershoots are tolerated inside the solvers; only the
  // non-integer exponent needs a non-negative base.
  const double ip = p == 1.0 ? infectious : std::pow(std::max(infectious, 0.0), p);
  return beta * g * ip / (1.0 + kappa * infectious);
}

inline double speed_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace detail

/// Reaction terms for density-like arguments g (densities or even parities).
/// `infectious` and `asymptomatic` are the macroscopic I and A densities.
inline void even_reactions(const CellCoefficients& k, int cell, const double* g, double infectious,
                           double asymptomatic, double* out) {
  using detail::infection_rate;
  if (k.kind == CompartmentKind::SIR) {
    const double f = infection_rate(g[sir::S], infectious, k.beta[cell], k.kappa[cell], k.p);
    const double rec = k.gamma[cell] * g[sir::I];
    out[sir::S] = -f;
    out[sir::I] = f - rec;
    out[sir::R] = rec;
    return;
  }
  const double fi = infection_rate(g[seiar::S], infectious, k.beta[cell], k.kappa[cell], k.p);
  const double fa = infection_rate(g[seiar::S], asymptomatic, k.beta_a[cell], k.kappa_a[cell], k.p);
  const double a = k.latency_rate[cell];
  const double s = k.sigma[cell];
  const double ri = k.gamma_i[cell] * g[seiar::I];
  const double ra = k.gamma_a[cell] * g[seiar::A];
  out[seiar::S] = -fi - fa;
  out[seiar::E] = fi + fa - a * g[seiar::E];
  out[seiar::I] = a * s * g[seiar::E] - ri;
  out[seiar::A] = a * (1.0 - s) * g[seiar::E] - ra;
  out[seiar::R] = ri + ra;
}

/// Reaction terms for flux-like arguments j (fluxes or odd parities). A source
/// from compartment c' into c is scaled by λ_c/λ_c', and vanishes when λ_c' = 0.
inline void odd_reactions(const CellCoefficients& k, int cell, const double* j, double infectious,
                          double asymptomatic, std::span<const double> lambda, double* out) {
  using detail::infection_rate;
  using detail::speed_ratio;
  if (k.kind == CompartmentKind::SIR) {
    const double f = infection_rate(j[sir::S], infectious, k.beta[cell], k.kappa[cell], k.p);
    const double rec = k.gamma[cell] * j[sir::I];
    out[sir::S] = -f;
    out[sir::I] = speed_ratio(lambda[sir::I], lambda[sir::S]) * f - rec;
    out[sir::R] = speed_ratio(lambda[sir::R], lambda[sir::I]) * rec;
    return;
  }
  const double fi = infection_rate(j[seiar::S], infectious, k.beta[cell], k.kappa[cell], k.p);
  const double fa = infection_rate(j[seiar::S], asymptomatic, k.beta_a[cell], k.kappa_a[cell], k.p);
  const double a = k.latency_rate[cell];
  const double s = k.sigma[cell];
  const double ri = k.gamma_i[cell] * j[seiar::I];
  const double ra = k.gamma_a[cell] * j[seiar::A];
  out[seiar::S] = -fi - fa;
  out[seiar::E] = speed_ratio(lambda[seiar::E], lambda[seiar::S]) * (fi + fa) - a * j[seiar::E];
  out[seiar::I] = speed_ratio(lambda[seiar::I], lambda[seiar::E]) * a * s * j[seiar::E] - ri;
  out[seiar::A] = speed_ratio(lambda[seiar::A], lambda[seiar::E]) * a * (1.0 - s) * j[seiar::E] - ra;
  out[seiar::R] = speed_ratio(lambda[seiar::R], lambda[seiar::I]) * ri +
                  speed_ratio(lambda[seiar::R], lambda[seiar::A]) * ra;
}

namespace detail {
inline void check_r0_state(const MacroState& state, const Grid1D& grid, CompartmentKind kind) {
  if (state.compartments.kind() != kind) throw ConfigError("reproduction number: wrong compartment set");
  state.validate(grid);
}
}  // namespace detail

/// Space-integrated ratio of new infections to removals for SIR.
inline double reproduction_number_sir(const MacroState& state, const EpidemicParameters& params,
                                      const Grid1D& grid, double t = 0.0) {
  detail::check_r0_state(state, grid, CompartmentKind::SIR);
  const auto k = CellCoefficients::sample(params, grid, t);
  const auto& s = state.density[sir::S];
  const auto& i = state.density[sir::I];
  double infections = 0.0, removals = 0.0;
  for (int c = 0; c < grid.n_cells(); ++c) {
    infections += incidence(s[c], i[c], k.beta[c], k.kappa[c], k.p);
    removals += k.gamma[c] * i[c];
  }
  if (removals == 0.0) throw UndefinedR0Error("reproduction_number_sir: removal integral is zero");
  return infections / removals;
}

/// SEIAR reproduction number: symptomatic and asymptomatic branches weighted by
/// the share of exposed individuals progressing into each.
inline double reproduction_number_seiar(const MacroState& state, const EpidemicParameters& params,
                                        const Grid1D& grid, double t = 0.0) {
  detail::check_r0_state(state, grid, CompartmentKind::SEIAR);
  const auto k = CellCoefficients::sample(params, grid, t);
  const auto& s = state.density[seiar::S];
  const auto& e = state.density[seiar::E];
  const auto& i = state.density[seiar::I];
  const auto& a = state.density[seiar::A];
  double fi = 0.0, fa = 0.0, ri = 0.0, ra = 0.0, to_i = 0.0, to_a = 0.0, progress = 0.0;
  for (int c = 0; c < grid.n_cells(); ++c) {
    fi += incidence(s[c], i[c], k.beta[c], k.kappa[c], k.p);
    fa += incidence(s[c], a[c], k.beta_a[c], k.kappa_a[c], k.p);
    ri += k.gamma_i[c] * i[c];
    ra += k.gamma_a[c] * a[c];
    to_i += k.latency_rate[c] * k.sigma[c] * e[c];
    to_a += k.latency_rate[c] * (1.0 - k.sigma[c]) * e[c];
    progress += k.latency_rate[c] * e[c];
  }
  if (progress == 0.0) throw UndefinedR0Error("reproduction_number_seiar: latency integral is zero");
  double r0 = 0.0;
  // A branch that receives nobody contributes nothing, whatever its own ratio.
  if (to_i != 0.0) {
    if (ri == 0.0) throw UndefinedR0Error("reproduction_number_seiar: symptomatic removal integral is zero");
    r0 += fi / ri * (to_i / progress);
  }
  if (to_a != 0.0) {
    if (ra == 0.0) throw UndefinedR0Error("reproduction_number_seiar: asymptomatic removal integral is zero");
    r0 += fa / ra * (to_a / progress);
  }
  return r0;
}

}  // namespace epibifi
