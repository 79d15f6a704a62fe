#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "epidemic.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "relaxation_stepper.hpp"
#include "solver_lf.hpp"
#include "state.hpp"
#include "time_loop.hpp"
#include "velocity.hpp"

namespace epibifi {

/// Even/odd parities on the non-negative Gauss–Legendre ordinates. The odd
/// parity carries the λ_c factor: j = λ_c (f(ζ) - f(-ζ)) / 2.
struct KineticState {
  CompartmentSet compartments;
  ParityFields fields;

  double& r(int c, int q, int i) { return fields.even[fields.index(c, q, i)]; }
  double& j(int c, int q, int i) { return fields.odd[fields.index(c, q, i)]; }
  double r(int c, int q, int i) const { return fields.even[fields.index(c, q, i)]; }
  double j(int c, int q, int i) const { return fields.odd[fields.index(c, q, i)]; }
};

/// Velocity profile of the initial distribution, f(ζ) ∝ density · profile(ζ).
using VelocityProfile = std::function<double(double)>;

inline VelocityProfile gaussian_profile() {
  return [](double v) { return std::exp(-0.5 * v * v); };
}

/// Local-equilibrium-shaped initial data. The normalization is chosen so the
/// discrete moments reproduce the macroscopic densities exactly.
inline KineticState kinetic_init(const MacroState& macro, const VelocityQuadrature& quad,
                                 const VelocityProfile& profile = gaussian_profile()) {
  for (const auto& flux : macro.flux)
    for (double v : flux)
      if (v != 0.0) throw ConfigError("kinetic_init: an even velocity profile cannot carry a nonzero initial flux");
  const VelocityNodes half = quad.half_nodes();
  double norm = 0.0;
  for (int q = 0; q < half.size(); ++q) norm += half.mass[q] * profile(half.speed[q]);
  if (!(norm > 0.0)) throw ConfigError("kinetic_init: velocity profile has zero discrete mass");
  KineticState out{macro.compartments, ParityFields(macro.n_compartments(), half.size(), macro.n_cells())};
  for (int c = 0; c < macro.n_compartments(); ++c)
    for (int q = 0; q < half.size(); ++q) {
      const double shape = profile(half.speed[q]) / norm;
      for (int i = 0; i < macro.n_cells(); ++i) out.r(c, q, i) = shape * macro.density[c][i];
    }
  return out;
}

/// density_c = Σ_i w_i r_c(ζ_i), flux_c = Σ_i w_i ζ_i j_c(ζ_i) over the full rule.
inline MacroState moments(const KineticState& state, const VelocityQuadrature& quad) {
  const VelocityNodes half = quad.half_nodes();
  const auto& f = state.fields;
  if (f.n_nodes != half.size()) throw ConfigError("moments: node count does not match quadrature");
  MacroState out(state.compartments, f.n_cells);
  for (int c = 0; c < f.n_compartments; ++c)
    for (int q = 0; q < f.n_nodes; ++q) {
      const double m = half.mass[q];
      const double mz = m * half.speed[q];
      for (int i = 0; i < f.n_cells; ++i) {
        out.density[c][i] += m * state.r(c, q, i);
        out.flux[c][i] += mz * state.j(c, q, i);
      }
    }
  return out;
}

/// Kinetic transport model by even/odd parities and discrete ordinates.
class HighFidelitySolver {
 public:
  HighFidelitySolver(const EpidemicParameters& params, TransportConfig cfg, const Grid1D& grid,
                     VelocityQuadrature quad, ImexTableau tab)
      : grid_(grid),
        cfg_(check(std::move(cfg))),
        quad_(std::move(quad)),
        stepper_(CompartmentSet(params.kind), quad_.half_nodes(), cfg_, params, grid, std::move(tab)),
        stable_dt_(reaction_limited_dt(compute_dt(grid_, cfg_.max_speed(), cfg_.max_diffusivity()), params, grid)) {}

  /// The transport step from compute_dt, capped by the reaction rates.
  double stable_dt() const { return stable_dt_; }
  const VelocityQuadrature& quadrature() const { return quad_; }

  void step(KineticState& state, double t, double dt, long step_index = 0) {
    stepper_.step(state.fields, t, dt, step_index);
  }

  RunResult<KineticState> run(const KineticState& init, double t_end, const std::vector<double>& output_times = {},
                              double dt = 0.0) {
    RunResult<KineticState> out;
    out.dt = dt > 0.0 ? dt : stable_dt();
    KineticState state = init;
    out.steps = advance_to(
        t_end, out.dt, output_times, [&](double t, double h, long n) { stepper_.step(state.fields, t, h, n); },
        [&](double time) { out.snapshots.emplace_back(time, state); });
    out.final_state = std::move(state);
    return out;
  }

 private:
  static TransportConfig check(TransportConfig cfg) {
    if (cfg.fidelity != Fidelity::High) throw ConfigError("high-fidelity solver needs a high-fidelity transport config");
    return cfg;
  }

  Grid1D grid_;
  TransportConfig cfg_;
  VelocityQuadrature quad_;
  RelaxationStepper stepper_;
  double stable_dt_;
};

inline KineticState hf_step(const KineticState& state, const EpidemicParameters& params, const TransportConfig& cfg,
                            const Grid1D& grid, const VelocityQuadrature& quad, double dt, const ImexTableau& tab) {
  HighFidelitySolver solver(params, cfg, grid, quad, tab);
  KineticState out = state;
  solver.step(out, 0.0, dt);
  return out;
}

inline RunResult<KineticState> hf_run(const KineticState& init, const EpidemicParameters& params,
                                      const TransportConfig& cfg, const Grid1D& grid, const VelocityQuadrature& quad,
                                      double t_end, const ImexTableau& tab,
                                      const std::vector<double>& output_times = {}) {
  HighFidelitySolver solver(params, cfg, grid, quad, tab);
  return solver.run(init, t_end, output_times);
}

}  // namespace epibifi
