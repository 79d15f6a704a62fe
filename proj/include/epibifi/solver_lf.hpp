#pragma once

#include <utility>
#include <vector>

#include "epidemic.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "relaxation_stepper.hpp"
#include "state.hpp"
#include "time_loop.hpp"

namespace epibifi {

/// Snapshots recorded at requested output times plus the final state.
template <class State>
struct RunResult {
  State final_state;
  std::vector<std::pair<double, State>> snapshots;
  long steps = 0;
  double dt = 0.0;
};

namespace detail {
inline ParityFields macro_to_fields(const MacroState& s) {
  ParityFields f(s.n_compartments(), 1, s.n_cells());
  for (int c = 0; c < s.n_compartments(); ++c) {
    std::copy(s.density[c].begin(), s.density[c].end(), f.even.begin() + f.offset(c, 0));
    std::copy(s.flux[c].begin(), s.flux[c].end(), f.odd.begin() + f.offset(c, 0));
  }
  return f;
}

inline void fields_to_macro(const ParityFields& f, MacroState& s) {
  for (int c = 0; c < f.n_compartments; ++c) {
    const auto off = static_cast<std::ptrdiff_t>(f.offset(c, 0));
    std::copy(f.even.begin() + off, f.even.begin() + off + f.n_cells, s.density[c].begin());
    std::copy(f.odd.begin() + off, f.odd.begin() + off + f.n_cells, s.flux[c].begin());
  }
}
}  // namespace detail

/// Two-velocity model in (density, flux) variables.
class LowFidelitySolver {
 public:
  LowFidelitySolver(const EpidemicParameters& params, TransportConfig cfg, const Grid1D& grid, ImexTableau tab)
      : grid_(grid),
        cfg_(check(std::move(cfg))),
        stepper_(CompartmentSet(params.kind), VelocityNodes::two_velocity(), cfg_, params, grid, std::move(tab)),
        stable_dt_(reaction_limited_dt(compute_dt(grid_, cfg_.max_speed(), cfg_.max_diffusivity()), params, grid)) {}

  /// The transport step from compute_dt, capped by the reaction rates.
  double stable_dt() const { return stable_dt_; }

  void step(MacroState& state, double t, double dt, long step_index = 0) {
    state.validate(grid_);
    auto f = detail::macro_to_fields(state);
    stepper_.step(f, t, dt, step_index);
    detail::fields_to_macro(f, state);
  }

  RunResult<MacroState> run(const MacroState& init, double t_end, const std::vector<double>& output_times = {},
                            double dt = 0.0) {
    init.validate(grid_);
    RunResult<MacroState> out;
    out.dt = dt > 0.0 ? dt : stable_dt();
    auto f = detail::macro_to_fields(init);
    MacroState scratch = init;
    out.steps = advance_to(
        t_end, out.dt, output_times, [&](double t, double h, long n) { stepper_.step(f, t, h, n); },
        [&](double time) {
          detail::fields_to_macro(f, scratch);
          out.snapshots.emplace_back(time, scratch);
        });
    out.final_state = init;
    detail::fields_to_macro(f, out.final_state);
    return out;
  }

 private:
  static TransportConfig check(TransportConfig cfg) {
    if (cfg.fidelity != Fidelity::Low) throw ConfigError("low-fidelity solver needs a low-fidelity transport config");
    return cfg;
  }

  Grid1D grid_;
  TransportConfig cfg_;
  RelaxationStepper stepper_;
  double stable_dt_;
};

inline MacroState lf_step(const MacroState& state, const EpidemicParameters& params, const TransportConfig& cfg,
                          const Grid1D& grid, double dt, const ImexTableau& tab) {
  LowFidelitySolver solver(params, cfg, grid, tab);
  MacroState out = state;
  solver.step(out, 0.0, dt);
  return out;
}

inline RunResult<MacroState> lf_run(const MacroState& init, const EpidemicParameters& params,
                                    const TransportConfig& cfg, const Grid1D& grid, double t_end,
                                    const ImexTableau& tab, const std::vector<double>& output_times = {}) {
  LowFidelitySolver solver(params, cfg, grid, tab);
  return solver.run(init, t_end, output_times);
}

}  // namespace epibifi
