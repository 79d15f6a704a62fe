#pragma once

#include <vector>

#include "collocation.hpp"
#include "scenarios.hpp"
#include "solver_diffusion.hpp"
#include "solver_hf.hpp"
#include "solver_lf.hpp"
#include "velocity.hpp"

namespace epibifi {

/// Final-time density snapshots of the three models of a scenario at a sample z.
class ScenarioModels {
 public:
  explicit ScenarioModels(ScenarioConfig cfg) : cfg_(std::move(cfg)), grid_(cfg_.grid()), quad_(cfg_.n_velocity) {
    cfg_.validate();
  }

  const ScenarioConfig& config() const { return cfg_; }
  const Grid1D& grid() const { return grid_; }
  const VelocityQuadrature& quadrature() const { return quad_; }

  /// Default steps of the two solvers at sample z.
  double lf_dt(const RandomSample& z) const {
    return LowFidelitySolver(cfg_.parameters(z), cfg_.transport(Fidelity::Low), grid_, cfg_.tableau).stable_dt();
  }
  double hf_dt(const RandomSample& z) const {
    return HighFidelitySolver(cfg_.parameters(z), cfg_.transport(Fidelity::High), grid_, quad_, cfg_.tableau).stable_dt();
  }

  MacroState low_state(const RandomSample& z, double dt = 0.0) const {
    LowFidelitySolver solver(cfg_.parameters(z), cfg_.transport(Fidelity::Low), grid_, cfg_.tableau);
    return solver.run(cfg_.initial_state(z), cfg_.t_end, {}, dt).final_state;
  }

  MacroState high_state(const RandomSample& z, double dt = 0.0) const {
    HighFidelitySolver solver(cfg_.parameters(z), cfg_.transport(Fidelity::High), grid_, quad_, cfg_.tableau);
    const auto init = kinetic_init(cfg_.initial_state(z), quad_);
    return moments(solver.run(init, cfg_.t_end, {}, dt).final_state, quad_);
  }

  MacroState diffusion_state(const RandomSample& z, double dt) const {
    DiffusionSolver solver(cfg_.parameters(z), cfg_.transport(Fidelity::Low).diffusivities(), grid_, cfg_.tableau);
    return solver.run(cfg_.initial_state(z), cfg_.t_end, dt).final_state;
  }

  std::vector<double> low(const RandomSample& z) const { return low_state(z).snapshot(); }
  std::vector<double> high(const RandomSample& z) const { return high_state(z).snapshot(); }

 private:
  ScenarioConfig cfg_;
  Grid1D grid_;
  VelocityQuadrature quad_;
};

}  // namespace epibifi
