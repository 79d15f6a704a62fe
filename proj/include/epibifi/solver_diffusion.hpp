#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "epidemic.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "solver_lf.hpp"
#include "state.hpp"
#include "time_loop.hpp"

namespace epibifi {

/// Solves (1 + 2α) x_i - α (x_{i-1} + x_{i+1}) = rhs_i with periodic wrap
/// (cyclic Thomas algorithm with a Sherman–Morrison correction).
inline void solve_periodic_diffusion(double alpha, std::span<const double> rhs, std::span<double> x) {
  const int n = static_cast<int>(rhs.size());
  if (alpha == 0.0) {
    std::copy(rhs.begin(), rhs.end(), x.begin());
    return;
  }
  const double diag = 1.0 + 2.0 * alpha;
  const double off = -alpha;
  // A = T + u vᵀ with u = (γ, 0, …, 0, off), v = (1, 0, …, 0, off/γ).
  const double gamma = -diag;
  std::vector<double> b(n, diag), cprime(n), y(n), z(n), u(n, 0.0);
  b[0] = diag - gamma;
  b[n - 1] = diag - off * off / gamma;
  u[0] = gamma;
  u[n - 1] = off;
  auto thomas = [&](std::span<const double> d, std::vector<double>& out) {
    cprime[0] = off / b[0];
    out[0] = d[0] / b[0];
    for (int i = 1; i < n; ++i) {
      const double m = b[i] - off * cprime[i - 1];
      cprime[i] = off / m;
      out[i] = (d[i] - off * out[i - 1]) / m;
    }
    for (int i = n - 2; i >= 0; --i) out[i] -= cprime[i] * out[i + 1];
  };
  thomas(rhs, y);
  thomas(u, z);
  const double fact = (y[0] + off * y[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
  for (int i = 0; i < n; ++i) x[i] = y[i] - fact * z[i];
}

/// Solves (1 + 2α) x_i - α (x_{i-2} + x_{i+2}) = rhs_i, periodic. The stride-2
/// orbits of the index set (one orbit for odd n, two for even n) are each a
/// periodic tridiagonal system.
inline void solve_periodic_wide_diffusion(double alpha, std::span<const double> rhs, std::span<double> x) {
  const int n = static_cast<int>(rhs.size());
  const int orbits = n % 2 == 0 ? 2 : 1;
  const int len = n / orbits;
  if (len < 3) throw ConfigError("wide diffusion stencil needs at least 6 cells");
  std::vector<double> r(len), y(len);
  for (int o = 0; o < orbits; ++o) {
    for (int k = 0; k < len; ++k) r[k] = rhs[(o + 2 * k) % n];
    solve_periodic_diffusion(alpha, r, y);
    for (int k = 0; k < len; ++k) x[(o + 2 * k) % n] = y[k];
  }
}

/// Central difference of central differences, D (ρ_{i+2} - 2ρ_i + ρ_{i-2}) / (2dx)²:
/// the second-order operator the relaxation schemes reduce to as τ → 0.
inline double wide_laplacian(std::span<const double> rho, int i, double inv_4dx2) {
  const int n = static_cast<int>(rho.size());
  return (rho[(i + 2) % n] - 2.0 * rho[i] + rho[(i + n - 2) % n]) * inv_4dx2;
}

/// Reaction–diffusion limit ∂t ρ_c = reactions + D_c ∂xx ρ_c on the periodic
/// mesh: central diffusion taken implicitly, reactions explicitly.
class DiffusionSolver {
 public:
  DiffusionSolver(const EpidemicParameters& params, std::vector<double> diffusivity, const Grid1D& grid,
                  ImexTableau tab = tableaux::gsa332())
      : params_(params), d_(std::move(diffusivity)), grid_(grid), tab_(std::move(tab)) {
    const CompartmentSet set(params.kind);
    if (static_cast<int>(d_.size()) != set.size()) throw ConfigError("DiffusionSolver: one diffusivity per compartment");
    for (double d : d_)
      if (!(d >= 0.0)) throw ConfigError("DiffusionSolver: diffusivity must be non-negative");
    tab_.validate();
    gsa_ = last_stage_is_solution(tab_);
    if (!params_.time_dependent) coeffs_ = CellCoefficients::sample(params_, grid_, 0.0);
  }

  void step(MacroState& state, double t, double dt, long step_index = 0) {
    if (!(dt > 0.0)) throw ConfigError("diffusion_step: dt must be positive");
    state.validate(grid_);
    const int s = tab_.stages, nc = state.n_compartments(), nx = grid_.n_cells();
    const double inv_4dx2 = 0.25 / (grid_.dx() * grid_.dx());
    std::vector<std::vector<std::vector<double>>> react(s), lap(s);
    MacroState stage = state;
    std::vector<double> rhs(nx);
    for (int k = 0; k < s; ++k) {
      if (params_.time_dependent) coeffs_ = CellCoefficients::sample(params_, grid_, t + tab_.c_expl(k) * dt);
      for (int c = 0; c < nc; ++c) {
        for (int i = 0; i < nx; ++i) {
          double v = state.density[c][i];
          for (int l = 0; l < k; ++l) v += dt * (tab_.a_expl[k][l] * react[l][c][i] + tab_.a_impl[k][l] * lap[l][c][i]);
          rhs[i] = v;
        }
        const double alpha = dt * tab_.a_impl[k][k] * d_[c] * inv_4dx2;
        solve_periodic_wide_diffusion(alpha, rhs, stage.density[c]);
        for (double v : stage.density[c])
          if (!std::isfinite(v))
            throw NumericError("diffusion solver: non-finite value at step " + std::to_string(step_index), step_index, k);
      }
      react[k] = reactions(stage);
      lap[k].assign(nc, std::vector<double>(nx));
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < nx; ++i) lap[k][c][i] = d_[c] * wide_laplacian(stage.density[c], i, inv_4dx2);
    }
    if (gsa_) {
      state.density = std::move(stage.density);
    } else {
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < nx; ++i)
          for (int k = 0; k < s; ++k)
            state.density[c][i] += dt * (tab_.b_expl[k] * react[k][c][i] + tab_.b_impl[k] * lap[k][c][i]);
    }
  }

  RunResult<MacroState> run(const MacroState& init, double t_end, double dt,
                            const std::vector<double>& output_times = {}) {
    RunResult<MacroState> out;
    out.dt = dt;
    MacroState state = init;
    for (auto& j : state.flux) std::fill(j.begin(), j.end(), 0.0);
    out.steps = advance_to(
        t_end, dt, output_times, [&](double t, double h, long n) { step(state, t, h, n); },
        [&](double time) { out.snapshots.emplace_back(time, state); });
    out.final_state = std::move(state);
    return out;
  }

 private:
  std::vector<std::vector<double>> reactions(const MacroState& st) const {
    const int nc = st.n_compartments(), nx = grid_.n_cells();
    std::vector<std::vector<double>> out(nc, std::vector<double>(nx));
    const bool sir_model = params_.kind == CompartmentKind::SIR;
    double g[seiar::count], r[seiar::count];
    for (int i = 0; i < nx; ++i) {
      for (int c = 0; c < nc; ++c) g[c] = st.density[c][i];
      const double infectious = sir_model ? g[sir::I] : g[seiar::I];
      const double asymptomatic = sir_model ? 0.0 : g[seiar::A];
      even_reactions(coeffs_, i, g, infectious, asymptomatic, r);
      for (int c = 0; c < nc; ++c) out[c][i] = r[c];
    }
    return out;
  }

  EpidemicParameters params_;
  std::vector<double> d_;
  Grid1D grid_;
  ImexTableau tab_;
  bool gsa_ = true;
  CellCoefficients coeffs_;
};

inline MacroState diffusion_step(const MacroState& state, const EpidemicParameters& params,
                                 const std::vector<double>& diffusivity, const Grid1D& grid, double dt) {
  DiffusionSolver solver(params, diffusivity, grid);
  MacroState out = state;
  solver.step(out, 0.0, dt);
  return out;
}

}  // namespace epibifi
