#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "grid.hpp"

namespace epibifi {

/// Interface terms of the MUSCL/minmod reconstruction of one cell field.
///
///   central[i]  = (q̄_{i+1/2} - q̄_{i-1/2}) / dx,  q̄ = (q_i + q_{i+1})/2 + θ·(mean of traces - (q_i + q_{i+1})/2)
///   jumps[i]    = ([q]_{i+1/2} - [q]_{i-1/2}) / dx, [q] = right trace - left trace
///
/// The upwind flux of a ±a system is a·central minus (a/2)·jumps, so the two
/// parts can be weighted by different Runge–Kutta coefficients. θ = 1 gives
/// the limited MUSCL traces; θ = 0 the plain central average.
inline void interface_terms(std::span<const double> q, const Grid1D& grid, std::span<double> slopes,
                            std::span<double> central, std::span<double> jumps, double theta = 1.0) {
  const int n = grid.n_cells();
  const double dx = grid.dx();
  const double half = 0.5 * dx;
  reconstruct(q, grid, slopes);
  // Face n-1/2 == face -1/2 by periodicity.
  auto face = [&](int i, double& mean, double& jump) {
    const int ip = grid.right(i);
    const double left_trace = q[i] + half * slopes[i];
    const double right_trace = q[ip] - half * slopes[ip];
    mean = 0.5 * (q[i] + q[ip]) + theta * 0.25 * dx * (slopes[i] - slopes[ip]);
    jump = right_trace - left_trace;
  };
  double mean_prev, jump_prev;
  face(n - 1, mean_prev, jump_prev);
  const double inv_dx = 1.0 / dx;
  for (int i = 0; i < n; ++i) {
    double mean, jump;
    face(i, mean, jump);
    central[i] = (mean - mean_prev) * inv_dx;
    jumps[i] = (jump - jump_prev) * inv_dx;
    mean_prev = mean;
    jump_prev = jump;
  }
}

/// Weight of the upwind dissipation relative to full characteristic upwinding.
/// Equals 1 when a wave crosses a cell before relaxing (λτ ≥ dx) and vanishes
/// cubically in λτ/dx, so the numerical viscosity of the density equation
/// stays small against the physical diffusivity λ²τ in the diffusive regime.
inline double upwind_weight(double lambda, double tau, double dx) {
  const double ratio = lambda * tau / dx;
  return std::min(1.0, ratio * ratio * ratio);
}

}  // namespace epibifi
