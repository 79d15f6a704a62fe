#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "epidemic.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "state.hpp"
#include "transport.hpp"
#include "velocity.hpp"

namespace epibifi {

/// Even/odd fields of a discrete-velocity relaxation system, stored
/// compartment-major, then node, then cell.
struct ParityFields {
  int n_compartments = 0;
  int n_nodes = 0;
  int n_cells = 0;
  std::vector<double> even;
  std::vector<double> odd;

  ParityFields() = default;
  ParityFields(int compartments, int nodes, int cells)
      : n_compartments(compartments),
        n_nodes(nodes),
        n_cells(cells),
        even(static_cast<std::size_t>(compartments) * nodes * cells, 0.0),
        odd(static_cast<std::size_t>(compartments) * nodes * cells, 0.0) {}

  std::size_t offset(int c, int q) const { return (static_cast<std::size_t>(c) * n_nodes + q) * n_cells; }
  std::size_t index(int c, int q, int i) const { return offset(c, q) + i; }
};

/// One IMEX step of the partitioned relaxation system, per compartment c and
/// non-negative ordinate ζ:
///
///   ∂t r + ζ ∂x j        = E(r) - (r - R/M)/τ      R = Σ_q m_q r_q, M = Σ_q m_q
///   ∂t j + λ² ζ ∂x r     = E(j) - j/τ
///
/// The flux of r (ζ ∂x j) and both relaxations take the implicit weights; the
/// flux of j, the upwind dissipation and the reactions take the explicit ones.
/// Within a stage j is solved first, so ζ ∂x j is known when r is solved, and
/// the moment of the r-stage equation closes because the relaxation conserves R.
/// With one node of unit mass the system is the two-velocity (density, flux) model.
class RelaxationStepper {
 public:
  RelaxationStepper(CompartmentSet set, VelocityNodes nodes, TransportConfig transport,
                    const EpidemicParameters& params, const Grid1D& grid, ImexTableau tableau)
      : set_(set),
        nodes_(std::move(nodes)),
        transport_(std::move(transport)),
        params_(params),
        grid_(grid),
        tab_(std::move(tableau)),
        gsa_(last_stage_is_solution(tab_)) {
    if (params.kind != set.kind()) throw ConfigError("RelaxationStepper: parameter kind does not match compartments");
    transport_.validate(set_);
    tab_.validate();
    if (nodes_.size() < 1) throw ConfigError("RelaxationStepper: need at least one velocity node");
    total_mass_ = nodes_.total_mass();
    phi_.resize(set_.size());
    for (int c = 0; c < set_.size(); ++c)
      phi_[c] = upwind_weight(transport_.lambda[c], transport_.tau[c], grid_.dx());
    if (!params_.time_dependent) coeffs_ = CellCoefficients::sample(params_, grid_, 0.0);
    const int s = tab_.stages;
    const std::size_t size = static_cast<std::size_t>(set_.size()) * nodes_.size() * grid_.n_cells();
    for (auto* v : {&even_rhs_, &odd_rhs_, &flux_term_, &even_stiff_, &odd_stiff_})
      v->assign(s, std::vector<double>(size, 0.0));
    moments_.assign(s, std::vector<double>(static_cast<std::size_t>(set_.size()) * grid_.n_cells(), 0.0));
    slopes_.resize(grid_.n_cells());
    central_.resize(grid_.n_cells());
    jumps_.resize(grid_.n_cells());
    odd_jumps_.assign(size, 0.0);
    stage_even_.assign(size, 0.0);
    stage_odd_.assign(size, 0.0);
    pre_.assign(size, 0.0);
  }

  const ImexTableau& tableau() const { return tab_; }
  const VelocityNodes& nodes() const { return nodes_; }
  const TransportConfig& transport() const { return transport_; }

  /// Density moments R_c = Σ_q m_q r_{c,q}, compartment-major.
  std::vector<double> moments(const ParityFields& f) const {
    std::vector<double> out(static_cast<std::size_t>(f.n_compartments) * f.n_cells, 0.0);
    for (int c = 0; c < f.n_compartments; ++c)
      for (int q = 0; q < f.n_nodes; ++q) {
        const double m = nodes_.mass[q];
        const double* r = &f.even[f.offset(c, q)];
        double* dst = &out[static_cast<std::size_t>(c) * f.n_cells];
        for (int i = 0; i < f.n_cells; ++i) dst[i] += m * r[i];
      }
    return out;
  }

  void step(ParityFields& f, double t, double dt, long step_index) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
    check_shape(f);
    const int s = tab_.stages;
    const int nc = set_.size(), nq = nodes_.size(), nx = grid_.n_cells();
    const std::size_t size = f.even.size();

    for (int k = 0; k < s; ++k) {
      if (params_.time_dependent) coeffs_ = CellCoefficients::sample(params_, grid_, t + tab_.c_expl(k) * dt);
      const double akk = tab_.a_impl[k][k];

      // Odd parities: explicit history plus local implicit relaxation.
      for (int c = 0; c < nc; ++c) {
        const double tau = transport_.tau[c];
        const double denom = tau + dt * akk;
        for (int q = 0; q < nq; ++q) {
          const std::size_t off = f.offset(c, q);
          for (int i = 0; i < nx; ++i) {
            const std::size_t idx = off + i;
            double y = f.odd[idx];
            for (int l = 0; l < k; ++l)
              y += dt * (tab_.a_expl[k][l] * odd_rhs_[l][idx] - tab_.a_impl[k][l] * odd_stiff_[l][idx]);
            stage_odd_[idx] = tau * y / denom;
            odd_stiff_[k][idx] = y / denom;
          }
          interface_terms(std::span<const double>(&stage_odd_[off], nx), grid_, slopes_, central_, jumps_, phi_[c]);
          const double zeta = nodes_.speed[q];
          for (int i = 0; i < nx; ++i) {
            flux_term_[k][off + i] = -zeta * central_[i];
            odd_jumps_[off + i] = jumps_[i];
          }
        }
      }

      // Even parities: solve for the moment first, then relax each node.
      std::vector<double>& mom = moments_[k];
      std::fill(mom.begin(), mom.end(), 0.0);
      for (int c = 0; c < nc; ++c)
        for (int q = 0; q < nq; ++q) {
          const std::size_t off = f.offset(c, q);
          const double m = nodes_.mass[q];
          double* dst = &mom[static_cast<std::size_t>(c) * nx];
          for (int i = 0; i < nx; ++i) {
            const std::size_t idx = off + i;
            double x = f.even[idx];
            for (int l = 0; l < k; ++l)
              x += dt * (tab_.a_expl[k][l] * even_rhs_[l][idx] - tab_.a_impl[k][l] * even_stiff_[l][idx]);
            for (int l = 0; l <= k; ++l) x += dt * tab_.a_impl[k][l] * flux_term_[l][idx];
            pre_[idx] = x;
            dst[i] += m * x;
          }
        }
      for (int c = 0; c < nc; ++c) {
        const double tau = transport_.tau[c];
        const double denom = tau + dt * akk;
        const double* moment = &mom[static_cast<std::size_t>(c) * nx];
        for (int q = 0; q < nq; ++q) {
          const std::size_t off = f.offset(c, q);
          for (int i = 0; i < nx; ++i) {
            const std::size_t idx = off + i;
            const double eq = moment[i] / total_mass_;
            stage_even_[idx] = (tau * pre_[idx] + dt * akk * eq) / denom;
            even_stiff_[k][idx] = (pre_[idx] - eq) / denom;
          }
        }
      }
      check_finite(step_index, k);

      if (k == s - 1 && gsa_) break;
      explicit_terms(k);
    }

    if (gsa_) {
      f.even.swap(stage_even_);
      f.odd.swap(stage_odd_);
    } else {
      for (std::size_t idx = 0; idx < size; ++idx) {
        double r = f.even[idx], j = f.odd[idx];
        for (int k = 0; k < s; ++k) {
          r += dt * (tab_.b_expl[k] * even_rhs_[k][idx] + tab_.b_impl[k] * (flux_term_[k][idx] - even_stiff_[k][idx]));
          j += dt * (tab_.b_expl[k] * odd_rhs_[k][idx] - tab_.b_impl[k] * odd_stiff_[k][idx]);
        }
        f.even[idx] = r;
        f.odd[idx] = j;
      }
    }
    check_density(f, step_index);
  }

  /// Positivity is monitored, never enforced.
  static constexpr double positivity_tolerance = 1e-8;

 private:
  void check_shape(const ParityFields& f) const {
    if (f.n_compartments != set_.size() || f.n_nodes != nodes_.size() || f.n_cells != grid_.n_cells())
      throw ConfigError("RelaxationStepper: field shape does not match the stepper");
  }

  void check_finite(long step_index, int stage) const {
    const int nq = nodes_.size(), nx = grid_.n_cells();
    for (std::size_t idx = 0; idx < stage_even_.size(); ++idx) {
      if (!std::isfinite(stage_even_[idx]) || !std::isfinite(stage_odd_[idx])) {
        const int node = static_cast<int>((idx / nx) % nq);
        throw NumericError("non-finite value at step " + std::to_string(step_index) + ", stage " +
                               std::to_string(stage) + ", node " + std::to_string(node),
                           step_index, stage, node);
      }
    }
  }

  void check_density(const ParityFields& f, long step_index) const {
    const auto mom = moments(f);
    for (double v : mom)
      if (!(v >= -positivity_tolerance))
        throw NumericError("density below -1e-8 after step " + std::to_string(step_index), step_index);
  }

  /// Explicit right-hand sides of stage k: dissipation, reactions and the
  /// λ²ζ ∂x r flux of the odd equation.
  void explicit_terms(int k) {
    const int nc = set_.size(), nq = nodes_.size(), nx = grid_.n_cells();
    const auto& mom = moments_[k];
    std::vector<double>& er = even_rhs_[k];
    std::vector<double>& oj = odd_rhs_[k];
    for (int c = 0; c < nc; ++c) {
      const double lambda = transport_.lambda[c];
      for (int q = 0; q < nq; ++q) {
        const std::size_t off = static_cast<std::size_t>(c * nq + q) * nx;
        const double zeta = nodes_.speed[q];
        const double visc = 0.5 * lambda * zeta * phi_[c];
        interface_terms(std::span<const double>(&stage_even_[off], nx), grid_, slopes_, central_, jumps_, phi_[c]);
        for (int i = 0; i < nx; ++i) {
          er[off + i] = visc * jumps_[i];
          oj[off + i] = -lambda * lambda * zeta * central_[i] + visc * odd_jumps_[off + i];
        }
      }
    }
    const int i_idx = set_.kind() == CompartmentKind::SIR ? sir::I : seiar::I;
    const int a_idx = set_.kind() == CompartmentKind::SIR ? -1 : seiar::A;
    double g[seiar::count], react[seiar::count];
    for (int q = 0; q < nq; ++q)
      for (int i = 0; i < nx; ++i) {
        const double infectious = mom[static_cast<std::size_t>(i_idx) * nx + i];
        const double asymptomatic = a_idx < 0 ? 0.0 : mom[static_cast<std::size_t>(a_idx) * nx + i];
        for (int c = 0; c < nc; ++c) g[c] = stage_even_[static_cast<std::size_t>(c * nq + q) * nx + i];
        even_reactions(coeffs_, i, g, infectious, asymptomatic, react);
        for (int c = 0; c < nc; ++c) er[static_cast<std::size_t>(c * nq + q) * nx + i] += react[c];
        for (int c = 0; c < nc; ++c) g[c] = stage_odd_[static_cast<std::size_t>(c * nq + q) * nx + i];
        odd_reactions(coeffs_, i, g, infectious, asymptomatic, transport_.lambda, react);
        for (int c = 0; c < nc; ++c) oj[static_cast<std::size_t>(c * nq + q) * nx + i] += react[c];
      }
  }

  CompartmentSet set_;
  VelocityNodes nodes_;
  TransportConfig transport_;
  EpidemicParameters params_;
  Grid1D grid_;
  ImexTableau tab_;
  bool gsa_;
  double total_mass_ = 0.0;
  std::vector<double> phi_;
  CellCoefficients coeffs_;

  std::vector<std::vector<double>> even_rhs_, odd_rhs_, flux_term_, even_stiff_, odd_stiff_, moments_;
  std::vector<double> slopes_, central_, jumps_, odd_jumps_, stage_even_, stage_odd_, pre_;
};

}  // namespace epibifi
