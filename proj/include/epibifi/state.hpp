#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace epibifi {

enum class CompartmentKind { SIR, SEIAR };

/// Fixed compartment orderings. Every per-compartment array in the library
/// follows these indices.
namespace sir {
inline constexpr int S = 0, I = 1, R = 2, count = 3;
}
namespace seiar {
inline constexpr int S = 0, E = 1, I = 2, A = 3, R = 4, count = 5;
}

class CompartmentSet {
 public:
  explicit CompartmentSet(CompartmentKind kind = CompartmentKind::SIR) : kind_(kind) {}

  CompartmentKind kind() const { return kind_; }
  int size() const { return kind_ == CompartmentKind::SIR ? sir::count : seiar::count; }

  std::span<const std::string_view> members() const {
    static constexpr std::array<std::string_view, 3> sir_labels{"S", "I", "R"};
    static constexpr std::array<std::string_view, 5> seiar_labels{"S", "E", "I", "A", "R"};
    if (kind_ == CompartmentKind::SIR) return sir_labels;
    return seiar_labels;
  }

  std::string_view label(int c) const { return members()[c]; }

  int index(std::string_view label) const {
    const auto m = members();
    for (int c = 0; c < static_cast<int>(m.size()); ++c)
      if (m[c] == label) return c;
    throw ConfigError("unknown compartment '" + std::string(label) + "'");
  }

  friend bool operator==(const CompartmentSet&, const CompartmentSet&) = default;

 private:
  CompartmentKind kind_;
};

inline std::string to_string(CompartmentKind kind) { return kind == CompartmentKind::SIR ? "SIR" : "SEIAR"; }

/// Per-cell compartment densities and fluxes.
struct MacroState {
  CompartmentSet compartments;
  std::vector<std::vector<double>> density;
  std::vector<std::vector<double>> flux;

  MacroState() = default;
  MacroState(CompartmentSet set, int n_cells)
      : compartments(set),
        density(set.size(), std::vector<double>(n_cells, 0.0)),
        flux(set.size(), std::vector<double>(n_cells, 0.0)) {}

  int n_compartments() const { return compartments.size(); }
  int n_cells() const { return density.empty() ? 0 : static_cast<int>(density.front().size()); }

  std::vector<double> total_density() const {
    std::vector<double> rho(n_cells(), 0.0);
    for (const auto& d : density)
      for (std::size_t i = 0; i < d.size(); ++i) rho[i] += d[i];
    return rho;
  }

  /// Σ_c ∫ density_c dx.
  double total_population(const Grid1D& grid) const {
    double total = 0.0;
    for (const auto& d : density) total += grid.integrate(d);
    return total;
  }

  /// Densities concatenated compartment-major, then cell index.
  std::vector<double> snapshot() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_compartments()) * n_cells());
    for (const auto& d : density) out.insert(out.end(), d.begin(), d.end());
    return out;
  }

  /// Densities followed by fluxes, both compartment-major.
  std::vector<double> full_export() const {
    std::vector<double> out = snapshot();
    for (const auto& j : flux) out.insert(out.end(), j.begin(), j.end());
    return out;
  }

  void validate(const Grid1D& grid) const {
    if (static_cast<int>(density.size()) != compartments.size() ||
        static_cast<int>(flux.size()) != compartments.size())
      throw ConfigError("MacroState: compartment count mismatch");
    for (const auto& d : density) grid.check_length(d, "MacroState density");
    for (const auto& j : flux) grid.check_length(j, "MacroState flux");
  }
};

enum class Fidelity { Low, High };

/// Characteristic speeds and relaxation times per compartment.
struct TransportConfig {
  std::vector<double> lambda;
  std::vector<double> tau;
  Fidelity fidelity = Fidelity::Low;

  /// λ²τ for the two-velocity model, λ²τ/3 for the kinetic model.
  double diffusivity(int c) const {
    const double d = lambda[c] * lambda[c] * tau[c];
    return fidelity == Fidelity::Low ? d : d / 3.0;
  }

  std::vector<double> diffusivities() const {
    std::vector<double> d(lambda.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = diffusivity(static_cast<int>(c));
    return d;
  }

  double max_speed() const { return lambda.empty() ? 0.0 : *std::max_element(lambda.begin(), lambda.end()); }

  double max_diffusivity() const {
    double m = 0.0;
    for (std::size_t c = 0; c < lambda.size(); ++c) m = std::max(m, diffusivity(static_cast<int>(c)));
    return m;
  }

  void validate(const CompartmentSet& set) const {
    if (static_cast<int>(lambda.size()) != set.size() || static_cast<int>(tau.size()) != set.size())
      throw ConfigError("TransportConfig: need one lambda and one tau per compartment");
    for (double l : lambda)
      if (!(l >= 0.0)) throw ConfigError("TransportConfig: lambda must be non-negative");
    for (double t : tau)
      if (!(t > 0.0)) throw ConfigError("TransportConfig: tau must be positive");
  }
};

}  // namespace epibifi
