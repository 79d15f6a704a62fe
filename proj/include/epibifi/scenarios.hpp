#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bifi.hpp"
#include "collocation.hpp"
#include "epidemic.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "imex.hpp"
#include "state.hpp"

namespace epibifi {

enum class ScenarioModel { HeterogeneousSIR, CitiesSEIAR };

/// Everything needed to reproduce one uncertainty-quantification experiment.
struct ScenarioConfig {
  std::string name;
  ScenarioModel model = ScenarioModel::HeterogeneousSIR;
  double length = 20.0;
  int n_cells = 150;
  int n_velocity = 8;
  std::vector<double> lambda;
  std::vector<double> tau_lf;
  std::vector<double> tau_hf;
  bool consistent_scaling = true;
  RandomDomain domain;
  int reference_level = 3;
  int n_candidates = 1000;
  int n_select = 8;
  double t_end = 5.0;
  std::uint64_t seed = 42;
  std::string output_dir = "out";
  ImexTableau tableau = tableaux::gsa332();
  StdMethod std_method = StdMethod::SurrogateNodes;
  /// Named model constants (contact rates, amplitudes, centers, ...).
  std::map<std::string, double> constants;

  CompartmentKind kind() const {
    return model == ScenarioModel::HeterogeneousSIR ? CompartmentKind::SIR : CompartmentKind::SEIAR;
  }
  CompartmentSet compartments() const { return CompartmentSet(kind()); }
  Grid1D grid() const { return Grid1D(length, n_cells); }

  double constant(const std::string& key) const {
    auto it = constants.find(key);
    if (it == constants.end()) throw ConfigError("scenario '" + name + "': missing constant '" + key + "'");
    return it->second;
  }

  TransportConfig transport(Fidelity fidelity) const {
    TransportConfig t{lambda, fidelity == Fidelity::Low ? tau_lf : tau_hf, fidelity};
    t.validate(compartments());
    return t;
  }

  void validate() const {
    const CompartmentSet set = compartments();
    transport(Fidelity::Low);
    transport(Fidelity::High);
    if (consistent_scaling) {
      const auto lf = transport(Fidelity::Low), hf = transport(Fidelity::High);
      for (int c = 0; c < set.size(); ++c) {
        if (std::abs(tau_hf[c] - 3.0 * tau_lf[c]) > 1e-12 * tau_hf[c])
          throw ConfigError("scenario '" + name + "': consistent scaling needs tau_hf = 3 tau_lf");
        if (std::abs(lf.diffusivity(c) - hf.diffusivity(c)) > 1e-12 * std::max(1.0, lf.diffusivity(c)))
          throw ConfigError("scenario '" + name + "': diffusivities of the two models differ");
      }
    }
    domain.validate();
    if (domain.dim() != 2) throw ConfigError("scenario '" + name + "': the built-in models use a 2-dimensional z");
    if (n_velocity < 2 || n_velocity % 2 != 0) throw ConfigError("scenario: n_velocity must be even and >= 2");
    if (reference_level < 0) throw ConfigError("scenario: reference level must be >= 0");
    if (n_candidates < 1) throw ConfigError("scenario: need at least one candidate");
    if (n_select < 0 || n_select > n_candidates) throw ConfigError("scenario: n must lie in [0, candidates]");
    if (!(t_end > 0.0)) throw ConfigError("scenario: t_end must be positive");
    grid();
    tableau.validate();
  }

  /// Coefficient fields at parameter z.
  EpidemicParameters parameters(const RandomSample& z) const {
    if (!domain.contains(z)) throw DomainError("scenario '" + name + "': sample outside the parameter domain");
    EpidemicParameters p;
    p.kind = kind();
    p.p = constant("p");
    if (model == ScenarioModel::HeterogeneousSIR) {
      const double beta0 = constant("beta0") * (1.0 + constant("beta_z") * z[0]);
      const double mod = constant("beta_modulation"), freq = constant("beta_frequency");
      p.beta = [=](double x, double) { return beta0 * (1.0 + mod * std::sin(freq * x)); };
      p.gamma = constant_field(constant("gamma0") * (1.0 + constant("gamma_z") * z[1]));
      p.kappa = constant_field(constant("kappa"));
      return p;
    }
    const double ba0 = constant("beta_a0") * (1.0 + constant("beta_a_z") * z[1]);
    const double x1 = constant("x1"), x2 = constant("x2"), x3 = constant("x3");
    const double h1 = constant("hotspot1"), h2 = constant("hotspot2"), h3 = constant("hotspot3");
    const double amp = constant("beta_a_sine"), freq = constant("beta_a_frequency");
    const double ratio = constant("beta_i_ratio");
    auto beta_a = [=](double x, double) {
      const auto g = [x](double c) { return std::exp(-(x - c) * (x - c)); };
      return ba0 * (1.0 + h1 * g(x1) + h2 * g(x2) + h3 * g(x3)) + amp * std::sin(freq * x);
    };
    p.beta_a = beta_a;
    p.beta = [=](double x, double t) { return ratio * beta_a(x, t); };
    p.kappa = constant_field(constant("kappa_i"));
    p.kappa_a = constant_field(constant("kappa_a"));
    p.gamma_i = constant_field(constant("gamma_i"));
    p.gamma_a = constant_field(constant("gamma_a"));
    p.latency_rate = constant_field(constant("latency_rate"));
    p.sigma = constant_field(constant("sigma"));
    return p;
  }

  /// Initial densities at the cell centers with zero fluxes.
  MacroState initial_state(const RandomSample& z) const {
    const Grid1D g = grid();
    MacroState s(compartments(), g.n_cells());
    if (model == ScenarioModel::HeterogeneousSIR) {
      const double i0 = constant("i0"), xc = constant("i_center");
      for (int i = 0; i < g.n_cells(); ++i) {
        const double x = g.center(i);
        s.density[sir::I][i] = i0 * std::exp(-(x - xc) * (x - xc));
        s.density[sir::S][i] = 1.0 - s.density[sir::I][i];
      }
      return s;
    }
    const double scale = 1.0 + constant("alpha_z") * z[0];
    const double a[3] = {constant("alpha1") * scale, constant("alpha2") * scale, constant("alpha3") * scale};
    const double c[3] = {constant("x1"), constant("x2"), constant("x3")};
    for (int i = 0; i < g.n_cells(); ++i) {
      const double x = g.center(i);
      double e = 0.0;
      for (int k = 0; k < 3; ++k) e += a[k] * std::exp(-(x - c[k]) * (x - c[k]));
      s.density[seiar::E][i] = e;
      s.density[seiar::S][i] = 1.0 - e;
    }
    return s;
  }

  /// Midpoint of the parameter box.
  RandomSample baseline() const {
    RandomSample z(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) z[k] = 0.5 * (domain.lower[k] + domain.upper[k]);
    return z;
  }
};

inline ScenarioConfig build_test1(char variant) {
  ScenarioConfig s;
  s.model = ScenarioModel::HeterogeneousSIR;
  s.domain = RandomDomain::box(2, -1.0, 1.0);
  s.constants = {{"p", 1.0},          {"kappa", 0.0},         {"beta0", 11.0},
                 {"beta_z", 0.6},     {"beta_modulation", 0.05}, {"beta_frequency", 13.0 * std::numbers::pi / 20.0},
                 {"gamma0", 10.0},    {"gamma_z", 0.4},       {"i0", 0.01},
                 {"i_center", 10.0}};
  if (variant == 'a') {
    s.name = "test1a";
    s.lambda.assign(3, std::sqrt(1e5));
    s.tau_lf.assign(3, 1e-5);
    s.n_select = 8;
  } else if (variant == 'b') {
    s.name = "test1b";
    s.lambda.assign(3, 1.0);
    s.tau_lf.assign(3, 1.0);
    s.n_select = 14;
  } else {
    throw ConfigError(std::string("build_test1: unknown variant '") + variant + "'");
  }
  s.tau_hf.resize(3);
  for (int c = 0; c < 3; ++c) s.tau_hf[c] = 3.0 * s.tau_lf[c];
  return s;
}

inline ScenarioConfig build_test2(char variant) {
  ScenarioConfig s;
  s.model = ScenarioModel::CitiesSEIAR;
  s.domain = RandomDomain::box(2, 0.0, 1.0);
  s.constants = {{"p", 1.0},
                 {"kappa_i", 0.0},
                 {"kappa_a", 0.0},
                 {"x1", 10.0 / 3.0},
                 {"x2", 10.0},
                 {"x3", 50.0 / 3.0},
                 {"alpha1", 0.01},
                 {"alpha2", 0.001},
                 {"alpha3", 0.004},
                 {"alpha_z", 1.0},
                 {"beta_a0", 0.5},
                 {"beta_a_z", 0.5},
                 {"hotspot1", 0.5},
                 {"hotspot2", 0.25},
                 {"hotspot3", 0.5},
                 {"beta_a_sine", 0.05},
                 {"beta_a_frequency", 2.0 * std::numbers::pi},
                 {"beta_i_ratio", 0.03},
                 {"gamma_i", 1.0 / 14.0},
                 {"gamma_a", 1.0 / 7.0},
                 {"latency_rate", 1.0 / 3.0},
                 {"sigma", 1.0 / 12.5}};
  double lambda_sq = 0.0;
  if (variant == 'a') {
    s.name = "test2a";
    lambda_sq = 10.0;
    s.tau_lf.assign(5, 0.25);
    s.n_select = 6;
  } else if (variant == 'b') {
    s.name = "test2b";
    lambda_sq = 1.0;
    s.tau_lf.assign(5, 10.0);
    s.n_select = 7;
  } else {
    throw ConfigError(std::string("build_test2: unknown variant '") + variant + "'");
  }
  s.lambda.assign(5, std::sqrt(lambda_sq));
  s.lambda[seiar::I] = 0.0;
  s.tau_hf.resize(5);
  for (int c = 0; c < 5; ++c) s.tau_hf[c] = 3.0 * s.tau_lf[c];
  return s;
}

inline ScenarioConfig build_scenario(const std::string& name) {
  if (name == "test1a") return build_test1('a');
  if (name == "test1b") return build_test1('b');
  if (name == "test2a") return build_test2('a');
  if (name == "test2b") return build_test2('b');
  throw ConfigError("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// key = value configuration files

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Lines "key = value"; '#' starts a comment.
inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in);
}

inline double parse_number(const std::string& key, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const ConfigError&) {
    throw ConfigError("config '" + key + "': not a number: '" + text + "'");
  }
}

/// A scalar is broadcast to every compartment.
inline std::vector<double> parse_list(const std::string& key, const std::string& text, int count) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  if (out.size() == 1 && count > 1) out.assign(count, out[0]);
  if (static_cast<int>(out.size()) != count)
    throw ConfigError("config '" + key + "': expected " + std::to_string(count) + " values");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config '" + key + "': expected true or false");
}

/// Applies overrides on top of a scenario. `scenario` picks the base model
/// when present; unknown keys are rejected.
inline ScenarioConfig apply_overrides(ScenarioConfig s, const KeyValues& kv) {
  if (auto it = kv.find("scenario"); it != kv.end()) s = build_scenario(it->second);
  const int nc = s.compartments().size();
  bool tau_hf_given = false;
  for (const auto& [key, value] : kv) {
    if (key == "scenario" || key.rfind("tableau.", 0) == 0) continue;
    if (key == "name") s.name = value;
    else if (key == "length") s.length = parse_number(key, value);
    else if (key == "nx") s.n_cells = static_cast<int>(parse_number(key, value));
    else if (key == "nv") s.n_velocity = static_cast<int>(parse_number(key, value));
    else if (key == "lambda") s.lambda = parse_list(key, value, nc);
    else if (key == "lambda_sq") {
      s.lambda = parse_list(key, value, nc);
      for (double& l : s.lambda) l = std::sqrt(l);
    } else if (key == "tau_lf") s.tau_lf = parse_list(key, value, nc);
    else if (key == "tau_hf") {
      s.tau_hf = parse_list(key, value, nc);
      tau_hf_given = true;
    } else if (key == "consistent_scaling") s.consistent_scaling = parse_bool(key, value);
    else if (key == "domain.lower") s.domain.lower = parse_list(key, value, s.domain.dim());
    else if (key == "domain.upper") s.domain.upper = parse_list(key, value, s.domain.dim());
    else if (key == "level") s.reference_level = static_cast<int>(parse_number(key, value));
    else if (key == "candidates") s.n_candidates = static_cast<int>(parse_number(key, value));
    else if (key == "n") s.n_select = static_cast<int>(parse_number(key, value));
    else if (key == "t_end") s.t_end = parse_number(key, value);
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "out") s.output_dir = value;
    else if (key == "tableau") s.tableau = tableaux::by_name(value);
    else if (key == "std_method") {
      if (value == "surrogate") s.std_method = StdMethod::SurrogateNodes;
      else if (value == "second_moment") s.std_method = StdMethod::SecondMoment;
      else throw ConfigError("config 'std_method': expected surrogate or second_moment");
    } else if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (!s.constants.count(name)) throw ConfigError("config '" + key + "': unknown model constant");
      s.constants[name] = parse_number(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (kv.count("tableau.stages")) s.tableau = tableau_from_config(kv, "tableau.");
  if (s.consistent_scaling && !tau_hf_given)
    for (int c = 0; c < nc; ++c) s.tau_hf[c] = 3.0 * s.tau_lf[c];
  s.validate();
  return s;
}

}  // namespace epibifi
