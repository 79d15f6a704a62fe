#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bifi.hpp"
#include "collocation.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "scenarios.hpp"

namespace epibifi {

/// Relative L2 errors of one statistic, per compartment and over the
/// concatenated snapshot.
struct FieldErrors {
  std::vector<double> per_compartment;
  double concatenated = 0.0;
};

inline FieldErrors field_errors(const std::vector<double>& approx, const std::vector<double>& reference,
                                int n_compartments, double dx) {
  if (n_compartments < 1 || approx.size() % n_compartments != 0)
    throw ConfigError("field_errors: snapshot length is not a multiple of the compartment count");
  const std::size_t nx = approx.size() / n_compartments;
  FieldErrors e;
  for (int c = 0; c < n_compartments; ++c) {
    const std::vector<double> a(approx.begin() + c * nx, approx.begin() + (c + 1) * nx);
    const std::vector<double> r(reference.begin() + c * nx, reference.begin() + (c + 1) * nx);
    e.per_compartment.push_back(relative_l2_error(a, r, dx));
  }
  e.concatenated = relative_l2_error(approx, reference, dx);
  return e;
}

struct ErrorRow {
  int n = 0;
  FieldErrors mean;
  FieldErrors std;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
  int runs = 0;
};

/// Everything the pipeline computes. Statistics fields are snapshot-shaped.
struct PipelineReport {
  ScenarioConfig config;
  std::vector<RandomSample> candidates;
  BiFiBasis basis;
  QuadratureRule rule;
  StatField lf_reference;
  StatField hf_reference;
  StatField bifi;
  /// LF statistics against the HF reference.
  ErrorRow lf_errors;
  /// Bi-fidelity errors for n' = 1..n.
  std::vector<ErrorRow> decay;
  std::vector<StageTime> timing;

  double seconds_per_run(const std::string& stage) const {
    for (const auto& t : timing)
      if (t.stage == stage && t.runs > 0) return t.seconds / t.runs;
    return 0.0;
  }
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct PipelineOptions {
  unsigned threads = 0;
  /// Solver runs are timed one at a time, so the per-run times are not
  /// distorted by sharing cores.
  bool serial_timing = false;
  bool write_outputs = true;
};

namespace detail {

inline std::vector<std::vector<double>> evaluate(const std::vector<RandomSample>& zs,
                                                 const std::function<std::vector<double>(const RandomSample&)>& f,
                                                 unsigned threads) {
  return parallel_map(zs.size(), [&](std::size_t i) { return f(zs[i]); }, threads);
}

inline ErrorRow error_row(int n, const StatField& approx, const StatField& ref, int nc, double dx) {
  ErrorRow row;
  row.n = n;
  row.mean = field_errors(approx.mean, ref.mean, nc, dx);
  row.std = field_errors(approx.std, ref.std, nc, dx);
  return row;
}

}  // namespace detail

/// Stages (1)-(3): LF runs on the candidate set, greedy selection, HF runs at
/// the selected points.
inline BiFiBasis build_basis(const ScenarioModels& models, std::vector<RandomSample>* candidates_out = nullptr,
                             std::vector<StageTime>* timing = nullptr, const PipelineOptions& opt = {}) {
  const ScenarioConfig& cfg = models.config();
  const auto candidates = uniform_candidates(cfg.n_candidates, cfg.domain, cfg.seed);
  Stopwatch clock;
  const auto lf = detail::evaluate(candidates, [&](const RandomSample& z) { return models.low(z); },
                                   opt.serial_timing ? 1 : opt.threads);
  if (timing) timing->push_back({"lf_candidates", clock.lap(), cfg.n_candidates});
  const auto set = SnapshotSet::from_columns(candidates, lf, models.grid().dx());
  BiFiBasis basis = greedy_select(set, cfg.n_select);
  if (timing) timing->push_back({"select", clock.lap(), 0});
  const auto hf = detail::evaluate(basis.points, [&](const RandomSample& z) { return models.high(z); },
                                   opt.serial_timing ? 1 : opt.threads);
  basis.hf_snapshots.resize(basis.lf_basis.rows(), basis.size());
  for (int k = 0; k < basis.size(); ++k)
    basis.hf_snapshots.col(k) = Eigen::Map<const Eigen::VectorXd>(hf[k].data(), static_cast<Eigen::Index>(hf[k].size()));
  if (timing) timing->push_back({"hf_selected", clock.lap(), basis.size()});
  if (candidates_out) *candidates_out = candidates;
  return basis;
}

// ---------------------------------------------------------------------------
// CSV output

namespace csv {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open(const std::string& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / file);
  if (!out) throw ConfigError("cannot write '" + file + "' in '" + dir + "'");
  return out;
}

/// x, then mean and std per compartment.
inline void write_fields(const std::string& dir, const std::string& model, const StatField& s,
                         const ScenarioConfig& cfg) {
  const Grid1D grid = cfg.grid();
  const auto set = cfg.compartments();
  const int nx = grid.n_cells();
  auto out = open(dir, "fields_" + model + ".csv");
  out << "x";
  for (int c = 0; c < set.size(); ++c) out << ",mean_" << set.label(c) << ",std_" << set.label(c);
  out << "\n";
  for (int i = 0; i < nx; ++i) {
    out << num(grid.center(i));
    for (int c = 0; c < set.size(); ++c) out << "," << num(s.mean[c * nx + i]) << "," << num(s.std[c * nx + i]);
    out << "\n";
  }
}

inline void write_samples(const std::string& dir, const std::string& file, const std::vector<RandomSample>& zs,
                          const std::vector<double>* weights = nullptr) {
  auto out = open(dir, file);
  const std::size_t d = zs.empty() ? 0 : zs.front().size();
  out << "index";
  for (std::size_t k = 0; k < d; ++k) out << ",z" << k + 1;
  if (weights) out << ",weight";
  out << "\n";
  for (std::size_t i = 0; i < zs.size(); ++i) {
    out << i;
    for (double v : zs[i]) out << "," << num(v);
    if (weights) out << "," << num((*weights)[i]);
    out << "\n";
  }
}

inline void write_selected(const std::string& dir, const BiFiBasis& b) {
  auto out = open(dir, "selected_points.csv");
  const std::size_t d = b.points.empty() ? 0 : b.points.front().size();
  out << "rank,candidate";
  for (std::size_t k = 0; k < d; ++k) out << ",z" << k + 1;
  out << ",distance\n";
  for (int k = 0; k < b.size(); ++k) {
    out << k + 1 << "," << b.selected_indices[k];
    for (double v : b.points[k]) out << "," << num(v);
    out << "," << num(b.selection_distances[k]) << "\n";
  }
}

inline void write_matrix(const std::string& dir, const std::string& file, const Eigen::MatrixXd& m) {
  auto out = open(dir, file);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << num(m(r, c));
    out << "\n";
  }
}

inline Eigen::MatrixXd read_matrix(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  if (skip_header) std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_rational(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("'" + path + "': ragged rows");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline void write_error_decay(const std::string& dir, const PipelineReport& rep) {
  const auto set = rep.config.compartments();
  auto out = open(dir, "error_decay.csv");
  out << "n";
  for (const char* stat : {"mean", "std"}) {
    for (int c = 0; c < set.size(); ++c) out << "," << stat << "_" << set.label(c);
    out << "," << stat << "_all";
  }
  out << ",lf_mean_all,lf_std_all\n";
  for (const auto& row : rep.decay) {
    out << row.n;
    for (const auto* e : {&row.mean, &row.std}) {
      for (double v : e->per_compartment) out << "," << num(v);
      out << "," << num(e->concatenated);
    }
    out << "," << num(rep.lf_errors.mean.concatenated) << "," << num(rep.lf_errors.std.concatenated) << "\n";
  }
}

inline void write_lf_errors(const std::string& dir, const PipelineReport& rep) {
  const auto set = rep.config.compartments();
  auto out = open(dir, "lf_errors.csv");
  out << "statistic";
  for (int c = 0; c < set.size(); ++c) out << "," << set.label(c);
  out << ",all\n";
  for (const auto& [name, e] : {std::pair{"mean", &rep.lf_errors.mean}, std::pair{"std", &rep.lf_errors.std}}) {
    out << name;
    for (double v : e->per_compartment) out << "," << num(v);
    out << "," << num(e->concatenated) << "\n";
  }
}

inline void write_timing(const std::string& dir, const std::vector<StageTime>& timing) {
  auto out = open(dir, "timing.csv");
  out << "stage,seconds,runs,seconds_per_run\n";
  for (const auto& t : timing)
    out << t.stage << "," << num(t.seconds) << "," << t.runs << "," << num(t.runs ? t.seconds / t.runs : 0.0) << "\n";
}

/// Selected points, distances and both snapshot matrices; enough to rebuild
/// the surrogate without re-simulation.
inline void write_basis(const std::string& dir, const BiFiBasis& b) {
  write_selected(dir, b);
  write_matrix(dir, "basis_lf.csv", b.lf_basis);
  if (b.has_hf()) write_matrix(dir, "basis_hf.csv", b.hf_snapshots);
}

}  // namespace csv

/// Loads what write_basis stored.
inline BiFiBasis read_basis(const std::string& dir, double weight) {
  namespace fs = std::filesystem;
  BiFiBasis b;
  b.weight = weight;
  b.lf_basis = csv::read_matrix((fs::path(dir) / "basis_lf.csv").string());
  if (fs::exists(fs::path(dir) / "basis_hf.csv")) b.hf_snapshots = csv::read_matrix((fs::path(dir) / "basis_hf.csv").string());
  const Eigen::MatrixXd sel = csv::read_matrix((fs::path(dir) / "selected_points.csv").string(), true);
  if (sel.rows() != b.lf_basis.cols()) throw ConfigError("read_basis: selected_points.csv does not match basis_lf.csv");
  for (Eigen::Index k = 0; k < sel.rows(); ++k) {
    b.selected_indices.push_back(static_cast<int>(sel(k, 1)));
    RandomSample z(static_cast<std::size_t>(sel.cols() - 3));
    for (Eigen::Index d = 0; d + 3 < sel.cols(); ++d) z[static_cast<std::size_t>(d)] = sel(k, 2 + d);
    b.points.push_back(std::move(z));
    b.selection_distances.push_back(sel(k, sel.cols() - 1));
  }
  b.gramian_chol = gramian_factor(b.lf_basis, weight);
  return b;
}

inline void write_report(const PipelineReport& rep, const std::string& dir) {
  if (!rep.candidates.empty()) csv::write_samples(dir, "candidates.csv", rep.candidates);
  if (rep.basis.size() > 0) csv::write_basis(dir, rep.basis);
  if (rep.rule.size() > 0) csv::write_samples(dir, "reference_rule.csv", rep.rule.nodes, &rep.rule.weights);
  if (!rep.hf_reference.mean.empty()) {
    csv::write_fields(dir, "hf", rep.hf_reference, rep.config);
    csv::write_fields(dir, "lf", rep.lf_reference, rep.config);
    csv::write_lf_errors(dir, rep);
    csv::write_error_decay(dir, rep);
  }
  if (!rep.bifi.mean.empty()) csv::write_fields(dir, "bf", rep.bifi, rep.config);
  csv::write_timing(dir, rep.timing);
}

inline void write_failure(const std::string& dir, const std::string& what) {
  auto out = csv::open(dir, "FAILED");
  out << what << "\n";
}

/// Reference statistics on the sparse grid and the error tables of the
/// surrogates built from the first n' picks of rep.basis, n' = 1..n.
inline void assess(const ScenarioModels& models, PipelineReport& rep, const PipelineOptions& opt = {}) {
  const ScenarioConfig& config = models.config();
  const int nc = config.compartments().size();
  const double dx = models.grid().dx();
  const unsigned threads = opt.serial_timing ? 1 : opt.threads;
  Stopwatch clock;
  rep.rule = cc_sparse_grid(config.reference_level, config.domain);
  const auto lf_nodes = detail::evaluate(rep.rule.nodes, [&](const RandomSample& z) { return models.low(z); }, threads);
  rep.timing.push_back({"lf_reference", clock.lap(), static_cast<int>(rep.rule.size())});
  const auto hf_nodes = detail::evaluate(rep.rule.nodes, [&](const RandomSample& z) { return models.high(z); }, threads);
  rep.timing.push_back({"hf_reference", clock.lap(), static_cast<int>(rep.rule.size())});

  rep.lf_reference = estimate_stats(lf_nodes, rep.rule);
  rep.hf_reference = estimate_stats(hf_nodes, rep.rule);
  rep.lf_errors = detail::error_row(0, rep.lf_reference, rep.hf_reference, nc, dx);
  rep.decay.clear();
  for (int n = 1; n <= rep.basis.size(); ++n) {
    const StatField s = bifi_stats(rep.basis.truncated(n), rep.rule, lf_nodes, config.std_method);
    rep.decay.push_back(detail::error_row(n, s, rep.hf_reference, nc, dx));
    if (n == rep.basis.size()) rep.bifi = s;
  }
  rep.timing.push_back({"stats", clock.lap(), 0});
}

/// The full bi-fidelity experiment of one scenario.
inline PipelineReport run_pipeline(const ScenarioConfig& config, const PipelineOptions& opt = {}) {
  PipelineReport rep;
  rep.config = config;
  try {
    const ScenarioModels models(config);
    rep.basis = build_basis(models, &rep.candidates, &rep.timing, opt);
    assess(models, rep, opt);
    if (opt.write_outputs) write_report(rep, config.output_dir);
  } catch (const std::exception& e) {
    if (opt.write_outputs) {
      write_report(rep, config.output_dir);
      write_failure(config.output_dir, e.what());
    }
    throw;
  }
  return rep;
}

}  // namespace epibifi
