// Command-line driver for the bi-fidelity experiments.
//
//   epibifi run test1a --out out/test1a
//   epibifi select test2b --n 7 --candidates 500
//   epibifi stats test2b --out out/test2b      (reuses the stored basis)
//   epibifi errors test2b --out out/test2b
//   epibifi run custom --config my.conf

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "epibifi/epibifi.hpp"

namespace {

using namespace epibifi;

struct CommonArgs {
  std::string scenario;
  std::string config;
  std::optional<int> n, candidates, nx, nv, level;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("scenario", a.scenario, "test1a | test1b | test2a | test2b | custom")
      ->required()
      ->check(CLI::IsMember({"test1a", "test1b", "test2a", "test2b", "custom"}));
  cmd->add_option("--config", a.config, "key = value file applied on top of the scenario")->check(CLI::ExistingFile);
  cmd->add_option("--n", a.n, "number of selected points");
  cmd->add_option("--candidates", a.candidates, "size of the candidate set");
  cmd->add_option("--seed", a.seed, "candidate sampling seed");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--nx", a.nx, "number of cells");
  cmd->add_option("--nv", a.nv, "number of velocities of the kinetic model");
  cmd->add_option("--level", a.level, "sparse-grid level of the reference rule");
  cmd->add_option("--threads", a.threads, "worker threads (0 = all cores)");
}

ScenarioConfig resolve(const CommonArgs& a) {
  KeyValues kv;
  if (!a.config.empty()) kv = read_key_values(a.config);
  ScenarioConfig base;
  if (a.scenario == "custom") {
    if (!kv.count("scenario")) throw ConfigError("custom scenario: the config file must set 'scenario'");
    base = build_scenario(kv.at("scenario"));
    base.name = "custom";
  } else {
    base = build_scenario(a.scenario);
  }
  kv.erase("scenario");
  base.output_dir = "out/" + base.name;
  if (a.n) kv["n"] = std::to_string(*a.n);
  if (a.candidates) kv["candidates"] = std::to_string(*a.candidates);
  if (a.seed) kv["seed"] = std::to_string(*a.seed);
  if (a.out) kv["out"] = *a.out;
  if (a.nx) kv["nx"] = std::to_string(*a.nx);
  if (a.nv) kv["nv"] = std::to_string(*a.nv);
  if (a.level) kv["level"] = std::to_string(*a.level);
  return apply_overrides(base, kv);
}

void print_decay(const PipelineReport& rep) {
  std::printf("%4s %14s %14s\n", "n", "mean_err", "std_err");
  std::printf("%4s %14.6e %14.6e\n", "LF", rep.lf_errors.mean.concatenated, rep.lf_errors.std.concatenated);
  for (const auto& row : rep.decay) std::printf("%4d %14.6e %14.6e\n", row.n, row.mean.concatenated, row.std.concatenated);
}

void print_timing(const std::vector<StageTime>& timing) {
  for (const auto& t : timing)
    std::printf("  %-14s %10.3f s  (%d runs)\n", t.stage.c_str(), t.seconds, t.runs);
}

int cmd_run(const CommonArgs& a) {
  const auto cfg = resolve(a);
  PipelineOptions opt;
  opt.threads = a.threads;
  std::printf("%s: N_x=%d N_v=%d candidates=%d n=%d level=%d seed=%llu -> %s\n", cfg.name.c_str(), cfg.n_cells,
              cfg.n_velocity, cfg.n_candidates, cfg.n_select, cfg.reference_level,
              static_cast<unsigned long long>(cfg.seed), cfg.output_dir.c_str());
  const auto rep = run_pipeline(cfg, opt);
  print_decay(rep);
  print_timing(rep.timing);
  return 0;
}

int cmd_select(const CommonArgs& a) {
  const auto cfg = resolve(a);
  PipelineOptions opt;
  opt.threads = a.threads;
  PipelineReport rep;
  rep.config = cfg;
  const ScenarioModels models(cfg);
  rep.basis = build_basis(models, &rep.candidates, &rep.timing, opt);
  write_report(rep, cfg.output_dir);
  for (int k = 0; k < rep.basis.size(); ++k) {
    std::printf("%3d  candidate %5d  z = (", k + 1, rep.basis.selected_indices[k]);
    for (std::size_t d = 0; d < rep.basis.points[k].size(); ++d)
      std::printf("%s%.6f", d ? ", " : "", rep.basis.points[k][d]);
    std::printf(")  distance %.6e\n", rep.basis.selection_distances[k]);
  }
  print_timing(rep.timing);
  return 0;
}

BiFiBasis load_basis(const ScenarioConfig& cfg, const ScenarioModels& models) {
  auto b = read_basis(cfg.output_dir, models.grid().dx());
  if (!b.has_hf()) throw ConfigError("'" + cfg.output_dir + "' holds no high-fidelity snapshots; run 'select' first");
  if (cfg.n_select < b.size()) b = b.truncated(cfg.n_select);
  return b;
}

int cmd_stats(const CommonArgs& a) {
  const auto cfg = resolve(a);
  const ScenarioModels models(cfg);
  const auto basis = load_basis(cfg, models);
  Stopwatch clock;
  const auto rule = cc_sparse_grid(cfg.reference_level, cfg.domain);
  const auto lf = parallel_map(rule.size(), [&](std::size_t i) { return models.low(rule.nodes[i]); }, a.threads);
  const double t_lf = clock.lap();
  csv::write_fields(cfg.output_dir, "lf", estimate_stats(lf, rule), cfg);
  csv::write_fields(cfg.output_dir, "bf", bifi_stats(basis, rule, lf, cfg.std_method), cfg);
  csv::write_timing(cfg.output_dir, {{"lf_reference", t_lf, static_cast<int>(rule.size())}, {"stats", clock.lap(), 0}});
  std::printf("bi-fidelity statistics from %d points on %zu nodes -> %s\n", basis.size(), rule.size(),
              cfg.output_dir.c_str());
  return 0;
}

int cmd_errors(const CommonArgs& a) {
  const auto cfg = resolve(a);
  PipelineOptions opt;
  opt.threads = a.threads;
  const ScenarioModels models(cfg);
  PipelineReport rep;
  rep.config = cfg;
  rep.basis = load_basis(cfg, models);
  assess(models, rep, opt);
  csv::write_fields(cfg.output_dir, "hf", rep.hf_reference, cfg);
  csv::write_fields(cfg.output_dir, "lf", rep.lf_reference, cfg);
  if (!rep.bifi.mean.empty()) csv::write_fields(cfg.output_dir, "bf", rep.bifi, cfg);
  csv::write_error_decay(cfg.output_dir, rep);
  csv::write_lf_errors(cfg.output_dir, rep);
  csv::write_timing(cfg.output_dir, rep.timing);
  print_decay(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-fidelity stochastic collocation for epidemic transport models"};
  app.require_subcommand(1);
  CommonArgs run_args, select_args, stats_args, errors_args;
  auto* run = app.add_subcommand("run", "select points, run both models and write statistics and error tables");
  auto* select = app.add_subcommand("select", "low-fidelity candidate runs, greedy selection, high-fidelity runs");
  auto* stats = app.add_subcommand("stats", "bi-fidelity mean and std from a stored basis");
  auto* errors = app.add_subcommand("errors", "high-fidelity reference and error decay for a stored basis");
  add_common(run, run_args);
  add_common(select, select_args);
  add_common(stats, stats_args);
  add_common(errors, errors_args);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*select) return cmd_select(select_args);
    if (*stats) return cmd_stats(stats_args);
    if (*errors) return cmd_errors(errors_args);
  } catch (const epibifi::RankDeficiencyError& e) {
    std::cerr << "error: " << e.what() << " (achievable: " << e.achievable() << ")\n";
    return 3;
  } catch (const epibifi::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
