// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exits 0 once every criterion has been evaluated (a FAIL is a reported
// result, not a crash); exits 1 on an unexpected error in the harness itself.
//
//   epibifi_acceptance [--out DIR]

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "epibifi/epibifi.hpp"

using namespace epibifi;

namespace {

// Pinned tolerances.
constexpr std::size_t kSparseGridNodes = 29;
constexpr double kDt1a = 0.89e-2, kDt1b = 0.12, kDtRelTol = 0.01;
constexpr double kConservationTol = 1e-10;
constexpr double kDiffusionLimitTol = 1e-3;
constexpr double kBifiDiffusiveTol = 1e-5;
constexpr double kHyperbolicGain = 10.0;
constexpr double kR0Target = 3.0, kR0RelTol = 0.05;
constexpr double kInterpolationTol = 1e-10;
constexpr int kGreedySets = 50, kGreedyMaxSnapshots = 20, kGreedyMaxPicks = 8;
constexpr double kMinOrder = 1.8;
constexpr double kMinSpeedup = 2.0;

struct Line {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

void report(int id, bool pass, const std::string& detail) {
  lines.push_back({id, pass, detail});
  std::printf("criterion %2d  %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

bool non_increasing(const std::vector<double>& v, int* where = nullptr) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1]) {
      if (where) *where = static_cast<int>(k) + 1;
      return false;
    }
  return true;
}

std::vector<double> column(const PipelineReport& rep, bool mean) {
  std::vector<double> out;
  for (const auto& r : rep.decay) out.push_back(mean ? r.mean.concatenated : r.std.concatenated);
  return out;
}

std::string sequence(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt("%.2e", v[k]);
  return s;
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto rule = cc_sparse_grid(3, RandomDomain::box(2, -1.0, 1.0));
  report(1, rule.size() == kSparseGridNodes, fmt("CC level 3, d=2: %zu nodes (expected %zu)", rule.size(), kSparseGridNodes));
}

void criterion2() {
  const auto a = build_test1('a'), b = build_test1('b');
  const ScenarioModels ma(a), mb(b);
  const double dta = ma.lf_dt(a.baseline()), dtb = mb.lf_dt(b.baseline());
  const double ea = std::abs(dta - kDt1a) / kDt1a, eb = std::abs(dtb - kDt1b) / kDt1b;
  report(2, ea <= kDtRelTol && eb <= kDtRelTol,
         fmt("Test 1a dt = %.5e (rel. dev. %.2e), Test 1b dt = %.5f (rel. dev. %.2e), tol %.0e", dta, ea, dtb, eb,
             kDtRelTol));
}

void criterion3() {
  double worst = 0.0;
  std::string where;
  for (const char* name : {"test1a", "test1b", "test2a", "test2b"}) {
    const auto cfg = build_scenario(name);
    const ScenarioModels m(cfg);
    const RandomSample z = cfg.baseline();
    const Grid1D g = m.grid();
    const double m0 = cfg.initial_state(z).total_population(g);
    const std::pair<const char*, MacroState> runs[] = {
        {"LF", m.low_state(z)}, {"HF", m.high_state(z)}, {"diffusion", m.diffusion_state(z, m.lf_dt(z))}};
    for (const auto& [model, s] : runs) {
      const double err = std::abs(s.total_population(g) - m0) / m0;
      if (err >= worst) {
        worst = err;
        where = std::string(name) + " " + model;
      }
    }
  }
  report(3, worst <= kConservationTol,
         fmt("max relative population drift over 4 scenarios x {LF, HF, diffusion} = %.2e (%s), tol %.0e", worst,
             where.c_str(), kConservationTol));
}

void criterion4() {
  const auto cfg = build_test1('a');
  const ScenarioModels m(cfg);
  const RandomSample z = cfg.baseline();
  const double dx = m.grid().dx();
  const auto lf = m.low_state(z).density[sir::I];
  const auto hf = m.high_state(z).density[sir::I];
  const auto dl = m.diffusion_state(z, m.lf_dt(z)).density[sir::I];
  const double e_lh = relative_l2_error(lf, hf, dx), e_ld = relative_l2_error(lf, dl, dx),
               e_hd = relative_l2_error(hf, dl, dx);
  const bool pairwise = std::max({e_lh, e_ld, e_hd}) <= kDiffusionLimitTol;

  // τ → 0 with D = λ²τ = 1 fixed.
  std::vector<double> sweep;
  for (double tau : {1e-2, 1e-3, 1e-5}) {
    auto c = cfg;
    c.tau_lf.assign(3, tau);
    c.tau_hf.assign(3, 3.0 * tau);
    c.lambda.assign(3, std::sqrt(1.0 / tau));
    const ScenarioModels mt(c);
    const auto lft = mt.low_state(z).density[sir::I];
    const auto dlt = mt.diffusion_state(z, mt.lf_dt(z)).density[sir::I];
    sweep.push_back(relative_l2_error(lft, dlt, dx));
  }
  const bool monotone = sweep[1] < sweep[0] && sweep[2] < sweep[1];
  report(4, pairwise && monotone,
         fmt("I at t=5: LF-HF %.2e, LF-diff %.2e, HF-diff %.2e (tol %.0e); LF-diff for tau_LF 1e-2/1e-3/1e-5: %s%s",
             e_lh, e_ld, e_hd, kDiffusionLimitTol, sequence(sweep).c_str(), monotone ? "" : " (not decreasing)"));
}

void criterion5(const PipelineReport& rep) {
  const auto& last = rep.decay.back();
  const bool pass = last.mean.concatenated <= kBifiDiffusiveTol && last.std.concatenated <= kBifiDiffusiveTol;
  report(5, pass,
         fmt("Test 1a n=%d: BF mean err %.2e, std err %.2e (tol %.0e); LF mean err %.2e; mean by n: %s", last.n,
             last.mean.concatenated, last.std.concatenated, kBifiDiffusiveTol, rep.lf_errors.mean.concatenated,
             sequence(column(rep, true)).c_str()));
}

void criterion6(const PipelineReport& rep) {
  const double bf = rep.decay.back().mean.concatenated, lf = rep.lf_errors.mean.concatenated;
  const auto seq = column(rep, true);
  int at = 0;
  const bool mono = non_increasing(seq, &at);
  const bool gain = bf <= lf / kHyperbolicGain;
  report(6, gain && mono,
         fmt("Test 1b n=%d: BF mean err %.2e vs LF %.2e (need <= LF/%.0f: %s); mean by n: %s%s", rep.decay.back().n, bf,
             lf, kHyperbolicGain, gain ? "yes" : "no", sequence(seq).c_str(),
             mono ? "" : fmt(" (increases at n=%d)", at).c_str()));
}

// The literal initial state has I = A = 0, where the ratio is undefined. The
// diagnostic uses I and A shaped like E, which is the profile they take for
// small t (both are fed by E alone).
double seiar_r0(const ScenarioConfig& cfg, const RandomSample& z) {
  MacroState s = cfg.initial_state(z);
  s.density[seiar::I] = s.density[seiar::E];
  s.density[seiar::A] = s.density[seiar::E];
  return reproduction_number_seiar(s, cfg.parameters(z), cfg.grid());
}

void criterion7(const PipelineReport& ra, const PipelineReport& rb) {
  std::string detail;
  bool pass = true;
  for (const PipelineReport* rep : {&ra, &rb}) {
    const auto& last = rep->decay.back();
    const bool below = last.mean.concatenated <= rep->lf_errors.mean.concatenated &&
                       last.std.concatenated <= rep->lf_errors.std.concatenated;
    int am = 0, as = 0;
    const bool mono_mean = non_increasing(column(*rep, true), &am);
    const bool mono_std = non_increasing(column(*rep, false), &as);
    pass = pass && below && mono_mean && mono_std;
    detail += fmt("%s n=%d: BF mean/std %.2e/%.2e vs LF %.2e/%.2e%s%s%s; ", rep->config.name.c_str(), last.n,
                  last.mean.concatenated, last.std.concatenated, rep->lf_errors.mean.concatenated,
                  rep->lf_errors.std.concatenated, below ? "" : " (not below LF)",
                  mono_mean ? "" : fmt(" (mean increases at n=%d)", am).c_str(),
                  mono_std ? "" : fmt(" (std increases at n=%d)", as).c_str());
  }
  const auto cfg = build_test2('a');
  const double r0 = seiar_r0(cfg, {0.0, 0.0});
  // Spatially uniform reference: β_A = β_A^0 everywhere.
  const double beta_a = cfg.constant("beta_a0"), sigma = cfg.constant("sigma");
  const double r0_uniform = sigma * cfg.constant("beta_i_ratio") * beta_a / cfg.constant("gamma_i") +
                            (1.0 - sigma) * beta_a / cfg.constant("gamma_a");
  const bool r0_ok = std::abs(r0 - kR0Target) <= kR0RelTol * kR0Target;
  pass = pass && r0_ok;
  detail += fmt("R0 at z=0 with I,A shaped like E = %.3f, with uniform contact rate = %.3f (target %.1f +- %.0f%%)", r0,
                r0_uniform, kR0Target, 100 * kR0RelTol);
  report(7, pass, detail);
}

void criterion8(const std::vector<const PipelineReport*>& reps) {
  double worst = 0.0;
  int count = 0;
  for (const auto* rep : reps) {
    const ScenarioModels m(rep->config);
    const auto lf = [&](const RandomSample& z) { return m.low(z); };
    for (int k = 0; k < rep->basis.size(); ++k) {
      const auto u = bifi_eval(rep->basis.points[k], rep->basis, lf);
      const Eigen::VectorXd h = rep->basis.hf_snapshots.col(k);
      worst = std::max(worst, relative_l2_error(u, std::vector<double>(h.data(), h.data() + h.size()), m.grid().dx()));
      ++count;
    }
  }
  report(8, worst <= kInterpolationTol,
         fmt("max relative deviation of the surrogate from the stored HF snapshot over %d selected points = %.2e "
             "(tol %.0e)",
             count, worst, kInterpolationTol));
}

// Farthest-from-span selection by explicit Gram–Schmidt.
std::vector<int> brute_force_greedy(const Eigen::MatrixXd& u, int n) {
  std::vector<int> picked;
  Eigen::MatrixXd q(u.rows(), 0);
  for (int k = 0; k < n; ++k) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < u.cols(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      Eigen::VectorXd r = u.col(i);
      for (int j = 0; j < q.cols(); ++j) r -= q.col(j).dot(r) * q.col(j);
      if (r.norm() > best_d) {
        best_d = r.norm();
        best = i;
      }
    }
    picked.push_back(best);
    Eigen::VectorXd r = u.col(best);
    for (int j = 0; j < q.cols(); ++j) r -= q.col(j).dot(r) * q.col(j);
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = r.normalized();
  }
  return picked;
}

void criterion9() {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cols_dist(2, kGreedyMaxSnapshots), rows_dist(5, 40);
  int matches = 0;
  for (int t = 0; t < kGreedySets; ++t) {
    const int cols = cols_dist(gen), rows = rows_dist(gen);
    const int picks = std::min({kGreedyMaxPicks, cols, rows});
    Eigen::MatrixXd u(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) u(i, j) = normal(gen);
    std::vector<std::vector<double>> columns(cols);
    std::vector<RandomSample> zs(cols, RandomSample{0.0});
    for (int j = 0; j < cols; ++j) columns[j].assign(u.col(j).data(), u.col(j).data() + rows);
    const auto b = greedy_select(SnapshotSet::from_columns(zs, columns, 0.7), picks);
    if (b.selected_indices == brute_force_greedy(u, picks)) ++matches;
  }
  report(9, matches == kGreedySets, fmt("%d of %d random candidate sets select identically", matches, kGreedySets));
}

std::vector<double> restrict_pairs(const std::vector<double>& f) {
  std::vector<double> c(f.size() / 2);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (f[2 * i] + f[2 * i + 1]);
  return c;
}

// Test 1b transport and rates on smooth periodic data: homogeneous contact
// rate, I(x, 0) = 0.01 (1 + 0.5 sin(2πx/20)). dt shrinks with dx.
void criterion10() {
  const std::vector<int> sizes{75, 150, 300, 600};
  std::vector<std::vector<double>> lf, hf;
  std::vector<double> dxs;
  double dt0 = 0.0;
  for (int n : sizes) {
    auto cfg = build_test1('b');
    cfg.n_cells = n;
    cfg.constants["beta_modulation"] = 0.0;
    const ScenarioModels m(cfg);
    const RandomSample z = cfg.baseline();
    MacroState init = cfg.initial_state(z);
    for (int i = 0; i < n; ++i) {
      const double v = 0.01 * (1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * m.grid().center(i) / 20.0));
      init.density[sir::I][i] = v;
      init.density[sir::S][i] = 1.0 - v;
    }
    if (dt0 == 0.0) dt0 = std::min(m.lf_dt(z), m.hf_dt(z));
    const double dt = dt0 * sizes.front() / n;
    LowFidelitySolver ls(cfg.parameters(z), cfg.transport(Fidelity::Low), m.grid(), cfg.tableau);
    lf.push_back(ls.run(init, cfg.t_end, {}, dt).final_state.density[sir::I]);
    HighFidelitySolver hs(cfg.parameters(z), cfg.transport(Fidelity::High), m.grid(), m.quadrature(), cfg.tableau);
    hf.push_back(moments(hs.run(kinetic_init(init, m.quadrature()), cfg.t_end, {}, dt).final_state, m.quadrature())
                     .density[sir::I]);
    dxs.push_back(m.grid().dx());
  }
  auto orders = [&](const std::vector<std::vector<double>>& sol) {
    std::vector<double> e;
    for (std::size_t k = 0; k + 1 < sol.size(); ++k) e.push_back(relative_l2_error(sol[k], restrict_pairs(sol[k + 1]), dxs[k]));
    return std::pair{std::log2(e[0] / e[1]), std::log2(e[1] / e[2])};
  };
  const auto [lf1, lf2] = orders(lf);
  const auto [hf1, hf2] = orders(hf);
  report(10, lf1 >= kMinOrder && hf1 >= kMinOrder,
         fmt("observed order N_x 75/150/300: LF %.2f, HF %.2f (min %.1f); next pair 150/300/600: LF %.2f, HF %.2f", lf1,
             hf1, kMinOrder, lf2, hf2));
}

// y = (u, v): u' = v explicit, v' = -(v + u)/ε relaxing to v = -u.
double relaxation_error(const ImexTableau& tab, double eps, int steps) {
  const double t_end = 1.0;
  auto solve = [&](int n) {
    std::vector<double> y{1.0, 0.0};
    const Relaxation r{{std::numeric_limits<double>::infinity(), eps},
                       [](std::span<const double> x) { return std::vector<double>{x[0], -x[0]}; }};
    for (int k = 0; k < n; ++k)
      y = imex_advance(y, t_end / n, tab, [](std::span<const double> x) { return std::vector<double>{x[1], 0.0}; }, r);
    return y[0];
  };
  return std::abs(solve(steps) - solve(steps * 256));
}

void criterion11() {
  const ImexTableau tab = tableaux::gsa332();
  const bool gsa = gsa_check(tab);
  double worst = 1e9;
  std::string orders;
  for (double eps : {1.0, 1e-6}) {
    const double e1 = relaxation_error(tab, eps, 20), e2 = relaxation_error(tab, eps, 40);
    const double p = std::log2(e1 / e2);
    worst = std::min(worst, p);
    orders += fmt(" eps=%.0e: %.2f", eps, p);
  }
  // The criterion names BPR(4,4,2), whose coefficients are not available to
  // this implementation; the line reports the shipped GSA tableau instead.
  report(11, false,
         fmt("BPR(4,4,2) not transcribed; shipped substitute %s: gsa_check %s, scalar stiff relaxation order%s "
             "(min %.1f: %s)",
             tab.name.c_str(), gsa ? "true" : "false", orders.c_str(), kMinOrder,
             gsa && worst >= kMinOrder ? "met" : "not met"));
}

void criterion12(const PipelineReport& rep) {
  const double lf = rep.seconds_per_run("lf_candidates"), hf = rep.seconds_per_run("hf_reference");
  report(12, hf >= kMinSpeedup * lf,
         fmt("Test 1a serial wall clock per run: LF %.4f s, HF (N_v=%d) %.4f s, ratio %.2f (min %.1f)", lf,
             rep.config.n_velocity, hf, hf / lf, kMinSpeedup));
}

}  // namespace

int main(int argc, char** argv) {
  std::string out = "acceptance_out";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--out") out = argv[i + 1];
  const auto start = std::chrono::steady_clock::now();
  try {
    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);
    guarded(4, criterion4);

    std::map<std::string, PipelineReport> reps;
    PipelineOptions opt;
    opt.serial_timing = true;
    for (const char* name : {"test1a", "test1b", "test2a", "test2b"}) {
      auto cfg = build_scenario(name);
      cfg.output_dir = (std::filesystem::path(out) / name).string();
      try {
        reps[name] = run_pipeline(cfg, opt);
      } catch (const std::exception& e) {
        std::printf("pipeline %s failed: %s\n", name, e.what());
      }
    }
    auto need = [&](int id, std::initializer_list<const char*> names, auto&& body) {
      for (const char* n : names)
        if (!reps.count(n)) {
          report(id, false, std::string("pipeline ") + n + " did not complete");
          return;
        }
      guarded(id, body);
    };
    need(5, {"test1a"}, [&] { criterion5(reps["test1a"]); });
    need(6, {"test1b"}, [&] { criterion6(reps["test1b"]); });
    need(7, {"test2a", "test2b"}, [&] { criterion7(reps["test2a"], reps["test2b"]); });
    need(8, {"test1a", "test1b", "test2a", "test2b"},
         [&] { criterion8({&reps["test1a"], &reps["test1b"], &reps["test2a"], &reps["test2b"]}); });
    guarded(9, criterion9);
    guarded(10, criterion10);
    guarded(11, criterion11);
    need(12, {"test1a"}, [&] { criterion12(reps["test1a"]); });
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance harness error: %s\n", e.what());
    return 1;
  }

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int passed = 0;
  std::filesystem::create_directories(out);
  std::ofstream csv(std::filesystem::path(out) / "acceptance.csv");
  csv << "criterion,verdict,detail\n";
  for (const auto& l : lines) {
    passed += l.pass;
    std::string d = l.detail;
    std::replace(d.begin(), d.end(), '"', '\'');
    csv << l.id << "," << (l.pass ? "PASS" : "FAIL") << ",\"" << d << "\"\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("acceptance: %d of %zu criteria passed (%.0f s); details in %s/acceptance.csv\n", passed, lines.size(),
              secs, out.c_str());
  return 0;
}
