#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "epibifi/parallel.hpp"
#include "epibifi/pipeline.hpp"

using namespace epibifi;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small(const std::string& scenario, const std::string& out) {
  return apply_overrides(build_scenario(scenario), {{"nx", "30"},
                                                    {"nv", "4"},
                                                    {"t_end", "1"},
                                                    {"candidates", "24"},
                                                    {"n", "3"},
                                                    {"level", "1"},
                                                    {"out", out}});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("epibifi_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Parallel, MapKeepsOrderAndPropagatesErrors) {
  const auto v = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_TRUE(parallel_map(0, [](std::size_t) { return 1; }).empty());
  try {
    parallel_map(
        10,
        [](std::size_t i) -> int {
          if (i == 3 || i == 7) throw std::runtime_error("bad " + std::to_string(i));
          return 0;
        },
        3);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "bad 3");
  }
}

TEST(FieldErrorsTest, PerCompartment) {
  const auto e = field_errors({1.0, 1.0, 2.0, 2.0}, {1.0, 1.0, 1.0, 1.0}, 2, 0.5);
  ASSERT_EQ(e.per_compartment.size(), 2u);
  EXPECT_EQ(e.per_compartment[0], 0.0);
  EXPECT_NEAR(e.per_compartment[1], 1.0, 1e-15);
  EXPECT_NEAR(e.concatenated, std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_THROW(field_errors({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 2, 1.0), ConfigError);
}

TEST(Pipeline, SmallRunWritesOutputs) {
  const fs::path dir = scratch("small");
  const auto rep = run_pipeline(small("test1b", dir.string()));
  EXPECT_EQ(rep.basis.size(), 3);
  EXPECT_EQ(rep.rule.size(), 5u);
  ASSERT_EQ(rep.decay.size(), 3u);
  EXPECT_EQ(rep.candidates.size(), 24u);
  for (const char* f : {"candidates.csv", "selected_points.csv", "basis_lf.csv", "basis_hf.csv", "reference_rule.csv",
                        "fields_hf.csv", "fields_lf.csv", "fields_bf.csv", "error_decay.csv", "lf_errors.csv",
                        "timing.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "FAILED"));
  // Header plus one row per cell.
  std::ifstream in(dir / "fields_bf.csv");
  std::string line;
  int lines = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "x,mean_S,std_S,mean_I,std_I,mean_R,std_R");
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 30);
  for (const auto& row : rep.decay) {
    EXPECT_TRUE(std::isfinite(row.mean.concatenated));
    EXPECT_TRUE(std::isfinite(row.std.concatenated));
  }
  fs::remove_all(dir);
}

TEST(Pipeline, DeterministicAcrossThreadCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  PipelineOptions one;
  one.threads = 1;
  PipelineOptions many;
  many.threads = 3;
  run_pipeline(small("test2b", a.string()), one);
  run_pipeline(small("test2b", b.string()), many);
  for (const char* f : {"candidates.csv", "selected_points.csv", "basis_lf.csv", "basis_hf.csv", "fields_bf.csv",
                        "error_decay.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, ZeroBasisSize) {
  auto cfg = small("test1a", "unused");
  cfg.n_select = 0;
  PipelineOptions opt;
  opt.write_outputs = false;
  const auto rep = run_pipeline(cfg, opt);
  EXPECT_EQ(rep.basis.size(), 0);
  EXPECT_TRUE(rep.decay.empty());
  EXPECT_TRUE(rep.bifi.mean.empty());
  EXPECT_FALSE(rep.hf_reference.mean.empty());
}

TEST(Pipeline, BasisRoundTrip) {
  const fs::path dir = scratch("roundtrip");
  const auto rep = run_pipeline(small("test1b", dir.string()));
  const auto loaded = read_basis(dir.string(), rep.basis.weight);
  EXPECT_EQ(loaded.selected_indices, rep.basis.selected_indices);
  EXPECT_EQ(loaded.points, rep.basis.points);
  EXPECT_EQ((loaded.lf_basis - rep.basis.lf_basis).norm(), 0.0);
  EXPECT_EQ((loaded.hf_snapshots - rep.basis.hf_snapshots).norm(), 0.0);
  EXPECT_LT((loaded.gramian_chol - rep.basis.gramian_chol).norm(), 1e-10 * rep.basis.gramian_chol.norm());
  fs::remove_all(dir);
}

TEST(Pipeline, RankDeficiencyLeavesPartialOutput) {
  const fs::path dir = scratch("fail");
  auto cfg = small("test1b", dir.string());
  cfg.n_candidates = 3;
  cfg.n_select = 3;
  // Identical candidates: only one direction is available.
  cfg.domain = RandomDomain{{0.0, 0.0}, {1e-300, 1e-300}};
  EXPECT_THROW(run_pipeline(cfg), RankDeficiencyError);
  EXPECT_TRUE(fs::exists(dir / "FAILED"));
  fs::remove_all(dir);
}
