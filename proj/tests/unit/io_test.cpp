#include "cdm/io.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cdm {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(CDM_TEST_TMPDIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kBlock = R"(
mode = "fine"
seed = 3

[scenario]
kind = "pressurized_block"
p_left = 2.0e5
p_right = 0.0

[refinement]
lmin_fine = 0.1

[controller]
max_steps = 1

[output]
dir = "out"
timing = false
)";

std::vector<StepRecord> ramp(double slope, int n) {
  std::vector<StepRecord> s;
  for (int k = 0; k <= n; ++k) {
    StepRecord r;
    r.step = k;
    r.control = 0.1 * k;
    r.load = slope * r.control;
    r.flux = 2 * slope * r.control;
    r.dof_count = 100 + static_cast<std::size_t>(k);
    r.wall_time_s = 0.01 * k;
    s.push_back(r);
  }
  return s;
}

TEST(Config, DefaultsFromKind) {
  const RunConfig c = parse_config("[scenario]\nkind = \"single_rebar\"\n");
  EXPECT_EQ(c.spec.kind, ScenarioKind::SingleRebar);
  EXPECT_EQ(c.disc.mode, ModelMode::Fine);
  EXPECT_EQ(c.spec.rebars.size(), 1u);
  EXPECT_EQ(c.disc.lmin_fine, Discretization::defaults(ScenarioKind::SingleRebar, ModelMode::Fine).lmin_fine);
  EXPECT_EQ(c.output.dir, fs::path("out"));
}

TEST(Config, OverridesAndRebars) {
  const RunConfig c = parse_config(R"(
mode = "adaptive"
seed = 12
shared_points = true
[scenario]
kind = "four_rebar"
rebars = [{x = 0.1, y = 0.05, radius = 0.01}]
[material]
biot = 0.5
E0 = 40e9
[controller]
max_steps = 7
i_cor = 50.0
[refinement]
threshold_ratio = 0.6
)");
  EXPECT_EQ(c.disc.mode, ModelMode::Adaptive);
  EXPECT_EQ(c.disc.seed, 12u);
  EXPECT_TRUE(c.shared_points);
  ASSERT_EQ(c.spec.rebars.size(), 1u);
  EXPECT_EQ(c.spec.rebars[0].radius, 0.01);
  EXPECT_EQ(c.spec.materials.biot, 0.5);
  EXPECT_EQ(c.spec.materials.mech.E0, 40e9);
  EXPECT_EQ(c.spec.controller.max_steps, 7);
  EXPECT_EQ(c.spec.controller.corrosion.i_cor, 50.0);
  EXPECT_EQ(c.disc.refinement.threshold_ratio, 0.6);
}

TEST(Config, ErrorsNameTheKey) {
  const auto path_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(path_of("[scenario]\nkind = \"bend2d_with_pressure\"\nwidht = 1.0\n"), "scenario.widht");
  EXPECT_EQ(path_of("[scenario]\nkind = \"bend2d_with_pressure\"\n[material]\nE0 = \"hard\"\n"),
            "material.E0");
  EXPECT_EQ(path_of("[scenario]\nkind = \"cube\"\n"), "scenario.kind");
  EXPECT_EQ(path_of("mode = \"fine\"\n"), "scenario");
  EXPECT_EQ(path_of("[scenario]\nkind = \"single_rebar\"\n[controller]\nmode = \"force\"\n"),
            "controller.mode");
  EXPECT_EQ(path_of("shared_points = true\n[scenario]\nkind = \"single_rebar\"\n"), "shared_points");
  EXPECT_EQ(path_of("[scenario]\nkind = \"single_rebar\"\nrebars = [{x = 0.01, y = 0.02}]\n"),
            "scenario.rebars[0].radius");
  EXPECT_EQ(path_of("[scenario]\nkind = \"single_rebar\"\n[material]\nbiot = 2.0\n"), "scenario");
  EXPECT_THROW(parse_config("[scenario\n"), ConfigError);
}

TEST(Config, OutputDirRelativeToConfigFile) {
  const fs::path dir = scratch("config_dir");
  const RunConfig c = load_config(write_file(dir / "c.toml", kBlock));
  EXPECT_EQ(c.output.dir, dir / "out");
  EXPECT_FALSE(c.output.timing);
}

TEST(Series, RoundTripIsExact) {
  std::vector<StepRecord> s = ramp(1.0 / 3.0, 4);
  s[2].refinement_events = 2;
  const fs::path dir = scratch("series");
  write_series(dir / "series.csv", s);
  const std::vector<StepRecord> back = read_series(dir / "series.csv");
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_EQ(back[k].control, s[k].control);
    EXPECT_EQ(back[k].load, s[k].load);
    EXPECT_EQ(back[k].flux, s[k].flux);
    EXPECT_EQ(back[k].dof_count, s[k].dof_count);
    EXPECT_EQ(back[k].refinement_events, s[k].refinement_events);
  }
  EXPECT_EQ(slurp(dir / "series.csv").substr(0, std::string(kSeriesHeader).size()), kSeriesHeader);
  write_file(dir / "bad.csv", "step,load\n1,2\n");
  EXPECT_THROW(read_series(dir / "bad.csv"), std::runtime_error);
}

TEST(Series, Interpolation) {
  const std::vector<StepRecord> s = ramp(2.0, 4);
  const StepRecord r = interpolate_series(s, 0.25);
  EXPECT_NEAR(r.load, 0.5, 1e-15);
  EXPECT_EQ(r.dof_count, 102u);
  EXPECT_EQ(interpolate_series(s, -1.0).load, 0.0);
  EXPECT_EQ(interpolate_series(s, 10.0).load, s.back().load);
}

TEST(Compare, SelfIsZero) {
  const std::vector<StepRecord> s = ramp(2.0, 5);
  const CompareReport r = compare_series(s, s, {});
  EXPECT_EQ(r.load_deviation, 0.0);
  EXPECT_EQ(r.flux_deviation, 0.0);
  EXPECT_EQ(r.dof_ratio, 1.0);
  EXPECT_EQ(r.points, s.size());
  EXPECT_FALSE(r.resampled);
  EXPECT_TRUE(r.pass);
}

TEST(Compare, DeviationRelativeToPeak) {
  const std::vector<StepRecord> a = ramp(2.0, 5);
  std::vector<StepRecord> b = a;
  b[3].load += 0.05;  // peak load of a is 1.0
  const CompareReport r = compare_series(a, b, {0.04, 0.04});
  EXPECT_NEAR(r.load_deviation, 0.05, 1e-12);
  EXPECT_FALSE(r.pass);
}

TEST(Compare, ResamplesDifferentGrids) {
  const std::vector<StepRecord> a = ramp(2.0, 4);
  std::vector<StepRecord> b = ramp(2.0, 8);
  for (StepRecord& r : b) r.control *= 0.5;
  for (StepRecord& r : b) r.load = 2.0 * r.control;
  const CompareReport r = compare_series(a, b, {});
  EXPECT_TRUE(r.resampled);
  EXPECT_LT(r.load_deviation, 1e-12);
  std::vector<StepRecord> c = ramp(1.0, 2);
  for (StepRecord& x : c) x.control += 10.0;
  EXPECT_THROW(compare_series(a, c, {}), std::runtime_error);
}

TEST(Batch, IdenticalRunsHaveZeroWidth) {
  const std::vector<StepRecord> s = ramp(3.0, 6);
  std::vector<double> grid;
  for (const StepRecord& r : s) grid.push_back(r.control);
  const BatchAggregate agg = aggregate_runs({s, s, s}, grid);
  ASSERT_EQ(agg.band.size(), grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_EQ(agg.band[k].load_std, 0.0);
    EXPECT_EQ(agg.band[k].flux_std, 0.0);
    EXPECT_NEAR(agg.band[k].load_mean, s[k].load, 1e-15);
  }
}

TEST(Batch, SampleStandardDeviation) {
  const std::vector<StepRecord> a = ramp(1.0, 2);
  const std::vector<StepRecord> b = ramp(3.0, 2);
  const BatchAggregate agg = aggregate_runs({a, b}, {0.2});
  EXPECT_NEAR(agg.band[0].load_mean, 0.4, 1e-15);
  // Two samples 0.2 and 0.6: sample std = 0.2 sqrt(2).
  EXPECT_NEAR(agg.band[0].load_std, 0.2 * std::sqrt(2.0), 1e-15);
}

TEST(Commands, InvalidKeyIsConfigError) {
  const fs::path dir = scratch("bad_key");
  std::ostringstream log;
  const fs::path cfg = write_file(dir / "c.toml", "[scenario]\nkind = \"pressurized_block\"\nsize = 2\n");
  EXPECT_EQ(run_command(cfg, log), kExitConfig);
  EXPECT_NE(log.str().find("scenario.size"), std::string::npos);
  EXPECT_EQ(run_command(dir / "missing.toml", log), kExitConfig);
}

TEST(Commands, PressurizedBlockRunGivesExactFlux) {
  const fs::path dir = scratch("block");
  std::ostringstream log;
  ASSERT_EQ(run_command(write_file(dir / "c.toml", kBlock), log), kExitOk) << log.str();
  const std::vector<StepRecord> s = read_series(dir / "out" / "series.csv");
  ASSERT_EQ(s.size(), 2u);
  const double expected = 1000.0 * 5e-18 / 8.9e-4 * 2.0e5;
  EXPECT_NEAR(s.back().flux, expected, 1e-8 * expected);
  EXPECT_EQ(s.back().wall_time_s, 0.0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["ok"], true);
  EXPECT_EQ(summary["scenario"], "pressurized_block");
  EXPECT_TRUE(fs::exists(dir / "out" / "events.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "mesh_0.vtk"));

  // Without timing the output is byte-reproducible.
  const std::string first = slurp(dir / "out" / "series.csv");
  ASSERT_EQ(run_command(dir / "c.toml", log), kExitOk);
  EXPECT_EQ(slurp(dir / "out" / "series.csv"), first);

  EXPECT_EQ(compare_command(dir / "out", dir / "out", {}, log), kExitOk);
  EXPECT_NE(log.str().find("load deviation 0 "), std::string::npos);
  EXPECT_EQ(compare_command(dir / "out", dir / "nowhere", {}, log), kExitConfig);
}

TEST(Commands, SolverFailureExitCode) {
  const fs::path dir = scratch("fail");
  std::ostringstream log;
  const fs::path cfg = write_file(dir / "c.toml", R"(
[scenario]
kind = "bend2d_with_pressure"
[refinement]
lmin_fine = 0.02
[controller]
increment = 1e-4
max_steps = 5
max_iterations = 1
max_stagger = 1
max_bisections = 0
tol_rel = 1e-14
)");
  EXPECT_EQ(run_command(cfg, log), kExitSolver);
  EXPECT_NE(log.str().find("step 1"), std::string::npos) << log.str();
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["ok"], false);
}

TEST(Commands, BatchNeedsTwoRealizations) {
  const fs::path dir = scratch("batch_small");
  std::ostringstream log;
  EXPECT_EQ(batch_command(write_file(dir / "c.toml", kBlock), 1, 0, 1, log), kExitConfig);
}

TEST(Commands, BatchWritesBandAndSeries) {
  const fs::path dir = scratch("batch");
  std::ostringstream log;
  ASSERT_EQ(batch_command(write_file(dir / "c.toml", kBlock), 3, 40, 2, log), kExitOk) << log.str();
  EXPECT_TRUE(fs::exists(dir / "out" / "band.csv"));
  for (int s = 40; s < 43; ++s) {
    EXPECT_TRUE(fs::exists(dir / "out" / ("seed_" + std::to_string(s)) / "series.csv"));
  }
  // The patch flux is exact for every mesh, so the band has zero width.
  std::ifstream band(dir / "out" / "band.csv");
  std::string line;
  std::getline(band, line);
  while (std::getline(band, line)) {
    std::vector<double> v;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 7u);
    EXPECT_LT(v[4], 1e-8 * v[3]);
  }
}

TEST(Workers, FromEnvironment) {
  setenv("CDM_WORKERS", "3", 1);
  EXPECT_EQ(worker_count_from_env(), 3);
  setenv("CDM_WORKERS", "zero", 1);
  EXPECT_GE(worker_count_from_env(), 1);
  unsetenv("CDM_WORKERS");
  EXPECT_GE(worker_count_from_env(), 1);
}

}  // namespace
}  // namespace cdm
