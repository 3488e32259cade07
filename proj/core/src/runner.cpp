#include "cdm/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace cdm {

namespace {

namespace fs = std::filesystem;

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_events(const fs::path& file, const std::vector<RefinementEvent>& events) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "index,step,control_value,critical,evicted,inserted,dof_before,dof_after,preserved,"
         "history_identical,hash_before_trial,hash_after_rollback,load_before,load_after,"
         "flux_before,flux_after\n";
  char buf[512];
  for (const RefinementEvent& e : events) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%zu,%zu,%zu,%zu,%zu,%zu,%d,%s,%s,%.17g,%.17g,%.17g,%.17g\n",
                  e.index, e.step, e.control, e.critical, e.evicted, e.inserted, e.dof_before,
                  e.dof_after, e.preserved, e.history_identical ? 1 : 0,
                  hex(e.hash_before_trial).c_str(), hex(e.hash_after_rollback).c_str(),
                  e.load_before, e.load_after, e.flux_before, e.flux_after);
    out << buf;
  }
}

void fill_peaks(RunResult& r) {
  for (const StepRecord& s : r.records) {
    if (std::abs(s.load) > std::abs(r.peak_load)) r.peak_load = s.load;
    if (std::abs(s.flux) > std::abs(r.peak_flux)) r.peak_flux = s.flux;
  }
}

RunConfig with_seed(RunConfig cfg, std::uint64_t seed) {
  cfg.disc.seed = seed;
  return cfg;
}

}  // namespace

RunResult run_simulation(const RunConfig& config, const std::optional<fs::path>& out_dir) {
  RunResult result;
  if (out_dir) fs::create_directories(*out_dir);

  std::optional<GeneratorSet> shared;
  if (config.shared_points) {
    shared = scenario_points(config.spec, config.disc.lmin_fine, config.disc.seed, true);
  }
  auto [setup, points] = make_simulation(config.spec, config.disc, shared ? &*shared : nullptr);
  Simulation sim(std::move(setup), std::move(points));
  const bool vtk = out_dir.has_value();
  if (vtk && config.output.mesh_vtk) {
    sim.on_refinement = [&](const RefinementEvent& ev, const DualMesh& mesh) {
      write_mesh_vtk(*out_dir / ("mesh_" + std::to_string(ev.index + 1) + ".vtk"), mesh);
    };
  }

  const auto cracks = [&] {
    const int k = config.output.crack_interval;
    if (vtk && k > 0 && sim.state().step % k == 0) {
      write_cracks_vtk(*out_dir / ("cracks_" + std::to_string(sim.state().step) + ".vtk"),
                       sim.model(), sim.state());
    }
  };

  try {
    sim.initialize();
    if (vtk && config.output.mesh_vtk) write_mesh_vtk(*out_dir / "mesh_0.vtk", sim.mesh());
    for (int s = 0; s < config.spec.controller.max_steps; ++s) {
      if (!sim.advance()) {
        result.ok = false;
        result.error = sim.error();
        break;
      }
      cracks();
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }

  result.records = sim.records();
  result.events = sim.events();
  fill_peaks(result);
  if (out_dir) {
    write_series(*out_dir / "series.csv", result.records, config.output.timing);
    write_events(*out_dir / "events.csv", result.events);
    write_summary(*out_dir / "summary.json", config, result);
  }
  return result;
}

void write_summary(const fs::path& file, const RunConfig& config, const RunResult& result) {
  nlohmann::ordered_json j;
  j["scenario"] = std::string(to_string(config.spec.kind));
  j["mode"] = std::string(to_string(config.disc.mode));
  j["seed"] = config.disc.seed;
  j["shared_points"] = config.shared_points;
  j["biot"] = config.spec.materials.biot;
  j["ok"] = result.ok;
  if (!result.ok) j["error"] = result.error;
  j["steps"] = result.records.empty() ? 0 : result.records.back().step;
  j["peak_load"] = result.peak_load;
  j["peak_flux"] = result.peak_flux;
  j["refinement_events"] = result.events.size();
  j["final_dof_count"] = result.records.empty() ? 0 : result.records.back().dof_count;
  if (config.output.timing && !result.records.empty()) {
    j["wall_time_s"] = result.records.back().wall_time_s;
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

int run_command(const fs::path& config, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  RunResult r;
  try {
    r = run_simulation(cfg, cfg.output.dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  const std::size_t steps = r.records.empty() ? 0 : static_cast<std::size_t>(r.records.back().step);
  if (!r.ok) {
    log << "solver failure: " << r.error << " (" << steps << " steps committed, output in "
        << cfg.output.dir.string() << ")\n";
    return kExitSolver;
  }
  log << "completed " << steps << " steps, " << r.events.size() << " refinement events, peak load "
      << r.peak_load << ", peak flux " << r.peak_flux << "; output in " << cfg.output.dir.string()
      << '\n';
  return kExitOk;
}

int compare_command(const fs::path& dir_a, const fs::path& dir_b, const CompareTolerances& tol,
                    std::ostream& log) {
  CompareReport rep;
  try {
    rep = compare_series(read_series(dir_a / "series.csv"), read_series(dir_b / "series.csv"), tol);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "points %zu%s\nload deviation %.6g (tol %.6g)\nflux deviation %.6g (tol %.6g)\n"
                "dof ratio %.6g\nwall ratio %.6g\n%s\n",
                rep.points, rep.resampled ? " (resampled)" : "", rep.load_deviation, tol.load,
                rep.flux_deviation, tol.flux, rep.dof_ratio, rep.wall_ratio,
                rep.pass ? "PASS" : "FAIL");
  log << buf;
  return rep.pass ? kExitOk : kExitSolver;
}

int batch_command(const fs::path& config, int n, std::uint64_t seed_base, int workers,
                  std::ostream& log) {
  if (n < 2) {
    log << "config error: batch needs --n >= 2\n";
    return kExitConfig;
  }
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (workers <= 0) workers = worker_count_from_env();
  workers = std::min(workers, n);

  std::vector<RunResult> results(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::mutex log_mutex;
  const auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
      const fs::path dir = cfg.output.dir / ("seed_" + std::to_string(seed));
      RunResult& r = results[static_cast<std::size_t>(i)];
      try {
        r = run_simulation(with_seed(cfg, seed), dir);
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      log << "seed " << seed << ": " << (r.ok ? "ok" : "failed: " + r.error) << '\n';
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  std::vector<std::vector<StepRecord>> runs;
  for (const RunResult& r : results) {
    if (r.ok && !r.records.empty()) runs.push_back(r.records);
  }
  const std::size_t failed = results.size() - runs.size();
  if (runs.empty()) {
    log << "all realizations failed\n";
    return kExitSolver;
  }
  // Direct and COD control share a step grid across seeds; resample onto the
  // shortest completed run.
  const auto shortest = std::min_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return a.back().control < b.back().control;
  });
  std::vector<double> grid;
  for (const StepRecord& s : *shortest) grid.push_back(s.control);
  const BatchAggregate agg = aggregate_runs(runs, grid, failed);
  fs::create_directories(cfg.output.dir);
  write_band(cfg.output.dir / "band.csv", agg);
  log << runs.size() << " realizations aggregated, " << failed << " failed; band in "
      << (cfg.output.dir / "band.csv").string() << '\n';
  return kExitOk;
}

int worker_count_from_env() {
  if (const char* v = std::getenv("CDM_WORKERS")) {
    char* end = nullptr;
    const long w = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && w >= 1) return static_cast<int>(w);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace cdm
