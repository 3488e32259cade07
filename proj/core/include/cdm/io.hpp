#pragma once

#include "cdm/scenarios.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdm {

/// Schema violation; `path()` names the offending key, e.g. "material.E0".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct OutputOptions {
  std::filesystem::path dir = "out";
  /// Write cracks_<step>.vtk every this many steps; zero disables.
  int crack_interval = 0;
  bool mesh_vtk = true;
  /// Record wall time in series.csv; off gives byte-reproducible output.
  bool timing = true;
};

struct RunConfig {
  ScenarioSpec spec;
  Discretization disc;
  /// Adaptive runs refine into the fine model's points of the same seed.
  bool shared_points = false;
  OutputOptions output;

  void validate() const;
};

/// Parses TOML text. Relative output directories are resolved against
/// `base_dir`. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

/// series.csv

inline constexpr const char* kSeriesHeader =
    "step,control_value,load_or_pressure,flux,dof_count,wall_time_s,refinement_events";

void write_series(std::ostream& out, const std::vector<StepRecord>& records, bool timing = true);
void write_series(const std::filesystem::path& file, const std::vector<StepRecord>& records,
                  bool timing = true);
/// Throws std::runtime_error on malformed input.
std::vector<StepRecord> read_series(const std::filesystem::path& file);

/// Legacy VTK

/// Damaged contacts with positive opening as line cells between the facet
/// end points, with cell scalar w_N.
void write_cracks_vtk(const std::filesystem::path& file, const Model& model,
                      const SystemState& state);
/// Clipped Voronoi cells as polygons with cell scalar "phase" (1 physical,
/// 0 coarse).
void write_mesh_vtk(const std::filesystem::path& file, const DualMesh& mesh);

/// Comparison of two runs

struct CompareTolerances {
  /// Max pointwise deviation relative to the peak of run A.
  double load = 0.05;
  double flux = 0.05;
};

struct CompareReport {
  std::size_t points = 0;
  double load_deviation = 0.0;
  double flux_deviation = 0.0;
  /// Max over the grid of dof_count(B) / dof_count(A).
  double dof_ratio = 0.0;
  /// Final wall time of B over that of A; zero if A has no timing.
  double wall_ratio = 0.0;
  bool resampled = false;
  bool pass = false;
};

/// B is resampled onto A's control grid by linear interpolation where the
/// grids differ. Throws std::runtime_error if the control ranges are
/// disjoint.
CompareReport compare_series(const std::vector<StepRecord>& a, const std::vector<StepRecord>& b,
                             const CompareTolerances& tol);

/// Linear interpolation of a series at control value x (clamped to its
/// range). Steps must be ordered by control value.
StepRecord interpolate_series(const std::vector<StepRecord>& s, double x);

/// Statistical batch

struct BandPoint {
  double control = 0.0;
  double load_mean = 0.0;
  double load_std = 0.0;
  double flux_mean = 0.0;
  double flux_std = 0.0;
  double dof_mean = 0.0;
  double wall_mean = 0.0;
};

struct BatchAggregate {
  std::size_t realizations = 0;
  std::size_t failed = 0;
  std::vector<BandPoint> band;
};

/// Mean and sample standard deviation per observable on `grid`. Runs that
/// do not cover a grid point are resampled at their last value.
BatchAggregate aggregate_runs(const std::vector<std::vector<StepRecord>>& runs,
                              const std::vector<double>& grid, std::size_t failed = 0);
void write_band(const std::filesystem::path& file, const BatchAggregate& agg);

/// Run outcome

struct RunResult {
  std::vector<StepRecord> records;
  std::vector<RefinementEvent> events;
  bool ok = true;
  std::string error;
  double peak_load = 0.0;
  double peak_flux = 0.0;
};

/// Runs one configured simulation. With `out_dir` set, writes series.csv,
/// events.csv, summary.json and the VTK files there.
RunResult run_simulation(const RunConfig& config,
                         const std::optional<std::filesystem::path>& out_dir);

void write_summary(const std::filesystem::path& file, const RunConfig& config,
                   const RunResult& result);

/// Command entry points; return the process exit code.
enum ExitCode : int { kExitOk = 0, kExitSolver = 1, kExitConfig = 2 };

int run_command(const std::filesystem::path& config, std::ostream& log);
int compare_command(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                    const CompareTolerances& tol, std::ostream& log);
/// `workers` <= 0 reads CDM_WORKERS, falling back to the hardware
/// concurrency.
int batch_command(const std::filesystem::path& config, int n, std::uint64_t seed_base,
                  int workers, std::ostream& log);

/// Worker count from CDM_WORKERS (>= 1), else the hardware concurrency.
int worker_count_from_env();

}  // namespace cdm
