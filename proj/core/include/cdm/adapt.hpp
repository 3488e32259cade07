#pragma once

#include "cdm/solver.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>

namespace cdm {

class RefinementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RefinementConfig {
  /// Refinement threshold as a fraction of ft.
  double threshold_ratio = 0.7;
  double lmin_fine = 0.0;
  double lmin_coarse = 0.0;
  /// Fine and removal radii; zero selects 5 and 8 times lmin_fine.
  double r_fine = 0.0;
  double r_transition = 0.0;
  int max_events_per_step = 10;

  double fine_radius() const { return r_fine > 0.0 ? r_fine : 5.0 * lmin_fine; }
  double transition_radius() const { return r_transition > 0.0 ? r_transition : 8.0 * lmin_fine; }
  void validate() const;
};

/// Symmetric 2x2 tensor.
struct Tensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double max_eigenvalue() const;
};

/// Symmetrized (1/V) sum of arm (x) force over the contacts of a particle.
Tensor2 average_stress(Vec2 x, double volume, std::span<const std::pair<Vec2, Vec2>> arm_forces);

/// Averaged solid stress of one particle (tractions of the solid only).
Tensor2 particle_stress(const Model& model, const SystemState& state, int node);

/// Non-physical particles whose maximum principal solid stress exceeds
/// threshold_ratio * ft.
std::vector<int> find_critical(const Model& model, const SystemState& state,
                               const RefinementConfig& cfg);

/// Position-derived identity of a contact: its two generator points in
/// lexicographic order.
using ContactKey = std::array<double, 4>;
ContactKey contact_key(const DualMesh& mesh, int element);

using ContactHistory = std::map<ContactKey, ContactState>;

/// Histories of damaged physical contacts. Undamaged contacts carry no
/// history that affects the damage law.
ContactHistory save_history(const DualMesh& mesh, std::span<const ContactState> contacts);

/// Contact states for a rebuilt mesh: saved histories restored exactly,
/// everything else pristine. Throws RefinementError when a saved contact is
/// missing from the mesh.
std::vector<ContactState> transfer_history(const ContactHistory& saved, const DualMesh& mesh);

struct RefinementPlan {
  std::vector<int> critical;
  std::vector<Vec2> centers;
  std::vector<int> evicted;
  std::vector<Vec2> inserted;
  ContactHistory preserved;
};

struct Refinement {
  GeneratorSet points;
  std::shared_ptr<const DualMesh> mesh;
  DensityField density;
  /// Fine zones including the new ones.
  std::vector<SamplingRegion::Disk> zones;
  RefinementPlan plan;
};

/// Removes coarse points of `points` (the set `mesh` was sampled from)
/// around the critical particles and refills the cleared disks with graded
/// spacing. `zones` are the fine zones of earlier refinements; their points
/// are final. With `shared` given, the fine zone is filled with the points
/// of that set instead of random ones; the grading band stays random.
Refinement refine(const DualMesh& mesh, const GeneratorSet& points, std::span<const int> critical,
                  const DensityField& density, std::span<const SamplingRegion::Disk> zones,
                  const RefinementConfig& cfg, std::uint64_t seed,
                  const GeneratorSet* shared = nullptr);

/// One committed step of a simulation.
struct StepRecord {
  int step = 0;
  double control = 0.0;
  double load = 0.0;
  double flux = 0.0;
  std::size_t dof_count = 0;
  double wall_time_s = 0.0;
  int refinement_events = 0;
};

struct RefinementEvent {
  int index = 0;
  int step = 0;
  double control = 0.0;
  std::size_t critical = 0;
  std::size_t evicted = 0;
  std::size_t inserted = 0;
  std::size_t dof_before = 0;
  std::size_t dof_after = 0;
  std::size_t preserved = 0;
  /// Every preserved history reappeared with identical bits.
  bool history_identical = false;
  /// Committed-state hash before the rejected trial and after the rollback.
  std::uint64_t hash_before_trial = 0;
  std::uint64_t hash_after_rollback = 0;
  /// Load and flux at level t before the refinement and after
  /// re-equilibration on the new mesh.
  double load_before = 0.0;
  double load_after = 0.0;
  double flux_before = 0.0;
  double flux_after = 0.0;
};

using LoadCaseBuilder = std::function<LoadCase(const DualMesh&)>;

struct SimulationSetup {
  Domain domain;
  Materials materials;
  StepController controller;
  RefinementConfig refinement;
  bool adaptive = false;
  DensityField density;
  std::uint64_t seed = 0;
  /// Physical insertion set for deterministic adaptive runs.
  std::optional<GeneratorSet> shared_points;
  LoadCaseBuilder loads;
};

/// Incremental simulation with optional adaptive refinement: a trial step
/// that makes coarse particles critical is rejected, the mesh is refined,
/// histories are transferred, equilibrium at the old level is restored and
/// the step is retried.
class Simulation {
 public:
  Simulation(SimulationSetup setup, GeneratorSet initial_points);

  /// Equilibrium at control value zero; records step 0.
  void initialize();
  /// Next load step. Returns false (and fills `error()`) on solver failure.
  bool advance();

  const DualMesh& mesh() const { return solver_->model().mesh(); }
  const Model& model() const { return solver_->model(); }
  const SystemState& state() const { return state_; }
  const LoadCase& loads() const { return solver_->loads(); }
  const std::vector<StepRecord>& records() const { return records_; }
  const std::vector<RefinementEvent>& events() const { return events_; }
  const GeneratorSet& points() const { return points_; }
  const DensityField& density() const { return density_; }
  const std::vector<SamplingRegion::Disk>& fine_zones() const { return zones_; }
  const std::string& error() const { return error_; }
  double load() const { return solver_->load(state_); }
  double flux() const { return solver_->flux(state_); }

  std::function<void(const RefinementEvent&, const DualMesh&)> on_refinement;

 private:
  void rebuild(std::shared_ptr<const DualMesh> mesh);
  bool refine_and_reequilibrate(std::vector<int> critical);
  void record(int events_in_step);

  SimulationSetup setup_;
  std::unique_ptr<Model> model_;
  std::unique_ptr<CoupledSolver> solver_;
  SystemState state_;
  GeneratorSet points_;
  DensityField density_;
  std::vector<SamplingRegion::Disk> zones_;
  std::vector<StepRecord> records_;
  std::vector<RefinementEvent> events_;
  std::string error_;
  double elapsed_ = 0.0;
  std::uint64_t refine_counter_ = 0;
};

}  // namespace cdm
