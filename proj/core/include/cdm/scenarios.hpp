#pragma once

#include "cdm/adapt.hpp"

#include <string>
#include <string_view>

namespace cdm {

enum class ScenarioKind { PressurizedBlock, FreeExpansion, Bend2d, SingleRebar, FourRebar };

std::string_view to_string(ScenarioKind kind);
/// Throws std::invalid_argument for unknown names.
ScenarioKind scenario_kind_from_string(std::string_view name);

enum class ModelMode { Fine, Coarse, Adaptive };

std::string_view to_string(ModelMode mode);
ModelMode model_mode_from_string(std::string_view name);

/// Material tables of the bending and corrosion examples.
Materials bending_materials(double biot);
Materials corrosion_materials(double biot);

/// Specimen geometry, loading and materials. Lengths in m, pressures in Pa.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::PressurizedBlock;
  double width = 1.0;
  double height = 1.0;
  double thickness = 1.0;
  /// Rebar cross-sections (rebar kinds only).
  std::vector<CircularHole> rebars;

  /// Pressurized block: left and right face pressures.
  double p_left = 1.0;
  double p_right = 0.0;
  /// Free expansion: pressure on the whole boundary.
  double p_uniform = 0.3e6;
  /// Bending: bottom and top face pressures.
  double p_bottom = 0.3e6;
  double p_top = 0.0;
  /// Bending: distance between the two bottom probes of the COD gauge.
  double cod_gauge_length = 0.12;
  /// Bending: distance of the point supports from the beam ends.
  double overhang = 0.02;

  Materials materials;
  StepController controller;

  void validate() const;
  /// Desk-scale defaults for a kind.
  static ScenarioSpec defaults(ScenarioKind kind);
};

/// Point density and refinement settings of one model variant.
struct Discretization {
  ModelMode mode = ModelMode::Fine;
  double lmin_fine = 0.0;
  double lmin_coarse = 0.0;
  RefinementConfig refinement;
  std::uint64_t seed = 0;
  /// Adaptive models only: spacing of the initial points in a layer of
  /// thickness interface_band around each rebar, graded to lmin_coarse over
  /// one coarse spacing; zero disables.
  double interface_lmin = 0.0;
  double interface_band = 0.0;

  double base_lmin() const { return mode == ModelMode::Fine ? lmin_fine : lmin_coarse; }
  void validate() const;
  /// Desk-scale spacings for a kind.
  static Discretization defaults(ScenarioKind kind, ModelMode mode);
};

Domain scenario_domain(const ScenarioSpec& spec);

/// Fixed generator points carrying supports, load points and gauges; they
/// are never evicted, so the boundary conditions keep their location across
/// refinements.
GeneratorSet anchor_points(const ScenarioSpec& spec);

/// Corners, anchors, the preset points, then random boundary and interior
/// points.
GeneratorSet scenario_points(const ScenarioSpec& spec, const DensityField& density,
                             std::uint64_t seed, bool physical,
                             std::span<const Generator> preset = {});
GeneratorSet scenario_points(const ScenarioSpec& spec, double lmin, std::uint64_t seed,
                             bool physical);

/// Initial point density of a model variant.
DensityField initial_density(const ScenarioSpec& spec, const Discretization& disc);

/// Boundary conditions, gauges and flux nodes located geometrically on a
/// mesh of the specimen.
LoadCase make_loadcase(const ScenarioSpec& spec, const DualMesh& mesh);

/// Simulation setup and initial points for a model variant. For adaptive
/// models, `shared` supplies the fine model's points for the refined zones.
std::pair<SimulationSetup, GeneratorSet> make_simulation(const ScenarioSpec& spec,
                                                        const Discretization& disc,
                                                        const GeneratorSet* shared = nullptr);

struct CrackEntry {
  int element = -1;
  double w_N = 0.0;
};

/// Damaged contacts with positive normal opening.
std::vector<CrackEntry> crack_list(const Model& model, const SystemState& state);

/// Mean prescribed pressure over the interface transport nodes, Pa.
double mean_interface_pressure(const DualMesh& mesh, const SystemState& state);

}  // namespace cdm
