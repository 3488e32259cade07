#pragma once

#include "cdm/physics.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace cdm {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ControlMode { Direct, Cod, Corrosion };

struct CorrosionControl {
  /// Corrosion current density, uA/cm^2.
  double i_cor = 100.0;
  double alpha_e = 2.0;
  /// Time increment per step, days.
  double dt_days = 0.01;
};

/// Steel loss in micrometers for current density i_cor (uA/cm^2) over dt days.
double steel_loss_um(double i_cor, double dt_days);

struct StepController {
  ControlMode mode = ControlMode::Direct;
  /// Control increment per step (load factor or gauge units); corrosion
  /// steps derive theirs from CorrosionControl.
  double increment = 0.0;
  int max_steps = 1;
  double tol_rel = 1e-6;
  int max_stagger = 50;
  int max_iterations = 400;
  int max_bisections = 5;
  CorrosionControl corrosion;

  void validate() const;
};

struct StepReport {
  bool converged = false;
  int staggers = 0;
  int iterations = 0;
  int bisections = 0;
  double mech_residual = 0.0;
  double mass_residual = 0.0;
  double wall_time_s = 0.0;
  std::string message;
};

/// Staggered coupled solver for one model and load case. Holds factorization
/// workspace, so one instance must not be shared between threads.
class CoupledSolver {
 public:
  CoupledSolver(const Model& model, const LoadCase& loads, const StepController& controller);
  ~CoupledSolver();
  CoupledSolver(CoupledSolver&&) noexcept;
  CoupledSolver& operator=(CoupledSolver&&) noexcept;

  const Model& model() const;
  const LoadCase& loads() const;
  const StepController& controller() const;

  /// Equilibrium at control value `target` starting from the committed
  /// state. For corrosion control, the interface outflow accumulates over
  /// dt_days. On success `out` holds the converged, not yet committed state.
  StepReport solve(const SystemState& committed, double target, double dt_days, SystemState& out);

  /// One control increment with up to max_bisections halvings.
  StepReport step(const SystemState& committed, SystemState& out);

  /// Reported load: reaction measure, or the interface pressure under
  /// corrosion control.
  double load(const SystemState& state) const;
  /// Net mass outflow from the load case's flux nodes, kg/s.
  double flux(const SystemState& state) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cdm
