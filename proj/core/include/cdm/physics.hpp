#pragma once

#include "cdm/materials.hpp"
#include "cdm/mesh.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace cdm {

struct Materials {
  MechMaterial mech;
  TransportMaterial transport;
  double biot = 0.0;
};

/// A dual mesh together with its materials and per-contact softening
/// parameters. Immutable.
class Model {
 public:
  Model(std::shared_ptr<const DualMesh> mesh, Materials materials);

  const DualMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const DualMesh>& mesh_ptr() const { return mesh_; }
  const Materials& materials() const { return materials_; }
  const ContactParams& params(int element) const { return params_[element]; }
  std::size_t mech_dofs() const { return 3 * mesh_->mech_nodes.size(); }
  std::size_t transport_dofs() const { return mesh_->transport_nodes.size(); }
  /// Mean element length, used to weigh rotations against translations.
  double length_scale() const { return length_scale_; }

 private:
  std::shared_ptr<const DualMesh> mesh_;
  Materials materials_;
  std::vector<ContactParams> params_;
  double length_scale_ = 1.0;
};

/// Unknowns and history of a coupled state. Mechanical DoFs are ordered
/// (u_x, u_y, theta) per node.
struct SystemState {
  std::vector<double> u;
  std::vector<double> p;
  std::vector<ContactState> contacts;
  /// Load factor multiplying the variable part of the load case.
  double mu = 0.0;
  /// Value of the controlled quantity (load factor, gauge, or x_cor).
  double control = 0.0;
  /// Cumulative transported volume per unit interface area, m.
  double transported = 0.0;
  double time = 0.0;
  int step = 0;

  static SystemState zero(const Model& model);
  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// FNV-1a hash over the bit patterns of every field.
std::uint64_t state_hash(const SystemState& state);

/// Prescribed mechanical DoF: value0 + mu * value1.
struct MechConstraint {
  int node = -1;
  int dof = 0;
  double value0 = 0.0;
  double value1 = 0.0;
};

/// Nodal force or moment: f0 + mu * f1.
struct NodalForce {
  int node = -1;
  int dof = 0;
  double f0 = 0.0;
  double f1 = 0.0;
};

/// Prescribed transport-node pressure: value0 + mu * value1.
struct PressureConstraint {
  int node = -1;
  double value0 = 0.0;
  double value1 = 0.0;
};

/// Linear functional sum(coef * u[dof]) over mechanical DoFs.
struct LinearGauge {
  std::vector<std::pair<int, double>> terms;

  bool empty() const { return terms.empty(); }
  double evaluate(std::span<const double> u) const;
};

struct LoadCase {
  std::vector<MechConstraint> supports;
  std::vector<NodalForce> forces;
  std::vector<PressureConstraint> pressures;
  /// Controlled displacement measure (COD or interface radial displacement).
  LinearGauge control_gauge;
  /// Reaction measure reported as the load, sum(coef * reaction[dof]).
  LinearGauge reaction_gauge;
  /// Transport nodes whose combined outflow is the reported flux.
  std::vector<int> flux_nodes;
  /// Area the interface flux is spread over for the corrosion balance, m^2.
  double interface_area = 0.0;
};

Vec2 displacement_jump(Vec2 uI, double thetaI, Vec2 xI, Vec2 uJ, double thetaJ, Vec2 xJ, Vec2 c);
/// Strain (eN, eM) returned in a Vec2.
Vec2 facet_strain(Vec2 jump, double length, Vec2 n, Vec2 m);
double pressure_gradient(double pP, double pQ, double h);
double facet_pressure(const DualMesh& mesh, int element, std::span<const double> p);
/// Total traction (tN, tM) in local components.
Vec2 total_traction(Vec2 solid, double p_facet, double biot);

/// Rows of the jump operator: jump . n = gN . q_local and jump . m = gM . q_local
/// with q_local = (u_I, theta_I, u_J, theta_J).
struct ElementOperator {
  std::array<double, 6> gN{};
  std::array<double, 6> gM{};
  std::array<int, 6> dofs{};
};
ElementOperator element_operator(const DualMesh& mesh, int element);

/// Strain of one element from the global displacement vector.
Vec2 element_strain(const DualMesh& mesh, const ElementOperator& op, int element,
                    std::span<const double> u);

/// Trial contact states for displacement u starting from committed history.
/// Elastic contacts keep a pristine state.
std::vector<ContactState> trial_contacts(const Model& model, std::span<const double> u,
                                         std::span<const ContactState> committed);

/// Solid tractions (sN, sM) of every element at the given trial states.
std::vector<Vec2> solid_tractions(const Model& model, std::span<const double> u,
                                  std::span<const ContactState> trial);

/// Nodal forces of the solid tractions, A G^T s (no Biot part).
std::vector<double> solid_forces(const Model& model, std::span<const double> u,
                                 std::span<const ContactState> trial);
/// Nodal forces of the Biot part of the total traction, -b A G^T (p_f, 0).
std::vector<double> biot_forces(const Model& model, std::span<const double> p);

/// Crack-dependent conductance lambda S / h of every conduit.
std::vector<double> conduit_conductances(const Model& model, std::span<const double> u,
                                         std::span<const ContactState> trial);

struct Residuals {
  std::vector<double> mech;
  std::vector<double> mass;
};

/// Balance residuals at load factor mu: mechanical rows are internal minus
/// external forces, mass rows the net outflow. Constrained rows hold the
/// constraint violation instead.
Residuals assemble_residuals(const Model& model, const SystemState& state, const LoadCase& loads);

/// Unconstrained residual rows, i.e. the reactions at constrained DoFs.
std::vector<double> mech_reactions(const Model& model, const SystemState& state,
                                   const LoadCase& loads);

/// Net mass outflow (kg/s) from a set of transport nodes.
double net_outflow(const Model& model, std::span<const double> conductance,
                   std::span<const double> p, std::span<const int> nodes);

}  // namespace cdm
