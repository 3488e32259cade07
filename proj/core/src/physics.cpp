#include "cdm/physics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cdm {

Model::Model(std::shared_ptr<const DualMesh> mesh, Materials materials)
    : mesh_(std::move(mesh)), materials_(materials) {
  materials_.transport.validate();
  if (!(materials_.biot >= 0.0 && materials_.biot <= 1.0)) {
    throw MaterialError("biot must lie in [0, 1]");
  }
  params_.resize(mesh_->elements.size());
  double total = 0.0;
  for (std::size_t e = 0; e < mesh_->elements.size(); ++e) {
    const MechElement& el = mesh_->elements[e];
    total += el.length;
    if (el.inelastic) params_[e] = derive_contact_params(materials_.mech, el.length);
  }
  if (!mesh_->elements.empty()) length_scale_ = total / static_cast<double>(mesh_->elements.size());
}

SystemState SystemState::zero(const Model& model) {
  SystemState s;
  s.u.assign(model.mech_dofs(), 0.0);
  s.p.assign(model.transport_dofs(), 0.0);
  s.contacts.assign(model.mesh().elements.size(), ContactState{});
  return s;
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

std::uint64_t state_hash(const SystemState& s) {
  Fnv f;
  for (double v : s.u) f.add(v);
  for (double v : s.p) f.add(v);
  for (const ContactState& c : s.contacts) {
    f.add(c.d);
    f.add(c.max_eN);
    f.add(c.max_eT);
  }
  f.add(s.mu);
  f.add(s.control);
  f.add(s.transported);
  f.add(s.time);
  f.add(static_cast<std::uint64_t>(s.step));
  return f.h;
}

double LinearGauge::evaluate(std::span<const double> u) const {
  double v = 0.0;
  for (const auto& [dof, coef] : terms) v += coef * u[dof];
  return v;
}

Vec2 displacement_jump(Vec2 uI, double thetaI, Vec2 xI, Vec2 uJ, double thetaJ, Vec2 xJ, Vec2 c) {
  return (uJ + thetaJ * perp(c - xJ)) - (uI + thetaI * perp(c - xI));
}

Vec2 facet_strain(Vec2 jump, double length, Vec2 n, Vec2 m) {
  return {dot(jump, n) / length, dot(jump, m) / length};
}

double pressure_gradient(double pP, double pQ, double h) { return (pQ - pP) / h; }

double facet_pressure(const DualMesh& mesh, int element, std::span<const double> p) {
  const Conduit& c = mesh.conduits[mesh.elements[element].conduit];
  return 0.5 * (p[c.p] + p[c.q]);
}

Vec2 total_traction(Vec2 solid, double p_facet, double biot) {
  return {solid.x - biot * p_facet, solid.y};
}

ElementOperator element_operator(const DualMesh& mesh, int element) {
  const MechElement& e = mesh.elements[element];
  const Vec2 xi = mesh.mech_nodes[e.i].pos;
  const Vec2 xj = mesh.mech_nodes[e.j].pos;
  const Vec2 ri = e.centroid - xi;
  const Vec2 rj = e.centroid - xj;
  ElementOperator op;
  op.gN = {-e.n.x, -e.n.y, -cross(ri, e.n), e.n.x, e.n.y, cross(rj, e.n)};
  op.gM = {-e.m.x, -e.m.y, -cross(ri, e.m), e.m.x, e.m.y, cross(rj, e.m)};
  op.dofs = {3 * e.i, 3 * e.i + 1, 3 * e.i + 2, 3 * e.j, 3 * e.j + 1, 3 * e.j + 2};
  return op;
}

Vec2 element_strain(const DualMesh& mesh, const ElementOperator& op, int element,
                    std::span<const double> u) {
  double jn = 0.0;
  double jm = 0.0;
  for (int k = 0; k < 6; ++k) {
    jn += op.gN[k] * u[op.dofs[k]];
    jm += op.gM[k] * u[op.dofs[k]];
  }
  const double l = mesh.elements[element].length;
  return {jn / l, jm / l};
}

std::vector<ContactState> trial_contacts(const Model& model, std::span<const double> u,
                                         std::span<const ContactState> committed) {
  const DualMesh& mesh = model.mesh();
  std::vector<ContactState> out(committed.begin(), committed.end());
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    if (!mesh.elements[e].inelastic) continue;
    const Vec2 s = element_strain(mesh, element_operator(mesh, e), e, u);
    out[e] = update_contact(model.materials().mech, model.params(e), committed[e], s.x, s.y).state;
  }
  return out;
}

std::vector<Vec2> solid_tractions(const Model& model, std::span<const double> u,
                                  std::span<const ContactState> trial) {
  const DualMesh& mesh = model.mesh();
  const MechMaterial& mat = model.materials().mech;
  std::vector<Vec2> out(mesh.elements.size());
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const Vec2 s = element_strain(mesh, element_operator(mesh, e), e, u);
    const double keep = 1.0 - trial[e].d;
    out[e] = {keep * mat.E0 * s.x, keep * mat.E0 * mat.alpha * s.y};
  }
  return out;
}

std::vector<double> solid_forces(const Model& model, std::span<const double> u,
                                 std::span<const ContactState> trial) {
  const DualMesh& mesh = model.mesh();
  const MechMaterial& mat = model.materials().mech;
  std::vector<double> f(model.mech_dofs(), 0.0);
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const ElementOperator op = element_operator(mesh, e);
    const Vec2 s = element_strain(mesh, op, e, u);
    const double keep = 1.0 - trial[e].d;
    const double A = mesh.elements[e].area;
    const double tN = A * keep * mat.E0 * s.x;
    const double tM = A * keep * mat.E0 * mat.alpha * s.y;
    for (int k = 0; k < 6; ++k) f[op.dofs[k]] += op.gN[k] * tN + op.gM[k] * tM;
  }
  return f;
}

std::vector<double> biot_forces(const Model& model, std::span<const double> p) {
  const DualMesh& mesh = model.mesh();
  const double b = model.materials().biot;
  std::vector<double> f(model.mech_dofs(), 0.0);
  if (b == 0.0) return f;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const ElementOperator op = element_operator(mesh, e);
    const double tN = -b * mesh.elements[e].area * facet_pressure(mesh, e, p);
    for (int k = 0; k < 6; ++k) f[op.dofs[k]] += op.gN[k] * tN;
  }
  return f;
}

std::vector<double> conduit_conductances(const Model& model, std::span<const double> u,
                                         std::span<const ContactState> trial) {
  const DualMesh& mesh = model.mesh();
  const TransportMaterial& tm = model.materials().transport;
  std::vector<double> g(mesh.conduits.size());
  for (int k = 0; k < static_cast<int>(mesh.conduits.size()); ++k) {
    const Conduit& c = mesh.conduits[k];
    double w = 0.0;
    if (trial[c.element].d > 0.0) {
      const Vec2 s = element_strain(mesh, element_operator(mesh, c.element), c.element, u);
      w = crack_opening(trial[c.element], s.x, mesh.elements[c.element].length);
    }
    g[k] = conduit_permeability(tm, w, c.area) * c.area / c.length;
  }
  return g;
}

namespace {

void check_finite(const SystemState& s) {
  auto bad = [](double v) { return !std::isfinite(v); };
  if (std::any_of(s.u.begin(), s.u.end(), bad) || std::any_of(s.p.begin(), s.p.end(), bad) ||
      !std::isfinite(s.mu)) {
    throw std::invalid_argument("state contains non-finite values");
  }
}

std::vector<double> unconstrained_mech(const Model& model, const SystemState& state,
                                       const LoadCase& loads) {
  std::vector<double> r = solid_forces(model, state.u, state.contacts);
  const std::vector<double> fb = biot_forces(model, state.p);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += fb[i];
  for (const NodalForce& f : loads.forces) r[3 * f.node + f.dof] -= f.f0 + state.mu * f.f1;
  return r;
}

}  // namespace

Residuals assemble_residuals(const Model& model, const SystemState& state, const LoadCase& loads) {
  check_finite(state);
  Residuals r;
  r.mech = unconstrained_mech(model, state, loads);
  for (const MechConstraint& c : loads.supports) {
    const int dof = 3 * c.node + c.dof;
    r.mech[dof] = state.u[dof] - (c.value0 + state.mu * c.value1);
  }
  const DualMesh& mesh = model.mesh();
  const std::vector<double> g = conduit_conductances(model, state.u, state.contacts);
  r.mass.assign(mesh.transport_nodes.size(), 0.0);
  for (int k = 0; k < static_cast<int>(mesh.conduits.size()); ++k) {
    const Conduit& c = mesh.conduits[k];
    const double q = g[k] * (state.p[c.p] - state.p[c.q]);
    r.mass[c.p] += q;
    r.mass[c.q] -= q;
  }
  for (const PressureConstraint& c : loads.pressures) {
    r.mass[c.node] = state.p[c.node] - (c.value0 + state.mu * c.value1);
  }
  return r;
}

std::vector<double> mech_reactions(const Model& model, const SystemState& state,
                                   const LoadCase& loads) {
  check_finite(state);
  return unconstrained_mech(model, state, loads);
}

double net_outflow(const Model& model, std::span<const double> conductance,
                   std::span<const double> p, std::span<const int> nodes) {
  const DualMesh& mesh = model.mesh();
  std::vector<char> in(mesh.transport_nodes.size(), 0);
  for (int n : nodes) in[n] = 1;
  double q = 0.0;
  for (int k = 0; k < static_cast<int>(mesh.conduits.size()); ++k) {
    const Conduit& c = mesh.conduits[k];
    if (in[c.p] == in[c.q]) continue;
    const double flow = conductance[k] * (p[c.p] - p[c.q]);
    q += in[c.p] ? flow : -flow;
  }
  return q;
}

}  // namespace cdm
