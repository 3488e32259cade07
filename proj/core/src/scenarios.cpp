#include "cdm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cdm {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::pair<ScenarioKind, std::string_view> kKindNames[] = {
    {ScenarioKind::PressurizedBlock, "pressurized_block"},
    {ScenarioKind::FreeExpansion, "free_expansion"},
    {ScenarioKind::Bend2d, "bend2d_with_pressure"},
    {ScenarioKind::SingleRebar, "single_rebar"},
    {ScenarioKind::FourRebar, "four_rebar"},
};

constexpr std::pair<ModelMode, std::string_view> kModeNames[] = {
    {ModelMode::Fine, "fine"},
    {ModelMode::Coarse, "coarse"},
    {ModelMode::Adaptive, "adaptive"},
};

bool has_rebars(ScenarioKind k) {
  return k == ScenarioKind::SingleRebar || k == ScenarioKind::FourRebar;
}

// Rectangle edges in arclength order.
enum Edge { kBottom = 0, kRight = 1, kTop = 2, kLeft = 3 };

Generator outer_anchor(const ScenarioSpec& s, Vec2 p) {
  Generator g;
  g.pos = p;
  g.kind = PointKind::Outer;
  g.fixed = true;
  if (p.y == 0.0) {
    g.param = p.x;
  } else if (p.x == s.width) {
    g.param = s.width + p.y;
  } else if (p.y == s.height) {
    g.param = s.width + s.height + (s.width - p.x);
  } else {
    g.param = 2.0 * s.width + s.height + (s.height - p.y);
  }
  return g;
}

Generator hole_anchor(const CircularHole& c, int curve, int quarter) {
  Generator g;
  g.kind = PointKind::Hole;
  g.curve = curve;
  g.fixed = true;
  g.param = 0.5 * kPi * quarter;
  const Vec2 dirs[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  g.pos = c.center + c.radius * dirs[quarter];
  return g;
}

int node_at(const DualMesh& mesh, Vec2 p) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(mesh.mech_nodes.size()); ++i) {
    const double d = distance2(p, mesh.mech_nodes[i].pos);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> edge_transport_nodes(const DualMesh& mesh, int edge) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(mesh.transport_nodes.size()); ++k) {
    const TransportNode& t = mesh.transport_nodes[k];
    if (t.boundary == PointKind::Outer && (edge < 0 || t.curve == edge)) out.push_back(k);
  }
  return out;
}

std::vector<int> hole_transport_nodes(const DualMesh& mesh) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(mesh.transport_nodes.size()); ++k) {
    if (mesh.transport_nodes[k].boundary == PointKind::Hole) out.push_back(k);
  }
  return out;
}

void fix_all(LoadCase& lc, int node) {
  for (int d = 0; d < 3; ++d) lc.supports.push_back({node, d, 0.0, 0.0});
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

std::string_view to_string(ModelMode mode) {
  for (const auto& [k, n] : kModeNames) {
    if (k == mode) return n;
  }
  return "unknown";
}

ModelMode model_mode_from_string(std::string_view name) {
  for (const auto& [k, n] : kModeNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

Materials bending_materials(double biot) {
  Materials m;
  m.mech = MechMaterial::create(60e9, 0.29, 2.2e6, 35.0);
  m.transport = {5e-18, 1.0, 8.9e-4, 1000.0};
  m.biot = biot;
  return m;
}

Materials corrosion_materials(double biot) {
  Materials m;
  m.mech = MechMaterial::create(37e9, 1.0, 3.2e6, 143.0);
  m.transport = {1e-16, 0.001, 1.9e4, 3925.0};
  m.biot = biot;
  return m;
}

void ScenarioSpec::validate() const {
  if (!(width > 0.0) || !(height > 0.0) || !(thickness > 0.0)) {
    throw GeometryError("width, height and thickness must be positive");
  }
  if (has_rebars(kind) && rebars.empty()) throw GeometryError("rebar scenario without rebars");
  if (!has_rebars(kind) && !rebars.empty()) {
    throw GeometryError("rebars are only allowed in rebar scenarios");
  }
  scenario_domain(*this).validate();
  if (kind == ScenarioKind::Bend2d && !(cod_gauge_length > 0.0 && cod_gauge_length < width)) {
    throw GeometryError("cod_gauge_length must lie in (0, width)");
  }
  if (kind == ScenarioKind::Bend2d &&
      !(overhang > 0.0 && overhang < 0.5 * (width - cod_gauge_length))) {
    throw GeometryError("overhang must be positive and leave room for the COD gauge");
  }
  if (!(materials.biot >= 0.0 && materials.biot <= 1.0)) {
    throw MaterialError("biot must lie in [0, 1]");
  }
  materials.transport.validate();
  controller.validate();
  if (kind == ScenarioKind::Bend2d && controller.mode == ControlMode::Corrosion) {
    throw SolverError("bending is driven by direct or COD control");
  }
  if (has_rebars(kind) && controller.mode != ControlMode::Corrosion) {
    throw SolverError("rebar scenarios are driven by corrosion control");
  }
}

ScenarioSpec ScenarioSpec::defaults(ScenarioKind kind) {
  ScenarioSpec s;
  s.kind = kind;
  s.controller.mode = ControlMode::Direct;
  s.controller.increment = 1.0;
  s.controller.max_steps = 0;
  switch (kind) {
    case ScenarioKind::PressurizedBlock:
      s.materials = bending_materials(0.0);
      break;
    case ScenarioKind::FreeExpansion:
      s.width = 0.1;
      s.height = 0.1;
      s.materials = bending_materials(1.0);
      break;
    case ScenarioKind::Bend2d:
      s.width = 0.44;
      s.height = 0.12;
      s.cod_gauge_length = 0.12;
      s.materials = bending_materials(0.0);
      s.controller.mode = ControlMode::Cod;
      s.controller.increment = 1e-6;
      s.controller.max_steps = 40;
      s.controller.max_iterations = 1000;
      s.controller.tol_rel = 1e-5;
      break;
    case ScenarioKind::SingleRebar:
      s.width = 0.075;
      s.height = 0.075;
      // 17 mm cover below the bar.
      s.rebars = {{{0.0375, 0.025}, 0.008}};
      s.materials = corrosion_materials(0.0);
      s.controller.mode = ControlMode::Corrosion;
      s.controller.corrosion = {100.0, 2.0, 0.05};
      s.controller.max_steps = 45;
      break;
    case ScenarioKind::FourRebar:
      s.width = 0.25;
      s.height = 0.125;
      for (int i = 0; i < 4; ++i) s.rebars.push_back({{0.05 + 0.05 * i, 0.04}, 0.008});
      s.materials = corrosion_materials(0.0);
      s.controller.mode = ControlMode::Corrosion;
      s.controller.corrosion = {100.0, 2.0, 0.05};
      s.controller.max_steps = 60;
      break;
  }
  return s;
}

Discretization Discretization::defaults(ScenarioKind kind, ModelMode mode) {
  Discretization d;
  d.mode = mode;
  switch (kind) {
    case ScenarioKind::PressurizedBlock:
    case ScenarioKind::FreeExpansion:
      d.lmin_fine = 0.1;
      d.lmin_coarse = 0.25;
      break;
    case ScenarioKind::Bend2d:
      d.lmin_fine = 0.005;
      d.lmin_coarse = 0.015;
      break;
    case ScenarioKind::SingleRebar:
    case ScenarioKind::FourRebar:
      d.lmin_fine = 0.003;
      d.lmin_coarse = 0.01;
      d.interface_lmin = 0.003;
      d.interface_band = 0.01;
      break;
  }
  return d;
}

void Discretization::validate() const {
  if (!(lmin_fine > 0.0)) throw GeometryError("lmin_fine must be positive");
  if (mode != ModelMode::Fine && !(lmin_coarse > 0.0)) {
    throw GeometryError("lmin_coarse must be positive");
  }
  if (interface_lmin < 0.0 || interface_band < 0.0 ||
      (interface_lmin > 0.0 && !(interface_band > 0.0))) {
    throw GeometryError("interface_lmin and interface_band must be both positive or zero");
  }
  if (mode == ModelMode::Adaptive) {
    RefinementConfig r = refinement;
    r.lmin_fine = lmin_fine;
    r.lmin_coarse = lmin_coarse;
    r.validate();
  }
}

Domain scenario_domain(const ScenarioSpec& spec) {
  Domain d = Domain::rectangle(spec.width, spec.height, spec.thickness);
  d.holes = spec.rebars;
  return d;
}

GeneratorSet anchor_points(const ScenarioSpec& spec) {
  GeneratorSet out;
  if (spec.kind == ScenarioKind::Bend2d) {
    const double xm = 0.5 * spec.width;
    const double g = 0.5 * spec.cod_gauge_length;
    out.push_back(outer_anchor(spec, {xm - g, 0.0}));
    out.push_back(outer_anchor(spec, {xm + g, 0.0}));
    out.push_back(outer_anchor(spec, {spec.overhang, 0.0}));
    out.push_back(outer_anchor(spec, {spec.width - spec.overhang, 0.0}));
    out.push_back(outer_anchor(spec, {xm, spec.height}));
    // A crack must not cut a support, the load point or a probe loose.
    for (Generator& g : out) g.elastic = true;
  }
  for (int h = 0; h < static_cast<int>(spec.rebars.size()); ++h) {
    for (int q = 0; q < 4; ++q) out.push_back(hole_anchor(spec.rebars[h], h, q));
  }
  return out;
}

GeneratorSet scenario_points(const ScenarioSpec& spec, double lmin, std::uint64_t seed,
                             bool physical) {
  return scenario_points(spec, DensityField{lmin, {}}, seed, physical, {});
}

DensityField initial_density(const ScenarioSpec& spec, const Discretization& disc) {
  DensityField d{disc.base_lmin(), {}};
  if (disc.mode == ModelMode::Adaptive && disc.interface_lmin > 0.0) {
    for (const CircularHole& h : spec.rebars) {
      const double r_fine = h.radius + disc.interface_band;
      d.overrides.push_back({h.center, r_fine + disc.lmin_coarse, r_fine, disc.interface_lmin});
    }
  }
  return d;
}

GeneratorSet scenario_points(const ScenarioSpec& spec, const DensityField& density,
                             std::uint64_t seed, bool physical, std::span<const Generator> preset) {
  const Domain domain = scenario_domain(spec);
  PointSampler sampler(domain, density);
  sampler.add_corners();
  for (const Generator& g : anchor_points(spec)) sampler.add_existing(g);
  for (const Generator& g : preset) {
    const bool present = std::any_of(sampler.points().begin(), sampler.points().end(),
                                     [&](const Generator& q) { return q.pos == g.pos; });
    if (!present) sampler.add_existing(g);
  }
  Rng rng(seed);
  const SamplingRegion all{};
  sampler.sample_outer(rng, all);
  sampler.sample_holes(rng, all);
  sampler.sample_interior(rng, all);
  GeneratorSet pts = std::move(sampler).take();
  for (Generator& g : pts) g.physical = physical;
  return pts;
}

LoadCase make_loadcase(const ScenarioSpec& spec, const DualMesh& mesh) {
  LoadCase lc;
  const double W = spec.width;
  const double H = spec.height;
  switch (spec.kind) {
    case ScenarioKind::PressurizedBlock: {
      fix_all(lc, node_at(mesh, {0.0, 0.0}));
      for (const int k : edge_transport_nodes(mesh, kLeft)) lc.pressures.push_back({k, spec.p_left, 0.0});
      for (const int k : edge_transport_nodes(mesh, kRight)) lc.pressures.push_back({k, spec.p_right, 0.0});
      lc.flux_nodes = edge_transport_nodes(mesh, kLeft);
      break;
    }
    case ScenarioKind::FreeExpansion: {
      fix_all(lc, node_at(mesh, {0.0, 0.0}));
      for (const int k : edge_transport_nodes(mesh, -1)) lc.pressures.push_back({k, spec.p_uniform, 0.0});
      break;
    }
    case ScenarioKind::Bend2d: {
      const double c = spec.overhang;
      const double g = 0.5 * spec.cod_gauge_length;
      const int pin = node_at(mesh, {c, 0.0});
      const int roller = node_at(mesh, {W - c, 0.0});
      const int load = node_at(mesh, {0.5 * W, H});
      const int left = node_at(mesh, {0.5 * W - g, 0.0});
      const int right = node_at(mesh, {0.5 * W + g, 0.0});
      lc.supports.push_back({pin, 0, 0.0, 0.0});
      lc.supports.push_back({pin, 1, 0.0, 0.0});
      lc.supports.push_back({roller, 1, 0.0, 0.0});
      lc.supports.push_back({load, 1, 0.0, -1.0});
      lc.reaction_gauge.terms = {{3 * load + 1, -1.0}};
      lc.control_gauge.terms = {{3 * right, 1.0}, {3 * left, -1.0}};
      for (const int k : edge_transport_nodes(mesh, kBottom)) lc.pressures.push_back({k, spec.p_bottom, 0.0});
      for (const int k : edge_transport_nodes(mesh, kTop)) lc.pressures.push_back({k, spec.p_top, 0.0});
      lc.flux_nodes = edge_transport_nodes(mesh, kBottom);
      break;
    }
    case ScenarioKind::SingleRebar:
    case ScenarioKind::FourRebar: {
      const int pin = node_at(mesh, {0.0, 0.0});
      const int roller = node_at(mesh, {W, 0.0});
      lc.supports.push_back({pin, 0, 0.0, 0.0});
      lc.supports.push_back({pin, 1, 0.0, 0.0});
      lc.supports.push_back({roller, 1, 0.0, 0.0});
      for (const int k : edge_transport_nodes(mesh, -1)) lc.pressures.push_back({k, 0.0, 0.0});
      for (const int k : hole_transport_nodes(mesh)) lc.pressures.push_back({k, 0.0, 1.0});
      lc.flux_nodes = hole_transport_nodes(mesh);

      // Radial nodal forces: each interface node carries half of its two
      // adjacent chords.
      std::vector<double> share(mesh.mech_nodes.size(), 0.0);
      for (const BoundarySegment& s : mesh.segments) {
        if (s.kind != PointKind::Hole) continue;
        const double half =
            0.5 * distance(mesh.mech_nodes[s.a].pos, mesh.mech_nodes[s.b].pos) * spec.thickness;
        share[s.a] += half;
        share[s.b] += half;
      }
      for (int i = 0; i < static_cast<int>(mesh.mech_nodes.size()); ++i) {
        if (share[i] == 0.0) continue;
        const MechNode& n = mesh.mech_nodes[i];
        const Vec2 r = normalized(n.pos - spec.rebars.at(n.curve).center);
        lc.forces.push_back({i, 0, 0.0, share[i] * r.x});
        lc.forces.push_back({i, 1, 0.0, share[i] * r.y});
      }

      const double c = 1.0 / (4.0 * static_cast<double>(spec.rebars.size()));
      for (int h = 0; h < static_cast<int>(spec.rebars.size()); ++h) {
        const CircularHole& hole = spec.rebars[h];
        const int e = node_at(mesh, hole_anchor(hole, h, 0).pos);
        const int n = node_at(mesh, hole_anchor(hole, h, 1).pos);
        const int w = node_at(mesh, hole_anchor(hole, h, 2).pos);
        const int s = node_at(mesh, hole_anchor(hole, h, 3).pos);
        lc.control_gauge.terms.push_back({3 * e, c});
        lc.control_gauge.terms.push_back({3 * w, -c});
        lc.control_gauge.terms.push_back({3 * n + 1, c});
        lc.control_gauge.terms.push_back({3 * s + 1, -c});
        lc.interface_area += 2.0 * kPi * hole.radius * spec.thickness;
      }
      break;
    }
  }
  return lc;
}

std::pair<SimulationSetup, GeneratorSet> make_simulation(const ScenarioSpec& spec,
                                                        const Discretization& disc,
                                                        const GeneratorSet* shared) {
  spec.validate();
  disc.validate();
  SimulationSetup setup;
  setup.domain = scenario_domain(spec);
  setup.materials = spec.materials;
  setup.controller = spec.controller;
  setup.refinement = disc.refinement;
  setup.refinement.lmin_fine = disc.lmin_fine;
  setup.refinement.lmin_coarse = disc.lmin_coarse;
  setup.adaptive = disc.mode == ModelMode::Adaptive;
  setup.density = initial_density(spec, disc);
  setup.seed = disc.seed;
  if (setup.adaptive && shared != nullptr) setup.shared_points = *shared;
  setup.loads = [spec](const DualMesh& mesh) { return make_loadcase(spec, mesh); };
  // A deterministic adaptive model takes its interface layer from the
  // shared points as well.
  GeneratorSet preset;
  if (setup.adaptive && shared != nullptr && disc.interface_lmin > 0.0) {
    for (Generator g : *shared) {
      const bool in_layer = std::any_of(spec.rebars.begin(), spec.rebars.end(), [&](const CircularHole& h) {
        return distance(g.pos, h.center) <= h.radius + disc.interface_band;
      });
      if (!in_layer || g.fixed) continue;
      g.physical = false;
      preset.push_back(g);
    }
  }
  GeneratorSet points = scenario_points(spec, setup.density, disc.seed,
                                        disc.mode != ModelMode::Adaptive, preset);
  return {std::move(setup), std::move(points)};
}

std::vector<CrackEntry> crack_list(const Model& model, const SystemState& state) {
  const DualMesh& mesh = model.mesh();
  std::vector<CrackEntry> out;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    if (!(state.contacts[e].d > 0.0)) continue;
    const ElementOperator op = element_operator(mesh, e);
    const Vec2 strain = element_strain(mesh, op, e, state.u);
    const double w = crack_opening(state.contacts[e], strain.x, mesh.elements[e].length);
    if (w > 0.0) out.push_back({e, w});
  }
  return out;
}

double mean_interface_pressure(const DualMesh& mesh, const SystemState& state) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < mesh.transport_nodes.size(); ++k) {
    if (mesh.transport_nodes[k].boundary != PointKind::Hole) continue;
    sum += state.p[k];
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace cdm
