#include "cdm/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <tuple>

namespace cdm {

void RefinementConfig::validate() const {
  if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0)) {
    throw RefinementError("threshold_ratio must lie in (0, 1)");
  }
  if (!(lmin_fine > 0.0) || !(lmin_coarse > lmin_fine)) {
    throw RefinementError("need 0 < lmin_fine < lmin_coarse");
  }
  if (!(fine_radius() > 0.0) || !(transition_radius() > fine_radius())) {
    throw RefinementError("need 0 < r_fine < r_transition");
  }
  if (max_events_per_step < 1) throw RefinementError("max_events_per_step must be positive");
}

double Tensor2::max_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  const double dev = std::hypot(0.5 * (xx - yy), xy);
  return mean + dev;
}

Tensor2 average_stress(Vec2 x, double volume, std::span<const std::pair<Vec2, Vec2>> arm_forces) {
  double sxx = 0.0, sxy = 0.0, syx = 0.0, syy = 0.0;
  for (const auto& [c, f] : arm_forces) {
    const Vec2 r = c - x;
    sxx += r.x * f.x;
    sxy += r.x * f.y;
    syx += r.y * f.x;
    syy += r.y * f.y;
  }
  Tensor2 t;
  if (!(volume > 0.0)) return t;
  t.xx = sxx / volume;
  t.yy = syy / volume;
  t.xy = 0.5 * (sxy + syx) / volume;
  return t;
}

namespace {

Tensor2 stress_of(const DualMesh& mesh, std::span<const Vec2> tractions, int node,
                  std::vector<std::pair<Vec2, Vec2>>& scratch) {
  scratch.clear();
  for (const int e : mesh.node_elements(node)) {
    const MechElement& el = mesh.elements[e];
    const Vec2 s = tractions[e];
    // Tension pulls node i towards j.
    Vec2 f = el.area * (s.x * el.n + s.y * el.m);
    if (el.j == node) f = -f;
    scratch.emplace_back(el.centroid, f);
  }
  const MechNode& nd = mesh.mech_nodes[node];
  return average_stress(nd.pos, nd.volume, scratch);
}

}  // namespace

Tensor2 particle_stress(const Model& model, const SystemState& state, int node) {
  const std::vector<Vec2> s = solid_tractions(model, state.u, state.contacts);
  std::vector<std::pair<Vec2, Vec2>> scratch;
  return stress_of(model.mesh(), s, node, scratch);
}

std::vector<int> find_critical(const Model& model, const SystemState& state,
                               const RefinementConfig& cfg) {
  const DualMesh& mesh = model.mesh();
  std::vector<int> out;
  const bool any_coarse = std::any_of(mesh.mech_nodes.begin(), mesh.mech_nodes.end(),
                                      [](const MechNode& n) { return !n.physical; });
  if (!any_coarse) return out;
  const std::vector<Vec2> s = solid_tractions(model, state.u, state.contacts);
  const double limit = cfg.threshold_ratio * model.materials().mech.ft;
  std::vector<std::pair<Vec2, Vec2>> scratch;
  for (int i = 0; i < static_cast<int>(mesh.mech_nodes.size()); ++i) {
    if (mesh.mech_nodes[i].physical) continue;
    if (stress_of(mesh, s, i, scratch).max_eigenvalue() > limit) out.push_back(i);
  }
  return out;
}

ContactKey contact_key(const DualMesh& mesh, int element) {
  const MechElement& e = mesh.elements[element];
  Vec2 a = mesh.mech_nodes[e.i].pos;
  Vec2 b = mesh.mech_nodes[e.j].pos;
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  return {a.x, a.y, b.x, b.y};
}

ContactHistory save_history(const DualMesh& mesh, std::span<const ContactState> contacts) {
  ContactHistory out;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    if (!mesh.elements[e].inelastic) continue;
    if (!(contacts[e].d > 0.0)) continue;
    out.emplace(contact_key(mesh, e), contacts[e]);
  }
  return out;
}

std::vector<ContactState> transfer_history(const ContactHistory& saved, const DualMesh& mesh) {
  std::vector<ContactState> out(mesh.elements.size());
  std::size_t found = 0;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const auto it = saved.find(contact_key(mesh, e));
    if (it == saved.end()) continue;
    if (!mesh.elements[e].inelastic) {
      throw RefinementError("saved contact is no longer physical");
    }
    out[e] = it->second;
    ++found;
  }
  if (found != saved.size()) {
    throw RefinementError(std::to_string(saved.size() - found) +
                          " saved contact(s) missing from the refined mesh");
  }
  return out;
}

Refinement refine(const DualMesh& mesh, const GeneratorSet& points, std::span<const int> critical,
                  const DensityField& density, std::span<const SamplingRegion::Disk> zones,
                  const RefinementConfig& cfg, std::uint64_t seed, const GeneratorSet* shared) {
  cfg.validate();
  if (critical.empty()) throw RefinementError("no critical particles to refine around");
  const double rf = cfg.fine_radius();
  const double rt = cfg.transition_radius();

  Refinement r;
  r.plan.critical.assign(critical.begin(), critical.end());
  for (const int c : critical) r.plan.centers.push_back(mesh.mech_nodes.at(c).centroid);

  const auto within = [&](Vec2 p, double radius) {
    return std::any_of(r.plan.centers.begin(), r.plan.centers.end(),
                       [&](Vec2 c) { return distance2(p, c) <= radius * radius; });
  };

  r.density = density;
  for (const Vec2 c : r.plan.centers) r.density.overrides.push_back({c, rt, rf, cfg.lmin_fine});
  r.zones.assign(zones.begin(), zones.end());
  for (const Vec2 c : r.plan.centers) r.zones.push_back({c, rf});
  const SamplingRegion fine_zones{r.zones, {}};

  PointSampler sampler(mesh.domain, r.density);
  for (int k = 0; k < static_cast<int>(points.size()); ++k) {
    Generator g = points[k];
    if (!g.physical && !g.fixed && within(g.pos, rt)) {
      r.plan.evicted.push_back(k);
      continue;
    }
    // Anchors inside the fine zone join the physical discretization.
    if (g.fixed && within(g.pos, rf)) g.physical = true;
    sampler.add_existing(g);
  }

  const std::size_t kept = sampler.points().size();
  SamplingRegion region;
  for (const Vec2 c : r.plan.centers) region.disks.push_back({c, rt});
  if (shared != nullptr) {
    std::set<std::pair<double, double>> present;
    for (const Generator& g : sampler.points()) present.emplace(g.pos.x, g.pos.y);
    for (Generator g : *shared) {
      if (!fine_zones.contains(g.pos) || present.count({g.pos.x, g.pos.y}) != 0) continue;
      g.physical = true;
      sampler.add_existing(g);
    }
    region.excluded = r.zones;
  } else {
    // Earlier fine zones are final.
    region.excluded.assign(zones.begin(), zones.end());
  }
  Rng rng(seed);
  sampler.sample_outer(rng, region);
  sampler.sample_holes(rng, region);
  sampler.sample_interior(rng, region);

  r.points = std::move(sampler).take();
  for (std::size_t k = kept; k < r.points.size(); ++k) {
    Generator& g = r.points[k];
    if (shared == nullptr) g.physical = within(g.pos, rf);
    r.plan.inserted.push_back(g.pos);
  }
  BuildOptions opts;
  opts.stable_zones = r.zones;
  r.mesh = std::make_shared<const DualMesh>(build_dual_mesh(r.points, mesh.domain, opts));
  return r;
}

namespace {

template <class Pos>
int nearest(Vec2 p, std::size_t count, Pos pos) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    const double d = distance2(p, pos(k));
    if (d < bd) {
      bd = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

// Initial guess on a new mesh: rigid motion of the nearest old particle and
// the pressure of the nearest old transport node.
void interpolate_fields(const DualMesh& from, const SystemState& s, const DualMesh& to,
                        SystemState& out) {
  out.u.assign(3 * to.mech_nodes.size(), 0.0);
  for (std::size_t i = 0; i < to.mech_nodes.size(); ++i) {
    const Vec2 x = to.mech_nodes[i].pos;
    const int k = nearest(x, from.mech_nodes.size(), [&](std::size_t j) { return from.mech_nodes[j].pos; });
    const double th = s.u[3 * k + 2];
    const Vec2 v = Vec2{s.u[3 * k], s.u[3 * k + 1]} + th * perp(x - from.mech_nodes[k].pos);
    out.u[3 * i] = v.x;
    out.u[3 * i + 1] = v.y;
    out.u[3 * i + 2] = th;
  }
  out.p.assign(to.transport_nodes.size(), 0.0);
  for (std::size_t i = 0; i < to.transport_nodes.size(); ++i) {
    const int k = nearest(to.transport_nodes[i].pos, from.transport_nodes.size(),
                          [&](std::size_t j) { return from.transport_nodes[j].pos; });
    out.p[i] = s.p[k];
  }
}

bool same_bits(const ContactState& a, const ContactState& b) {
  return std::memcmp(&a.d, &b.d, sizeof(double)) == 0 &&
         std::memcmp(&a.max_eN, &b.max_eN, sizeof(double)) == 0 &&
         std::memcmp(&a.max_eT, &b.max_eT, sizeof(double)) == 0;
}

}  // namespace

Simulation::Simulation(SimulationSetup setup, GeneratorSet initial_points)
    : setup_(std::move(setup)), points_(std::move(initial_points)), density_(setup_.density) {
  setup_.controller.validate();
  if (setup_.adaptive) setup_.refinement.validate();
  if (!setup_.loads) throw SolverError("simulation needs a load case builder");
  rebuild(std::make_shared<const DualMesh>(build_dual_mesh(points_, setup_.domain)));
}

void Simulation::rebuild(std::shared_ptr<const DualMesh> mesh) {
  solver_.reset();
  model_ = std::make_unique<Model>(std::move(mesh), setup_.materials);
  solver_ = std::make_unique<CoupledSolver>(*model_, setup_.loads(model_->mesh()),
                                            setup_.controller);
}

void Simulation::record(int events_in_step) {
  StepRecord r;
  r.step = state_.step;
  r.control = state_.control;
  r.load = load();
  r.flux = flux();
  r.dof_count = mesh().dof_count();
  r.wall_time_s = elapsed_;
  r.refinement_events = events_in_step;
  records_.push_back(r);
}

void Simulation::initialize() {
  const auto t0 = std::chrono::steady_clock::now();
  state_ = SystemState::zero(*model_);
  SystemState out;
  StepReport rep = solver_->solve(state_, 0.0, 0.0, out);
  if (!rep.converged) throw SolverError("initial equilibrium failed: " + rep.message);
  state_ = out;
  int events = 0;
  if (setup_.adaptive) {
    std::vector<int> crit = find_critical(*model_, state_, setup_.refinement);
    while (!crit.empty()) {
      if (events >= setup_.refinement.max_events_per_step) {
        throw SolverError("refinement cap reached at the initial state");
      }
      if (!refine_and_reequilibrate(std::move(crit))) throw SolverError(error_);
      ++events;
      crit = find_critical(*model_, state_, setup_.refinement);
    }
  }
  elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record(events);
}

bool Simulation::advance() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto finish = [&](bool ok) {
    elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ok;
  };
  int events = 0;
  for (;;) {
    const std::uint64_t before = state_hash(state_);
    SystemState trial;
    StepReport rep;
    try {
      rep = solver_->step(state_, trial);
    } catch (const std::exception& e) {
      rep.converged = false;
      rep.message = e.what();
    }
    if (!rep.converged) {
      error_ = "step " + std::to_string(state_.step + 1) + " at control " +
               std::to_string(state_.control) + ": " + rep.message;
      return finish(false);
    }
    std::vector<int> crit;
    if (setup_.adaptive) crit = find_critical(*model_, trial, setup_.refinement);
    if (crit.empty()) {
      state_ = std::move(trial);
      elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      record(events);
      return true;
    }
    // The trial is discarded; the committed state was only read.
    const std::uint64_t after = state_hash(state_);
    do {
      if (events >= setup_.refinement.max_events_per_step) {
        error_ = "step " + std::to_string(state_.step + 1) + ": more than " +
                 std::to_string(setup_.refinement.max_events_per_step) +
                 " refinement events";
        return finish(false);
      }
      const std::size_t n = events_.size();
      if (!refine_and_reequilibrate(std::move(crit))) return finish(false);
      if (events == 0 && n < events_.size()) {
        events_[n].hash_before_trial = before;
        events_[n].hash_after_rollback = after;
      } else {
        const std::uint64_t h = state_hash(state_);
        events_[n].hash_before_trial = h;
        events_[n].hash_after_rollback = h;
      }
      ++events;
      crit = find_critical(*model_, state_, setup_.refinement);
    } while (!crit.empty());
  }
}

bool Simulation::refine_and_reequilibrate(std::vector<int> critical) {
  RefinementEvent ev;
  ev.index = static_cast<int>(events_.size());
  ev.step = state_.step + 1;
  ev.control = state_.control;
  ev.critical = critical.size();
  ev.dof_before = mesh().dof_count();
  ev.load_before = load();
  ev.flux_before = flux();

  const std::shared_ptr<const DualMesh> old_mesh = model_->mesh_ptr();
  const ContactHistory saved = save_history(*old_mesh, state_.contacts);
  Refinement r;
  try {
    r = refine(*old_mesh, points_, critical, density_, zones_, setup_.refinement,
               setup_.seed + 0x9E3779B97F4A7C15ULL * ++refine_counter_,
               setup_.shared_points ? &*setup_.shared_points : nullptr);
  } catch (const std::exception& e) {
    error_ = std::string("refinement failed: ") + e.what();
    return false;
  }
  ev.evicted = r.plan.evicted.size();
  ev.inserted = r.plan.inserted.size();
  ev.preserved = saved.size();

  SystemState next = state_;
  try {
    next.contacts = transfer_history(saved, *r.mesh);
  } catch (const std::exception& e) {
    error_ = std::string("history transfer failed: ") + e.what();
    return false;
  }
  interpolate_fields(*old_mesh, state_, *r.mesh, next);

  ev.history_identical = true;
  for (int e = 0; e < static_cast<int>(r.mesh->elements.size()); ++e) {
    const auto it = saved.find(contact_key(*r.mesh, e));
    if (it != saved.end() && !same_bits(it->second, next.contacts[e])) ev.history_identical = false;
  }

  points_ = std::move(r.points);
  density_ = std::move(r.density);
  zones_ = std::move(r.zones);
  rebuild(r.mesh);
  ev.dof_after = mesh().dof_count();

  SystemState out;
  StepReport rep;
  try {
    rep = solver_->solve(next, state_.control, 0.0, out);
  } catch (const std::exception& e) {
    rep.converged = false;
    rep.message = e.what();
  }
  if (!rep.converged) {
    error_ = "re-equilibration after refinement failed: " + rep.message;
    return false;
  }
  out.step = state_.step;
  out.time = state_.time;
  state_ = std::move(out);
  ev.load_after = load();
  ev.flux_after = flux();
  events_.push_back(ev);
  if (on_refinement) on_refinement(events_.back(), mesh());
  return true;
}

}  // namespace cdm
