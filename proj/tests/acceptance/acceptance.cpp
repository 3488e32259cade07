// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "cdm/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace cdm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig config_for(ScenarioKind kind, ModelMode mode, std::uint64_t seed, double biot) {
  RunConfig c;
  c.spec = ScenarioSpec::defaults(kind);
  c.spec.materials.biot = biot;
  c.disc = Discretization::defaults(kind, mode);
  c.disc.seed = seed;
  return c;
}

std::unique_ptr<Simulation> simulate(const ScenarioSpec& spec, const Discretization& disc) {
  auto [setup, points] = make_simulation(spec, disc);
  auto sim = std::make_unique<Simulation>(std::move(setup), std::move(points));
  sim->initialize();
  for (int s = 0; s < spec.controller.max_steps; ++s) {
    if (!sim->advance()) throw SolverError(sim->error());
  }
  return sim;
}

bool constrained(const LoadCase& lc, int node) {
  return std::any_of(lc.pressures.begin(), lc.pressures.end(),
                     [&](const PressureConstraint& c) { return c.node == node; });
}

Outcome transport_patch() {
  const auto t0 = Clock::now();
  ScenarioSpec spec = ScenarioSpec::defaults(ScenarioKind::PressurizedBlock);
  spec.p_left = 2.5e5;
  spec.p_right = 0.5e5;
  spec.controller.max_steps = 1;
  Discretization disc = Discretization::defaults(spec.kind, ModelMode::Fine);
  disc.lmin_fine = 0.05;
  disc.seed = 17;
  const auto sim = simulate(spec, disc);
  const Model& model = sim->model();
  const Residuals r = assemble_residuals(model, sim->state(), sim->loads());

  const TransportMaterial& t = spec.materials.transport;
  const double lambda = t.rho * t.kappa / t.mu;
  const double expected = lambda * (spec.p_left - spec.p_right) / spec.width * spec.height *
                          spec.thickness;
  const double flux = sim->flux();
  double worst = 0.0;
  for (int p = 0; p < static_cast<int>(r.mass.size()); ++p) {
    if (!constrained(sim->loads(), p)) worst = std::max(worst, std::abs(r.mass[p]));
  }
  const double residual = worst / std::abs(flux);
  const double rel = std::abs(flux - expected) / expected;
  const double wall = seconds_since(t0);
  return {residual < 1e-10 && rel < 1e-8 && wall < 1.0,
          fmt("max free-node mass residual %.2e of flux, flux error %.2e, %.3f s", residual, rel,
              wall)};
}

Outcome biot_free_expansion() {
  bool pass = true;
  std::string detail;
  for (const double b : {0.0, 0.5, 1.0}) {
    ScenarioSpec spec = ScenarioSpec::defaults(ScenarioKind::FreeExpansion);
    spec.materials.biot = b;
    spec.controller.max_steps = 1;
    Discretization disc = Discretization::defaults(spec.kind, ModelMode::Fine);
    disc.lmin_fine = 0.01;
    disc.seed = 5;
    const auto sim = simulate(spec, disc);
    const Model& model = sim->model();
    const SystemState& s = sim->state();
    const MechMaterial& m = spec.materials.mech;
    const double p0 = spec.p_uniform;
    const double beta = b * p0 / m.E0;
    // For b = 0 the exact field is zero; measure against the b = 1 scale.
    const double scale = std::max(beta, p0 / m.E0) * std::hypot(spec.width, spec.height);

    double du = 0.0;
    for (std::size_t i = 0; i < model.mesh().mech_nodes.size(); ++i) {
      const Vec2 x = model.mesh().mech_nodes[i].pos;
      du = std::max({du, std::abs(s.u[3 * i] - beta * x.x), std::abs(s.u[3 * i + 1] - beta * x.y),
                     std::abs(s.u[3 * i + 2]) * spec.width});
    }
    double traction = 0.0;
    for (int e = 0; e < static_cast<int>(model.mesh().elements.size()); ++e) {
      const Vec2 eps = element_strain(model.mesh(), element_operator(model.mesh(), e), e, s.u);
      const Vec2 solid{m.E0 * eps.x, m.alpha * m.E0 * eps.y};
      const Vec2 total = total_traction(solid, facet_pressure(model.mesh(), e, s.p), b);
      traction = std::max(traction, std::max(std::abs(total.x), std::abs(total.y)));
    }
    const bool ok = du / scale < 1e-8 && traction < 1e-8 * p0;
    pass = pass && ok;
    detail += fmt("b=%.1f: u error %.1e, |t| %.1e p0; ", b, du / scale, traction / p0);
  }
  return {pass, detail};
}

Outcome fracture_energy() {
  const MechMaterial m = MechMaterial::create(60e9, 0.29, 2.2e6, 35.0);
  const double l = 0.02;
  const ContactParams cp = derive_contact_params(m, l);
  const double e0 = m.ft / m.E0;
  ContactState state;
  double work = 0.0;
  double prev_e = 0.0;
  double prev_s = 0.0;
  const int n = 200000;
  const double emax = 2000 * e0;
  for (int k = 1; k <= n; ++k) {
    const double e = emax * k / n;
    const ContactResponse r = update_contact(m, cp, state, e, 0.0);
    state = r.state;
    work += 0.5 * (r.sN + prev_s) * (e - prev_e) * l;
    prev_e = e;
    prev_s = r.sN;
  }
  const double rel = std::abs(work - m.Gt) / m.Gt;
  return {rel < 0.01, fmt("dissipated %.4f N/m vs Gt %.1f N/m (%.3f%%), final d %.6f", work, m.Gt,
                          100 * rel, state.d)};
}

Outcome constitutive_continuity() {
  bool pass = true;
  std::string detail;
  for (const double alpha : {0.29, 1.0}) {
    const MechMaterial m = MechMaterial::create(60e9, alpha, 2.2e6, 35.0);
    const ContactParams cp = derive_contact_params(m, 0.02);
    const double df = std::abs(strength_compression_branch(m, m.omega0) -
                               strength_tension_branch(m, m.omega0));
    const double dk = std::abs(slope_compression_branch(m, m.omega0) -
                               slope_tension_branch(m, cp, m.omega0));
    pass = pass && df < 1e-9 * m.ft && dk < 1e-9 * m.E0;
    detail += fmt("alpha=%.2f: df %.1e ft, dK %.1e E0; ", alpha, df / m.ft, dk / m.E0);
  }
  return {pass, detail};
}

Outcome rigid_body() {
  Domain d = Domain::rectangle(0.2, 0.1);
  d.holes.push_back({{0.07, 0.05}, 0.012});
  GeneratorSet g = sample_generator_points(d, DensityField{0.006, {}}, 23);
  for (Generator& x : g) x.physical = true;
  const MechMaterial mat = MechMaterial::create(60e9, 0.29, 2.2e6, 35.0);
  const Model model(std::make_shared<const DualMesh>(build_dual_mesh(std::move(g), d)),
                    Materials{mat, {5e-18, 1.0, 8.9e-4, 1000.0}, 0.0});
  double area = 0.0;
  for (const MechElement& e : model.mesh().elements) area += e.area;
  area /= static_cast<double>(model.mesh().elements.size());

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 t{1e-3 * U(rng), 1e-3 * U(rng)};
    const double w = 1e-2 * U(rng);
    const Vec2 x0{U(rng), U(rng)};
    SystemState s = SystemState::zero(model);
    for (std::size_t i = 0; i < model.mesh().mech_nodes.size(); ++i) {
      // Rigid mode of the small-displacement kinematics: rotation about x0.
      const Vec2 u = t + w * perp(model.mesh().mech_nodes[i].pos - x0);
      s.u[3 * i] = u.x;
      s.u[3 * i + 1] = u.y;
      s.u[3 * i + 2] = w;
    }
    const Residuals r = assemble_residuals(model, s, LoadCase{});
    double sq = 0.0;
    for (const double v : r.mech) sq += v * v;
    worst = std::max(worst, std::sqrt(sq) / (mat.E0 * area));
  }
  return {worst < 1e-10, fmt("max residual norm %.2e of E0 x mean facet area", worst)};
}

struct PairRun {
  double biot = 0.0;
  RunResult fine;
  RunResult adaptive;
  double fine_s = 0.0;
  double adaptive_s = 0.0;
};

std::vector<PairRun> g_pairs;

Outcome deterministic_pair() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (const double b : {0.0, 1.0}) {
    PairRun pr;
    pr.biot = b;
    auto tf = Clock::now();
    pr.fine = run_simulation(config_for(ScenarioKind::SingleRebar, ModelMode::Fine, 1, b), {});
    pr.fine_s = seconds_since(tf);
    RunConfig ac = config_for(ScenarioKind::SingleRebar, ModelMode::Adaptive, 1, b);
    ac.shared_points = true;
    tf = Clock::now();
    pr.adaptive = run_simulation(ac, {});
    pr.adaptive_s = seconds_since(tf);
    if (!pr.fine.ok || !pr.adaptive.ok) {
      pass = false;
      detail += fmt("b=%.0f: run failed (%s%s); ", b, pr.fine.error.c_str(),
                    pr.adaptive.error.c_str());
      g_pairs.push_back(std::move(pr));
      continue;
    }
    const CompareReport rep =
        compare_series(pr.fine.records, pr.adaptive.records, CompareTolerances{0.05, 0.05});
    const double wf = pr.fine.records.back().wall_time_s;
    const double wa = pr.adaptive.records.back().wall_time_s;
    const bool ok = rep.pass && !rep.resampled && rep.dof_ratio < 0.6 && wa < wf;
    pass = pass && ok;
    detail += fmt("b=%.0f: load dev %.4f, flux dev %.4f, max dof ratio %.3f, wall %.2f/%.2f s; ", b,
                  rep.load_deviation, rep.flux_deviation, rep.dof_ratio, wa, wf);
    g_pairs.push_back(std::move(pr));
  }
  const double total = seconds_since(t0);
  pass = pass && total < 300.0;
  return {pass, detail + fmt("total %.1f s", total)};
}

Outcome refinement_bookkeeping() {
  if (g_pairs.empty()) return {false, "deterministic pair runs missing"};
  std::size_t events = 0;
  std::size_t bad_history = 0;
  std::size_t bad_hash = 0;
  double reeq = 0.0;
  for (const PairRun& pr : g_pairs) {
    for (const RefinementEvent& e : pr.adaptive.events) {
      ++events;
      if (!e.history_identical) ++bad_history;
      if (e.hash_before_trial != e.hash_after_rollback) ++bad_hash;
      const double ref = std::abs(e.load_before);
      reeq = std::max(reeq, ref > 0.0 ? std::abs(e.load_after - e.load_before) / ref
                                      : (e.load_after == 0.0 ? 0.0 : 1.0));
    }
  }
  const bool pass = events > 0 && bad_history == 0 && bad_hash == 0 && reeq < 0.05;
  return {pass, fmt("%zu events, %zu with altered histories, %zu hash mismatches, max "
                    "re-equilibration change %.4f",
                    events, bad_history, bad_hash, reeq)};
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> var;
};

Moments moments(const std::vector<std::vector<StepRecord>>& runs,
                const std::function<double(const StepRecord&)>& f) {
  const std::size_t steps = runs.front().size();
  const double n = static_cast<double>(runs.size());
  Moments m{std::vector<double>(steps, 0.0), std::vector<double>(steps, 0.0)};
  for (std::size_t s = 0; s < steps; ++s) {
    for (const auto& r : runs) m.mean[s] += f(r[s]) / n;
    for (const auto& r : runs) m.var[s] += (f(r[s]) - m.mean[s]) * (f(r[s]) - m.mean[s]);
    m.var[s] /= n - 1.0;
  }
  return m;
}

Outcome statistical_consistency() {
  const int n = 20;
  const ModelMode modes[] = {ModelMode::Fine, ModelMode::Adaptive, ModelMode::Coarse};
  std::vector<std::vector<StepRecord>> runs[3];
  std::size_t failed = 0;
  const auto t0 = Clock::now();
  for (int k = 0; k < 3; ++k) {
    for (int r = 0; r < n; ++r) {
      const RunResult res = run_simulation(
          config_for(ScenarioKind::SingleRebar, modes[k], 1000 + static_cast<std::uint64_t>(r), 0.0),
          {});
      if (res.ok) {
        runs[k].push_back(res.records);
      } else {
        ++failed;
      }
    }
  }
  if (failed > 0) return {false, fmt("%zu realizations failed", failed)};

  bool pass = true;
  std::string detail;
  const std::pair<const char*, std::function<double(const StepRecord&)>> observables[] = {
      {"load", [](const StepRecord& r) { return r.load; }},
      {"flux", [](const StepRecord& r) { return r.flux; }}};
  for (const auto& [name, f] : observables) {
    const Moments fine = moments(runs[0], f);
    const Moments adaptive = moments(runs[1], f);
    const Moments coarse = moments(runs[2], f);
    int violations = 0;
    double worst = 0.0;
    double dev_adaptive = 0.0;
    double dev_coarse = 0.0;
    for (std::size_t s = 0; s < fine.mean.size(); ++s) {
      const double pooled = std::sqrt(0.5 * (fine.var[s] + adaptive.var[s]));
      const double da = std::abs(adaptive.mean[s] - fine.mean[s]);
      if (da > pooled) ++violations;
      if (pooled > 0.0) worst = std::max(worst, da / pooled);
      dev_adaptive = std::max(dev_adaptive, da);
      dev_coarse = std::max(dev_coarse, std::abs(coarse.mean[s] - fine.mean[s]));
    }
    pass = pass && violations == 0 && dev_coarse > dev_adaptive;
    detail += fmt("%s: %d points outside the pooled band (max %.2f sd), coarse/adaptive max "
                  "deviation %.1f; ",
                  name, violations, worst, dev_adaptive > 0.0 ? dev_coarse / dev_adaptive : 0.0);
  }
  return {pass, detail + fmt("%d x 3 runs in %.0f s", n, seconds_since(t0))};
}

Outcome biot_trend() {
  bool pass = true;
  std::string detail;
  for (const std::uint64_t seed : {1, 2, 3}) {
    double prev = INFINITY;
    detail += fmt("seed %d:", static_cast<int>(seed));
    for (const double b : {0.0, 0.5, 1.0}) {
      RunConfig c = config_for(ScenarioKind::Bend2d, ModelMode::Fine, seed, b);
      c.disc.lmin_fine = 0.01;
      const RunResult r = run_simulation(c, {});
      if (!r.ok) {
        pass = false;
        detail += fmt(" b=%.1f failed (%s)", b, r.error.c_str());
        continue;
      }
      pass = pass && r.peak_load <= prev;
      prev = r.peak_load;
      detail += fmt(" %.4g", r.peak_load);
    }
    detail += " N/m; ";
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"1 transport patch test", transport_patch},
      {"2 Biot free expansion", biot_free_expansion},
      {"3 fracture energy identity", fracture_energy},
      {"4 constitutive continuity", constitutive_continuity},
      {"5 deterministic adaptive vs fine", deterministic_pair},
      {"6 statistical consistency", statistical_consistency},
      {"7 Biot trend in bending", biot_trend},
      {"8 refinement bookkeeping", refinement_bookkeeping},
      {"9 rigid-body self-equilibration", rigid_body},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
