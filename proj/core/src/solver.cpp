#include "cdm/solver.hpp"

#include "linear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace cdm {

namespace {

constexpr double kSecondsPerDay = 86400.0;
constexpr double kStiffnessFloor = 1e-6;

}  // namespace

double steel_loss_um(double i_cor, double dt_days) { return 0.0315 * i_cor * dt_days; }

void StepController::validate() const {
  if (!(tol_rel > 0.0)) throw SolverError("tol_rel must be positive");
  if (mode != ControlMode::Corrosion && !(increment > 0.0)) {
    throw SolverError("increment must be positive");
  }
  if (max_steps < 0) throw SolverError("max_steps must be non-negative");
  if (mode == ControlMode::Corrosion) {
    if (!(corrosion.alpha_e > 1.0)) throw SolverError("alpha_e must exceed 1");
    if (!(corrosion.i_cor > 0.0) || !(corrosion.dt_days > 0.0)) {
      throw SolverError("i_cor and dt must be positive");
    }
  }
}

struct CoupledSolver::Impl {
  const Model* model;
  LoadCase loads;
  StepController ctrl;

  // Mechanical elimination.
  std::vector<int> mfree;  // global dof -> compact index or -1
  std::vector<double> g0;  // prescribed values (global dofs)
  std::vector<double> g1;
  std::vector<char> mconstrained;
  int nm = 0;
  std::unique_ptr<detail::BlockSpdSystem> msys;
  std::vector<ElementOperator> ops;

  // Transport elimination.
  std::vector<int> tfree;
  std::vector<double> p0;
  std::vector<double> p1;
  int nt = 0;
  std::unique_ptr<detail::BlockSpdSystem> tsys;

  std::vector<double> F0;
  std::vector<double> F1;

  Impl(const Model& m, const LoadCase& l, const StepController& c) : model(&m), loads(l), ctrl(c) {
    ctrl.validate();
    const DualMesh& mesh = m.mesh();
    const std::size_t ndof = m.mech_dofs();
    g0.assign(ndof, 0.0);
    g1.assign(ndof, 0.0);
    mconstrained.assign(ndof, 0);
    for (const MechConstraint& s : loads.supports) {
      if (s.node < 0 || s.node >= static_cast<int>(mesh.mech_nodes.size()) || s.dof < 0 || s.dof > 2) {
        throw SolverError("support refers to an invalid degree of freedom");
      }
      const int d = 3 * s.node + s.dof;
      mconstrained[d] = 1;
      g0[d] = s.value0;
      g1[d] = s.value1;
    }
    for (std::size_t n = 0; n < mesh.mech_nodes.size(); ++n) {
      if (mesh.node_elements(static_cast<int>(n)).empty()) {
        for (int k = 0; k < 3; ++k) mconstrained[3 * n + k] = 1;
      }
    }
    mfree.assign(ndof, -1);
    for (std::size_t d = 0; d < ndof; ++d) {
      if (!mconstrained[d]) mfree[d] = nm++;
    }
    ops.reserve(mesh.elements.size());
    std::vector<std::vector<int>> mblocks;
    mblocks.reserve(mesh.elements.size());
    for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
      ops.push_back(element_operator(mesh, e));
      std::vector<int> b(6);
      for (int k = 0; k < 6; ++k) b[k] = mfree[ops.back().dofs[k]];
      mblocks.push_back(std::move(b));
    }
    msys = std::make_unique<detail::BlockSpdSystem>(nm, mblocks);

    const std::size_t np = mesh.transport_nodes.size();
    p0.assign(np, 0.0);
    p1.assign(np, 0.0);
    std::vector<char> tcon(np, 0);
    for (const PressureConstraint& pc : loads.pressures) {
      if (pc.node < 0 || pc.node >= static_cast<int>(np)) {
        throw SolverError("pressure constraint refers to an invalid transport node");
      }
      tcon[pc.node] = 1;
      p0[pc.node] = pc.value0;
      p1[pc.node] = pc.value1;
    }
    std::vector<int> degree(np, 0);
    for (const Conduit& c : mesh.conduits) {
      degree[c.p]++;
      degree[c.q]++;
    }
    for (std::size_t i = 0; i < np; ++i) {
      if (degree[i] == 0) tcon[i] = 1;
    }
    tfree.assign(np, -1);
    for (std::size_t i = 0; i < np; ++i) {
      if (!tcon[i]) tfree[i] = nt++;
    }
    std::vector<std::vector<int>> tblocks;
    tblocks.reserve(mesh.conduits.size());
    for (const Conduit& c : mesh.conduits) tblocks.push_back({tfree[c.p], tfree[c.q]});
    tsys = std::make_unique<detail::BlockSpdSystem>(nt, tblocks);

    F0.assign(ndof, 0.0);
    F1.assign(ndof, 0.0);
    for (const NodalForce& f : loads.forces) {
      if (f.node < 0 || f.node >= static_cast<int>(mesh.mech_nodes.size()) || f.dof < 0 || f.dof > 2) {
        throw SolverError("nodal force refers to an invalid degree of freedom");
      }
      F0[3 * f.node + f.dof] += f.f0;
      F1[3 * f.node + f.dof] += f.f1;
    }
  }


  // Pressure fields for the fixed and the unit variable Dirichlet data.
  bool solve_transport(const std::vector<double>& cond, std::vector<double>& pa,
                       std::vector<double>& pb) {
    const DualMesh& mesh = model->mesh();
    tsys->zero();
    Eigen::VectorXd ra = Eigen::VectorXd::Zero(nt);
    Eigen::VectorXd rb = Eigen::VectorXd::Zero(nt);
    for (int k = 0; k < static_cast<int>(mesh.conduits.size()); ++k) {
      const Conduit& c = mesh.conduits[k];
      const double g = cond[k];
      const double blk[4] = {g, -g, -g, g};
      tsys->add(k, blk);
      const int fp = tfree[c.p];
      const int fq = tfree[c.q];
      if (fp >= 0 && fq < 0) {
        ra[fp] += g * p0[c.q];
        rb[fp] += g * p1[c.q];
      } else if (fq >= 0 && fp < 0) {
        ra[fq] += g * p0[c.p];
        rb[fq] += g * p1[c.p];
      }
    }
    if (!tsys->factorize()) return false;
    const Eigen::VectorXd xa = tsys->solve(ra);
    const Eigen::VectorXd xb = tsys->solve(rb);
    pa = p0;
    pb = p1;
    for (std::size_t i = 0; i < tfree.size(); ++i) {
      if (tfree[i] >= 0) {
        pa[i] = xa[tfree[i]];
        pb[i] = xb[tfree[i]];
      }
    }
    return true;
  }

  // Secant stiffness of the free block plus K_fc * g1 on the free rows.
  bool assemble_stiffness(const std::vector<ContactState>& trial, Eigen::VectorXd& kfc_g1) {
    const DualMesh& mesh = model->mesh();
    const MechMaterial& mat = model->materials().mech;
    msys->zero();
    kfc_g1 = Eigen::VectorXd::Zero(nm);
    double ke[36];
    for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
      const MechElement& el = mesh.elements[e];
      const ElementOperator& op = ops[e];
      const double keep = std::max(1.0 - trial[e].d, kStiffnessFloor);
      const double kn = el.area / el.length * mat.E0 * keep;
      const double km = kn * mat.alpha;
      for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
          ke[6 * r + c] = kn * op.gN[r] * op.gN[c] + km * op.gM[r] * op.gM[c];
        }
      }
      msys->add(e, ke);
      for (int c = 0; c < 6; ++c) {
        const int gc = op.dofs[c];
        if (mfree[gc] >= 0 || g1[gc] == 0.0) continue;
        for (int r = 0; r < 6; ++r) {
          const int fr = mfree[op.dofs[r]];
          if (fr >= 0) kfc_g1[fr] += ke[6 * r + c] * g1[gc];
        }
      }
    }
    return msys->factorize();
  }

  double gauge(const std::vector<double>& q) const { return loads.control_gauge.evaluate(q); }
};

CoupledSolver::CoupledSolver(const Model& model, const LoadCase& loads,
                             const StepController& controller)
    : impl_(std::make_unique<Impl>(model, loads, controller)) {}
CoupledSolver::~CoupledSolver() = default;
CoupledSolver::CoupledSolver(CoupledSolver&&) noexcept = default;
CoupledSolver& CoupledSolver::operator=(CoupledSolver&&) noexcept = default;

const Model& CoupledSolver::model() const { return *impl_->model; }
const LoadCase& CoupledSolver::loads() const { return impl_->loads; }
const StepController& CoupledSolver::controller() const { return impl_->ctrl; }

StepReport CoupledSolver::solve(const SystemState& committed, double target, double dt_days,
                                SystemState& out) {
  Impl& s = *impl_;
  const Model& model = *s.model;
  const auto t_start = std::chrono::steady_clock::now();
  StepReport rep;
  const std::size_t ndof = model.mech_dofs();
  const ControlMode mode = s.ctrl.mode;
  const double tol = s.ctrl.tol_rel;
  const double dt_s = dt_days * kSecondsPerDay;
  const TransportMaterial& tm = model.materials().transport;
  const double flux_scale =
      mode == ControlMode::Corrosion ? dt_s / (tm.rho * s.loads.interface_area) : 0.0;
  const double balance_rhs = mode == ControlMode::Corrosion
                                 ? (s.ctrl.corrosion.alpha_e - 1.0) * target - committed.transported
                                 : 0.0;

  if (mode == ControlMode::Cod || mode == ControlMode::Corrosion) {
    if (s.loads.control_gauge.empty()) throw SolverError("control gauge is not defined");
  }
  if (mode == ControlMode::Corrosion && !(s.loads.interface_area > 0.0)) {
    throw SolverError("corrosion control needs a positive interface area");
  }

  std::vector<double> q = committed.u;
  double mu = mode == ControlMode::Direct ? target : committed.mu;
  for (std::size_t d = 0; d < ndof; ++d) {
    if (s.mconstrained[d]) q[d] = s.g0[d] + mu * s.g1[d];
  }
  std::vector<ContactState> trial = trial_contacts(model, q, committed.contacts);
  std::vector<double> cond = conduit_conductances(model, q, trial);
  std::vector<double> pa;
  std::vector<double> pb;
  double Qa = 0.0;
  double Qb = 0.0;
  Eigen::VectorXd kfc_g1;
  Eigen::VectorXd ra(s.nm);
  Eigen::VectorXd rb(s.nm);

  bool done = false;
  for (int stagger = 0; stagger < s.ctrl.max_stagger && !done; ++stagger) {
    rep.staggers = stagger + 1;
    if (!s.solve_transport(cond, pa, pb)) {
      rep.message = "transport factorization failed";
      break;
    }
    const std::vector<double> fba = biot_forces(model, pa);
    const std::vector<double> fbb = biot_forces(model, pb);
    if (mode == ControlMode::Corrosion) {
      Qa = net_outflow(model, cond, pa, s.loads.flux_nodes) * flux_scale;
      Qb = net_outflow(model, cond, pb, s.loads.flux_nodes) * flux_scale;
    }
    std::vector<double> rbv(ndof);
    for (std::size_t d = 0; d < ndof; ++d) rbv[d] = s.F1[d] - fbb[d];

    bool mech_ok = false;
    for (int it = 0; it < s.ctrl.max_iterations; ++it) {
      const std::vector<double> fs = solid_forces(model, q, trial);
      double rnorm = 0.0;
      double fscale = 0.0;
      for (std::size_t d = 0; d < ndof; ++d) {
        const double ext = s.F0[d] - fba[d] + mu * rbv[d];
        fscale += fs[d] * fs[d] + ext * ext;
        if (s.mfree[d] >= 0) {
          const double r = ext - fs[d];
          ra[s.mfree[d]] = r;
          rb[s.mfree[d]] = rbv[d];
          rnorm += r * r;
        }
      }
      rnorm = std::sqrt(rnorm);
      fscale = std::sqrt(fscale);
      double cres = 0.0;
      double cscale = 1.0;
      if (mode == ControlMode::Direct) {
        cres = mu - target;
        cscale = std::max(std::abs(target), 1e-300);
      } else if (mode == ControlMode::Cod) {
        cres = s.gauge(q) - target;
        cscale = std::max(std::abs(target), std::abs(s.gauge(q)));
      } else {
        cres = s.gauge(q) + Qa + mu * Qb - balance_rhs;
        cscale = std::max(std::abs(balance_rhs), std::abs(s.gauge(q)));
      }
      rep.mech_residual = fscale > 0.0 ? rnorm / fscale : 0.0;
      const bool force_ok = rnorm <= tol * fscale || fscale == 0.0;
      const bool control_ok = std::abs(cres) <= tol * cscale || (cscale == 0.0 && cres == 0.0);
      if (force_ok && control_ok) {
        mech_ok = true;
        break;
      }
      ++rep.iterations;
      if (!s.assemble_stiffness(trial, kfc_g1)) {
        rep.message = "mechanical factorization failed";
        break;
      }
      const Eigen::VectorXd a = s.msys->solve(ra);
      const Eigen::VectorXd b = s.msys->solve(rb - kfc_g1);
      double ga = 0.0;
      double gb = 0.0;
      for (const auto& [dof, coef] : s.loads.control_gauge.terms) {
        if (s.mfree[dof] >= 0) {
          ga += coef * a[s.mfree[dof]];
          gb += coef * b[s.mfree[dof]];
        } else {
          gb += coef * s.g1[dof];
        }
      }
      double dmu = 0.0;
      if (mode == ControlMode::Direct) {
        dmu = target - mu;
      } else if (mode == ControlMode::Cod) {
        if (std::abs(gb) < 1e-300) throw SolverError("control gauge is degenerate");
        dmu = (target - s.gauge(q) - ga) / gb;
      } else {
        const double den = gb + Qb;
        if (std::abs(den) < 1e-300) throw SolverError("corrosion control is degenerate");
        dmu = (balance_rhs - s.gauge(q) - ga - Qa - mu * Qb) / den;
      }
      if (!std::isfinite(dmu)) {
        rep.message = "non-finite load factor";
        break;
      }
      for (std::size_t d = 0; d < ndof; ++d) {
        if (s.mfree[d] >= 0) {
          q[d] += a[s.mfree[d]] + dmu * b[s.mfree[d]];
        } else if (s.mconstrained[d]) {
          q[d] += dmu * s.g1[d];
        }
      }
      mu += dmu;
      trial = trial_contacts(model, q, committed.contacts);
    }
    if (!mech_ok) {
      if (rep.message.empty()) rep.message = "mechanical iterations did not converge";
      break;
    }
    const std::vector<double> next = conduit_conductances(model, q, trial);
    double change = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      change = std::max(change, std::abs(next[k] - cond[k]) / cond[k]);
    }
    cond = next;
    if (change <= tol) done = true;
  }

  if (done) {
    if (!s.solve_transport(cond, pa, pb)) {
      done = false;
      rep.message = "transport factorization failed";
    }
  }
  if (!done) {
    if (rep.message.empty()) rep.message = "staggered iteration did not converge";
    rep.converged = false;
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
  }

  out = committed;
  out.u = std::move(q);
  out.p.resize(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) out.p[i] = pa[i] + mu * pb[i];
  out.contacts = std::move(trial);
  out.mu = mu;
  out.control = target;
  if (mode == ControlMode::Corrosion) {
    out.transported = committed.transported +
                      net_outflow(model, cond, out.p, s.loads.flux_nodes) * flux_scale;
  }
  // Mass residual with the final conductances, relative to the flux scale.
  {
    const DualMesh& mesh = model.mesh();
    std::vector<double> r(mesh.transport_nodes.size(), 0.0);
    double scale = 0.0;
    for (int k = 0; k < static_cast<int>(mesh.conduits.size()); ++k) {
      const Conduit& c = mesh.conduits[k];
      const double f = cond[k] * (out.p[c.p] - out.p[c.q]);
      r[c.p] += f;
      r[c.q] -= f;
      scale = std::max(scale, std::abs(f));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (s.tfree[i] >= 0) worst = std::max(worst, std::abs(r[i]));
    }
    rep.mass_residual = scale > 0.0 ? worst / scale : 0.0;
  }
  rep.converged = true;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

StepReport CoupledSolver::step(const SystemState& committed, SystemState& out) {
  const StepController& c = impl_->ctrl;
  double dtarget = c.increment;
  double dt = 0.0;
  if (c.mode == ControlMode::Corrosion) {
    dt = c.corrosion.dt_days;
    dtarget = steel_loss_um(c.corrosion.i_cor, dt) * 1e-6;
  }
  if (dtarget == 0.0) {
    out = committed;
    return StepReport{true, 0, 0, 0, 0.0, 0.0, 0.0, {}};
  }
  const auto t0 = std::chrono::steady_clock::now();
  int bisections = 0;
  // Depth-first substepping: a failed increment is replaced by two halves.
  auto attempt = [&](auto&& self, const SystemState& from, double dx, double dtd, int depth,
                     SystemState& to) -> StepReport {
    StepReport r = solve(from, from.control + dx, dtd, to);
    if (r.converged || depth >= c.max_bisections) return r;
    ++bisections;
    SystemState mid;
    StepReport r1 = self(self, from, 0.5 * dx, 0.5 * dtd, depth + 1, mid);
    if (!r1.converged) return r1;
    mid.time = from.time + 0.5 * dtd;
    StepReport r2 = self(self, mid, 0.5 * dx, 0.5 * dtd, depth + 1, to);
    r2.iterations += r1.iterations;
    r2.staggers += r1.staggers;
    return r2;
  };
  StepReport rep = attempt(attempt, committed, dtarget, dt, 0, out);
  rep.bisections = bisections;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.converged) {
    out.step = committed.step + 1;
    out.time = committed.time + dt;
    out.control = committed.control + dtarget;
  }
  return rep;
}

double CoupledSolver::load(const SystemState& state) const {
  if (impl_->ctrl.mode == ControlMode::Corrosion) return state.mu;
  if (impl_->loads.reaction_gauge.empty()) return state.mu;
  const std::vector<double> r = mech_reactions(*impl_->model, state, impl_->loads);
  return impl_->loads.reaction_gauge.evaluate(r);
}

double CoupledSolver::flux(const SystemState& state) const {
  if (impl_->loads.flux_nodes.empty()) return 0.0;
  const std::vector<double> g = conduit_conductances(*impl_->model, state.u, state.contacts);
  return net_outflow(*impl_->model, g, state.p, impl_->loads.flux_nodes);
}

}  // namespace cdm
