#include "cdm/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace cdm {
namespace {

Materials bending_concrete(double biot = 0.0) {
  return {MechMaterial::create(60e9, 0.29, 2.2e6, 35.0), {5e-18, 1.0, 8.9e-4, 1000.0}, biot};
}

Model block_model(double w, double h, double lmin, std::uint64_t seed, double biot = 0.0) {
  const Domain d = Domain::rectangle(w, h);
  GeneratorSet g = sample_generator_points(d, DensityField{lmin, {}}, seed);
  for (Generator& x : g) x.physical = true;
  return Model(std::make_shared<const DualMesh>(build_dual_mesh(std::move(g), d)), bending_concrete(biot));
}

int nearest(const DualMesh& m, Vec2 p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(m.mech_nodes.size()); ++i) {
    if (distance(m.mech_nodes[i].pos, p) < distance(m.mech_nodes[best].pos, p)) best = i;
  }
  return best;
}

// Left edge clamped, right edge pulled by a load-proportional displacement.
LoadCase tension_case(const DualMesh& m, double w, double du) {
  LoadCase lc;
  for (int i = 0; i < static_cast<int>(m.mech_nodes.size()); ++i) {
    const Vec2 x = m.mech_nodes[i].pos;
    if (x.x < 1e-12) {
      lc.supports.push_back({i, 0, 0.0, 0.0});
      if (x.y < 1e-12) lc.supports.push_back({i, 1, 0.0, 0.0});
    } else if (x.x > w - 1e-12) {
      lc.supports.push_back({i, 0, 0.0, du});
      lc.reaction_gauge.terms.push_back({3 * i, 1.0});
    }
  }
  for (int p = 0; p < static_cast<int>(m.transport_nodes.size()); ++p) {
    if (m.transport_nodes[p].boundary != PointKind::Interior) lc.pressures.push_back({p, 0.0, 0.0});
  }
  return lc;
}

TEST(SteelLoss, MatchesFaradayLaw) {
  // Fe -> Fe2+: M = 55.845 g/mol, n = 2, rho = 7.85 g/cm^3.
  const double cm_per_s = 1e-6 * 55.845 / (2 * 96485.332 * 7.85);
  const double um_per_day = cm_per_s * 1e4 * 86400;
  EXPECT_NEAR(steel_loss_um(1.0, 1.0), um_per_day, 0.02 * um_per_day);
  EXPECT_DOUBLE_EQ(steel_loss_um(100.0, 0.05), 5.0 * steel_loss_um(1.0, 1.0));
}

TEST(StepController, Validation) {
  StepController c;
  c.increment = 1.0;
  EXPECT_NO_THROW(c.validate());
  c.increment = 0.0;
  EXPECT_THROW(c.validate(), SolverError);
  c.increment = 1.0;
  c.tol_rel = 0.0;
  EXPECT_THROW(c.validate(), SolverError);
}

TEST(CoupledSolver, ElasticResponseIsLinearInLoad) {
  const double w = 0.1;
  const Model model = block_model(w, 0.05, 0.01, 4);
  StepController c;
  c.increment = 1.0;
  CoupledSolver solver(model, tension_case(model.mesh(), w, 1e-7), c);
  const SystemState zero = SystemState::zero(model);
  SystemState a;
  SystemState b;
  const StepReport ra_rep = solver.solve(zero, 1.0, 0.0, a);
  ASSERT_TRUE(ra_rep.converged) << ra_rep.message;
  ASSERT_TRUE(solver.solve(zero, 2.0, 0.0, b).converged);
  const double ra = solver.load(a);
  EXPECT_GT(ra, 0.0);
  EXPECT_NEAR(solver.load(b), 2.0 * ra, 1e-6 * ra);
  for (const ContactState& s : b.contacts) EXPECT_EQ(s.d, 0.0);
}

TEST(CoupledSolver, ReactionMatchesUniaxialStiffness) {
  // A uniform strain e along x on a lattice with alpha < 1 carries a
  // stress between alpha E0 e and E0 e; the exact factor depends on the
  // facet orientations.
  const double w = 0.1;
  const double h = 0.05;
  const Model model = block_model(w, h, 0.008, 9);
  StepController c;
  c.increment = 1.0;
  const double du = 1e-6;
  CoupledSolver solver(model, tension_case(model.mesh(), w, du), c);
  SystemState s;
  ASSERT_TRUE(solver.solve(SystemState::zero(model), 1.0, 0.0, s).converged);
  const double sigma = solver.load(s) / h;
  const double e = du / w;
  EXPECT_GT(sigma, 0.29 * 60e9 * e);
  EXPECT_LT(sigma, 60e9 * e);
}

TEST(CoupledSolver, FluxFollowsPressureDrop) {
  const double w = 0.1;
  const double h = 0.05;
  const Model model = block_model(w, h, 0.01, 2);
  LoadCase lc;
  lc.supports = {{nearest(model.mesh(), {0, 0}), 0, 0, 0},
                 {nearest(model.mesh(), {0, 0}), 1, 0, 0},
                 {nearest(model.mesh(), {0, 0}), 2, 0, 0}};
  for (int p = 0; p < static_cast<int>(model.mesh().transport_nodes.size()); ++p) {
    const Vec2 x = model.mesh().transport_nodes[p].pos;
    if (x.x < 1e-12) {
      lc.pressures.push_back({p, 0.0, 1e5});
      lc.flux_nodes.push_back(p);
    } else if (x.x > w - 1e-12) {
      lc.pressures.push_back({p, 0.0, 0.0});
    }
  }
  StepController c;
  c.increment = 1.0;
  CoupledSolver solver(model, lc, c);
  SystemState s;
  ASSERT_TRUE(solver.solve(SystemState::zero(model), 1.0, 0.0, s).converged);
  const double lambda = 1000.0 * 5e-18 / 8.9e-4;
  EXPECT_NEAR(solver.flux(s), lambda * 1e5 / w * h, 1e-8 * lambda * 1e5 / w * h);
}

TEST(CoupledSolver, StepAdvancesControlAndFailsCleanly) {
  const double w = 0.1;
  const Model model = block_model(w, 0.05, 0.01, 4);
  StepController c;
  c.increment = 0.5;
  CoupledSolver solver(model, tension_case(model.mesh(), w, 1e-7), c);
  const SystemState zero = SystemState::zero(model);
  SystemState out;
  const StepReport r = solver.step(zero, out);
  ASSERT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(out.control, 0.5);
  EXPECT_EQ(out.step, 1);

  // Far past the peak with a single iteration allowed.
  StepController tight = c;
  tight.increment = 200.0;
  tight.max_iterations = 1;
  tight.max_stagger = 1;
  tight.max_bisections = 0;
  tight.tol_rel = 1e-14;
  CoupledSolver failing(model, tension_case(model.mesh(), w, 1e-7), tight);
  SystemState bad;
  const StepReport f = failing.step(zero, bad);
  EXPECT_FALSE(f.converged);
  EXPECT_FALSE(f.message.empty());
}

TEST(CoupledSolver, BiotCouplingLoadsTheSolid) {
  const double w = 0.1;
  const Model model = block_model(w, 0.05, 0.01, 6, 1.0);
  LoadCase lc;
  const int corner = nearest(model.mesh(), {0, 0});
  for (int d = 0; d < 3; ++d) lc.supports.push_back({corner, d, 0, 0});
  for (int p = 0; p < static_cast<int>(model.mesh().transport_nodes.size()); ++p) {
    if (model.mesh().transport_nodes[p].boundary != PointKind::Interior) {
      lc.pressures.push_back({p, 0.0, 1e5});
    }
  }
  StepController c;
  c.increment = 1.0;
  CoupledSolver solver(model, lc, c);
  SystemState s;
  ASSERT_TRUE(solver.solve(SystemState::zero(model), 1.0, 0.0, s).converged);
  const int far = nearest(model.mesh(), {w, 0.05});
  const double beta = 1e5 / 60e9;
  EXPECT_NEAR(s.u[3 * far], beta * model.mesh().mech_nodes[far].pos.x, 1e-8 * beta * w);
}

}  // namespace
}  // namespace cdm
