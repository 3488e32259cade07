#include "cdm/delaunay.hpp"
#include "cdm/domain.hpp"
#include "cdm/predicates.hpp"
#include "cdm/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

namespace cdm {
namespace {

// Andrew's monotone chain, used as an independent hull-area oracle.
double hull_area(std::vector<Vec2> p) {
  std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && turn(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  double a = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) a += cross(h[i], h[(i + 1) % h.size()]);
  return 0.5 * a;
}

TEST(Predicates, OrientationSigns) {
  EXPECT_GT(orient2d({0, 0}, {1, 0}, {0, 1}), 0.0);
  EXPECT_LT(orient2d({0, 0}, {0, 1}, {1, 0}), 0.0);
  EXPECT_EQ(orient2d({0, 0}, {1, 1}, {3, 3}), 0.0);
}

TEST(Predicates, IncircleExactOnCocircularPoints) {
  EXPECT_EQ(incircle({1, 0}, {0, 1}, {-1, 0}, {0, -1}), 0.0);
  EXPECT_GT(incircle({1, 0}, {0, 1}, {-1, 0}, {0, 0}), 0.0);
  EXPECT_LT(incircle({1, 0}, {0, 1}, {-1, 0}, {2, 2}), 0.0);
}

TEST(Delaunay, CocircularSquareGivesFiveEdges) {
  const std::vector<Vec2> pts = {{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}};
  DelaunayTriangulation dt(pts);
  ASSERT_EQ(dt.triangles().size(), 2u);
  std::set<std::pair<int, int>> edges;
  for (const auto& t : dt.triangles()) {
    for (int k = 0; k < 3; ++k) {
      edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
    }
    const Vec2 c = circumcenter(pts[t[0]], pts[t[1]], pts[t[2]]);
    EXPECT_NEAR(c.x, 0.5, 1e-15);
    EXPECT_NEAR(c.y, 0.5, 1e-15);
  }
  EXPECT_EQ(edges.size(), 5u);
}

TEST(Delaunay, RejectsDegenerateInput) {
  const std::vector<Vec2> two = {{0, 0}, {1, 0}};
  EXPECT_THROW(DelaunayTriangulation{two}, GeometryError);
  const std::vector<Vec2> line = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(DelaunayTriangulation{line}, GeometryError);
  const std::vector<Vec2> dup = {{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  EXPECT_THROW(DelaunayTriangulation{dup}, GeometryError);
}

TEST(Delaunay, EmptyCircumcirclesAndHullCoverage) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec2> pts(300);
  for (auto& p : pts) p = {U(gen), U(gen)};
  DelaunayTriangulation dt(pts);
  double area = 0.0;
  for (const auto& t : dt.triangles()) {
    const double a = orient2d(pts[t[0]], pts[t[1]], pts[t[2]]);
    ASSERT_GT(a, 0.0);
    area += 0.5 * a;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (i == t[0] || i == t[1] || i == t[2]) continue;
      ASSERT_LE(incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[i]), 0.0);
    }
  }
  EXPECT_NEAR(area, hull_area(pts), 1e-12);
}

TEST(Domain, DensityGrading) {
  DensityField f;
  f.base_lmin = 0.01;
  f.overrides.push_back({{0.0, 0.0}, 0.024, 0.015, 0.003});
  EXPECT_DOUBLE_EQ(f({0.0, 0.0}), 0.003);
  EXPECT_DOUBLE_EQ(f({0.1, 0.0}), 0.01);
  EXPECT_NEAR(f({0.0195, 0.0}), 0.5 * (0.003 + 0.01), 1e-15);
  f.validate();
  f.overrides[0].r_fine = 0.03;
  EXPECT_THROW(f.validate(), GeometryError);
}

TEST(Sampling, PackingBoundInUnitSquare) {
  // Corners plus center are pairwise >= sqrt(2)/2 apart, so spacing 0.6
  // admits five points; the best seven-point spacing is about 0.536, so
  // six is the bound. Above sqrt(2)/2 at most four points fit.
  const Domain d = Domain::rectangle(1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratorSet g = sample_generator_points(d, DensityField{0.6, {}}, seed);
    EXPECT_GE(g.size(), 4u);
    EXPECT_LE(g.size(), 6u);
    const GeneratorSet h = sample_generator_points(d, DensityField{0.71, {}}, seed);
    EXPECT_EQ(h.size(), 4u);
  }
}

TEST(Sampling, DeterministicAndSpaced) {
  const Domain d = Domain::rectangle(0.3, 0.2);
  DensityField f{0.02, {}};
  const GeneratorSet a = sample_generator_points(d, f, 42);
  const GeneratorSet b = sample_generator_points(d, f, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pos, b[i].pos);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      EXPECT_GE(distance(a[i].pos, a[j].pos), 0.02 * (1 - 1e-12));
    }
  }
  const GeneratorSet c = sample_generator_points(d, f, 43);
  EXPECT_FALSE(c.size() == a.size() && c[5].pos == a[5].pos);
}

TEST(Sampling, CollapsedOverrideKeepsBaseSpacing) {
  const Domain d = Domain::rectangle(0.2, 0.2);
  DensityField f{0.02, {{{0.1, 0.1}, 0.08, 0.05, 0.02}}};
  const GeneratorSet g = sample_generator_points(d, f, 3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double nn = 1e9;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (i != j) nn = std::min(nn, distance(g[i].pos, g[j].pos));
    }
    EXPECT_GE(nn, 0.02 * (1 - 1e-12));
  }
}

TEST(Sampling, Errors) {
  const Domain d = Domain::rectangle(1.0, 1.0);
  DensityField f{0.1, {}};
  SamplingOptions o;
  o.saturation = 0;
  EXPECT_THROW(sample_generator_points(d, f, 1, o), GeometryError);
  Domain flat;
  flat.outer = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(sample_generator_points(flat, f, 1), GeometryError);
}

}  // namespace
}  // namespace cdm
