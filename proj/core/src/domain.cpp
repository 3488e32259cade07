#include "cdm/domain.hpp"

#include "cdm/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cdm {

void Domain::validate() const {
  if (!(thickness > 0.0)) throw GeometryError("domain thickness must be positive");
  if (outer.size() < 3) throw GeometryError("domain polygon needs at least 3 vertices");
  const double area = signed_area(outer);
  if (!(area > 0.0)) {
    throw GeometryError("domain polygon must be counter-clockwise with positive area");
  }
  const std::size_t n = outer.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = outer[i];
    const Vec2 b = outer[(i + 1) % n];
    if (a == b) throw GeometryError("domain polygon has a repeated vertex");
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vec2 c = outer[j];
      const Vec2 d = outer[(j + 1) % n];
      const double o1 = cross(b - a, c - a);
      const double o2 = cross(b - a, d - a);
      const double o3 = cross(d - c, a - c);
      const double o4 = cross(d - c, b - c);
      if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 &&
          o3 != 0 && o4 != 0) {
        throw GeometryError("domain polygon is self-intersecting");
      }
    }
  }
  for (std::size_t h = 0; h < holes.size(); ++h) {
    const CircularHole& c = holes[h];
    if (!(c.radius > 0.0)) throw GeometryError("hole radius must be positive");
    if (!point_in_polygon(c.center, outer)) throw GeometryError("hole center outside domain");
    for (std::size_t i = 0; i < n; ++i) {
      if (distance_to_segment(c.center, outer[i], outer[(i + 1) % n]) <= c.radius) {
        throw GeometryError("hole is not strictly inside the domain");
      }
    }
    for (std::size_t k = 0; k < h; ++k) {
      if (distance(c.center, holes[k].center) <= c.radius + holes[k].radius) {
        throw GeometryError("holes overlap");
      }
    }
  }
}

double Domain::perimeter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    s += distance(outer[i], outer[(i + 1) % outer.size()]);
  }
  return s;
}

double Domain::nominal_area() const {
  double a = signed_area(outer);
  for (const CircularHole& h : holes) a -= std::numbers::pi * h.radius * h.radius;
  return a;
}

bool Domain::contains(Vec2 p) const {
  if (!point_in_polygon(p, outer)) return false;
  return std::none_of(holes.begin(), holes.end(), [&](const CircularHole& h) {
    return distance(p, h.center) <= h.radius;
  });
}

double Domain::distance_to_boundary(Vec2 p) const {
  double d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < outer.size(); ++i) {
    d = std::min(d, distance_to_segment(p, outer[i], outer[(i + 1) % outer.size()]));
  }
  for (const CircularHole& h : holes) {
    d = std::min(d, std::abs(distance(p, h.center) - h.radius));
  }
  return d;
}

std::vector<double> Domain::outer_arclengths() const {
  std::vector<double> s(outer.size() + 1, 0.0);
  for (std::size_t i = 0; i < outer.size(); ++i) {
    s[i + 1] = s[i] + distance(outer[i], outer[(i + 1) % outer.size()]);
  }
  return s;
}

int Domain::outer_edge_at(double s) const {
  const std::vector<double> acc = outer_arclengths();
  const double total = acc.back();
  s = std::fmod(s, total);
  if (s < 0) s += total;
  const auto it = std::upper_bound(acc.begin(), acc.end(), s);
  const int e = static_cast<int>(std::distance(acc.begin(), it)) - 1;
  return std::clamp(e, 0, static_cast<int>(outer.size()) - 1);
}

Vec2 Domain::outer_point(double s) const {
  const std::vector<double> acc = outer_arclengths();
  const double total = acc.back();
  s = std::fmod(s, total);
  if (s < 0) s += total;
  const int e = outer_edge_at(s);
  const Vec2 a = outer[e];
  const Vec2 b = outer[(e + 1) % outer.size()];
  const double t = (s - acc[e]) / (acc[e + 1] - acc[e]);
  // Keep axis-aligned edges exactly on their supporting line.
  Vec2 p = a + t * (b - a);
  if (a.x == b.x) p.x = a.x;
  if (a.y == b.y) p.y = a.y;
  return p;
}

Domain Domain::rectangle(double width, double height, double thickness) {
  Domain d;
  d.outer = {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
  d.thickness = thickness;
  return d;
}

double graded_spacing(double dist, double r_fine, double r_transition, double fine_lmin,
                      double coarse_lmin) {
  if (dist <= r_fine) return fine_lmin;
  if (dist >= r_transition) return coarse_lmin;
  const double t = (dist - r_fine) / (r_transition - r_fine);
  return fine_lmin + t * (coarse_lmin - fine_lmin);
}

void DensityField::validate() const {
  if (!(base_lmin > 0.0)) throw GeometryError("base minimum distance must be positive");
  for (const DensityOverride& o : overrides) {
    if (!(o.fine_lmin > 0.0) || o.fine_lmin > base_lmin) {
      throw GeometryError("override spacing must be in (0, base_lmin]");
    }
    if (!(o.r_fine < o.r_transition) || o.r_fine < 0.0) {
      throw GeometryError("override radii must satisfy 0 <= r_f < r_t");
    }
  }
}

double DensityField::operator()(Vec2 p) const {
  double v = base_lmin;
  for (const DensityOverride& o : overrides) {
    v = std::min(v, graded_spacing(distance(p, o.center), o.r_fine, o.r_transition,
                                   o.fine_lmin, base_lmin));
  }
  return v;
}

double DensityField::min_spacing() const {
  double v = base_lmin;
  for (const DensityOverride& o : overrides) v = std::min(v, o.fine_lmin);
  return v;
}

}  // namespace cdm
