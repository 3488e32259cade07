#include "cdm/delaunay.hpp"

#include "cdm/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <string>
#include <unordered_set>

namespace cdm {

DelaunayTriangulation::DelaunayTriangulation(std::span<const Vec2> points)
    : n_(points.size()) {
  if (n_ < 3) throw GeometryError("triangulation needs at least 3 points");

  double xmin = std::numeric_limits<double>::max();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const Vec2 p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw GeometryError("non-finite point in triangulation input");
    }
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }

  {
    bool any_turn = false;
    for (std::size_t i = 2; i < n_ && !any_turn; ++i) {
      any_turn = orient2d(points[0], points[1], points[i]) != 0.0;
    }
    if (!any_turn) throw GeometryError("all triangulation input points are collinear");
  }

  const double span = std::max({xmax - xmin, ymax - ymin, 1e-300});
  const Vec2 mid{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
  const double big = 1.0e4 * span;

  pts_.assign(points.begin(), points.end());
  pts_.push_back({mid.x - 2.0 * big, mid.y - big});
  pts_.push_back({mid.x + 2.0 * big, mid.y - big});
  pts_.push_back({mid.x, mid.y + 2.0 * big});

  tris_.reserve(2 * n_ + 8);
  const int n = static_cast<int>(n_);
  last_ = new_triangle(n, n + 1, n + 2);
  tris_[last_].nbr = {-1, -1, -1};

  for (int i = 0; i < n; ++i) insert(i);

  result_.reserve(2 * n_);
  for (const Tri& t : tris_) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    result_.push_back(t.v);
  }
  if (result_.empty()) throw GeometryError("triangulation produced no finite triangles");
}

int DelaunayTriangulation::new_triangle(int a, int b, int c) {
  int idx = 0;
  if (!free_.empty()) {
    idx = free_.back();
    free_.pop_back();
    tris_[idx] = Tri{{a, b, c}, {-1, -1, -1}, true};
  } else {
    idx = static_cast<int>(tris_.size());
    tris_.push_back(Tri{{a, b, c}, {-1, -1, -1}, true});
  }
  return idx;
}

bool DelaunayTriangulation::in_circumcircle(const Tri& t, Vec2 p) const {
  return incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0.0;
}

int DelaunayTriangulation::locate(Vec2 p, int start) const {
  int cur = start;
  // Visibility walk; the rotating start edge prevents cycling on
  // degenerate layouts.
  unsigned rot = 0;
  for (std::size_t guard = 0; guard < 4 * tris_.size() + 16; ++guard) {
    const Tri& t = tris_[cur];
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = static_cast<int>((k + rot) % 3);
      const Vec2 a = pts_[t.v[(i + 1) % 3]];
      const Vec2 b = pts_[t.v[(i + 2) % 3]];
      if (orient2d(a, b, p) < 0.0) {
        next = t.nbr[i];
        break;
      }
    }
    ++rot;
    if (next < 0) return cur;
    cur = next;
  }
  // Fall back to exhaustive search.
  for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
    const Tri& t = tris_[i];
    if (!t.alive) continue;
    if (orient2d(pts_[t.v[0]], pts_[t.v[1]], p) >= 0.0 &&
        orient2d(pts_[t.v[1]], pts_[t.v[2]], p) >= 0.0 &&
        orient2d(pts_[t.v[2]], pts_[t.v[0]], p) >= 0.0) {
      return i;
    }
  }
  throw GeometryError("point location failed");
}

void DelaunayTriangulation::insert(int pi) {
  const Vec2 p = pts_[pi];
  const int t0 = locate(p, last_);
  for (int k = 0; k < 3; ++k) {
    if (pts_[tris_[t0].v[k]] == p) {
      throw GeometryError("duplicate point in triangulation input (index " +
                          std::to_string(pi) + ")");
    }
  }

  // Collect the cavity of triangles whose circumcircle strictly contains p.
  std::vector<int> cavity{t0};
  std::unordered_set<int> in_cavity{t0};
  struct BoundaryEdge {
    int a, b, outside;
  };
  std::vector<BoundaryEdge> boundary;
  for (std::size_t head = 0; head < cavity.size(); ++head) {
    const int ti = cavity[head];
    for (int i = 0; i < 3; ++i) {
      const int nb = tris_[ti].nbr[i];
      const int a = tris_[ti].v[(i + 1) % 3];
      const int b = tris_[ti].v[(i + 2) % 3];
      if (nb >= 0 && in_cavity.count(nb)) continue;
      if (nb >= 0 && in_circumcircle(tris_[nb], p)) {
        in_cavity.insert(nb);
        cavity.push_back(nb);
        continue;
      }
      boundary.push_back({a, b, nb});
    }
  }
  // Edges recorded before their outer neighbour joined the cavity are stale.
  std::erase_if(boundary, [&](const BoundaryEdge& e) {
    return e.outside >= 0 && in_cavity.count(e.outside) != 0;
  });

  for (const int ti : cavity) {
    tris_[ti].alive = false;
    free_.push_back(ti);
  }

  std::unordered_map<int, int> by_start;  // edge start vertex -> new triangle
  by_start.reserve(boundary.size() * 2);
  std::vector<int> created;
  created.reserve(boundary.size());
  for (const BoundaryEdge& e : boundary) {
    const int t = new_triangle(e.a, e.b, pi);
    // v = {a, b, p}: nbr[2] opposite p is the outside triangle.
    tris_[t].nbr[2] = e.outside;
    if (e.outside >= 0) {
      Tri& o = tris_[e.outside];
      for (int k = 0; k < 3; ++k) {
        const int oa = o.v[(k + 1) % 3];
        const int ob = o.v[(k + 2) % 3];
        if (oa == e.b && ob == e.a) {
          o.nbr[k] = t;
          break;
        }
      }
    }
    by_start[e.a] = t;
    created.push_back(t);
  }
  // New triangle (a, b, p): across (b, p) lies the fan triangle (b, c, p),
  // whose edge (p, b) is opposite its v[1].
  for (const int t : created) {
    const int nb = by_start.at(tris_[t].v[1]);
    tris_[t].nbr[0] = nb;
    tris_[nb].nbr[1] = t;
  }
  last_ = created.front();
}

}  // namespace cdm
