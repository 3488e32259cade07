#pragma once

#include "cdm/geometry.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace cdm {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counter-clockwise vertex triple into the input point array.
using TriangleIndices = std::array<int, 3>;

/// Incremental (Bowyer-Watson) Delaunay triangulation with exact predicates.
///
/// Points are inserted in index order. A point exactly on the circumcircle of
/// an existing triangle does not invalidate it, so cocircular ties resolve in
/// favour of the configuration built from lower-indexed points; the result is
/// deterministic for a given input sequence.
class DelaunayTriangulation {
 public:
  /// Throws GeometryError for fewer than three points, duplicate points or an
  /// entirely collinear input.
  explicit DelaunayTriangulation(std::span<const Vec2> points);

  /// Triangles not touching the bounding super-triangle, CCW.
  const std::vector<TriangleIndices>& triangles() const { return result_; }
  std::size_t num_points() const { return n_; }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nbr;  // nbr[i] is across the edge opposite v[i]
    bool alive = true;
  };

  void insert(int pi);
  int locate(Vec2 p, int start) const;
  bool in_circumcircle(const Tri& t, Vec2 p) const;
  int new_triangle(int a, int b, int c);

  std::vector<Vec2> pts_;
  std::size_t n_ = 0;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  int last_ = 0;
  std::vector<TriangleIndices> result_;
};

}  // namespace cdm
