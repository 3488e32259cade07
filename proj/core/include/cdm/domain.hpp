#pragma once

#include "cdm/geometry.hpp"

#include <optional>
#include <vector>

namespace cdm {

/// Circular inclusion removed from the domain (a rebar cross-section).
struct CircularHole {
  Vec2 center;
  double radius = 0.0;
};

/// 2D specimen: simple CCW outer polygon, circular holes, out-of-plane
/// thickness. All lengths in meters.
struct Domain {
  std::vector<Vec2> outer;
  std::vector<CircularHole> holes;
  double thickness = 1.0;

  /// Throws GeometryError when the polygon is degenerate, not CCW, or a hole
  /// is not strictly inside.
  void validate() const;

  double perimeter() const;
  /// Nominal area (outer polygon minus exact circle areas), m^2.
  double nominal_area() const;
  bool contains(Vec2 p) const;
  /// Distance from p to the nearest boundary curve (edge or hole circle).
  double distance_to_boundary(Vec2 p) const;
  /// Point at perimeter arclength s along the outer polygon (wraps around).
  Vec2 outer_point(double s) const;
  /// Index of the outer edge containing arclength s.
  int outer_edge_at(double s) const;
  /// Cumulative arclength at the start of each outer edge (size = n + 1).
  std::vector<double> outer_arclengths() const;

  static Domain rectangle(double width, double height, double thickness = 1.0);
};

/// Graded refinement region: fine spacing inside r_fine, linear transition to
/// the base spacing at r_transition.
struct DensityOverride {
  Vec2 center;
  double r_transition = 0.0;
  double r_fine = 0.0;
  double fine_lmin = 0.0;
};

/// Minimum generator-point spacing as a function of position.
struct DensityField {
  double base_lmin = 0.0;
  std::vector<DensityOverride> overrides;

  void validate() const;
  /// Minimum over the base spacing and every override.
  double operator()(Vec2 p) const;
  double min_spacing() const;
};

/// Linear grading between fine and coarse spacing, shared by the density
/// field and the refinement planner.
double graded_spacing(double dist, double r_fine, double r_transition,
                      double fine_lmin, double coarse_lmin);

}  // namespace cdm
