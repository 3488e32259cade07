#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace cdm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counter-clockwise rotation by 90 degrees; also the action of a unit
/// out-of-plane rotation on a lever arm.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }
constexpr double distance2(Vec2 a, Vec2 b) { return dot(b - a, b - a); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }

/// Signed shoelace area (positive for counter-clockwise vertex order).
double signed_area(std::span<const Vec2> polygon);
/// Area centroid of a simple polygon; falls back to the vertex mean for
/// degenerate input.
Vec2 polygon_centroid(std::span<const Vec2> polygon);
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
/// Circumcenter of a non-degenerate triangle.
Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c);

}  // namespace cdm
