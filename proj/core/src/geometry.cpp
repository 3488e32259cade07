#include "cdm/geometry.hpp"

#include <algorithm>

namespace cdm {

double signed_area(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Vec2 polygon_centroid(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n == 0) return {};
  // Shift to the first vertex so the accumulation does not lose digits far
  // from the origin.
  const Vec2 o = polygon[0];
  double a2 = 0.0;
  Vec2 acc{};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = polygon[i] - o;
    const Vec2 q = polygon[(i + 1) % n] - o;
    const double w = cross(p, q);
    a2 += w;
    acc += w * (p + q);
  }
  if (std::abs(a2) < 1e-300) {
    Vec2 mean{};
    for (const Vec2 p : polygon) mean += p;
    return mean / static_cast<double>(n);
  }
  return o + acc / (3.0 * a2);
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < xc) inside = !inside;
    }
  }
  return inside;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ba = b - a;
  const Vec2 ca = c - a;
  const double bl = dot(ba, ba);
  const double cl = dot(ca, ca);
  const double d = 2.0 * cross(ba, ca);
  return {a.x + (ca.y * bl - ba.y * cl) / d, a.y + (ba.x * cl - ca.x * bl) / d};
}

}  // namespace cdm
