#pragma once

#include "cdm/geometry.hpp"

namespace cdm {

/// Sign-exact orientation test. Positive when (a, b, c) turn counter-clockwise,
/// negative when clockwise, zero when collinear. Magnitude is meaningful only
/// when the floating-point filter succeeds.
double orient2d(Vec2 a, Vec2 b, Vec2 c);

/// Sign-exact in-circle test. Positive when d lies strictly inside the circle
/// through the counter-clockwise triangle (a, b, c), zero when cocircular.
double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

}  // namespace cdm
