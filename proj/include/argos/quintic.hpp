#pragma once

#include <array>

#include "argos/geometry.hpp"

namespace argos {

/// Planar kinematic state at a spline knot.
struct BoundaryState {
  Vec2 pos;
  Vec2 vel;
  Vec2 acc;
};

/// s(t) = a0 + a1 t + ... + a5 t^5 per planar axis, valid on [0, T].
struct QuinticSegment {
  std::array<double, 6> cx{};
  std::array<double, 6> cy{};
  double T{};
};

/// Coefficients for one axis from start/end position, velocity and acceleration.
std::array<double, 6> fit_quintic_axis(double xs, double vs, double as, double xe, double ve, double ae,
                                       double T);

QuinticSegment fit_quintic(const BoundaryState& start, const BoundaryState& end, double T);

BoundaryState eval_quintic(const QuinticSegment& seg, double t);

}  // namespace argos
