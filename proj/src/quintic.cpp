#include "argos/quintic.hpp"

#include <cmath>

namespace argos {

std::array<double, 6> fit_quintic_axis(double xs, double vs, double as, double xe, double ve, double ae,
                                       double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("fit_quintic: T must be positive");
  // Closed-form inverse of
  //   [T^3   T^4    T^5 ] [a3]   [xe - xs - vs T - as T^2 / 2]
  //   [3T^2  4T^3   5T^4] [a4] = [ve - vs - as T             ]
  //   [6T    12T^2  20T^3] [a5]  [ae - as                    ]
  const double r1 = xe - xs - vs * T - 0.5 * as * T * T;
  const double r2 = ve - vs - as * T;
  const double r3 = ae - as;
  const double T2 = T * T, T3 = T2 * T;
  std::array<double, 6> c{};
  c[0] = xs;
  c[1] = vs;
  c[2] = 0.5 * as;
  c[3] = (10.0 * r1 - 4.0 * r2 * T + 0.5 * r3 * T2) / T3;
  c[4] = (-15.0 * r1 + 7.0 * r2 * T - r3 * T2) / (T3 * T);
  c[5] = (6.0 * r1 - 3.0 * r2 * T + 0.5 * r3 * T2) / (T3 * T2);
  return c;
}

QuinticSegment fit_quintic(const BoundaryState& start, const BoundaryState& end, double T) {
  QuinticSegment seg;
  seg.T = T;
  seg.cx = fit_quintic_axis(start.pos.x, start.vel.x, start.acc.x, end.pos.x, end.vel.x, end.acc.x, T);
  seg.cy = fit_quintic_axis(start.pos.y, start.vel.y, start.acc.y, end.pos.y, end.vel.y, end.acc.y, T);
  return seg;
}

namespace {

void eval_axis(const std::array<double, 6>& c, double t, double& p, double& v, double& a) {
  p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
  v = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
  a = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
}

}  // namespace

BoundaryState eval_quintic(const QuinticSegment& seg, double t) {
  if (!(t >= 0.0 && t <= seg.T)) throw ParameterError("eval_quintic: t outside [0, T]");
  BoundaryState s;
  eval_axis(seg.cx, t, s.pos.x, s.vel.x, s.acc.x);
  eval_axis(seg.cy, t, s.pos.y, s.vel.y, s.acc.y);
  return s;
}

}  // namespace argos
