#include "argos/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace argos {

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0) || !(car_length > 0.0) || !(car_width > 0.0))
    throw ConfigError("vehicle dimensions must be positive");
  if (!(a_min < 0.0 && a_max > 0.0)) throw ConfigError("acceleration limits must straddle zero");
  if (!(delta_min < 0.0 && delta_max > 0.0)) throw ConfigError("steering limits must straddle zero");
  if (!(v_max > 0.0) || u_boost < 0.0) throw ConfigError("speed limits must be positive");
}

VehicleState step(const VehicleState& s, const Command& cmd, double dt, const VehicleParams& p,
                  double speed_cap) {
  if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
  VehicleState n;
  n.x = s.x + s.v * std::cos(s.phi) * dt;
  n.y = s.y + s.v * std::sin(s.phi) * dt;
  n.phi = wrap_angle(s.phi + s.v * std::tan(cmd.delta) / p.wheelbase * dt);
  n.v = std::clamp(s.v + cmd.a * dt, 0.0, std::max(0.0, speed_cap));
  return n;
}

VehicleState step(const VehicleState& s, const Command& cmd, double dt, const VehicleParams& p) {
  return step(s, cmd, dt, p, std::numeric_limits<double>::infinity());
}

Command clamp_command(const Command& cmd, const VehicleParams& p) {
  return {std::clamp(cmd.a, p.a_min, p.a_max), std::clamp(cmd.delta, p.delta_min, p.delta_max)};
}

AemsReservoir aems_drain(const AemsReservoir& res, double dt) {
  AemsReservoir out = res;
  if (!res.drain_active || res.budget <= 0.0) return out;
  out.budget = std::max(0.0, res.budget - dt);
  if (out.budget <= 0.0) out.drain_active = false;
  return out;
}

AemsReservoir aems_lap_reset(const AemsReservoir& res) {
  AemsReservoir out = res;
  out.budget = res.per_lap_grant;
  return out;
}

double speed_limit(const VehicleParams& p, const AemsReservoir& res, double flag_limit) {
  const bool boosting = res.drain_active && res.budget > 0.0;
  return std::min(flag_limit, p.v_max + (boosting ? p.u_boost : 0.0));
}

}  // namespace argos
