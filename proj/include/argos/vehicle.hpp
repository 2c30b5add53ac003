#pragma once

#include "argos/geometry.hpp"

namespace argos {

struct VehicleState {
  double x{};
  double y{};
  double phi{};  // global heading, (-pi, pi]
  double v{};    // m/s, never negative

  Vec2 position() const { return {x, y}; }
};

struct Command {
  double a{};      // m/s^2
  double delta{};  // steering, rad
};

struct VehicleParams {
  double wheelbase{3.0};   // L, also used as L_WB in guide placement
  double car_length{4.9};  // L_CD
  double car_width{1.9};
  double a_min{-15.0};
  double a_max{10.0};
  double delta_min{-0.35};
  double delta_max{0.35};
  double v_max{50.0};    // unboosted top speed
  double u_boost{10.0};  // extra speed allowance while boosting

  void validate() const;
};

/// Boost time-energy reservoir. Drains in real time while boosting.
struct AemsReservoir {
  double budget{20.0};
  double per_lap_grant{20.0};
  bool drain_active{false};
};

/// Forward-Euler kinematic bicycle step. Speed is clamped to [0, speed_cap].
VehicleState step(const VehicleState& s, const Command& cmd, double dt, const VehicleParams& p,
                  double speed_cap);
VehicleState step(const VehicleState& s, const Command& cmd, double dt, const VehicleParams& p);

Command clamp_command(const Command& cmd, const VehicleParams& p);

AemsReservoir aems_drain(const AemsReservoir& res, double dt);
AemsReservoir aems_lap_reset(const AemsReservoir& res);

double speed_limit(const VehicleParams& p, const AemsReservoir& res, double flag_limit);

}  // namespace argos
