#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "argos/track.hpp"
#include "argos/vehicle.hpp"

namespace argos {

struct TrackerConfig {
  int horizon{10};  // T
  double dt{0.1};
  std::array<double, 4> Q{1.0, 1.0, 2.0, 0.2};      // x, y, phi, v
  std::array<double, 4> Q_f{2.0, 2.0, 4.0, 0.4};
  std::array<double, 2> R{0.001, 1.0};               // a, delta
  std::array<double, 2> R_d{0.005, 50.0};
  int max_iterations{4};

  void validate() const;
};

/// Geometry plus speed setpoints the tracker follows.
struct ReferencePath {
  Polyline path;
  std::vector<double> speeds;  // one per path point

  ReferencePath() = default;
  ReferencePath(std::span<const Waypoint> pts, bool closed);
  double speed_at(double s) const;
};

struct ReferenceWindow {
  std::vector<VehicleState> z;  // horizon + 1 states; z[0] anchors the window
};

struct MpcSolution {
  std::vector<Command> u;           // horizon commands
  std::vector<VehicleState> z;      // horizon + 1 predicted states
  double cost{};
  std::vector<double> iterate_costs;  // cost after each accepted iterate
};

/// Prediction model shared by the solver and the cost.
VehicleState predict_step(const VehicleState& s, const Command& u, double dt, const VehicleParams& p);

double mpc_cost(const VehicleState& x0, std::span<const Command> u, const ReferenceWindow& ref,
                const TrackerConfig& cfg, const VehicleParams& p);

/// Windows the reference ahead of the car. `speed_cap` bounds the setpoints.
ReferenceWindow extract_reference(const ReferencePath& ref, const VehicleState& state, const TrackerConfig& cfg,
                                  double speed_cap = 1e9);

/// Iterative linearize-and-solve with a box-constrained QP per iterate.
MpcSolution solve(const VehicleState& state, const ReferenceWindow& ref, const TrackerConfig& cfg,
                  const VehicleParams& params, std::span<const Command> warm_start = {});

Command first_command(const MpcSolution& sol, const VehicleParams& params);

/// Receding-horizon wrapper holding the warm start between ticks.
class PathTracker {
 public:
  PathTracker(TrackerConfig cfg, VehicleParams params) : cfg_(cfg), params_(params) {}

  Command control(const VehicleState& state, const ReferenceWindow& ref);
  const std::optional<MpcSolution>& last() const { return last_; }
  void reset() { last_.reset(); }

 private:
  TrackerConfig cfg_;
  VehicleParams params_;
  std::optional<MpcSolution> last_;
};

}  // namespace argos
