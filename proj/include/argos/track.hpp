#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "argos/geometry.hpp"

namespace argos {

struct Waypoint {
  double x{};
  double y{};
  double v{};  // desired speed, m/s
};

/// Result of projecting a query point onto a polyline.
struct Projection {
  Vec2 point;
  double arc_s{};     // arc length of `point` along the polyline
  double distance{};  // |query - point|
  double lateral{};   // signed offset of the query, positive to the left of travel
  std::size_t segment{};
};

// Uniform grid over segment bounding boxes, used to answer nearest-segment
// queries without scanning the whole polyline.
struct SegmentGrid {
  double x0{}, y0{}, cell{5.0};
  int nx{0}, ny{0};
  std::vector<std::vector<std::size_t>> cells;

  int index_x(double x) const;
  int index_y(double y) const;
};

/// Ordered point list with arc-length parameterization. Closed polylines
/// carry an implicit segment from the last point back to the first.
class Polyline {
 public:
  Polyline() = default;
  Polyline(std::vector<Vec2> pts, bool closed);

  const std::vector<Vec2>& points() const { return pts_; }
  const std::vector<double>& cum_s() const { return cum_; }
  double length() const { return length_; }
  bool closed() const { return closed_; }
  std::size_t segment_count() const;
  bool empty() const { return pts_.empty(); }

  /// Exact nearest point, accelerated by the segment grid. Agrees with
  /// closest_on() including its lowest-arc-length tie-break.
  Projection project(Vec2 q) const;
  /// Position and unit tangent heading at arc length s (wrapped when closed,
  /// clamped when open).
  std::pair<Vec2, double> pose_at(double s) const;
  double wrap_s(double s) const;

 private:
  friend Projection closest_on(const Polyline& line, Vec2 q);
  void project_segment(std::size_t i, Vec2 q, Projection& best) const;

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
  double length_{0.0};
  bool closed_{false};
  SegmentGrid grid_;
};

/// Brute-force nearest point on a polyline (g(o1, o2) helper). Ties within
/// 1e-12 m resolve to the lower arc length.
Projection closest_on(const Polyline& line, Vec2 q);

/// Point `d` meters from `from` along the ray toward `toward` (h helper).
Vec2 offset_toward(Vec2 from, Vec2 toward, double d);

/// Returns `a` when |anchor - a| > |anchor - b|, else `b` (j helper, as printed).
Vec2 farther_of(Vec2 anchor, Vec2 a, Vec2 b);

/// (from.x + d cos theta, from.y + d sin theta) (k helper).
Vec2 project_along(Vec2 from, double theta, double d);

class Raceline {
 public:
  Raceline() = default;
  explicit Raceline(std::vector<Waypoint> wps);

  const std::vector<Waypoint>& waypoints() const { return wps_; }
  const Polyline& path() const { return path_; }
  const std::vector<double>& cum_s() const { return path_.cum_s(); }
  double total_length() const { return path_.length(); }

  Projection project(Vec2 q) const { return path_.project(q); }
  std::pair<Vec2, double> pose_at(double s) const { return path_.pose_at(s); }
  double speed_at(double s) const;

 private:
  std::vector<Waypoint> wps_;
  Polyline path_;
};

struct TrackBounds {
  Polyline left;
  Polyline right;
};

/// Half-open arc-length interval [s_start, s_end) on the raceline.
struct PassingZone {
  double s_start{};
  double s_end{};
};

struct TrackConfig {
  double straight_length{600.0};
  double turn_radius{200.0};
  double track_width{40.0};
  double waypoint_spacing{1.0};
  double straight_speed{50.0};
  double corner_speed{42.0};
  double raceline_offset{0.0};  // racing lane offset from the centerline, outward positive
  double speed_ramp_accel{4.0};
};

struct Track {
  TrackConfig config;
  Raceline raceline;
  TrackBounds bounds;
  std::vector<PassingZone> zones;

  /// True when p lies right of the left boundary and left of the right one,
  /// with at least `margin` meters to spare on both sides.
  bool contains(Vec2 p, double margin = 0.0) const;
};

/// Stadium oval: two straights joined by two semicircles, driven
/// counter-clockwise starting at the beginning of the lower straight.
Track build_oval_track(const TrackConfig& config);

/// arc_s(opp) - arc_s(ego), unwrapped into (-L/2, L/2]. Positive when the
/// opponent is ahead.
double arc_separation(const Raceline& raceline, Vec2 ego, Vec2 opp);
double unwrap_separation(double ds, double total_length);

bool in_passing_zone(std::span<const PassingZone> zones, double arc_s);

/// Raceline as CSV with columns s,x,y,v.
std::string raceline_csv(const Raceline& raceline);

}  // namespace argos
