#include "argos/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace argos {

namespace {

constexpr double kTieEps = 1e-12;

bool better(const Projection& cand, const Projection& best) {
  if (cand.distance < best.distance - kTieEps) return true;
  if (cand.distance <= best.distance + kTieEps && cand.arc_s < best.arc_s) return true;
  return false;
}

}  // namespace

int SegmentGrid::index_x(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - x0) / cell)), 0, nx - 1);
}

int SegmentGrid::index_y(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - y0) / cell)), 0, ny - 1);
}

Polyline::Polyline(std::vector<Vec2> pts, bool closed) : pts_(std::move(pts)), closed_(closed) {
  if (pts_.empty()) throw ParameterError("polyline needs at least one point");
  cum_.resize(pts_.size());
  cum_[0] = 0.0;
  for (std::size_t i = 1; i < pts_.size(); ++i) cum_[i] = cum_[i - 1] + distance(pts_[i - 1], pts_[i]);
  length_ = cum_.back();
  if (closed_ && pts_.size() > 1) length_ += distance(pts_.back(), pts_.front());

  double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
  for (const auto& p : pts_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  // The margin keeps nearby off-line queries (boundary projections, cars
  // near a short path) on the ring search instead of the full scan.
  grid_.cell = 5.0;
  const double margin = 60.0;
  xmin -= margin;
  ymin -= margin;
  xmax += margin;
  ymax += margin;
  grid_.x0 = xmin - grid_.cell;
  grid_.y0 = ymin - grid_.cell;
  grid_.nx = static_cast<int>((xmax - grid_.x0) / grid_.cell) + 2;
  grid_.ny = static_cast<int>((ymax - grid_.y0) / grid_.cell) + 2;
  grid_.cells.assign(static_cast<std::size_t>(grid_.nx) * grid_.ny, {});
  const std::size_t nseg = segment_count();
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec2 a = pts_[i];
    const Vec2 b = pts_[(i + 1) % pts_.size()];
    const int ix0 = grid_.index_x(std::min(a.x, b.x)), ix1 = grid_.index_x(std::max(a.x, b.x));
    const int iy0 = grid_.index_y(std::min(a.y, b.y)), iy1 = grid_.index_y(std::max(a.y, b.y));
    for (int ix = ix0; ix <= ix1; ++ix)
      for (int iy = iy0; iy <= iy1; ++iy) grid_.cells[static_cast<std::size_t>(iy) * grid_.nx + ix].push_back(i);
  }
}

std::size_t Polyline::segment_count() const {
  if (pts_.size() < 2) return pts_.empty() ? 0 : 1;
  return closed_ ? pts_.size() : pts_.size() - 1;
}

void Polyline::project_segment(std::size_t i, Vec2 q, Projection& best) const {
  const Vec2 a = pts_[i];
  const Vec2 b = pts_.size() < 2 ? a : pts_[(i + 1) % pts_.size()];
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? std::clamp(dot(q - a, ab) / len2, 0.0, 1.0) : 0.0;
  Projection cand;
  cand.point = a + t * ab;
  cand.distance = distance(q, cand.point);
  cand.arc_s = cum_[i] + t * std::sqrt(len2);
  cand.segment = i;
  if (len2 > 0.0) cand.lateral = cross(ab, q - a) / std::sqrt(len2);
  if (better(cand, best)) best = cand;
}

Projection closest_on(const Polyline& line, Vec2 q) {
  if (line.empty()) throw ParameterError("closest_on: empty target");
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  best.arc_s = std::numeric_limits<double>::infinity();
  const std::size_t n = line.segment_count();
  for (std::size_t i = 0; i < n; ++i) line.project_segment(i, q, best);
  return best;
}

Projection Polyline::project(Vec2 q) const {
  if (pts_.size() < 2) return closest_on(*this, q);
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  best.arc_s = std::numeric_limits<double>::infinity();
  const bool inside = q.x >= grid_.x0 && q.y >= grid_.y0 && q.x < grid_.x0 + grid_.nx * grid_.cell &&
                      q.y < grid_.y0 + grid_.ny * grid_.cell;
  if (!inside) {
    // The ring bound does not hold for points clamped into border cells.
    for (std::size_t seg = 0; seg < segment_count(); ++seg) project_segment(seg, q, best);
    return best;
  }
  const int cx = grid_.index_x(q.x), cy = grid_.index_y(q.y);
  // Lower bound on the distance from q to any cell outside the ring block.
  const double fx = q.x - (grid_.x0 + cx * grid_.cell), fy = q.y - (grid_.y0 + cy * grid_.cell);
  const double edge = std::max(0.0, std::min({fx, fy, grid_.cell - fx, grid_.cell - fy}));
  const int max_r = std::max(grid_.nx, grid_.ny);
  auto visit = [&](int ix, int iy) {
    if (ix < 0 || iy < 0 || ix >= grid_.nx || iy >= grid_.ny) return;
    for (std::size_t seg : grid_.cells[static_cast<std::size_t>(iy) * grid_.nx + ix]) project_segment(seg, q, best);
  };
  for (int r = 0; r <= max_r; ++r) {
    if (r == 0) {
      visit(cx, cy);
    } else {
      for (int ix = cx - r; ix <= cx + r; ++ix) {
        visit(ix, cy - r);
        visit(ix, cy + r);
      }
      for (int iy = cy - r + 1; iy <= cy + r - 1; ++iy) {
        visit(cx - r, iy);
        visit(cx + r, iy);
      }
    }
    // Anything in ring r+1 or beyond is at least this far away.
    if (best.distance + kTieEps < r * grid_.cell + edge) break;
  }
  return best;
}

double Polyline::wrap_s(double s) const {
  if (!closed_) return std::clamp(s, 0.0, length_);
  double w = std::fmod(s, length_);
  if (w < 0.0) w += length_;
  return w;
}

std::pair<Vec2, double> Polyline::pose_at(double s) const {
  if (pts_.size() < 2) return {pts_.front(), 0.0};
  s = wrap_s(s);
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  if (!closed_ && i >= pts_.size() - 1) i = pts_.size() - 2;
  const Vec2 a = pts_[i];
  const Vec2 b = pts_[(i + 1) % pts_.size()];
  const double seg = distance(a, b);
  const double t = seg > 0.0 ? std::clamp((s - cum_[i]) / seg, 0.0, 1.0) : 0.0;
  return {a + t * (b - a), std::atan2(b.y - a.y, b.x - a.x)};
}

Vec2 offset_toward(Vec2 from, Vec2 toward, double d) {
  if (from == toward) throw ParameterError("offset_toward: degenerate direction");
  const double theta = std::atan2(toward.y - from.y, toward.x - from.x);
  return {from.x + d * std::cos(theta), from.y + d * std::sin(theta)};
}

Vec2 farther_of(Vec2 anchor, Vec2 a, Vec2 b) {
  return distance(anchor, a) > distance(anchor, b) ? a : b;
}

Vec2 project_along(Vec2 from, double theta, double d) {
  return {from.x + d * std::cos(theta), from.y + d * std::sin(theta)};
}

Raceline::Raceline(std::vector<Waypoint> wps) : wps_(std::move(wps)) {
  if (wps_.size() < 3) throw ParameterError("raceline needs at least three waypoints");
  std::vector<Vec2> pts;
  pts.reserve(wps_.size());
  for (const auto& w : wps_) {
    if (w.v < 0.0) throw ParameterError("raceline speed must be non-negative");
    pts.push_back({w.x, w.y});
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i] == pts[(i + 1) % pts.size()]) throw ParameterError("raceline waypoints must be distinct");
  path_ = Polyline(std::move(pts), true);
}

double Raceline::speed_at(double s) const {
  s = path_.wrap_s(s);
  const auto& cum = path_.cum_s();
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
  const std::size_t j = (i + 1) % wps_.size();
  const double s1 = j == 0 ? path_.length() : cum[j];
  const double t = (s1 > cum[i]) ? (s - cum[i]) / (s1 - cum[i]) : 0.0;
  return wps_[i].v + t * (wps_[j].v - wps_[i].v);
}

bool Track::contains(Vec2 p, double margin) const {
  // Both boundaries run counter-clockwise like the raceline.
  return bounds.left.project(p).lateral <= -margin && bounds.right.project(p).lateral >= margin;
}

namespace {

// Point and heading on a stadium of straight length `straight` and radius r at arc s.
std::pair<Vec2, double> stadium_pose(double straight, double r, double s) {
  constexpr double kPi = std::numbers::pi;
  const double half = straight / 2.0;
  const double arc = kPi * r;
  if (s < straight) return {{-half + s, -r}, 0.0};
  s -= straight;
  if (s < arc) {
    const double a = s / r;
    return {{half + r * std::sin(a), -r * std::cos(a)}, a};
  }
  s -= arc;
  if (s < straight) return {{half - s, r}, kPi};
  s -= straight;
  const double a = s / r;
  return {{-half - r * std::sin(a), r * std::cos(a)}, wrap_angle(kPi + a)};
}

std::vector<Vec2> sample_stadium(double straight, double r, double spacing) {
  const double total = 2.0 * straight + 2.0 * std::numbers::pi * r;
  const auto n = static_cast<std::size_t>(std::max(3.0, std::round(total / spacing)));
  const double step = total / static_cast<double>(n);
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(stadium_pose(straight, r, step * static_cast<double>(i)).first);
  return pts;
}

}  // namespace

Track build_oval_track(const TrackConfig& c) {
  if (!(c.straight_length > 0.0) || !(c.turn_radius > 0.0) || !(c.track_width > 0.0) ||
      !(c.waypoint_spacing > 0.0) || !(c.straight_speed > 0.0) || !(c.corner_speed > 0.0) ||
      !(c.speed_ramp_accel > 0.0))
    throw ConfigError("track geometry and speeds must be positive");
  const double half_w = c.track_width / 2.0;
  if (c.turn_radius <= half_w) throw ConfigError("turn radius must exceed half the track width");
  if (std::abs(c.raceline_offset) >= half_w) throw ConfigError("raceline offset must stay inside the track");

  constexpr double kPi = std::numbers::pi;
  const double r = c.turn_radius + c.raceline_offset;
  const double straight = c.straight_length;
  const double total = 2.0 * straight + 2.0 * kPi * r;
  const auto n = static_cast<std::size_t>(std::max(3.0, std::round(total / c.waypoint_spacing)));
  const double step = total / static_cast<double>(n);

  std::vector<Waypoint> wps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = step * static_cast<double>(i);
    const Vec2 p = stadium_pose(straight, r, s).first;
    const bool on_straight = s < straight || (s >= straight + kPi * r && s < 2.0 * straight + kPi * r);
    wps[i] = {p.x, p.y, on_straight ? c.straight_speed : c.corner_speed};
  }
  // Limit speed changes to the ramp acceleration (two passes each way cover the wrap).
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 1; k <= n; ++k) {
      auto& cur = wps[k % n];
      cur.v = std::min(cur.v, std::sqrt(wps[k - 1].v * wps[k - 1].v + 2.0 * c.speed_ramp_accel * step));
    }
    for (std::size_t k = n; k-- > 0;) {
      auto& cur = wps[k];
      const auto& next = wps[(k + 1) % n];
      cur.v = std::min(cur.v, std::sqrt(next.v * next.v + 2.0 * c.speed_ramp_accel * step));
    }
  }

  Track track;
  track.config = c;
  track.raceline = Raceline(std::move(wps));
  track.bounds.left = Polyline(sample_stadium(straight, c.turn_radius - half_w, c.waypoint_spacing), true);
  track.bounds.right = Polyline(sample_stadium(straight, c.turn_radius + half_w, c.waypoint_spacing), true);
  track.zones = {{0.0, straight}, {straight + kPi * r, 2.0 * straight + kPi * r}};
  return track;
}

double unwrap_separation(double ds, double total_length) {
  const double half = total_length / 2.0;
  ds = std::fmod(ds, total_length);
  if (ds > half) ds -= total_length;
  if (ds <= -half) ds += total_length;
  return ds;
}

double arc_separation(const Raceline& raceline, Vec2 ego, Vec2 opp) {
  const double se = raceline.project(ego).arc_s;
  const double so = raceline.project(opp).arc_s;
  return unwrap_separation(so - se, raceline.total_length());
}

bool in_passing_zone(std::span<const PassingZone> zones, double arc_s) {
  return std::any_of(zones.begin(), zones.end(),
                     [arc_s](const PassingZone& z) { return arc_s >= z.s_start && arc_s < z.s_end; });
}

std::string raceline_csv(const Raceline& raceline) {
  std::ostringstream out;
  out.precision(10);
  out << "s,x,y,v\n";
  const auto& wps = raceline.waypoints();
  for (std::size_t i = 0; i < wps.size(); ++i)
    out << raceline.cum_s()[i] << ',' << wps[i].x << ',' << wps[i].y << ',' << wps[i].v << '\n';
  return out.str();
}

}  // namespace argos
