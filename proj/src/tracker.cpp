#include "argos/tracker.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace argos {

void TrackerConfig::validate() const {
  if (horizon < 2) throw ConfigError("tracker horizon must be at least 2");
  if (!(dt > 0.0)) throw ConfigError("tracker dt must be positive");
  if (max_iterations < 1) throw ConfigError("tracker needs at least one iteration");
  for (double w : Q) if (w < 0.0) throw ConfigError("tracker weights must be non-negative");
  for (double w : Q_f) if (w < 0.0) throw ConfigError("tracker weights must be non-negative");
  for (double w : R) if (w < 0.0) throw ConfigError("tracker weights must be non-negative");
  for (double w : R_d) if (w < 0.0) throw ConfigError("tracker weights must be non-negative");
}

ReferencePath::ReferencePath(std::span<const Waypoint> pts, bool closed) {
  if (pts.empty()) throw TrackerError("reference trajectory is empty");
  std::vector<Vec2> xy;
  xy.reserve(pts.size());
  speeds.reserve(pts.size());
  for (const auto& w : pts) {
    xy.push_back({w.x, w.y});
    speeds.push_back(w.v);
  }
  path = Polyline(std::move(xy), closed);
}

double ReferencePath::speed_at(double s) const {
  const auto& cum = path.cum_s();
  if (speeds.size() == 1) return speeds[0];
  s = path.wrap_s(s);
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  if (!path.closed() && i >= speeds.size() - 1) return speeds.back();
  const std::size_t j = (i + 1) % speeds.size();
  const double s1 = j == 0 ? path.length() : cum[j];
  const double t = s1 > cum[i] ? std::clamp((s - cum[i]) / (s1 - cum[i]), 0.0, 1.0) : 0.0;
  return speeds[i] + t * (speeds[j] - speeds[i]);
}

VehicleState predict_step(const VehicleState& s, const Command& u, double dt, const VehicleParams& p) {
  VehicleState n;
  n.x = s.x + s.v * std::cos(s.phi) * dt;
  n.y = s.y + s.v * std::sin(s.phi) * dt;
  n.phi = s.phi + s.v * std::tan(u.delta) / p.wheelbase * dt;
  n.v = s.v + u.a * dt;
  return n;
}

namespace {

std::array<double, 4> state_error(const VehicleState& z, const VehicleState& ref) {
  return {z.x - ref.x, z.y - ref.y, wrap_angle(z.phi - ref.phi), z.v - ref.v};
}

std::vector<VehicleState> rollout(const VehicleState& x0, std::span<const Command> u, double dt,
                                  const VehicleParams& p) {
  std::vector<VehicleState> z(u.size() + 1);
  z[0] = x0;
  for (std::size_t t = 0; t < u.size(); ++t) z[t + 1] = predict_step(z[t], u[t], dt, p);
  return z;
}

double cost_of(const std::vector<VehicleState>& z, std::span<const Command> u, const ReferenceWindow& ref,
               const TrackerConfig& cfg) {
  const std::size_t T = u.size();
  double c = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const auto e = state_error(z[t], ref.z[t]);
    const auto& w = t == T ? cfg.Q_f : cfg.Q;
    for (int j = 0; j < 4; ++j) c += w[j] * e[j] * e[j];
  }
  for (std::size_t t = 0; t < T; ++t) {
    c += cfg.R[0] * u[t].a * u[t].a + cfg.R[1] * u[t].delta * u[t].delta;
    if (t + 1 < T) {
      const double da = u[t + 1].a - u[t].a, dd = u[t + 1].delta - u[t].delta;
      c += cfg.R_d[0] * da * da + cfg.R_d[1] * dd * dd;
    }
  }
  return c;
}

bool finite_state(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.phi) && std::isfinite(s.v);
}

}  // namespace

double mpc_cost(const VehicleState& x0, std::span<const Command> u, const ReferenceWindow& ref,
                const TrackerConfig& cfg, const VehicleParams& p) {
  if (ref.z.size() != u.size() + 1) throw TrackerError("reference window length mismatch");
  return cost_of(rollout(x0, u, cfg.dt, p), u, ref, cfg);
}

ReferenceWindow extract_reference(const ReferencePath& ref, const VehicleState& state, const TrackerConfig& cfg,
                                  double speed_cap) {
  if (ref.path.empty()) throw TrackerError("reference trajectory is empty");
  ReferenceWindow w;
  w.z.resize(static_cast<std::size_t>(cfg.horizon) + 1);
  double s = ref.path.project(state.position()).arc_s;
  for (auto& z : w.z) {
    const auto [p, heading] = ref.path.pose_at(s);
    const double v = std::clamp(ref.speed_at(s), 0.0, speed_cap);
    z = {p.x, p.y, heading, v};
    s += v * cfg.dt;
    if (!ref.path.closed()) s = std::min(s, ref.path.length());
  }
  return w;
}

MpcSolution solve(const VehicleState& state, const ReferenceWindow& ref, const TrackerConfig& cfg,
                  const VehicleParams& params, std::span<const Command> warm_start) {
  const std::size_t T = static_cast<std::size_t>(cfg.horizon);
  if (ref.z.size() != T + 1) throw TrackerError("reference window length mismatch");
  if (!finite_state(state)) throw TrackerError("non-finite vehicle state");
  for (const auto& z : ref.z)
    if (!finite_state(z)) throw TrackerError("non-finite reference state");

  const double h = cfg.dt;
  const std::size_t n = 2 * T;
  const std::array<double, 2> lo{params.a_min, params.delta_min};
  const std::array<double, 2> hi{params.a_max, params.delta_max};

  // Start from the better of the zero sequence and the (clamped) warm start.
  std::vector<Command> u(T);
  double best_cost = mpc_cost(state, u, ref, cfg, params);
  if (warm_start.size() == T) {
    std::vector<Command> ws(T);
    for (std::size_t t = 0; t < T; ++t) ws[t] = clamp_command(warm_start[t], params);
    const double c = mpc_cost(state, ws, ref, cfg, params);
    if (c < best_cost) {
      best_cost = c;
      u = ws;
    }
  }

  MpcSolution sol;
  sol.iterate_costs.push_back(best_cost);
  std::vector<double> G(4 * T * n), H(n * n), g(n), w(n), e(4 * T);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const auto z = rollout(state, u, h, params);

    // Sensitivities dz_t / du_k, t = 1..T, stored row-major [4T x n].
    std::fill(G.begin(), G.end(), 0.0);
    for (std::size_t k = 0; k < T; ++k) {
      const auto& zk = z[k];
      const double ct = std::cos(u[k].delta);
      std::array<double, 8> col{};  // 4 x 2, dz_{k+1}/du_k
      col[3 * 2 + 0] = h;                                              // dv/da
      col[2 * 2 + 1] = zk.v * h / (params.wheelbase * ct * ct);        // dphi/ddelta
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) G[(4 * k + r) * n + 2 * k + c] = col[r * 2 + c];
      for (std::size_t t = k + 1; t < T; ++t) {
        const auto& zt = z[t];
        const double cp = std::cos(zt.phi), sp = std::sin(zt.phi);
        const double tan_d = std::tan(u[t].delta);
        for (int c = 0; c < 2; ++c) {
          const double dx = G[(4 * (t - 1) + 0) * n + 2 * k + c];
          const double dy = G[(4 * (t - 1) + 1) * n + 2 * k + c];
          const double dp = G[(4 * (t - 1) + 2) * n + 2 * k + c];
          const double dv = G[(4 * (t - 1) + 3) * n + 2 * k + c];
          G[(4 * t + 0) * n + 2 * k + c] = dx - zt.v * sp * h * dp + cp * h * dv;
          G[(4 * t + 1) * n + 2 * k + c] = dy + zt.v * cp * h * dp + sp * h * dv;
          G[(4 * t + 2) * n + 2 * k + c] = dp + tan_d / params.wheelbase * h * dv;
          G[(4 * t + 3) * n + 2 * k + c] = dv;
        }
      }
    }
    for (std::size_t t = 1; t <= T; ++t) {
      const auto err = state_error(z[t], ref.z[t]);
      for (int j = 0; j < 4; ++j) e[4 * (t - 1) + j] = err[j];
    }

    // Objective in w = u + du:  w'Hw + 2c'w  with c = G'W(e - G u).
    std::vector<double> uflat(n);
    for (std::size_t t = 0; t < T; ++t) {
      uflat[2 * t] = u[t].a;
      uflat[2 * t + 1] = u[t].delta;
    }
    std::vector<double> resid(4 * T);
    for (std::size_t r = 0; r < 4 * T; ++r) {
      double s = e[r];
      for (std::size_t c = 0; c < n; ++c) s -= G[r * n + c] * uflat[c];
      resid[r] = s;
    }
    auto weight = [&](std::size_t r) {
      const std::size_t t = r / 4 + 1;
      return (t == T ? cfg.Q_f : cfg.Q)[r % 4];
    };
    std::fill(H.begin(), H.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t r = 0; r < 4 * T; ++r) {
      const double wr = weight(r);
      if (wr == 0.0) continue;
      const double* row = &G[r * n];
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] == 0.0) continue;
        g[i] += row[i] * wr * resid[r];
        for (std::size_t j = 0; j < n; ++j) H[i * n + j] += row[i] * wr * row[j];
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t i = 2 * t + c;
        H[i * n + i] += cfg.R[c];
        if (t + 1 < T) {
          const std::size_t j = i + 2;
          H[i * n + i] += cfg.R_d[c];
          H[j * n + j] += cfg.R_d[c];
          H[i * n + j] -= cfg.R_d[c];
          H[j * n + i] -= cfg.R_d[c];
        }
      }
    }

    // Projected Gauss-Seidel on the box-constrained QP.
    w = uflat;
    for (int sweep = 0; sweep < 200; ++sweep) {
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double hii = H[i * n + i];
        if (hii <= 0.0) continue;
        double s = g[i];
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) s += H[i * n + j] * w[j];
        const double nw = std::clamp(-s / hii, lo[i % 2], hi[i % 2]);
        change = std::max(change, std::abs(nw - w[i]) / (hi[i % 2] - lo[i % 2]));
        w[i] = nw;
      }
      if (change < 1e-7) break;
    }

    // Backtracking on the true nonlinear cost; only improving iterates are accepted.
    bool accepted = false;
    std::vector<Command> trial(T);
    for (double alpha = 1.0; alpha >= 1.0 / 32.0; alpha *= 0.5) {
      for (std::size_t t = 0; t < T; ++t) {
        trial[t].a = uflat[2 * t] + alpha * (w[2 * t] - uflat[2 * t]);
        trial[t].delta = uflat[2 * t + 1] + alpha * (w[2 * t + 1] - uflat[2 * t + 1]);
      }
      const double c = mpc_cost(state, trial, ref, cfg, params);
      if (c < best_cost) {
        best_cost = c;
        u = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    sol.iterate_costs.push_back(best_cost);
  }

  sol.u = std::move(u);
  sol.z = rollout(state, sol.u, h, params);
  sol.cost = best_cost;
  return sol;
}

Command first_command(const MpcSolution& sol, const VehicleParams& params) {
  assert(!sol.u.empty());
  return clamp_command(sol.u.front(), params);
}

Command PathTracker::control(const VehicleState& state, const ReferenceWindow& ref) {
  // The sim tick is shorter than the tracker step, so the previous sequence
  // is reused as-is rather than shifted by a whole step.
  std::vector<Command> warm;
  if (last_ && last_->u.size() == static_cast<std::size_t>(cfg_.horizon)) warm = last_->u;
  last_ = solve(state, ref, cfg_, params_, warm);
  return first_command(*last_, params_);
}

}  // namespace argos
