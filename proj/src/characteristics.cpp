#include "wkam/characteristics.hpp"

#include <cmath>

#include "wkam/legendre.hpp"

namespace wkam {

namespace {

struct Deriv {
  Vec2 x{};
  double u = 0.0;
  Vec2 p{};
};

Deriv rhs(const HamiltonianModel& model, const Vec2& x, double u, const Vec2& p) {
  const TorusPoint tp = TorusPoint::wrapped(x, model.dim);
  const HamiltonianGradient g = grad_H(model, tp, u, p);
  const double h = eval_H(model, tp, u, p);
  Deriv d;
  d.x = g.dp;
  d.p = -1.0 * (g.dx + g.du * p);
  d.u = dot(g.dp, p) - h;
  return d;
}

bool finite(const Vec2& x, double u, const Vec2& p) {
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(u) && std::isfinite(p[0]) &&
         std::isfinite(p[1]);
}

}  // namespace

Trajectory flow(const HamiltonianModel& model, const CharacteristicState& s0, double t,
                double dt_ode) {
  if (!(dt_ode > 0.0)) throw ConfigError("dt_ode", "must be positive");
  if (!(t >= 0.0)) throw ConfigError("t", "must be non-negative");
  const auto n = std::size_t(std::llround(t / dt_ode));
  Trajectory tr;
  tr.dt_ode = dt_ode;
  Vec2 x = s0.x.x;
  double u = s0.u;
  Vec2 p = s0.p;
  if (model.dim == 1) p[1] = 0.0;
  auto record = [&](std::size_t k) {
    CharacteristicState s;
    s.x = TorusPoint::wrapped(x, model.dim);
    s.u = u;
    s.p = p;
    s.t = s0.t + double(k) * dt_ode;
    tr.states.push_back(s);
    tr.H_values.push_back(eval_H(model, s.x, u, p));
  };
  if (!finite(x, u, p)) throw IntegrationError("flow: non-finite initial state", s0);
  record(0);
  for (std::size_t k = 0; k < n; ++k) {
    const double h = dt_ode;
    const Deriv k1 = rhs(model, x, u, p);
    const Deriv k2 = rhs(model, x + (h / 2) * k1.x, u + h / 2 * k1.u, p + (h / 2) * k1.p);
    const Deriv k3 = rhs(model, x + (h / 2) * k2.x, u + h / 2 * k2.u, p + (h / 2) * k2.p);
    const Deriv k4 = rhs(model, x + h * k3.x, u + h * k3.u, p + h * k3.p);
    const Vec2 nx = x + (h / 6) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    const double nu = u + h / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    const Vec2 np = p + (h / 6) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (!finite(nx, nu, np)) throw IntegrationError("flow: non-finite state", tr.states.back());
    x = {wrap_unit(nx[0]), model.dim == 2 ? wrap_unit(nx[1]) : 0.0};
    u = nu;
    p = np;
    record(k + 1);
  }
  return tr;
}

LawResidual dH_law_residual(const HamiltonianModel& model, const Trajectory& traj) {
  const std::size_t n = traj.states.size();
  if (n < 3) throw DomainError("dH_law_residual: need at least three states");
  LawResidual r;
  double sum_sq = 0.0;
  for (std::size_t s = 1; s + 1 < n; ++s) {
    const auto& st = traj.states[s];
    const double lhs = (traj.H_values[s + 1] - traj.H_values[s - 1]) / (2.0 * traj.dt_ode);
    const double rhs_v = -grad_H(model, st.x, st.u, st.p).du * traj.H_values[s];
    const double e = std::abs(lhs - rhs_v);
    r.max_abs = std::max(r.max_abs, e);
    sum_sq += e * e;
  }
  r.rms = std::sqrt(sum_sq / double(n - 2));
  r.strictly_decreasing = true;
  for (std::size_t s = 1; s < n; ++s) {
    if (!(traj.H_values[s] < traj.H_values[s - 1])) r.strictly_decreasing = false;
  }
  return r;
}

bool sign_consistent(const Trajectory& traj, double band) {
  if (traj.H_values.empty()) return true;
  const double h0 = traj.H_values.front();
  for (double h : traj.H_values) {
    if (h0 > band && h < -band) return false;
    if (h0 < -band && h > band) return false;
    if (std::abs(h0) <= band && std::abs(h) > band) return false;
  }
  return true;
}

MatchReport match_calibrated(const HamiltonianModel& model, const CalibratedCurve& curve,
                             const SpaceTimeField& spacetime, const MatchOptions& opts) {
  const Grid& grid = spacetime.grid();
  const std::size_t n = curve.points.size() - 1;
  const std::size_t m = opts.window;
  const std::size_t launch = std::max<std::size_t>(1, m);
  if (n < launch + 2) throw DomainError("match_calibrated: chain too short for the window");
  if (!(opts.dt_ode_max > 0.0)) throw ConfigError("dt_ode", "must be positive");
  if (spacetime.n_steps() != n || std::abs(spacetime.dt() - curve.dt) > 1e-15) {
    throw DomainError("match_calibrated: curve does not belong to this field");
  }

  MatchReport rep;
  rep.launch_step = launch;
  rep.last_step = n - 1;
  const TorusPoint x0 = grid.point(curve.points[launch]);
  if (m == 0) {
    rep.launch_velocity = curve.velocities[launch];
  } else {
    const Vec2 d = displacement(grid.point(curve.points[launch - m]), grid.point(curve.points[launch + m]));
    rep.launch_velocity = (1.0 / (2.0 * double(m) * curve.dt)) * d;
  }
  const double u0 = curve.u_values[launch];
  if (opts.momentum == MomentumSource::ChainVelocity) {
    rep.launch_momentum = legendre_transform(model, x0, u0, rep.launch_velocity).argmax_p;
  } else {
    const auto slice = spacetime.slice(launch);
    const auto ij = grid.index(curve.points[launch]);
    const double inv_2h = 0.5 * double(grid.n());
    rep.launch_momentum[0] = (slice[grid.flat(ij[0] + 1, ij[1])] - slice[grid.flat(ij[0] - 1, ij[1])]) * inv_2h;
    if (grid.dim() == 2) {
      rep.launch_momentum[1] = (slice[grid.flat(ij[0], ij[1] + 1)] - slice[grid.flat(ij[0], ij[1] - 1)]) * inv_2h;
    }
  }

  const auto sub = std::size_t(std::ceil(curve.dt / opts.dt_ode_max - 1e-9));
  const double h = curve.dt / double(sub);
  CharacteristicState s0{x0, u0, rep.launch_momentum, double(launch) * curve.dt};
  rep.trajectory = flow(model, s0, double(rep.last_step - launch) * curve.dt, h);

  for (std::size_t k = launch; k <= rep.last_step; ++k) {
    const auto& st = rep.trajectory.states[(k - launch) * sub];
    rep.sup_position = std::max(rep.sup_position, periodic_distance(st.x, grid.point(curve.points[k])));
    rep.sup_u = std::max(rep.sup_u, std::abs(st.u - curve.u_values[k]));
  }
  return rep;
}

}  // namespace wkam
