#include "wkam/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wkam/legendre.hpp"

namespace wkam {

namespace {

void apply_into(const LaxOleinikKernel& kernel, std::span<const double> phi,
                const SpaceTimeField& candidate, SpaceTimeField& out,
                std::vector<std::int32_t>* argmin) {
  const std::size_t size = kernel.grid().size();
  out.set_slice(0, phi);
  if (argmin) argmin->assign(candidate.n_steps() * size, -1);
  for (std::size_t n = 0; n < candidate.n_steps(); ++n) {
    std::span<std::int32_t> arg;
    if (argmin) arg = std::span<std::int32_t>(argmin->data() + n * size, size);
    kernel.step(out.slice(n), candidate.slice(n), candidate.slice(n + 1), out.slice(n + 1), arg);
  }
}

void check_options(const HamiltonianModel& model, const SemigroupOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("tol", "tolerance must be positive");
  if (opts.max_iter < 1) throw ConfigError("max_iter", "need at least one iteration");
  if (opts.disc.dt * model.lipschitz_u() > 1.0) {
    throw ConfigError("dt", "dt * lambda_L must not exceed 1");
  }
}

}  // namespace

bool FixedPointReport::bound_respected(double factor) const {
  for (std::size_t k = 0; k < gaps.size() && k < bounds.size(); ++k) {
    if (gaps[k] > factor * bounds[k]) return false;
  }
  return true;
}

SpaceTimeField apply_A(const HamiltonianModel& model, const GridField& phi,
                       const SpaceTimeField& candidate, const Discretization& disc,
                       std::vector<std::int32_t>* argmin) {
  if (candidate.grid() != phi.grid()) throw ConfigError("candidate", "grid differs from phi");
  if (std::abs(candidate.dt() - disc.dt) > 1e-15 * std::max(1.0, disc.dt)) {
    throw ConfigError("candidate", "time step differs from the discretization");
  }
  LaxOleinikKernel kernel(model, phi.grid(), disc);
  SpaceTimeField out(phi.grid(), disc.dt, candidate.n_steps());
  apply_into(kernel, phi.values(), candidate, out, argmin);
  return out;
}

FixedPointResult fixed_point(const HamiltonianModel& model, const GridField& phi, double T,
                             const SemigroupOptions& opts, const SpaceTimeField* start) {
  check_options(model, opts);
  const Grid& grid = phi.grid();
  const double dt = opts.disc.dt;
  const std::size_t n = step_count(T, dt);

  FixedPointReport report;
  report.horizon = double(n) * dt;
  report.lipschitz_u = model.lipschitz_u();
  report.tol = opts.tol;

  SpaceTimeField u(grid, dt, n);
  if (start) {
    if (start->grid() != grid || start->n_steps() != n) {
      throw ConfigError("candidate", "initial candidate has the wrong shape");
    }
    u = *start;
  } else {
    for (std::size_t k = 0; k <= n; ++k) u.set_slice(k, phi.values());
  }
  if (n == 0) {
    u.set_slice(0, phi.values());
    report.gaps.push_back(0.0);
    report.bounds.push_back(0.0);
    return {std::move(u), std::move(report)};
  }

  LaxOleinikKernel kernel(model, grid, opts.disc);
  SpaceTimeField w(grid, dt, n);
  const double tl = report.horizon * report.lipschitz_u;
  double term = 1.0;  // (T·λ)^k / k!
  for (int k = 0; k <= opts.max_iter; ++k) {
    apply_into(kernel, phi.values(), u, w, nullptr);
    const double gap = sup_distance(w.data(), u.data());
    report.gaps.push_back(gap);
    if (k > 0) term *= tl / double(k);
    report.bounds.push_back(term * report.gaps.front());
    if (gap < opts.tol) {
      report.iterations = k;
      return {std::move(u), std::move(report)};
    }
    std::swap(u, w);
  }
  report.iterations = opts.max_iter;
  throw FixedPointError("fixed_point: Picard gap above tolerance after max_iter iterations",
                        std::move(report));
}

double block_length(const HamiltonianModel& model, const SemigroupOptions& opts) {
  double b = opts.block_length;
  if (!(b > 0.0)) {
    const double lip = model.lipschitz_u();
    b = lip > 0.0 ? std::min(4.0, 2.0 / lip) : 4.0;
  }
  const double dt = opts.disc.dt;
  const double steps = std::max(1.0, std::floor(b / dt + 1e-9));
  return steps * dt;
}

GridField march(const HamiltonianModel& model, const GridField& phi, double t_end,
                const SemigroupOptions& opts,
                const std::function<void(std::size_t, double, std::span<const double>)>& observer) {
  const double dt = opts.disc.dt;
  const std::size_t total = step_count(t_end, dt);
  const std::size_t per_block = step_count(block_length(model, opts), dt);
  if (observer) observer(0, 0.0, phi.values());
  GridField cur = phi;
  std::size_t done = 0;
  while (done < total) {
    const std::size_t len = std::min(per_block, total - done);
    auto res = fixed_point(model, cur, double(len) * dt, opts);
    if (observer) {
      for (std::size_t k = 1; k <= len; ++k) {
        observer(done + k, double(done + k) * dt, res.field.slice(k));
      }
    }
    cur = res.field.slice_field(len);
    done += len;
  }
  return cur;
}

GridField step_T(const HamiltonianModel& model, const GridField& phi, double t,
                 const SemigroupOptions& opts) {
  if (step_count(t, opts.disc.dt) == 0) return phi;
  return march(model, phi, t, opts);
}

bool PropertyReport::monotone() const {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const auto& r) { return r.monotonicity_violation <= 2.0 * tol; });
}

bool PropertyReport::nonexpansive() const {
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) {
    return r.output_distance <= r.input_distance + 2.0 * tol;
  });
}

PropertyReport check_properties(const HamiltonianModel& model, const GridField& phi,
                                const GridField& psi, std::span<const double> t_list,
                                const SemigroupOptions& opts, double delta) {
  if (phi.grid() != psi.grid()) throw ConfigError("psi", "phi and psi live on different grids");
  if (t_list.empty()) throw ConfigError("t_list", "no times requested");
  const double dt = opts.disc.dt;
  std::vector<std::size_t> marks;
  for (double t : t_list) marks.push_back(step_count(t, dt));
  const std::size_t last = *std::max_element(marks.begin(), marks.end());

  const std::size_t size = phi.size();
  std::vector<double> lo(size), hi(size);
  for (std::size_t i = 0; i < size; ++i) {
    lo[i] = std::min(phi[i], psi[i]);
    hi[i] = std::max(phi[i], psi[i]);
  }
  const GridField inputs[4] = {phi, psi, GridField(phi.grid(), lo), GridField(phi.grid(), hi)};

  PropertyReport rep;
  rep.tol = opts.tol;
  rep.delta = delta;
  // captured[r][m] = T_{t_m} of input r
  std::vector<std::vector<std::vector<double>>> captured(4, std::vector<std::vector<double>>(marks.size()));
  const std::size_t delta_steps = std::size_t(std::ceil(delta / dt - 1e-9));
  for (int r = 0; r < 4; ++r) {
    march(model, inputs[r], double(last) * dt, opts,
          [&](std::size_t k, double, std::span<const double> s) {
            for (std::size_t m = 0; m < marks.size(); ++m) {
              if (marks[m] == k) captured[r][m].assign(s.begin(), s.end());
            }
            if (r >= 2) return;
            GridField g(phi.grid(), std::vector<double>(s.begin(), s.end()));
            rep.uniform_bound = std::max(rep.uniform_bound, g.sup_norm());
            if (k >= delta_steps) rep.equi_lipschitz = std::max(rep.equi_lipschitz, g.lipschitz_seminorm());
          });
  }

  const double input_distance = sup_distance(phi.values(), psi.values());
  auto excess = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, a[i] - b[i]);
    return m;
  };
  for (std::size_t m = 0; m < marks.size(); ++m) {
    PropertyRow row;
    row.t = double(marks[m]) * dt;
    const auto& tp = captured[0][m];
    const auto& tq = captured[1][m];
    const auto& tlo = captured[2][m];
    const auto& thi = captured[3][m];
    row.monotonicity_violation = std::max({excess(tlo, thi), excess(tlo, tp), excess(tlo, tq),
                                           excess(tp, thi), excess(tq, thi)});
    row.output_distance = sup_distance(tp, tq);
    row.input_distance = input_distance;
    GridField g(phi.grid(), tp);
    row.sup_norm = g.sup_norm();
    row.lipschitz = g.lipschitz_seminorm();
    rep.rows.push_back(row);
  }
  return rep;
}

double CalibratedCurve::calibration_defect(std::size_t k1, std::size_t k2) const {
  double action = 0.0;
  for (std::size_t k = k1; k < k2; ++k) action += step_costs[k];
  return u_values[k2] - u_values[k1] - action;
}

double CalibratedCurve::max_calibration_defect() const {
  // prefix sums of the step costs
  const std::size_t n = points.size();
  std::vector<double> prefix(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) prefix[k] = prefix[k - 1] + step_costs[k - 1];
  double m = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      m = std::max(m, std::abs(u_values[b] - u_values[a] - (prefix[b] - prefix[a])));
    }
  }
  return m;
}

CalibratedCurve extract_calibrated_curve(const HamiltonianModel& model,
                                         const SpaceTimeField& spacetime, std::size_t x_end,
                                         const SemigroupOptions& opts) {
  const Grid& grid = spacetime.grid();
  if (x_end >= grid.size()) throw DomainError("end point outside the grid");
  LaxOleinikKernel kernel(model, grid, opts.disc);
  std::vector<std::int32_t> arg;
  SpaceTimeField w(grid, opts.disc.dt, spacetime.n_steps());
  apply_into(kernel, spacetime.slice(0), spacetime, w, &arg);
  const double residual = sup_distance(w.data(), spacetime.data());
  if (!(residual < opts.tol)) {
    throw DomainError("extract_calibrated_curve: field is not a fixed point of the operator");
  }

  const std::size_t n = spacetime.n_steps();
  const std::size_t size = grid.size();
  const double dt = opts.disc.dt;
  CalibratedCurve c;
  c.dt = dt;
  c.points.resize(n + 1);
  c.points[n] = x_end;
  for (std::size_t k = n; k > 0; --k) c.points[k - 1] = std::size_t(arg[(k - 1) * size + c.points[k]]);
  for (std::size_t k = 0; k <= n; ++k) c.u_values.push_back(w.slice(k)[c.points[k]]);
  c.window_speed = kernel.stencil().max_speed();
  const double cell_speed = grid.spacing() / dt;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = c.points[k], b = c.points[k + 1];
    Vec2 v = (1.0 / dt) * displacement(grid.point(a), grid.point(b));
    c.velocities.push_back(v);
    c.step_costs.push_back(kernel.segment_cost(a, b, spacetime.slice(k)[a], spacetime.slice(k + 1)[b]));
    if (norm(v) > c.window_speed - cell_speed + 1e-12) c.window_saturated = true;
  }
  return c;
}

namespace {

struct Slopes {
  Vec2 backward{};
  Vec2 forward{};
};

Slopes slopes_at(const GridField& u, std::size_t f) {
  const Grid& g = u.grid();
  const double inv_h = double(g.n());
  const auto ij = g.index(f);
  Slopes s;
  s.backward[0] = (u[f] - u[g.flat(ij[0] - 1, ij[1])]) * inv_h;
  s.forward[0] = (u[g.flat(ij[0] + 1, ij[1])] - u[f]) * inv_h;
  if (g.dim() == 2) {
    s.backward[1] = (u[f] - u[g.flat(ij[0], ij[1] - 1)]) * inv_h;
    s.forward[1] = (u[g.flat(ij[0], ij[1] + 1)] - u[f]) * inv_h;
  }
  return s;
}

double kink_threshold(const Grid& g) { return 10.0 * std::sqrt(g.spacing()); }

bool is_kink(const Slopes& s, double threshold) {
  return std::abs(s.forward[0] - s.backward[0]) > threshold ||
         std::abs(s.forward[1] - s.backward[1]) > threshold;
}

}  // namespace

ResidualStats weak_kam_residual(const HamiltonianModel& model, const GridField& u) {
  ResidualStats st;
  const Grid& g = u.grid();
  st.points = g.size();
  st.kink_threshold = kink_threshold(g);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Slopes s = slopes_at(u, f);
    if (is_kink(s, st.kink_threshold)) {
      ++st.kink_count;
      st.kinks.push_back(f);
      continue;
    }
    const TorusPoint x = g.point(f);
    const double r = std::abs(eval_H(model, x, u[f], 0.5 * (s.backward + s.forward)));
    st.max_abs = std::max(st.max_abs, r);
    sum += r;
    sum_sq += r * r;
    st.max_abs_backward = std::max(st.max_abs_backward, std::abs(eval_H(model, x, u[f], s.backward)));
    st.max_abs_forward = std::max(st.max_abs_forward, std::abs(eval_H(model, x, u[f], s.forward)));
    ++st.smooth_points;
  }
  if (st.smooth_points > 0) {
    st.mean_abs = sum / double(st.smooth_points);
    st.rms = std::sqrt(sum_sq / double(st.smooth_points));
  }
  return st;
}

ConvergenceReport converge(const HamiltonianModel& model, const GridField& phi,
                           const SemigroupOptions& opts, double t_final, double stop_eps) {
  if (!(stop_eps > 0.0)) throw ConfigError("stop_eps", "must be positive");
  ConvergenceReport rep;
  rep.block = block_length(model, opts);
  const double dt = opts.disc.dt;
  const std::size_t per_block = step_count(rep.block, dt);
  const std::size_t total = step_count(t_final, dt);
  GridField cur = phi;
  std::size_t done = 0;
  while (done < total) {
    const std::size_t len = std::min(per_block, total - done);
    auto res = fixed_point(model, cur, double(len) * dt, opts);
    auto end = res.field.slice(len);
    const double incr = sup_distance(end, cur.values());
    double drift = 0.0;
    for (std::size_t i = 0; i < end.size(); ++i) drift += end[i] - cur[i];
    rep.drift_rate = drift / double(end.size()) / (double(len) * dt);
    done += len;
    rep.times.push_back(double(done) * dt);
    rep.increments.push_back(incr);
    cur = res.field.slice_field(len);
    if (len == per_block && incr < stop_eps) {
      rep.converged = true;
      break;
    }
  }
  const std::size_t m = rep.increments.size();
  for (std::size_t k = m / 2 + 1; k < m; ++k) {
    if (rep.increments[k] > rep.increments[k - 1]) rep.monotone_tail = false;
  }
  rep.u_inf = std::move(cur);
  rep.residual = weak_kam_residual(model, rep.u_inf);
  return rep;
}

namespace {

/// Periodic multilinear interpolation of grid data.
double interpolate(const GridField& u, const Vec2& x) {
  const Grid& g = u.grid();
  const int n = g.n();
  const double s0 = wrap_unit(x[0]) * n;
  const int i0 = int(std::floor(s0));
  const double w0 = s0 - i0;
  if (g.dim() == 1) {
    return (1.0 - w0) * u[g.flat(i0, 0)] + w0 * u[g.flat(i0 + 1, 0)];
  }
  const double s1 = wrap_unit(x[1]) * n;
  const int i1 = int(std::floor(s1));
  const double w1 = s1 - i1;
  return (1.0 - w0) * (1.0 - w1) * u[g.flat(i0, i1)] + w0 * (1.0 - w1) * u[g.flat(i0 + 1, i1)] +
         (1.0 - w0) * w1 * u[g.flat(i0, i1 + 1)] + w0 * w1 * u[g.flat(i0 + 1, i1 + 1)];
}

}  // namespace

DominationReport check_domination(const HamiltonianModel& model, const GridField& u,
                                  std::size_t n_curves, std::uint64_t seed, double v_max) {
  const int dim = u.grid().dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kSegments = 4;
  constexpr int kSub = 64;
  DominationReport rep;
  rep.curves = n_curves;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_curves; ++c) {
    Vec2 x{unit(rng), dim == 2 ? unit(rng) : 0.0};
    const double u_start = interpolate(u, x);
    double action = 0.0;
    for (int s = 0; s < kSegments; ++s) {
      Vec2 v{(2.0 * unit(rng) - 1.0) * v_max, dim == 2 ? (2.0 * unit(rng) - 1.0) * v_max : 0.0};
      const double duration = 0.05 + 0.45 * unit(rng);
      const double h = duration / kSub;
      for (int q = 0; q < kSub; ++q) {
        const Vec2 mid = x + ((q + 0.5) * h) * v;
        action += h * lagrangian(model, mid, interpolate(u, mid), v);
      }
      x = x + duration * v;
      rep.max_violation = std::max(rep.max_violation, interpolate(u, x) - u_start - action);
    }
  }
  return rep;
}

LtildeDiagnostic check_Ltilde(const HamiltonianModel& model, const GridField& u_inf,
                              double fan_radius, double fan_step) {
  if (!(fan_radius > 0.0) || !(fan_step > 0.0)) throw ConfigError("fan", "radius and step must be positive");
  const Grid& g = u_inf.grid();
  const int m = int(std::floor(fan_radius / fan_step + 1e-9));
  const int m1 = g.dim() == 2 ? m : 0;
  const double threshold = kink_threshold(g);
  LtildeDiagnostic d;
  d.fan_radius = fan_radius;
  d.fan_step = fan_step;
  d.min_over_smooth = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Slopes s = slopes_at(u_inf, f);
    LtildeDiagnostic::Point pt;
    pt.index = f;
    pt.smooth = !is_kink(s, threshold);
    const Vec2 du = 0.5 * (s.backward + s.forward);
    const TorusPoint x = g.point(f);
    pt.expected_v = legendre_inverse(model, x, u_inf[f], du);
    pt.min_value = std::numeric_limits<double>::infinity();
    for (int b = -m1; b <= m1; ++b) {
      for (int a = -m; a <= m; ++a) {
        const Vec2 v{a * fan_step, b * fan_step};
        const double val = legendre_transform(model, x, u_inf[f], v).value - dot(du, v);
        if (val < pt.min_value) {
          pt.min_value = val;
          pt.argmin_v = v;
        }
      }
    }
    if (pt.smooth) {
      d.min_over_smooth = std::min(d.min_over_smooth, pt.min_value);
      const Vec2 diff = pt.argmin_v - pt.expected_v;
      d.max_argmin_mismatch = std::max({d.max_argmin_mismatch, std::abs(diff[0]), std::abs(diff[1])});
    }
    d.points.push_back(pt);
  }
  return d;
}

}  // namespace wkam
