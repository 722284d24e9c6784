#include "wkam/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wkam/errors.hpp"
#include "wkam/fields.hpp"

namespace wkam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(Quadrature q) {
  switch (q) {
    case Quadrature::Left: return "left";
    case Quadrature::Midpoint: return "midpoint";
    case Quadrature::Corrected: return "corrected";
  }
  return "left";
}

Quadrature quadrature_from_string(std::string_view name) {
  if (name == "left") return Quadrature::Left;
  if (name == "midpoint") return Quadrature::Midpoint;
  if (name == "corrected") return Quadrature::Corrected;
  throw ConfigError("grid.quadrature", "expected 'left', 'midpoint' or 'corrected'");
}

DisplacementStencil::DisplacementStencil(const Grid& grid, double dt, double v_max) {
  if (!(dt > 0.0)) throw ConfigError("dt", "time step must be positive");
  if (!(v_max > 0.0)) throw ConfigError("v_max", "velocity window must be positive");
  const double h = grid.spacing();
  const double reach = v_max * dt;
  radius_ = std::min(int(std::floor(reach / h + 1e-12)), (grid.n() - 1) / 2);
  if (radius_ < 1) {
    throw ConfigError("v_max", "stencil empty: v_max*dt is smaller than one grid cell");
  }
  const int r1 = grid.dim() == 2 ? radius_ : 0;
  for (int d1 = -r1; d1 <= r1; ++d1) {
    for (int d0 = -radius_; d0 <= radius_; ++d0) {
      double len = h * std::hypot(double(d0), double(d1));
      if (len > reach * (1.0 + 1e-12)) continue;
      Offset o;
      o.d0 = d0;
      o.d1 = d1;
      o.velocity = {d0 * h / dt, d1 * h / dt};
      o.kinetic = 0.5 * norm_sq(o.velocity);
      max_speed_ = std::max(max_speed_, norm(o.velocity));
      offsets_.push_back(o);
    }
  }
}

LaxOleinikKernel::LaxOleinikKernel(const HamiltonianModel& model, const Grid& grid,
                                   const Discretization& disc)
    : model_(model), grid_(grid), disc_(disc), stencil_(grid, disc.dt, disc.v_max) {
  model_.validate();
  if (model_.dim != grid_.dim()) throw ConfigError("model.dim", "model and grid dimensions differ");
  potential_.resize(grid_.size());
  for (std::size_t f = 0; f < grid_.size(); ++f) potential_[f] = model_.potential.value(grid_.point(f).x);
  if (disc_.quadrature == Quadrature::Left) return;
  const int n2 = 2 * grid_.n();
  const double h2 = 0.5 * grid_.spacing();
  const int m1 = grid_.dim() == 2 ? n2 : 1;
  const bool corrected = disc_.quadrature == Quadrature::Corrected;
  const double dt2 = disc_.dt * disc_.dt / 24.0;
  potential_half_.resize(std::size_t(n2) * m1);
  for (int b = 0; b < m1; ++b) {
    for (int a = 0; a < n2; ++a) {
      const Vec2 x{a * h2, b * h2};
      double v = model_.potential.value(x);
      // corrected rule stores 4/6 V(m) + dt²/24 |∇V(m)|²
      if (corrected) v = 4.0 / 6.0 * v + dt2 * norm_sq(model_.potential.gradient(x));
      potential_half_[std::size_t(a) + std::size_t(n2) * b] = v;
    }
  }
  if (corrected) {
    for (auto& v : potential_) v /= 6.0;
  }
}

double LaxOleinikKernel::segment_potential(std::size_t y, std::size_t j, int a, int b) const {
  const int n2 = 2 * grid_.n();
  const double mid = potential_half_[std::size_t(a) + std::size_t(n2) * b];
  if (disc_.quadrature == Quadrature::Corrected) return potential_[y] + mid + potential_[j];
  return mid;
}

template <class UFrom, class UTo>
void LaxOleinikKernel::step_impl(std::span<const double> prev, UFrom u_from, UTo u_to,
                                 std::span<double> next, std::span<std::int32_t> argmin,
                                 bool parallel) const {
  const std::size_t size = grid_.size();
  if (prev.size() != size || next.size() != size || (!argmin.empty() && argmin.size() != size)) {
    throw ConfigError("field", "slice size does not match the grid");
  }
  const double dt = disc_.dt;
  const double shift = model_.shift;
  const auto& offs = stencil_.offsets();
  const bool midpoint = disc_.quadrature != Quadrature::Left;
  const int n = grid_.n();
  const int n2 = 2 * n;

  // left rule: cost = prev[y] + dt·(|v|²/2 + base_y), base_y independent of j
  std::vector<double> base;
  if (!midpoint) {
    base.resize(size);
    for (std::size_t y = 0; y < size; ++y) base[y] = -model_.coupling(u_from(y)) - potential_[y] + shift;
  }

  const long long count = static_cast<long long>(size);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long jj = 0; jj < count; ++jj) {
    const std::size_t j = std::size_t(jj);
    const auto ij = grid_.index(j);
    double best = kInf;
    std::size_t best_y = size;
    const double uj = midpoint ? u_to(j) : 0.0;
    for (const auto& o : offs) {
      const std::size_t y = grid_.flat(ij[0] - o.d0, ij[1] - o.d1);
      double state;
      if (midpoint) {
        int a = ((2 * ij[0] - o.d0) % n2 + n2) % n2;
        int b = grid_.dim() == 2 ? ((2 * ij[1] - o.d1) % n2 + n2) % n2 : 0;
        state = -model_.coupling(0.5 * (u_from(y) + uj)) - segment_potential(y, j, a, b) + shift;
      } else {
        state = base[y];
      }
      const double c = prev[y] + dt * (o.kinetic + state);
      if (c < best || (c == best && y < best_y)) {
        best = c;
        best_y = y;
      }
    }
    next[j] = best;
    if (!argmin.empty()) argmin[j] = best_y == size ? -1 : std::int32_t(best_y);
  }
}

void LaxOleinikKernel::step(std::span<const double> prev, double level, std::span<double> next,
                            std::span<std::int32_t> argmin, bool parallel) const {
  auto lv = [level](std::size_t) { return level; };
  step_impl(prev, lv, lv, next, argmin, parallel);
}

void LaxOleinikKernel::step(std::span<const double> prev, std::span<const double> u_from,
                            std::span<const double> u_to, std::span<double> next,
                            std::span<std::int32_t> argmin, bool parallel) const {
  if (u_from.size() != grid_.size() || u_to.size() != grid_.size()) {
    throw ConfigError("field", "candidate slice size does not match the grid");
  }
  step_impl(
      prev, [u_from](std::size_t y) { return u_from[y]; },
      [u_to](std::size_t j) { return u_to[j]; }, next, argmin, parallel);
}

double LaxOleinikKernel::segment_cost(std::size_t from, std::size_t to, double u_from,
                                      double u_to) const {
  const auto a = grid_.index(from);
  const auto b = grid_.index(to);
  const int n = grid_.n();
  auto wrap = [n](int d) {
    d %= n;
    if (d > n / 2) d -= n;
    if (d < -(n / 2)) d += n;
    return d;
  };
  const int d0 = wrap(b[0] - a[0]);
  const int d1 = grid_.dim() == 2 ? wrap(b[1] - a[1]) : 0;
  const auto& offs = stencil_.offsets();
  auto it = std::find_if(offs.begin(), offs.end(),
                         [&](const auto& o) { return o.d0 == d0 && o.d1 == d1; });
  if (it == offs.end()) throw DomainError("segment lies outside the velocity window");
  double state;
  if (disc_.quadrature != Quadrature::Left) {
    const int n2 = 2 * n;
    int ha = ((2 * b[0] - d0) % n2 + n2) % n2;
    int hb = grid_.dim() == 2 ? ((2 * b[1] - d1) % n2 + n2) % n2 : 0;
    state = -model_.coupling(0.5 * (u_from + u_to)) - segment_potential(from, to, ha, hb) +
            model_.shift;
  } else {
    state = -model_.coupling(u_from) - potential_[from] + model_.shift;
  }
  return disc_.dt * (it->kinetic + state);
}

std::vector<ActionTable> min_action_series(const HamiltonianModel& model, double level,
                                           std::span<const double> horizons, const Grid& grid,
                                           const Discretization& disc) {
  if (horizons.empty()) throw ConfigError("T", "no horizons requested");
  std::vector<std::size_t> steps;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (!(horizons[k] >= disc.dt)) throw ConfigError("T", "horizon must be at least dt");
    steps.push_back(step_count(horizons[k], disc.dt));
    if (k > 0 && steps[k] <= steps[k - 1]) throw ConfigError("T", "horizons must increase");
  }
  LaxOleinikKernel kernel(model, grid, disc);
  const std::size_t size = grid.size();
  std::vector<ActionTable> tables(horizons.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    tables[k] = ActionTable{double(steps[k]) * disc.dt, disc.dt, level, grid,
                            std::vector<double>(size * size, kInf)};
  }

  const long long count = static_cast<long long>(size);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < count; ++ii) {
    const std::size_t i = std::size_t(ii);
    std::vector<double> a(size, kInf), b(size);
    a[i] = 0.0;
    std::size_t done = 0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      for (; done < steps[k]; ++done) {
        kernel.step(a, level, b, {}, false);
        a.swap(b);
      }
      std::copy(a.begin(), a.end(), tables[k].values.begin() + std::ptrdiff_t(i * size));
    }
  }
  return tables;
}

ActionTable min_action(const HamiltonianModel& model, double level, double t, const Grid& grid,
                       const Discretization& disc) {
  const double h[] = {t};
  return std::move(min_action_series(model, level, h, grid, disc).front());
}

std::vector<std::size_t> minimizing_chain(const HamiltonianModel& model, double level, double t,
                                          const Grid& grid, const Discretization& disc,
                                          std::size_t start, std::size_t end) {
  const std::size_t n = step_count(t, disc.dt);
  LaxOleinikKernel kernel(model, grid, disc);
  const std::size_t size = grid.size();
  std::vector<double> a(size, kInf), b(size);
  a[start] = 0.0;
  std::vector<std::int32_t> arg(n * size);
  for (std::size_t k = 0; k < n; ++k) {
    kernel.step(a, level, b, std::span<std::int32_t>(arg.data() + k * size, size));
    a.swap(b);
  }
  if (!std::isfinite(a[end])) throw DomainError("end point unreachable within the horizon");
  std::vector<std::size_t> chain(n + 1);
  chain[n] = end;
  for (std::size_t k = n; k > 0; --k) chain[k - 1] = std::size_t(arg[(k - 1) * size + chain[k]]);
  return chain;
}

double chain_action(const LaxOleinikKernel& kernel, double level,
                    std::span<const std::size_t> chain) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    s += kernel.segment_cost(chain[k], chain[k + 1], level, level);
  }
  return s;
}

double discretization_slack(const HamiltonianModel& model, const Grid& grid,
                            const Discretization& disc) {
  const double k_l = model.potential.gradient_bound() + disc.v_max;
  return k_l * (grid.spacing() + disc.dt);
}

PeierlsReport peierls_barrier(const HamiltonianModel& model, double level, const Grid& grid,
                              const Discretization& disc, double c,
                              std::span<const double> horizons, double t0) {
  auto tables = min_action_series(model, level, horizons, grid, disc);
  PeierlsReport rep;
  rep.c = c;
  rep.t0 = t0;
  rep.horizons.assign(horizons.begin(), horizons.end());
  const std::size_t cells = grid.size() * grid.size();
  rep.barrier.assign(cells, kInf);
  const std::size_t tail_begin = tables.size() / 2;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    auto& t = tables[k];
    double sup = 0.0;
    for (double& v : t.values) {
      v += c * t.t;
      if (std::isfinite(v)) sup = std::max(sup, std::abs(v));
    }
    rep.sup_per_horizon.push_back(sup);
    if (t.t >= t0) rep.bound = std::max(rep.bound, sup);
    if (k >= tail_begin) {
      for (std::size_t q = 0; q < cells; ++q) rep.barrier[q] = std::min(rep.barrier[q], t.values[q]);
    }
  }
  rep.shifted = std::move(tables);
  return rep;
}

CriticalValueResult critical_value(const HamiltonianModel& model, double level, const Grid& grid,
                                   const Discretization& disc, double T_max, double tol,
                                   double T_start) {
  if (!(T_max >= 4.0)) throw ConfigError("T_max", "critical value needs T_max >= 4");
  if (!(tol > 0.0)) throw ConfigError("tol", "tolerance must be positive");
  if (!(T_start > 0.0) || T_start > T_max) throw ConfigError("T_start", "bad starting horizon");

  LaxOleinikKernel kernel(model, grid, disc);
  const std::size_t size = grid.size();
  // one running DP state per source, advanced horizon by horizon
  std::vector<double> states(size * size, kInf);
  for (std::size_t i = 0; i < size; ++i) states[i * size + i] = 0.0;

  CriticalValueResult res;
  res.level = level;
  std::size_t done = 0;
  for (double T = T_start; T <= T_max * (1.0 + 1e-12); T *= 2.0) {
    const std::size_t target = step_count(T, disc.dt);
    const long long count = static_cast<long long>(size);
    std::vector<double> diag(size);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < count; ++ii) {
      const std::size_t i = std::size_t(ii);
      std::span<double> a(states.data() + i * size, size);
      std::vector<double> b(size);
      for (std::size_t s = done; s < target; ++s) {
        kernel.step(a, level, b, {}, false);
        std::copy(b.begin(), b.end(), a.begin());
      }
      diag[i] = a[i];
    }
    done = target;
    const double m = *std::min_element(diag.begin(), diag.end());
    res.horizons.push_back(T);
    res.estimates.push_back(-m / T);
    const std::size_t k = res.estimates.size();
    if (k >= 2 && std::abs(res.estimates[k - 1] - res.estimates[k - 2]) < tol) {
      res.cauchy = true;
      break;
    }
  }

  const std::size_t k = res.estimates.size();
  // e(T) ≈ c + A/T: with doubling horizons 2·e(2T) − e(T) removes the A/T term
  res.c = k >= 2 ? 2.0 * res.estimates[k - 1] - res.estimates[k - 2] : res.estimates.back();
  if (!res.cauchy) {
    res.warning = "estimates not Cauchy within tol at T_max; returning extrapolated value";
  }
  return res;
}

HamiltonianModel normalize(const HamiltonianModel& model, double c) {
  HamiltonianModel out = model;
  out.shift += c;
  return out;
}

}  // namespace wkam
