#include "wkam/fdoracle.hpp"

#include <cmath>

#include "wkam/errors.hpp"

namespace wkam {

namespace {

void check_steps(const HamiltonianModel& model, const LFConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("oracle.dt_fd", "must be positive");
  if (!(cfg.alpha > 0.0)) throw ConfigError("oracle.alpha", "must be positive");
  const double lam = model.lipschitz_u();
  if (cfg.cfl() > 0.5) throw ConfigError("oracle.dt_fd", "alpha*dt_fd/dx exceeds 1/2");
  if (cfg.dt * lam > 1.0) throw ConfigError("oracle.dt_fd", "dt_fd * lambda_L exceeds 1");
  if (cfg.grid.dim() * cfg.cfl() + cfg.dt * lam > 1.0) {
    throw ConfigError("oracle.dt_fd", "d*cfl + dt_fd*lambda_L exceeds 1");
  }
}

}  // namespace

void LFConfig::validate(const HamiltonianModel& model, double max_hp) const {
  check_steps(model, *this);
  if (alpha < lf_alpha_for(max_hp)) {
    throw ConfigError("oracle.alpha", "alpha must be at least max|H_p| + 0.1");
  }
}

double lf_dt_for(const HamiltonianModel& model, const Grid& grid, double alpha, double T) {
  const double h = grid.spacing();
  const double lam = model.lipschitz_u();
  double dt = 0.5 * h / alpha;
  dt = std::min(dt, 1.0 / (grid.dim() * alpha / h + lam));
  if (lam > 0.0) dt = std::min(dt, 1.0 / lam);
  const double n = std::ceil(T / dt - 1e-12);
  return T / n;
}

GridField lf_step(const HamiltonianModel& model, const GridField& u, const LFConfig& cfg,
                  bool parallel) {
  check_steps(model, cfg);
  if (u.grid() != cfg.grid) throw ConfigError("oracle.grid", "field grid differs from the oracle grid");
  const Grid& g = cfg.grid;
  const double inv_h = 1.0 / g.spacing();
  const double dt = cfg.dt;
  const double a = cfg.alpha;
  const auto size = std::int64_t(g.size());
  std::vector<double> out(g.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t f = 0; f < size; ++f) {
    const auto ij = g.index(std::size_t(f));
    const double c = u[std::size_t(f)];
    Vec2 p{};
    double visc = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t fm = ax == 0 ? g.flat(ij[0] - 1, ij[1]) : g.flat(ij[0], ij[1] - 1);
      const std::size_t fp = ax == 0 ? g.flat(ij[0] + 1, ij[1]) : g.flat(ij[0], ij[1] + 1);
      const double dm = (c - u[fm]) * inv_h;
      const double dp = (u[fp] - c) * inv_h;
      p[ax] = 0.5 * (dm + dp);
      visc += dp - dm;
    }
    out[std::size_t(f)] = c - dt * (eval_H(model, g.point(std::size_t(f)), c, p) - 0.5 * a * visc);
  }
  return GridField(g, std::move(out));
}

SpaceTimeField lf_solve(const HamiltonianModel& model, const GridField& phi, double T,
                        const LFConfig& cfg, double max_hp, std::size_t record_every) {
  cfg.validate(model, max_hp);
  if (record_every < 1) throw ConfigError("oracle.record_every", "must be at least 1");
  const std::size_t n = step_count(T, cfg.dt);
  if (n % record_every != 0) throw ConfigError("oracle.record_every", "must divide the step count");
  SpaceTimeField slab(cfg.grid, cfg.dt * double(record_every), n / record_every);
  slab.set_slice(0, phi.values());
  GridField cur = phi;
  for (std::size_t k = 1; k <= n; ++k) {
    cur = lf_step(model, cur, cfg);
    if (!cur.all_finite()) throw NumericError("lf_solve: non-finite values");
    if (k % record_every == 0) slab.set_slice(k / record_every, cur.values());
  }
  return slab;
}

}  // namespace wkam
