#pragma once

#include "wkam/fields.hpp"
#include "wkam/models.hpp"

namespace wkam {

/// Global Lax–Friedrichs settings.
struct LFConfig {
  double alpha = 0.0;
  double dt = 0.0;
  Grid grid;

  double cfl() const { return alpha * dt / grid.spacing(); }

  /// Throws ConfigError naming "oracle.alpha" or "oracle.dt_fd" unless
  /// cfl ≤ 1/2, dt·λ_L ≤ 1, d·cfl + dt·λ_L ≤ 1 and alpha ≥ max_hp + 0.1.
  void validate(const HamiltonianModel& model, double max_hp) const;
};

/// Smallest alpha accepted for the given |H_p| bound.
inline double lf_alpha_for(double max_hp) { return max_hp + 0.1; }

/// Largest dt_fd (of the form T/n for the given horizon) satisfying every
/// step condition.
double lf_dt_for(const HamiltonianModel& model, const Grid& grid, double alpha, double T);

/// u_j − dt·[H(x_j, u_j, (D⁻+D⁺)/2) − (α/2)·Σ_axes (D⁺ − D⁻)].
GridField lf_step(const HamiltonianModel& model, const GridField& u, const LFConfig& cfg,
                  bool parallel = true);

/// Iterates lf_step to T (a multiple of cfg.dt) and keeps every
/// `record_every`-th slice, so the slab step is record_every·dt.
SpaceTimeField lf_solve(const HamiltonianModel& model, const GridField& phi, double T,
                        const LFConfig& cfg, double max_hp, std::size_t record_every = 1);

}  // namespace wkam
