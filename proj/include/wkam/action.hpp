#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wkam/models.hpp"
#include "wkam/torus.hpp"

namespace wkam {

/// Running cost of a straight segment y → x.
/// Left: L(y, u(y), v). Midpoint: V at the segment midpoint and the
/// u-argument averaged over the two segment ends. Corrected: Simpson
/// average of V along the segment minus dt²/24·|∇V(m)|², the leading
/// bend of the one-step minimizer in a potential.
enum class Quadrature { Left, Midpoint, Corrected };

std::string_view to_string(Quadrature q);
Quadrature quadrature_from_string(std::string_view name);

/// Time step, velocity window and quadrature shared by all DP kernels.
struct Discretization {
  double dt = 1.0 / 64.0;
  double v_max = 6.0;
  Quadrature quadrature = Quadrature::Left;
};

/// Grid offsets d with |d|·Δx ≤ v_max·dt. Offsets stay below half a period
/// per axis so the displacement of every stencil entry is the minimal one.
class DisplacementStencil {
 public:
  struct Offset {
    int d0 = 0;
    int d1 = 0;
    Vec2 velocity{};
    double kinetic = 0.0;  // |v|²/2
  };

  /// Throws ConfigError("v_max") when only the zero offset fits.
  DisplacementStencil(const Grid& grid, double dt, double v_max);

  const std::vector<Offset>& offsets() const noexcept { return offsets_; }
  int radius() const noexcept { return radius_; }
  /// Largest speed representable by the stencil.
  double max_speed() const noexcept { return max_speed_; }

 private:
  std::vector<Offset> offsets_;
  int radius_ = 0;
  double max_speed_ = 0.0;
};

/// One step of the discrete Lax–Oleinik map
///   next(x_j) = min_y prev(y) + dt·L(ξ, u, (x_j ⊖ y)/dt)
/// over the stencil window, ties resolved toward the smallest y index.
/// Destinations are updated independently (data-parallel).
class LaxOleinikKernel {
 public:
  LaxOleinikKernel(const HamiltonianModel& model, const Grid& grid, const Discretization& disc);

  const Grid& grid() const noexcept { return grid_; }
  const Discretization& discretization() const noexcept { return disc_; }
  const DisplacementStencil& stencil() const noexcept { return stencil_; }
  const HamiltonianModel& model() const noexcept { return model_; }

  /// Frozen u-level: u ≡ level on every segment.
  void step(std::span<const double> prev, double level, std::span<double> next,
            std::span<std::int32_t> argmin = {}, bool parallel = true) const;

  /// Candidate field: u_from at the segment start slice, u_to at the end
  /// slice (read only by the midpoint rule).
  void step(std::span<const double> prev, std::span<const double> u_from,
            std::span<const double> u_to, std::span<double> next,
            std::span<std::int32_t> argmin = {}, bool parallel = true) const;

  /// dt·L for the segment from grid point `from` to grid point `to`, which
  /// must lie inside the stencil window.
  double segment_cost(std::size_t from, std::size_t to, double u_from, double u_to) const;

 private:
  template <class UFrom, class UTo>
  void step_impl(std::span<const double> prev, UFrom u_from, UTo u_to, std::span<double> next,
                 std::span<std::int32_t> argmin, bool parallel) const;

  /// Potential part of the running cost for the segment y → j whose
  /// midpoint has half-grid index (a, b).
  double segment_potential(std::size_t y, std::size_t j, int a, int b) const;

  HamiltonianModel model_;
  Grid grid_;
  Discretization disc_;
  DisplacementStencil stencil_;
  std::vector<double> potential_;       // V at grid points
  std::vector<double> potential_half_;  // midpoint term on the half-spacing grid
};

/// h_t(x_i, x_j) for a frozen u-level; values[i * size + j].
struct ActionTable {
  double t = 0.0;
  double dt = 0.0;
  double level = 0.0;
  Grid grid;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
};

ActionTable min_action(const HamiltonianModel& model, double level, double t, const Grid& grid,
                       const Discretization& disc);

/// Tables at several increasing horizons from one sweep per source.
std::vector<ActionTable> min_action_series(const HamiltonianModel& model, double level,
                                           std::span<const double> horizons, const Grid& grid,
                                           const Discretization& disc);

/// Grid indices γ_0 = start, …, γ_n = end of a DP minimizer over [0, t].
std::vector<std::size_t> minimizing_chain(const HamiltonianModel& model, double level, double t,
                                          const Grid& grid, const Discretization& disc,
                                          std::size_t start, std::size_t end);

/// Σ dt·L along a chain of grid indices.
double chain_action(const LaxOleinikKernel& kernel, double level,
                    std::span<const std::size_t> chain);

/// ε_disc = K_L·(Δx + dt) with K_L = sup|∇V| + v_max, the x- and
/// v-Lipschitz data of L over the velocity window.
double discretization_slack(const HamiltonianModel& model, const Grid& grid,
                            const Discretization& disc);

struct PeierlsReport {
  std::vector<double> horizons;
  /// h_T + c·T per horizon.
  std::vector<ActionTable> shifted;
  /// Pointwise minimum of the shifted tables over the tail half of the
  /// horizon list (the liminf estimate).
  std::vector<double> barrier;
  double c = 0.0;
  double t0 = 1.0;
  /// max |h_T + c·T| over horizons T ≥ t0.
  double bound = 0.0;
  /// max |shifted| per horizon, for the non-divergence check.
  std::vector<double> sup_per_horizon;
};

PeierlsReport peierls_barrier(const HamiltonianModel& model, double level, const Grid& grid,
                              const Discretization& disc, double c,
                              std::span<const double> horizons, double t0 = 1.0);

struct CriticalValueResult {
  double level = 0.0;
  /// Extrapolated limit (best estimate).
  double c = 0.0;
  std::vector<double> horizons;
  /// −min_x h_T(x,x)/T per horizon.
  std::vector<double> estimates;
  bool cauchy = false;
  std::string warning;
};

/// Growth rate of the diagonal action over horizons T_start·2^k ≤ T_max.
/// Stops once consecutive estimates differ by less than `tol`.
CriticalValueResult critical_value(const HamiltonianModel& model, double level, const Grid& grid,
                                   const Discretization& disc, double T_max, double tol,
                                   double T_start = 1.0);

/// H − c (equivalently L + c).
HamiltonianModel normalize(const HamiltonianModel& model, double c);

}  // namespace wkam
