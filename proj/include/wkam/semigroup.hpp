#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/errors.hpp"
#include "wkam/fields.hpp"
#include "wkam/models.hpp"

namespace wkam {

struct SemigroupOptions {
  Discretization disc;
  /// Picard stopping tolerance on the sup-norm gap.
  double tol = 1e-10;
  int max_iter = 100;
  /// Restart block length for long horizons; 0 selects min(4, 2/λ_L).
  double block_length = 0.0;
};

/// The operator 𝒜 for initial datum φ and frozen candidate u:
///   W(·,0) = φ,  W(x_j, t_{n+1}) = min_y W(y,t_n) + dt·L(·, u, (x_j ⊖ y)/dt).
/// `candidate` must match φ's grid and `disc.dt`. When `argmin` is given it
/// receives, per step n and destination j, the chosen source index.
SpaceTimeField apply_A(const HamiltonianModel& model, const GridField& phi,
                       const SpaceTimeField& candidate, const Discretization& disc,
                       std::vector<std::int32_t>* argmin = nullptr);

struct FixedPointReport {
  /// Number of 𝒜-applications that produced the returned field.
  int iterations = 0;
  /// gaps[k] = ‖u^{(k+1)} − u^{(k)}‖_∞, k = 0, 1, …; the last entry is the
  /// verification gap of the returned field.
  std::vector<double> gaps;
  /// bounds[k] = (T·λ_L)^k / k! · gaps[0].
  std::vector<double> bounds;
  double horizon = 0.0;
  double lipschitz_u = 0.0;
  double tol = 0.0;

  double residual() const { return gaps.empty() ? 0.0 : gaps.back(); }
  /// g_k ≤ factor · bound_k for every recorded k.
  bool bound_respected(double factor = 2.0) const;
};

class FixedPointError : public NumericError {
 public:
  FixedPointError(const std::string& what, FixedPointReport report)
      : NumericError(what), report_(std::move(report)) {}
  const FixedPointReport& report() const noexcept { return report_; }

 private:
  FixedPointReport report_;
};

struct FixedPointResult {
  SpaceTimeField field;
  FixedPointReport report;
};

/// Picard iteration u ← 𝒜[u] over the whole slab [0, T], started from φ
/// extended constantly in time unless `start` is given. Throws
/// ConfigError("dt") when dt·λ_L > 1 and FixedPointError on non-convergence.
FixedPointResult fixed_point(const HamiltonianModel& model, const GridField& phi, double T,
                             const SemigroupOptions& opts, const SpaceTimeField* start = nullptr);

/// Block length actually used by the restart marcher (a multiple of dt).
double block_length(const HamiltonianModel& model, const SemigroupOptions& opts);

/// Marches u(·,t) = T_tφ to t_end in restart blocks. `observer(k, t, slice)`
/// sees every slice, including slice 0. Returns the final slice.
GridField march(const HamiltonianModel& model, const GridField& phi, double t_end,
                const SemigroupOptions& opts,
                const std::function<void(std::size_t, double, std::span<const double>)>& observer = {});

/// T_tφ; t = 0 returns φ unchanged.
GridField step_T(const HamiltonianModel& model, const GridField& phi, double t,
                 const SemigroupOptions& opts);

struct PropertyRow {
  double t = 0.0;
  /// max over ordered pairs (a ≤ b) of max_x (T_t a − T_t b); (I)
  double monotonicity_violation = 0.0;
  /// ‖T_tφ − T_tψ‖_∞ and ‖φ − ψ‖_∞; (II)
  double output_distance = 0.0;
  double input_distance = 0.0;
  double sup_norm = 0.0;
  double lipschitz = 0.0;
};

struct PropertyReport {
  std::vector<PropertyRow> rows;
  double tol = 0.0;
  /// max ‖T_tφ‖_∞, ‖T_tψ‖_∞ over every slice of the run; (III)
  double uniform_bound = 0.0;
  double delta = 0.25;
  /// max Lipschitz seminorm over slices with t ≥ δ; (IV)
  double equi_lipschitz = 0.0;

  bool monotone() const;
  bool nonexpansive() const;
};

PropertyReport check_properties(const HamiltonianModel& model, const GridField& phi,
                                const GridField& psi, std::span<const double> t_list,
                                const SemigroupOptions& opts, double delta = 0.25);

/// A DP backtrack chain through a fixed-point field.
struct CalibratedCurve {
  double dt = 0.0;
  /// points[k] is the grid index at time k·dt, k = 0..n.
  std::vector<std::size_t> points;
  std::vector<double> u_values;
  /// velocities[k] = (x_{k+1} ⊖ x_k)/dt, k = 0..n-1.
  std::vector<Vec2> velocities;
  /// dt·L charged on each step.
  std::vector<double> step_costs;
  /// Largest speed of the stencil and whether the chain touched the outer
  /// ring of the window (speed > max − Δx/dt).
  double window_speed = 0.0;
  bool window_saturated = false;

  /// u(γ(t2),t2) − u(γ(t1),t1) − Σ dt·L over steps k1..k2-1.
  double calibration_defect(std::size_t k1, std::size_t k2) const;
  double max_calibration_defect() const;
};

/// Backtracks the argmin chain of the final 𝒜 pass from (x_end, T). Throws
/// DomainError when ‖𝒜[u] − u‖_∞ ≥ opts.tol.
CalibratedCurve extract_calibrated_curve(const HamiltonianModel& model,
                                         const SpaceTimeField& spacetime, std::size_t x_end,
                                         const SemigroupOptions& opts);

struct ResidualStats {
  std::size_t points = 0;
  std::size_t smooth_points = 0;
  std::size_t kink_count = 0;
  double kink_threshold = 0.0;
  /// |H(x, u, Du)| with the centered gradient, over smooth points.
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double rms = 0.0;
  /// same with backward / forward differences
  double max_abs_backward = 0.0;
  double max_abs_forward = 0.0;
  std::vector<std::size_t> kinks;
};

/// Stationary residual H(x_j, u_j, Du_j). A point is a kink when on some
/// axis the backward and forward slopes differ by more than 10·Δx^{1/2}.
ResidualStats weak_kam_residual(const HamiltonianModel& model, const GridField& u);

struct ConvergenceReport {
  std::vector<double> times;
  /// ‖T_{t+Δ}φ − T_tφ‖_∞ per block, Δ = block length.
  std::vector<double> increments;
  double block = 0.0;
  bool converged = false;
  /// increments non-increasing over the second half of the record
  bool monotone_tail = true;
  /// mean_x (u(t+Δ) − u(t))/Δ over the last block
  double drift_rate = 0.0;
  GridField u_inf;
  ResidualStats residual;
};

/// Marches until one block changes u by less than stop_eps in sup-norm, or
/// until t_final.
ConvergenceReport converge(const HamiltonianModel& model, const GridField& phi,
                           const SemigroupOptions& opts, double t_final, double stop_eps = 1e-6);

struct DominationReport {
  std::size_t curves = 0;
  /// max over curves and sub-intervals of u(γ(t2)) − u(γ(t1)) − ∫ L
  double max_violation = 0.0;
};

/// u(γ(t2)) − u(γ(t1)) ≤ ∫ L(γ, u(γ), γ̇) on random piecewise-linear
/// curves with speeds up to v_max, u interpolated (multi)linearly.
DominationReport check_domination(const HamiltonianModel& model, const GridField& u,
                                  std::size_t n_curves, std::uint64_t seed, double v_max);

struct LtildeDiagnostic {
  struct Point {
    std::size_t index = 0;
    bool smooth = false;
    double min_value = 0.0;
    Vec2 argmin_v{};
    Vec2 expected_v{};
  };
  std::vector<Point> points;
  double fan_radius = 0.0;
  double fan_step = 0.0;
  /// min over smooth points of min over the fan of L̃
  double min_over_smooth = 0.0;
  /// max over smooth points of |argmin − H_p(x, u, Du)|_∞
  double max_argmin_mismatch = 0.0;
};

/// L̃(x,v) = L(x, u(x), v) − ⟨Du(x), v⟩ on a velocity fan of the given
/// radius and step, at the smooth points of u.
LtildeDiagnostic check_Ltilde(const HamiltonianModel& model, const GridField& u_inf,
                              double fan_radius, double fan_step);

}  // namespace wkam
