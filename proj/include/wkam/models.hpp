#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "wkam/torus.hpp"

namespace wkam {

enum class Family { QuadraticMechanical, QuadraticDiscounted, QuadraticNonlinearU };

std::string_view to_string(Family family);
/// Accepts "quadratic-mechanical", "quadratic-discounted", "quadratic-nonlinear-u".
Family family_from_string(std::string_view name);

/// amplitude * cos(2π k·x)
struct CosineMode {
  std::array<int, 2> k{};
  double amplitude = 0.0;
};

/// Trigonometric potential V(x) = Σ a_m cos(2π k_m·x).
class TrigPotential {
 public:
  TrigPotential() = default;
  explicit TrigPotential(std::vector<CosineMode> modes) : modes_(std::move(modes)) {}

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  /// Σ |a_m|, a bound on sup |V|.
  double amplitude_bound() const;
  /// Σ 2π|a_m||k_m|, a bound on sup |∇V|.
  double gradient_bound() const;
  const std::vector<CosineMode>& modes() const noexcept { return modes_; }

 private:
  std::vector<CosineMode> modes_;
};

/// Piecewise-linear map on ℝ given by a knot table, extended linearly
/// beyond the end knots. A single knot denotes a constant.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  bool empty() const noexcept { return knots_.empty(); }
  double value(double u) const;
  /// Right derivative.
  double slope(double u) const;
  /// max |slope| over all segments.
  double lipschitz() const;
  bool nondecreasing() const;
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t segment(double u) const;
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// H(x,u,p) = |p|²/2 + g(u) + V(x) − shift, with
///   g ≡ 0 (mechanical), g(u) = λu (discounted), g = f (nonlinear-u).
/// `shift` holds the critical-value normalization H − c.
struct HamiltonianModel {
  Family family = Family::QuadraticMechanical;
  int dim = 1;
  double lambda = 0.0;
  TrigPotential potential;
  PiecewiseLinear f;
  double shift = 0.0;

  static HamiltonianModel mechanical(int dim, TrigPotential v);
  static HamiltonianModel discounted(int dim, double lambda, TrigPotential v);
  static HamiltonianModel nonlinear_u(int dim, PiecewiseLinear f, TrigPotential v);

  /// Throws DomainError when the descriptor is malformed. Monotonicity of f
  /// is not required here; the assumption audit reports it.
  void validate() const;

  double coupling(double u) const;
  double coupling_slope(double u) const;
  /// Declared Lipschitz constant of H in u: λ, or Lip(f).
  double lipschitz_u() const;
};

/// Triple (H_x, H_u, H_p).
struct HamiltonianGradient {
  Vec2 dx{};
  double du = 0.0;
  Vec2 dp{};
};

double eval_H(const HamiltonianModel& model, const TorusPoint& x, double u, const Vec2& p);
HamiltonianGradient grad_H(const HamiltonianModel& model, const TorusPoint& x, double u,
                           const Vec2& p);

/// Sampling region: u ∈ [u_min, u_max], each momentum/velocity component in
/// [p_min, p_max]; x ranges over the whole torus.
struct SampleBox {
  double u_min = -1.0;
  double u_max = 1.0;
  double p_min = -2.0;
  double p_max = 2.0;
};

struct Sample {
  TorusPoint x;
  double u = 0.0;
  Vec2 p{};
};

struct AssumptionVerdict {
  std::string name;
  bool sampled = true;
  bool pass = true;
  double worst_violation = 0.0;
  Sample worst_sample;
  std::string note;
};

struct AssumptionAudit {
  std::vector<AssumptionVerdict> verdicts;
  std::size_t samples = 0;
  /// Largest |H_p| (or |L_v| for the Lagrangian audit) over the box.
  double max_abs_gradient = 0.0;
  double lipschitz_u_empirical = 0.0;
  double lipschitz_u_declared = 0.0;

  bool all_pass() const;
  const AssumptionVerdict& verdict(std::string_view name) const;
};

inline constexpr double kAuditTolerance = 1e-12;

/// Samples (H1)–(H5) on a deterministic Halton sequence plus the box
/// corners. (H3) is recorded as unsampled.
AssumptionAudit audit_assumptions(const HamiltonianModel& model, const SampleBox& box,
                                  std::size_t n_samples);

}  // namespace wkam
