#pragma once

#include <vector>

#include "wkam/errors.hpp"
#include "wkam/fields.hpp"
#include "wkam/models.hpp"
#include "wkam/semigroup.hpp"

namespace wkam {

struct CharacteristicState {
  TorusPoint x;
  double u = 0.0;
  Vec2 p{};
  double t = 0.0;
};

struct Trajectory {
  double dt_ode = 0.0;
  std::vector<CharacteristicState> states;
  /// H̄(s) = H(X(s), U(s), P(s)) per state.
  std::vector<double> H_values;
};

class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, CharacteristicState last)
      : NumericError(what), last_(last) {}
  const CharacteristicState& last_good() const noexcept { return last_; }

 private:
  CharacteristicState last_;
};

/// Classical RK4 on ẋ = H_p, ṗ = −H_x − H_u·p, u̇ = ⟨H_p,p⟩ − H. The
/// duration is rounded to a whole number of steps.
Trajectory flow(const HamiltonianModel& model, const CharacteristicState& s0, double t,
                double dt_ode);

struct LawResidual {
  /// centered difference of H̄ minus −H_u·H̄, at interior states
  double max_abs = 0.0;
  double rms = 0.0;
  bool strictly_decreasing = false;
};

/// Throws DomainError for fewer than three states.
LawResidual dH_law_residual(const HamiltonianModel& model, const Trajectory& traj);

/// H̄ keeps the sign of H̄(0): a band of ±band around zero counts as zero.
bool sign_consistent(const Trajectory& traj, double band = 1e-8);

/// Launch momentum: ∂L/∂v at the chain velocity, or the centered gradient of
/// the field at the launch point.
enum class MomentumSource { ChainVelocity, FieldGradient };

struct MatchOptions {
  MomentumSource momentum = MomentumSource::ChainVelocity;
  /// 0: forward difference at the first interior point. m > 0: centered
  /// secant over ±m chain steps, launched at step m.
  std::size_t window = 0;
  /// Upper bound on the ODE step; the chain step is subdivided evenly.
  double dt_ode_max = 1e-3;
};

struct MatchReport {
  std::size_t launch_step = 0;
  std::size_t last_step = 0;
  Vec2 launch_velocity{};
  Vec2 launch_momentum{};
  double sup_position = 0.0;
  double sup_u = 0.0;
  Trajectory trajectory;
};

/// Launches the characteristic flow from the chain's first interior point
/// and compares with the chain at every shared time, endpoints excluded.
MatchReport match_calibrated(const HamiltonianModel& model, const CalibratedCurve& curve,
                             const SpaceTimeField& spacetime, const MatchOptions& opts = {});

}  // namespace wkam
