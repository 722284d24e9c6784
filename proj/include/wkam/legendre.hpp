#pragma once

#include "wkam/errors.hpp"
#include "wkam/models.hpp"

namespace wkam {

/// L(x,u,v) together with the maximizing momentum of ⟨v,p⟩ − H(x,u,p).
struct LagrangianValue {
  double value = 0.0;
  Vec2 argmax_p{};
  bool converged = true;
  int iterations = 0;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 100;
};

/// Newton failed to reach the gradient tolerance.
class NewtonError : public NumericError {
 public:
  NewtonError(const std::string& what, Vec2 last) : NumericError(what), last_iterate_(last) {}
  const Vec2& last_iterate() const noexcept { return last_iterate_; }

 private:
  Vec2 last_iterate_;
};

/// Closed form for the catalog families: L = |v|²/2 − g(u) − V(x) + shift,
/// argmax p = v.
LagrangianValue legendre_transform(const HamiltonianModel& model, const TorusPoint& x, double u,
                                   const Vec2& v);

/// General path: safeguarded Newton ascent on p ↦ ⟨v,p⟩ − H(x,u,p) using only
/// eval_H / grad_H and a finite-difference Hessian of H_p. Throws NewtonError.
LagrangianValue legendre_transform_newton(const HamiltonianModel& model, const TorusPoint& x,
                                          double u, const Vec2& v, NewtonOptions opts = {});

/// v = H_p(x,u,p).
Vec2 legendre_inverse(const HamiltonianModel& model, const TorusPoint& x, double u,
                      const Vec2& p);

/// Value-only closed form, the hot path of the dynamic-programming kernels.
inline double lagrangian(const HamiltonianModel& model, const Vec2& x, double u, const Vec2& v) {
  return 0.5 * norm_sq(v) - model.coupling(u) - model.potential.value(x) + model.shift;
}

/// ∂L/∂u = −∂H/∂u.
inline double lagrangian_du(const HamiltonianModel& model, double u) {
  return -model.coupling_slope(u);
}

/// sup_v {⟨v,p⟩ − L(x,u,v)} by the same Newton machinery applied to L, with
/// L itself evaluated through legendre_transform_newton.
double double_conjugate(const HamiltonianModel& model, const TorusPoint& x, double u,
                        const Vec2& p, NewtonOptions opts = {});

/// Samples (L1)–(L5). The box's p-range is read as the velocity range.
AssumptionAudit check_L_properties(const HamiltonianModel& model, const SampleBox& box,
                                   std::size_t n_samples);

}  // namespace wkam
