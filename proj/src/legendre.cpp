#include "wkam/legendre.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wkam/sampling.hpp"

namespace wkam {

namespace {

using Mat2 = std::array<double, 4>;  // row-major

double inf_norm(const Vec2& v, int dim) {
  return dim == 1 ? std::abs(v[0]) : std::max(std::abs(v[0]), std::abs(v[1]));
}

/// Solves M s = r for the leading dim×dim block.
Vec2 solve(const Mat2& m, const Vec2& r, int dim) {
  if (dim == 1) return {r[0] / m[0], 0.0};
  double det = m[0] * m[3] - m[1] * m[2];
  return {(m[3] * r[0] - m[1] * r[1]) / det, (m[0] * r[1] - m[2] * r[0]) / det};
}

/// Safeguarded Newton ascent for a strictly concave objective. `grad`
/// returns the objective gradient, `neg_hess` the (positive definite)
/// negated Hessian.
template <class Obj, class Grad, class NegHess>
LagrangianValue newton_ascent(int dim, Obj&& obj, Grad&& grad, NegHess&& neg_hess, Vec2 x,
                              const NewtonOptions& opts, const char* what) {
  LagrangianValue out;
  double fx = obj(x);
  for (int it = 0; it <= opts.max_iter; ++it) {
    Vec2 g = grad(x);
    if (inf_norm(g, dim) <= opts.tol) {
      out.value = fx;
      out.argmax_p = x;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    if (it == opts.max_iter) break;
    Vec2 step = solve(neg_hess(x), g, dim);
    double t = 1.0;
    Vec2 cand = x + step;
    double fc = obj(cand);
    // step halving until the objective does not decrease (round-off slack)
    for (int h = 0; h < 60 && !(fc >= fx - 1e-15 * (1.0 + std::abs(fx))); ++h) {
      t *= 0.5;
      cand = x + t * step;
      fc = obj(cand);
    }
    x = cand;
    fx = fc;
  }
  throw NewtonError(std::string(what) + ": Newton iteration did not converge", x);
}

Mat2 fd_jacobian(int dim, const Vec2& at, auto&& map) {
  Mat2 j{1.0, 0.0, 0.0, 1.0};
  for (int c = 0; c < dim; ++c) {
    double h = 1e-5 * std::max(1.0, std::abs(at[c]));
    Vec2 a = at, b = at;
    a[c] += h;
    b[c] -= h;
    Vec2 fa = map(a), fb = map(b);
    for (int r = 0; r < dim; ++r) j[r * 2 + c] = (fa[r] - fb[r]) / (2.0 * h);
  }
  return j;
}

}  // namespace

LagrangianValue legendre_transform(const HamiltonianModel& model, const TorusPoint& x, double u,
                                   const Vec2& v) {
  if (!std::isfinite(u) || !std::isfinite(v[0]) || !std::isfinite(v[1])) {
    throw DomainError("Lagrangian evaluated at a non-finite argument");
  }
  Vec2 vv = v;
  if (model.dim == 1) vv[1] = 0.0;
  LagrangianValue out;
  out.argmax_p = vv;
  out.value = dot(vv, vv) - eval_H(model, x, u, vv);
  out.converged = true;
  return out;
}

LagrangianValue legendre_transform_newton(const HamiltonianModel& model, const TorusPoint& x,
                                          double u, const Vec2& v, NewtonOptions opts) {
  const int dim = model.dim;
  Vec2 vv = v;
  if (dim == 1) vv[1] = 0.0;
  auto obj = [&](const Vec2& p) { return dot(vv, p) - eval_H(model, x, u, p); };
  auto grad = [&](const Vec2& p) { return vv - grad_H(model, x, u, p).dp; };
  auto neg_hess = [&](const Vec2& p) {
    return fd_jacobian(dim, p, [&](const Vec2& q) { return grad_H(model, x, u, q).dp; });
  };
  return newton_ascent(dim, obj, grad, neg_hess, Vec2{}, opts, "legendre_transform");
}

Vec2 legendre_inverse(const HamiltonianModel& model, const TorusPoint& x, double u,
                      const Vec2& p) {
  return grad_H(model, x, u, p).dp;
}

double double_conjugate(const HamiltonianModel& model, const TorusPoint& x, double u,
                        const Vec2& p, NewtonOptions opts) {
  const int dim = model.dim;
  Vec2 pp = p;
  if (dim == 1) pp[1] = 0.0;
  auto inner = [&](const Vec2& v) { return legendre_transform_newton(model, x, u, v, opts); };
  auto obj = [&](const Vec2& v) { return dot(pp, v) - inner(v).value; };
  // envelope identity: ∂L/∂v = argmax p
  auto grad = [&](const Vec2& v) { return pp - inner(v).argmax_p; };
  auto neg_hess = [&](const Vec2& v) {
    return fd_jacobian(dim, v, [&](const Vec2& w) { return inner(w).argmax_p; });
  };
  NewtonOptions outer = opts;
  outer.tol = std::max(opts.tol, 1e-11);
  return newton_ascent(dim, obj, grad, neg_hess, Vec2{}, outer, "double_conjugate").value;
}

AssumptionAudit check_L_properties(const HamiltonianModel& model, const SampleBox& box,
                                   std::size_t n_samples) {
  model.validate();
  if (n_samples < 1) throw DomainError("audit needs at least one sample");
  if (!(box.u_min <= box.u_max) || !(box.p_min < box.p_max)) {
    throw DomainError("empty sample box");
  }

  AssumptionVerdict l1{"L1", true, true, 0.0, {}, "midpoint convexity in v with margin |v-w|^2/8"};
  AssumptionVerdict l2{"L2", true, true, 0.0, {}, "quadratic lower bound |v|^2/2 - C on the box"};
  AssumptionVerdict l3{"L3", false, true, 0.0, {}, "not sampled: conjugate of (H3)"};
  AssumptionVerdict l4{"L4", true, true, 0.0, {}, "|L(u1)-L(u2)| <= lambda_L |u1-u2|"};
  AssumptionVerdict l5{"L5", true, true, 0.0, {}, "dL/du <= 0 and L non-increasing in u"};
  auto record = [](AssumptionVerdict& v, double violation, const Sample& s) {
    if (violation > v.worst_violation) {
      v.worst_violation = violation;
      v.worst_sample = s;
    }
  };

  const double lip = model.lipschitz_u();
  const double growth_const = model.potential.amplitude_bound() +
                              std::max(std::abs(model.coupling(box.u_min)),
                                       std::abs(model.coupling(box.u_max))) +
                              std::abs(model.shift);
  auto velocity = [&](double a, double b) {
    Vec2 v{box.p_min + a * (box.p_max - box.p_min), box.p_min + b * (box.p_max - box.p_min)};
    if (model.dim == 1) v[1] = 0.0;
    return v;
  };

  AssumptionAudit audit;
  audit.lipschitz_u_declared = lip;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Sample s;
    s.x = TorusPoint::wrapped({halton(i, 0), halton(i, 1)}, model.dim);
    s.u = box.u_min + halton(i, 2) * (box.u_max - box.u_min);
    s.p = velocity(halton(i, 3), halton(i, 4));
    Vec2 w = velocity(halton(i, 5), halton(i, 6));
    double u2 = box.u_min + halton(i, 7) * (box.u_max - box.u_min);

    double lv = legendre_transform(model, s.x, s.u, s.p).value;
    double lw = legendre_transform(model, s.x, s.u, w).value;
    double lm = legendre_transform(model, s.x, s.u, 0.5 * (s.p + w)).value;
    double gap = norm_sq(s.p - w);
    if (gap > 0.0) record(l1, lm - 0.5 * (lv + lw) + gap / 8.0, s);
    record(l2, (0.5 * norm_sq(s.p) - growth_const) - lv, s);
    double lu2 = legendre_transform(model, s.x, u2, s.p).value;
    record(l4, std::abs(lu2 - lv) - lip * std::abs(u2 - s.u), s);
    double dldu = lagrangian_du(model, s.u);
    record(l5, dldu, s);
    double lo = std::min(s.u, u2), hi = std::max(s.u, u2);
    record(l5,
           legendre_transform(model, s.x, hi, s.p).value -
               legendre_transform(model, s.x, lo, s.p).value,
           s);
    audit.max_abs_gradient = std::max(audit.max_abs_gradient, norm(s.p));
    audit.lipschitz_u_empirical = std::max(audit.lipschitz_u_empirical, std::abs(dldu));
    ++audit.samples;
  }
  for (auto* v : {&l1, &l2, &l4, &l5}) v->pass = v->worst_violation <= kAuditTolerance;
  audit.verdicts = {l1, l2, l3, l4, l5};
  return audit;
}

}  // namespace wkam
