#include "wkam/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wkam/errors.hpp"
#include "wkam/sampling.hpp"

namespace wkam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite(const Vec2& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

void require_finite(const TorusPoint& x, double u, const Vec2& p) {
  if (!finite(x.x) || !std::isfinite(u) || !finite(p)) {
    throw DomainError("Hamiltonian evaluated at a non-finite argument");
  }
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::QuadraticMechanical: return "quadratic-mechanical";
    case Family::QuadraticDiscounted: return "quadratic-discounted";
    case Family::QuadraticNonlinearU: return "quadratic-nonlinear-u";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "quadratic-mechanical") return Family::QuadraticMechanical;
  if (name == "quadratic-discounted") return Family::QuadraticDiscounted;
  if (name == "quadratic-nonlinear-u") return Family::QuadraticNonlinearU;
  throw ConfigError("model.family", "unknown family '" + std::string(name) + "'");
}

double TrigPotential::value(const Vec2& x) const {
  double v = 0.0;
  for (const auto& m : modes_) v += m.amplitude * std::cos(kTwoPi * (m.k[0] * x[0] + m.k[1] * x[1]));
  return v;
}

Vec2 TrigPotential::gradient(const Vec2& x) const {
  Vec2 g{};
  for (const auto& m : modes_) {
    double s = -kTwoPi * m.amplitude * std::sin(kTwoPi * (m.k[0] * x[0] + m.k[1] * x[1]));
    g[0] += s * m.k[0];
    g[1] += s * m.k[1];
  }
  return g;
}

double TrigPotential::amplitude_bound() const {
  double b = 0.0;
  for (const auto& m : modes_) b += std::abs(m.amplitude);
  return b;
}

double TrigPotential::gradient_bound() const {
  double b = 0.0;
  for (const auto& m : modes_) {
    b += kTwoPi * std::abs(m.amplitude) * std::hypot(double(m.k[0]), double(m.k[1]));
  }
  return b;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size() || knots_.empty()) {
    throw DomainError("piecewise-linear table needs matching, non-empty knot and value lists");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i])) {
      throw DomainError("piecewise-linear table has a non-finite entry");
    }
    if (i > 0 && !(knots_[i] > knots_[i - 1])) {
      throw DomainError("piecewise-linear knots must be strictly increasing");
    }
  }
}

std::size_t PiecewiseLinear::segment(double u) const {
  // index s such that the segment [knots_[s], knots_[s+1]] is used
  auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  std::size_t s = it == knots_.begin() ? 0 : std::size_t(it - knots_.begin()) - 1;
  return std::min(s, knots_.size() - 2);
}

double PiecewiseLinear::value(double u) const {
  if (knots_.size() == 1) return values_[0];
  std::size_t s = segment(u);
  double w = (u - knots_[s]) / (knots_[s + 1] - knots_[s]);
  return values_[s] + w * (values_[s + 1] - values_[s]);
}

double PiecewiseLinear::slope(double u) const {
  if (knots_.size() == 1) return 0.0;
  std::size_t s = segment(u);
  return (values_[s + 1] - values_[s]) / (knots_[s + 1] - knots_[s]);
}

double PiecewiseLinear::lipschitz() const {
  double l = 0.0;
  for (std::size_t s = 0; s + 1 < knots_.size(); ++s) {
    l = std::max(l, std::abs((values_[s + 1] - values_[s]) / (knots_[s + 1] - knots_[s])));
  }
  return l;
}

bool PiecewiseLinear::nondecreasing() const {
  for (std::size_t s = 0; s + 1 < values_.size(); ++s) {
    if (values_[s + 1] < values_[s]) return false;
  }
  return true;
}

HamiltonianModel HamiltonianModel::mechanical(int dim, TrigPotential v) {
  HamiltonianModel m;
  m.family = Family::QuadraticMechanical;
  m.dim = dim;
  m.potential = std::move(v);
  m.validate();
  return m;
}

HamiltonianModel HamiltonianModel::discounted(int dim, double lambda, TrigPotential v) {
  HamiltonianModel m;
  m.family = Family::QuadraticDiscounted;
  m.dim = dim;
  m.lambda = lambda;
  m.potential = std::move(v);
  m.validate();
  return m;
}

HamiltonianModel HamiltonianModel::nonlinear_u(int dim, PiecewiseLinear f, TrigPotential v) {
  HamiltonianModel m;
  m.family = Family::QuadraticNonlinearU;
  m.dim = dim;
  m.f = std::move(f);
  m.potential = std::move(v);
  m.validate();
  return m;
}

void HamiltonianModel::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("model dimension must be 1 or 2");
  if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("lambda must be finite and >= 0");
  if (!std::isfinite(shift)) throw DomainError("normalization shift must be finite");
  if (family == Family::QuadraticNonlinearU && f.empty()) {
    throw DomainError("nonlinear-u family needs an f table");
  }
  for (const auto& m : potential.modes()) {
    if (!std::isfinite(m.amplitude)) throw DomainError("potential amplitude must be finite");
    if (dim == 1 && m.k[1] != 0) throw DomainError("1-d potential modes must have k2 = 0");
  }
}

double HamiltonianModel::coupling(double u) const {
  switch (family) {
    case Family::QuadraticMechanical: return 0.0;
    case Family::QuadraticDiscounted: return lambda * u;
    case Family::QuadraticNonlinearU: return f.value(u);
  }
  return 0.0;
}

double HamiltonianModel::coupling_slope(double u) const {
  switch (family) {
    case Family::QuadraticMechanical: return 0.0;
    case Family::QuadraticDiscounted: return lambda;
    case Family::QuadraticNonlinearU: return f.slope(u);
  }
  return 0.0;
}

double HamiltonianModel::lipschitz_u() const {
  switch (family) {
    case Family::QuadraticMechanical: return 0.0;
    case Family::QuadraticDiscounted: return lambda;
    case Family::QuadraticNonlinearU: return f.lipschitz();
  }
  return 0.0;
}

double eval_H(const HamiltonianModel& model, const TorusPoint& x, double u, const Vec2& p) {
  require_finite(x, u, p);
  return 0.5 * norm_sq(p) + model.coupling(u) + model.potential.value(x.x) - model.shift;
}

HamiltonianGradient grad_H(const HamiltonianModel& model, const TorusPoint& x, double u,
                           const Vec2& p) {
  require_finite(x, u, p);
  HamiltonianGradient g;
  g.dx = model.potential.gradient(x.x);
  g.du = model.coupling_slope(u);
  g.dp = p;
  if (model.dim == 1) {
    g.dx[1] = 0.0;
    g.dp[1] = 0.0;
  }
  return g;
}

bool AssumptionAudit::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

const AssumptionVerdict& AssumptionAudit::verdict(std::string_view name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return v;
  }
  throw DomainError("no verdict named " + std::string(name));
}

namespace {

struct Tracker {
  AssumptionVerdict verdict;

  void record(double violation, const Sample& s) {
    if (violation > verdict.worst_violation) {
      verdict.worst_violation = violation;
      verdict.worst_sample = s;
    }
  }
  AssumptionVerdict finish() {
    verdict.pass = verdict.worst_violation <= kAuditTolerance;
    return verdict;
  }
};

Vec2 momentum(const SampleBox& box, double a, double b, int dim) {
  Vec2 p{box.p_min + a * (box.p_max - box.p_min), box.p_min + b * (box.p_max - box.p_min)};
  if (dim == 1) p[1] = 0.0;
  return p;
}

}  // namespace

AssumptionAudit audit_assumptions(const HamiltonianModel& model, const SampleBox& box,
                                  std::size_t n_samples) {
  model.validate();
  if (n_samples < 1) throw DomainError("audit needs at least one sample");
  if (!(box.u_min <= box.u_max) || !(box.p_min < box.p_max)) {
    throw DomainError("empty sample box");
  }

  Tracker h1{{"H1", true, true, 0.0, {}, "midpoint convexity in p with margin |p-q|^2/8"}};
  Tracker h2{{"H2", true, true, 0.0, {}, "quadratic lower bound |p|^2/2 - C on the box"}};
  Tracker h4{{"H4", true, true, 0.0, {}, "|H(u1)-H(u2)| <= lambda_L |u1-u2|"}};
  Tracker h5{{"H5", true, true, 0.0, {}, "dH/du >= 0 and H non-decreasing in u"}};

  const double lip = model.lipschitz_u();
  const double growth_const = model.potential.amplitude_bound() +
                              std::max(std::abs(model.coupling(box.u_min)),
                                       std::abs(model.coupling(box.u_max))) +
                              std::abs(model.shift);

  AssumptionAudit audit;
  audit.lipschitz_u_declared = lip;

  auto visit = [&](const Sample& s, const Vec2& q, double u2) {
    double hp = eval_H(model, s.x, s.u, s.p);
    double hq = eval_H(model, s.x, s.u, q);
    Vec2 mid = 0.5 * (s.p + q);
    double hm = eval_H(model, s.x, s.u, mid);
    double gap = norm_sq(s.p - q);
    if (gap > 0.0) h1.record(hm - 0.5 * (hp + hq) + gap / 8.0, s);

    h2.record((0.5 * norm_sq(s.p) - growth_const) - hp, s);

    double hu2 = eval_H(model, s.x, u2, s.p);
    double du = std::abs(u2 - s.u);
    h4.record(std::abs(hu2 - hp) - lip * du, s);

    auto g = grad_H(model, s.x, s.u, s.p);
    h5.record(-g.du, s);
    double lo = std::min(s.u, u2), hi = std::max(s.u, u2);
    h5.record(eval_H(model, s.x, lo, s.p) - eval_H(model, s.x, hi, s.p), s);

    audit.max_abs_gradient = std::max(audit.max_abs_gradient, norm(g.dp));
    audit.lipschitz_u_empirical = std::max(audit.lipschitz_u_empirical, std::abs(g.du));
    ++audit.samples;
  };

  // corners of the (u, p) box at x = 0
  const int n_pc = model.dim == 1 ? 2 : 4;
  for (int ui = 0; ui < 2; ++ui) {
    for (int pc = 0; pc < n_pc; ++pc) {
      Sample s;
      s.x = TorusPoint::wrapped({0.0, 0.0}, model.dim);
      s.u = ui == 0 ? box.u_min : box.u_max;
      s.p = momentum(box, double(pc & 1), double((pc >> 1) & 1), model.dim);
      Vec2 q = momentum(box, double(1 - (pc & 1)), double(1 - ((pc >> 1) & 1)), model.dim);
      visit(s, q, ui == 0 ? box.u_max : box.u_min);
    }
  }

  for (std::size_t i = 0; i < n_samples; ++i) {
    Sample s;
    s.x = TorusPoint::wrapped({halton(i, 0), halton(i, 1)}, model.dim);
    s.u = box.u_min + halton(i, 2) * (box.u_max - box.u_min);
    s.p = momentum(box, halton(i, 3), halton(i, 4), model.dim);
    Vec2 q = momentum(box, halton(i, 5), halton(i, 6), model.dim);
    double u2 = box.u_min + halton(i, 7) * (box.u_max - box.u_min);
    visit(s, q, u2);
  }

  audit.verdicts.push_back(h1.finish());
  audit.verdicts.push_back(h2.finish());
  AssumptionVerdict h3{"H3", false, true, 0.0, {},
                       "not sampled: quadratic families have globally Lipschitz characteristic "
                       "fields on bounded u-sets; checked indirectly by integration"};
  audit.verdicts.push_back(h3);
  audit.verdicts.push_back(h4.finish());
  audit.verdicts.push_back(h5.finish());
  return audit;
}

}  // namespace wkam
