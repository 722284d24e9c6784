#include "wkam/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wkam/errors.hpp"

namespace wkam {

GridField::GridField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ConfigError("field", "value count does not match grid");
}

GridField GridField::constant(Grid grid, double c) {
  return GridField(grid, std::vector<double>(grid.size(), c));
}

double GridField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::lipschitz_seminorm() const {
  double m = 0.0;
  const int n = grid_.n();
  for (std::size_t f = 0; f < values_.size(); ++f) {
    auto ij = grid_.index(f);
    m = std::max(m, std::abs(values_[grid_.flat(ij[0] + 1, ij[1])] - values_[f]));
    if (grid_.dim() == 2) m = std::max(m, std::abs(values_[grid_.flat(ij[0], ij[1] + 1)] - values_[f]));
  }
  return m * n;
}

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SpaceTimeField::SpaceTimeField(Grid grid, double dt, std::size_t n_steps, double fill)
    : grid_(grid), dt_(dt), n_steps_(n_steps), data_((n_steps + 1) * grid.size(), fill) {}

GridField SpaceTimeField::slice_field(std::size_t k) const {
  auto s = slice(k);
  return GridField(grid_, std::vector<double>(s.begin(), s.end()));
}

void SpaceTimeField::set_slice(std::size_t k, std::span<const double> values) {
  std::copy(values.begin(), values.end(), slice(k).begin());
}

double TrigPolynomial::value(const Vec2& x) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double v = constant;
  for (const auto& t : terms) {
    double arg = two_pi * (t.k[0] * x[0] + t.k[1] * x[1]);
    v += t.cos_amp * std::cos(arg) + t.sin_amp * std::sin(arg);
  }
  return v;
}

GridField TrigPolynomial::sample(const Grid& grid) const {
  std::vector<double> v(grid.size());
  for (std::size_t f = 0; f < v.size(); ++f) v[f] = value(grid.point(f).x);
  return GridField(grid, std::move(v));
}

std::size_t step_count(double t, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "time step must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("T", "horizon must be non-negative");
  double r = t / dt;
  double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, r)) {
    throw ConfigError("dt", "horizon is not a multiple of the time step");
  }
  return std::size_t(k);
}

}  // namespace wkam
