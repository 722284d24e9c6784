#pragma once

#include <array>
#include <span>
#include <vector>

#include "wkam/torus.hpp"

namespace wkam {

/// One time slice: a value per grid point.
class GridField {
 public:
  GridField() = default;
  GridField(Grid grid, std::vector<double> values);
  static GridField constant(Grid grid, double c);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double sup_norm() const;
  /// max over points and axes of |forward difference| / Δx.
  double lipschitz_seminorm() const;
  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

double sup_distance(std::span<const double> a, std::span<const double> b);

/// u(x, k·dt) for k = 0..n_steps, stored slice-major.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(Grid grid, double dt, std::size_t n_steps, double fill = 0.0);

  const Grid& grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_slices() const noexcept { return n_steps_ + 1; }
  double time(std::size_t k) const noexcept { return double(k) * dt_; }
  double horizon() const noexcept { return time(n_steps_); }

  std::span<const double> slice(std::size_t k) const noexcept {
    return {data_.data() + k * grid_.size(), grid_.size()};
  }
  std::span<double> slice(std::size_t k) noexcept {
    return {data_.data() + k * grid_.size(), grid_.size()};
  }
  GridField slice_field(std::size_t k) const;
  void set_slice(std::size_t k, std::span<const double> values);

  std::span<const double> data() const noexcept { return data_; }
  bool same_shape(const SpaceTimeField& o) const noexcept {
    return grid_ == o.grid_ && n_steps_ == o.n_steps_;
  }

 private:
  Grid grid_;
  double dt_ = 0.0;
  std::size_t n_steps_ = 0;
  std::vector<double> data_;
};

/// c + Σ a cos(2π k·x) + b sin(2π k·x).
struct TrigPolynomial {
  struct Term {
    std::array<int, 2> k{};
    double cos_amp = 0.0;
    double sin_amp = 0.0;
  };
  double constant = 0.0;
  std::vector<Term> terms;

  double value(const Vec2& x) const;
  GridField sample(const Grid& grid) const;
};

/// Number of steps of size dt in t; throws ConfigError("dt") unless t is a
/// multiple of dt to 1e-9 relative.
std::size_t step_count(double t, double dt);

}  // namespace wkam
