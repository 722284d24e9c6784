#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace wkam {

/// Coordinates, velocities and covectors. In one dimension the second
/// component is kept at zero so the same formulas serve d = 1 and d = 2.
using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm_sq(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm_sq(a)); }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }

/// Maps a real number into [0, 1).
inline double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

/// Representative of the minimal periodic displacement in [-1/2, 1/2).
inline double wrap_displacement(double d) { return d - std::floor(d + 0.5); }

struct TorusPoint {
  Vec2 x{};
  int dim = 1;

  static TorusPoint wrapped(const Vec2& coords, int dim) {
    TorusPoint p;
    p.dim = dim;
    p.x[0] = wrap_unit(coords[0]);
    p.x[1] = dim > 1 ? wrap_unit(coords[1]) : 0.0;
    return p;
  }
};

/// The displacement `to ⊖ from` of smallest Euclidean length.
inline Vec2 displacement(const TorusPoint& from, const TorusPoint& to) {
  Vec2 d{wrap_displacement(to.x[0] - from.x[0]), 0.0};
  if (from.dim > 1) d[1] = wrap_displacement(to.x[1] - from.x[1]);
  return d;
}

inline double periodic_distance(const TorusPoint& a, const TorusPoint& b) {
  return norm(displacement(a, b));
}

/// Uniform periodic grid with `n` points per axis on [0,1)^dim.
/// Flat index of (i0, i1) is i0 + n * i1.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  std::size_t size() const noexcept { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }

  std::array<int, 2> index(std::size_t flat) const noexcept {
    return {int(flat % std::size_t(n_)), dim_ == 1 ? 0 : int(flat / std::size_t(n_))};
  }
  std::size_t flat(int i0, int i1) const noexcept {
    int a = ((i0 % n_) + n_) % n_;
    if (dim_ == 1) return std::size_t(a);
    int b = ((i1 % n_) + n_) % n_;
    return std::size_t(a) + std::size_t(n_) * std::size_t(b);
  }
  TorusPoint point(std::size_t flat) const noexcept {
    auto ij = index(flat);
    TorusPoint p;
    p.dim = dim_;
    p.x = {ij[0] * spacing(), dim_ == 1 ? 0.0 : ij[1] * spacing()};
    return p;
  }
  /// Nearest grid point to an arbitrary torus point.
  std::size_t nearest(const TorusPoint& p) const noexcept {
    int i0 = int(std::lround(p.x[0] * n_));
    int i1 = dim_ == 1 ? 0 : int(std::lround(p.x[1] * n_));
    return flat(i0, i1);
  }

  bool operator==(const Grid& o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const Grid& o) const noexcept { return !(*this == o); }

 private:
  int dim_ = 1;
  int n_ = 1;
};

}  // namespace wkam
