#pragma once

// Test-only reference solutions. Nothing here calls the library's solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// u̇ = −λu from u(0) = C.
inline double exp_decay(double c, double lambda, double t) { return c * std::exp(-lambda * t); }

/// Free particle, d = 1: min over y of φ(y) + dist(x,y)²/(2t), by brute force
/// over `samples` points of y and the three nearest periodic images.
inline double hopf_lax(const std::function<double(double)>& phi, double x, double t,
                       int samples = 20000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double y = double(i) / samples;
    const double fy = phi(y);
    for (int k = -1; k <= 1; ++k) {
      const double d = x - y - k;
      best = std::min(best, fy + d * d / (2.0 * t));
    }
  }
  return best;
}

/// Free-particle minimal action dist(x,y)²/(2t) on the circle.
inline double free_action(double x, double y, double t) {
  double d = std::abs(x - y);
  d = std::min(d, 1.0 - d);
  return d * d / (2.0 * t);
}

/// Weak KAM solution of |u'|²/2 + A·cos 2πx = A, A > 0, vanishing at x = 0:
/// the integral of √(2A(1 − cos 2πs)) = 2√A·|sin πs| from the nearer
/// copy of 0, with its single kink at x = 1/2.
inline double pendulum_weak_kam(double x, double amplitude = 1.0) {
  const double r = 2.0 * std::sqrt(amplitude) / kPi;
  const double s = x - std::floor(x);
  return s <= 0.5 ? r * (1.0 - std::cos(kPi * s)) : r * (1.0 + std::cos(kPi * s));
}

/// Mañé critical value of |p|²/2 + V on the circle: max V.
inline double mechanical_critical_value(const std::function<double(double)>& v,
                                        int samples = 100000) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) best = std::max(best, v(double(i) / samples));
  return best;
}

/// Godunov scheme for u_t + |u_x|²/2 + λu + V(x) = 0 in one dimension, explicit
/// Euler in time. Used only as an independent second opinion.
inline std::vector<double> godunov_solve(std::vector<double> u, double lambda,
                                         const std::function<double(double)>& v, double T,
                                         double dt) {
  const std::size_t n = u.size();
  const double h = 1.0 / double(n);
  const int steps = int(std::lround(T / dt));
  std::vector<double> next(n);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      const double um = u[(j + n - 1) % n];
      const double up = u[(j + 1) % n];
      const double dm = (u[j] - um) / h;
      const double dp = (up - u[j]) / h;
      const double a = std::max(dm, 0.0);
      const double b = std::min(dp, 0.0);
      const double ham = 0.5 * std::max(a * a, b * b) + lambda * u[j] + v(double(j) * h);
      next[j] = u[j] - dt * ham;
    }
    u.swap(next);
  }
  return u;
}

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace oracle
