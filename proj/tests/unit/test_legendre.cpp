#include <cmath>

#include "doctest.h"
#include "wkam/legendre.hpp"

using namespace wkam;

namespace {

TorusPoint at(double x) { return TorusPoint::wrapped({x, 0.0}, 1); }

}  // namespace

TEST_CASE("closed-form Legendre transform") {
  const auto free = HamiltonianModel::mechanical(1, {});
  const auto z = legendre_transform(free, at(0.4), 0.0, {0.0, 0.0});
  CHECK(z.value == 0.0);
  CHECK(z.argmax_p[0] == 0.0);

  const auto r = legendre_transform(HamiltonianModel::discounted(1, 1.0, {}), at(0.1), 3.0, {2.0, 0.0});
  CHECK(r.value == doctest::Approx(-1.0));
  CHECK(r.argmax_p[0] == doctest::Approx(2.0));

  const auto pend = HamiltonianModel::mechanical(1, TrigPotential({{{1, 0}, -1.0}}));
  CHECK(legendre_transform(pend, at(0.0), 0.0, {1.0, 0.0}).value == doctest::Approx(1.5));
}

TEST_CASE("inverse map and round trip") {
  const auto h = HamiltonianModel::discounted(2, 1.0, TrigPotential({{{1, 1}, 0.5}}));
  const auto x = TorusPoint::wrapped({0.3, 0.6}, 2);
  CHECK(legendre_inverse(h, x, 0.0, {0.0, 0.0})[0] == 0.0);
  const Vec2 v = legendre_inverse(h, x, 0.2, {1.0, -2.0});
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(-2.0));
  const auto back = legendre_transform(h, x, 0.2, v);
  CHECK(std::abs(back.argmax_p[0] - 1.0) <= 1e-10);
  CHECK(std::abs(back.argmax_p[1] + 2.0) <= 1e-10);
}

TEST_CASE("Newton path agrees with the closed form") {
  const auto h = HamiltonianModel::nonlinear_u(2, PiecewiseLinear({0.0, 1.0}, {0.0, 2.0}),
                                               TrigPotential({{{2, 1}, 0.4}}));
  const auto x = TorusPoint::wrapped({0.7, 0.2}, 2);
  for (double vx : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    const Vec2 v{vx, 0.5 * vx - 1.0};
    const auto a = legendre_transform(h, x, 0.35, v);
    const auto b = legendre_transform_newton(h, x, 0.35, v);
    CHECK(b.converged);
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-9));
    CHECK(std::abs(b.argmax_p[0] - a.argmax_p[0]) <= 1e-8);
  }
}

TEST_CASE("double conjugate recovers H") {
  const auto h = HamiltonianModel::discounted(1, 1.0, TrigPotential({{{1, 0}, 1.0}}));
  for (double p : {-1.5, 0.0, 0.7}) {
    CHECK(double_conjugate(h, at(0.3), 0.4, {p, 0.0}) ==
          doctest::Approx(eval_H(h, at(0.3), 0.4, {p, 0.0})).epsilon(1e-8));
  }
}

TEST_CASE("Lagrangian property audit") {
  const auto h = HamiltonianModel::discounted(1, 1.0, TrigPotential({{{1, 0}, 1.0}}));
  const auto l = check_L_properties(h, {}, 500);
  CHECK(l.all_pass());
  CHECK(lagrangian_du(h, 0.3) == -1.0);
  const auto a = audit_assumptions(h, {}, 500);
  CHECK(std::abs(l.lipschitz_u_empirical - a.lipschitz_u_empirical) <= 1e-12);
}
