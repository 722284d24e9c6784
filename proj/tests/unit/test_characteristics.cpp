#include <cmath>
#include <random>

#include "doctest.h"
#include "wkam/characteristics.hpp"
#include "wkam/errors.hpp"

using namespace wkam;

namespace {

CharacteristicState start(double x, double u, double p) {
  CharacteristicState s;
  s.x = TorusPoint::wrapped({x, 0.0}, 1);
  s.u = u;
  s.p = {p, 0.0};
  return s;
}

SemigroupOptions options(double dt, double v_max) {
  SemigroupOptions o;
  o.disc.dt = dt;
  o.disc.v_max = v_max;
  o.disc.quadrature = Quadrature::Corrected;
  return o;
}

}  // namespace

TEST_CASE("free-particle flow is exact") {
  const auto h = HamiltonianModel::mechanical(1, {});
  const auto tr = flow(h, start(0.2, 0.5, 0.3), 1.0, 1e-2);
  const auto& s = tr.states.back();
  CHECK(s.t == doctest::Approx(1.0));
  CHECK(std::abs(s.x.x[0] - 0.5) <= 1e-12);
  CHECK(std::abs(s.p[0] - 0.3) <= 1e-12);
  CHECK(std::abs(s.u - (0.5 + 0.045)) <= 1e-12);
}

TEST_CASE("discounted momentum decays") {
  const auto h = HamiltonianModel::discounted(1, 1.0, {});
  const auto tr = flow(h, start(0.1, 0.0, 2.0), 1.0, 1e-3);
  for (std::size_t k = 0; k < tr.states.size(); k += 100) {
    CHECK(std::abs(tr.states[k].p[0] - 2.0 * std::exp(-tr.states[k].t)) <= 1e-8);
  }
}

TEST_CASE("positions wrap") {
  const auto tr = flow(HamiltonianModel::mechanical(1, {}), start(0.9, 0.0, 7.3), 2.0, 1e-3);
  for (const auto& s : tr.states) {
    CHECK(s.x.x[0] >= 0.0);
    CHECK(s.x.x[0] < 1.0);
  }
}

TEST_CASE("evolution of H along characteristics") {
  const TrigPotential v({{{1, 0}, 1.0}});
  SUBCASE("mechanical conserves energy") {
    const auto tr = flow(HamiltonianModel::mechanical(1, v), start(0.3, 0.0, 1.1), 1.0, 5e-4);
    for (double hv : tr.H_values) CHECK(std::abs(hv - tr.H_values.front()) <= 1e-10);
    CHECK(dH_law_residual(HamiltonianModel::mechanical(1, v), tr).rms <= 1e-10);
  }
  SUBCASE("discounted with positive H decays like e^-t") {
    const auto h = HamiltonianModel::discounted(1, 1.0, {});
    // H = p²/2 + u; choose p = 0, u = 0.3
    const auto tr = flow(h, start(0.4, 0.3, 0.0), 1.0, 1e-3);
    for (std::size_t k = 0; k < tr.states.size(); k += 50) {
      CHECK(std::abs(tr.H_values[k] - 0.3 * std::exp(-tr.states[k].t)) <= 1e-6);
    }
    const auto law = dH_law_residual(h, tr);
    CHECK(law.strictly_decreasing);
    CHECK(law.rms <= 1e-6);
  }
  SUBCASE("zero level set is invariant") {
    const auto h = HamiltonianModel::discounted(1, 1.0, v);
    // H = p²/2 + u + cos 2πx = 0 at x = 0.25, p = 1, u = -0.5
    const auto tr = flow(h, start(0.25, -0.5, 1.0), 1.0, 1e-3);
    for (double hv : tr.H_values) CHECK(std::abs(hv) <= 1e-10);
    CHECK(sign_consistent(tr));
  }
  SUBCASE("sign trichotomy on random starts") {
    const auto h = HamiltonianModel::discounted(1, 1.0, v);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x(0.0, 1.0), u(-1.0, 1.0), p(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      const double x0 = x(rng), u0 = u(rng), p0 = p(rng);
      const auto tr = flow(h, start(x0, u0, p0), 1.0, 1e-3);
      CHECK(sign_consistent(tr));
      CHECK(dH_law_residual(h, tr).rms <= 1e-6);
    }
  }
}

TEST_CASE("flow input checks") {
  const auto h = HamiltonianModel::mechanical(1, {});
  CHECK_THROWS_AS(flow(h, start(0.0, 0.0, 0.0), 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(flow(h, start(0.0, 0.0, 0.0), -1.0, 1e-3), ConfigError);
  const auto tr = flow(h, start(0.0, 0.0, 0.0), 1e-3, 1e-3);
  CHECK_THROWS_AS(dH_law_residual(h, tr), DomainError);
}

TEST_CASE("calibrated curves follow characteristics for the free particle") {
  const Grid g(1, 256);
  const auto h = HamiltonianModel::mechanical(1, {});
  const auto o = options(0.125, 2.0);
  TrigPolynomial phi;
  phi.terms.push_back({{1, 0}, 0.0, 0.2});
  const auto r = fixed_point(h, phi.sample(g), 1.0, o);
  // exact when the optimal velocity is a lattice velocity
  const auto exact = match_calibrated(h, extract_calibrated_curve(h, r.field, 128, o), r.field);
  CHECK(exact.sup_position <= g.spacing());
  CHECK(exact.sup_u <= g.spacing());
  // otherwise the launch velocity is off by at most h_v/2
  const double h_v = g.spacing() / o.disc.dt;
  for (std::size_t x_end : {32u, 100u, 200u}) {
    const auto curve = extract_calibrated_curve(h, r.field, x_end, o);
    const auto m = match_calibrated(h, curve, r.field);
    CHECK(m.sup_position <= 0.5 * h_v * 1.0 + g.spacing());
  }
}

TEST_CASE("match options") {
  const Grid g(1, 128);
  const auto h = HamiltonianModel::discounted(1, 1.0, TrigPotential({{{1, 0}, 1.0}}));
  const auto o = options(1.0 / 16.0, 6.0);
  TrigPolynomial phi;
  phi.terms.push_back({{1, 0}, 0.0, 0.5});
  const auto r = fixed_point(h, phi.sample(g), 1.0, o);
  const auto curve = extract_calibrated_curve(h, r.field, 50, o);
  MatchOptions mo;
  mo.window = 2;
  const auto m = match_calibrated(h, curve, r.field, mo);
  CHECK(m.launch_step == 2);
  mo.momentum = MomentumSource::FieldGradient;
  const auto m2 = match_calibrated(h, curve, r.field, mo);
  CHECK(std::isfinite(m2.sup_position));
  mo.window = 20;
  CHECK_THROWS_AS(match_calibrated(h, curve, r.field, mo), DomainError);
}
