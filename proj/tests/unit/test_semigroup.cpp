#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "wkam/errors.hpp"
#include "wkam/semigroup.hpp"

using namespace wkam;

namespace {

SemigroupOptions options(double dt, double v_max, double tol = 1e-10) {
  SemigroupOptions o;
  o.disc.dt = dt;
  o.disc.v_max = v_max;
  o.disc.quadrature = Quadrature::Corrected;
  o.tol = tol;
  return o;
}

TrigPotential cosine(double a = 1.0) { return TrigPotential({{{1, 0}, a}}); }

GridField sine(const Grid& g, double a, int k = 1) {
  TrigPolynomial p;
  p.terms.push_back({{k, 0}, 0.0, a});
  return p.sample(g);
}

}  // namespace

TEST_CASE("zero Lagrangian keeps constants") {
  const Grid g(1, 32);
  const auto r = fixed_point(HamiltonianModel::mechanical(1, {}), GridField::constant(g, 5.0), 1.0,
                             options(0.125, 2.0));
  for (std::size_t k = 0; k < r.field.n_slices(); ++k) {
    for (double v : r.field.slice(k)) CHECK(v == 5.0);
  }
  CHECK(r.report.iterations == 0);
}

TEST_CASE("u-independent Lagrangian needs one application") {
  const Grid g(1, 64);
  const auto r = fixed_point(HamiltonianModel::mechanical(1, cosine()), sine(g, 0.5), 1.0,
                             options(1.0 / 16.0, 6.0));
  CHECK(r.report.iterations == 1);
  CHECK(r.report.residual() == 0.0);
}

TEST_CASE("discounted constant case decays exponentially") {
  const Grid g(1, 64);
  const double c = 2.0;
  const auto r = fixed_point(HamiltonianModel::discounted(1, 1.0, {}), GridField::constant(g, c), 1.0,
                             options(1e-3, 16.0));
  double err = 0.0;
  for (std::size_t k = 0; k < r.field.n_slices(); k += 50) {
    for (double v : r.field.slice(k)) err = std::max(err, std::abs(v - oracle::exp_decay(c, 1.0, r.field.time(k))));
  }
  CHECK(err <= 1e-3);
}

TEST_CASE("fixed-point certificate") {
  const Grid g(1, 128);
  const auto h = HamiltonianModel::discounted(1, 1.0, cosine());
  const auto r = fixed_point(h, sine(g, 1.0), 1.0, options(1.0 / 32.0, 6.0, 1e-12));
  // smallest k with gaps[0]·(Tλ)^k/k! below tol, plus the verification pass
  int k_bound = 0;
  for (double term = r.report.gaps.front(); term >= 1e-12; term /= ++k_bound) {
  }
  CHECK(r.report.iterations <= k_bound + 1);
  CHECK(r.report.iterations <= 15);
  CHECK(r.report.bound_respected());
  CHECK(r.report.residual() < 1e-12);

  SUBCASE("uniqueness from a different start") {
    const SpaceTimeField zero(g, 1.0 / 32.0, 32, 0.0);
    const auto r2 = fixed_point(h, sine(g, 1.0), 1.0, options(1.0 / 32.0, 6.0, 1e-12), &zero);
    CHECK(sup_distance(r.field.data(), r2.field.data()) < 2e-12);
  }
  SUBCASE("too few iterations") {
    auto o = options(1.0 / 32.0, 6.0, 1e-12);
    o.max_iter = 3;
    CHECK_THROWS_AS(fixed_point(h, sine(g, 1.0), 1.0, o), FixedPointError);
  }
  SUBCASE("dt times lambda_L above one") {
    const auto steep = HamiltonianModel::discounted(1, 40.0, cosine());
    try {
      fixed_point(steep, sine(g, 1.0), 1.0, options(1.0 / 32.0, 6.0));
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "dt");
    }
  }
}

TEST_CASE("operator is antitone in the candidate") {
  const Grid g(1, 64);
  const auto h = HamiltonianModel::discounted(1, 1.0, cosine());
  const auto o = options(1.0 / 16.0, 4.0);
  const GridField phi = sine(g, 0.5);
  SpaceTimeField lo(g, o.disc.dt, 16, -0.3), hi(g, o.disc.dt, 16, 0.4);
  const auto a = apply_A(h, phi, lo, o.disc);
  const auto b = apply_A(h, phi, hi, o.disc);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] >= b.data()[i]);
}

TEST_CASE("semigroup operations") {
  const Grid g(1, 128);
  const auto h = HamiltonianModel::discounted(1, 1.0, cosine());
  const auto o = options(1.0 / 32.0, 6.0);
  const GridField phi = sine(g, 1.0);
  const auto t0 = step_T(h, phi, 0.0, o);
  CHECK(std::equal(t0.values().begin(), t0.values().end(), phi.values().begin()));

  const auto direct = step_T(h, phi, 1.5, o);
  const auto composed = step_T(h, step_T(h, phi, 0.5, o), 1.0, o);
  CHECK(sup_distance(direct.values(), composed.values()) <= 1e-8);

  // restart blocks agree with one long slab
  auto blocked = o;
  blocked.block_length = 0.5;
  CHECK(sup_distance(step_T(h, phi, 1.5, blocked).values(), direct.values()) <= 1e-8);
}

TEST_CASE("properties of the solution semigroup") {
  const Grid g(1, 64);
  const auto o = options(1.0 / 16.0, 6.0);
  const std::vector<double> ts{0.5, 1.0, 2.0, 4.0, 8.0};
  SUBCASE("discounted pendulum, 2 sin vs 0") {
    const auto r = check_properties(HamiltonianModel::discounted(1, 1.0, cosine()), sine(g, 2.0),
                                    GridField::constant(g, 0.0), ts, o);
    CHECK(r.monotone());
    CHECK(r.nonexpansive());
    CHECK(r.rows.size() == ts.size());
    CHECK(std::isfinite(r.equi_lipschitz));
    CHECK(r.uniform_bound >= 2.0);
  }
  SUBCASE("identical inputs") {
    const auto r = check_properties(HamiltonianModel::discounted(1, 1.0, cosine()), sine(g, 1.0),
                                    sine(g, 1.0), ts, o);
    for (const auto& row : r.rows) CHECK(row.output_distance <= 2.0 * r.tol);
  }
  SUBCASE("mechanical shift commutes with constants") {
    const auto h = HamiltonianModel::mechanical(1, cosine());
    GridField shifted = sine(g, 1.0);
    for (auto& v : shifted.values()) v += 0.7;
    const auto a = step_T(h, shifted, 1.0, o);
    const auto b = step_T(h, sine(g, 1.0), 1.0, o);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(a[i] - b[i] - 0.7) <= 2.0 * o.tol);
  }
}

TEST_CASE("calibrated curves") {
  SUBCASE("free particle from a flat datum stays put") {
    const Grid g(1, 32);
    const auto h = HamiltonianModel::mechanical(1, {});
    const auto o = options(0.125, 2.0);
    const auto r = fixed_point(h, GridField::constant(g, 0.0), 1.0, o);
    const auto c = extract_calibrated_curve(h, r.field, 9, o);
    for (auto p : c.points) CHECK(p == 9);
  }
  SUBCASE("discounted pendulum chain") {
    const Grid g(1, 128);
    const auto h = HamiltonianModel::discounted(1, 1.0, cosine());
    const auto o = options(1.0 / 32.0, 6.0);
    const auto r = fixed_point(h, sine(g, 0.5), 1.0, o);
    const auto c = extract_calibrated_curve(h, r.field, 40, o);
    CHECK(c.points.size() == 33);
    CHECK(c.max_calibration_defect() <= 1e-10);
    CHECK_FALSE(c.window_saturated);
  }
  SUBCASE("unconverged field is rejected") {
    const Grid g(1, 32);
    const auto h = HamiltonianModel::discounted(1, 1.0, cosine());
    const auto o = options(0.125, 2.0);
    const SpaceTimeField junk(g, 0.125, 8, 0.0);
    CHECK_THROWS_AS(extract_calibrated_curve(h, junk, 3, o), DomainError);
  }
}

TEST_CASE("long-time behaviour") {
  const Grid g(1, 256);
  const auto o = options(1.0 / 16.0, 6.0);
  SUBCASE("constant potential") {
    const auto h = HamiltonianModel::discounted(1, 1.0, TrigPotential({{{0, 0}, 0.4}}));
    const auto r = converge(h, sine(g, 0.5), o, 50.0);
    REQUIRE(r.converged);
    for (double v : r.u_inf.values()) CHECK(std::abs(v + 0.4) <= 1e-3);
    const auto exact = weak_kam_residual(h, GridField::constant(g, -0.4));
    CHECK(exact.max_abs <= 1e-14);
  }
  SUBCASE("normalized pendulum") {
    auto h = HamiltonianModel::mechanical(1, cosine());
    h.shift = 1.0;
    const auto r = converge(h, sine(g, 0.5), o, 50.0);
    REQUIRE(r.converged);
    CHECK(r.residual.max_abs <= 5e-2);
    CHECK(r.residual.kink_count <= 2);
    // compare with the closed-form solution up to the additive constant
    const double offset = r.u_inf[0];
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      err = std::max(err, std::abs(r.u_inf[j] - offset - oracle::pendulum_weak_kam(g.point(j).x[0])));
    }
    CHECK(err <= 2e-2);

    const auto again = converge(h, r.u_inf, o, 50.0);
    CHECK(again.converged);
    CHECK(again.times.size() == 1);

    const auto dom = check_domination(h, r.u_inf, 50, 7, o.disc.v_max);
    CHECK(dom.max_violation <= 5e-2);

    const auto lt = check_Ltilde(h, r.u_inf, 4.0, 0.01);
    CHECK(lt.max_argmin_mismatch <= 0.01 + 1e-12);
  }
  SUBCASE("constant field has L-tilde |v|^2/2") {
    const auto h = HamiltonianModel::discounted(1, 1.0, TrigPotential({{{0, 0}, 0.4}}));
    const auto lt = check_Ltilde(h, GridField::constant(g, -0.4), 2.0, 0.1);
    CHECK(std::abs(lt.min_over_smooth) <= 1e-12);
    for (const auto& p : lt.points) CHECK(std::abs(p.argmin_v[0]) <= 1e-12);
  }
}
