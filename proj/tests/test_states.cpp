#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qmetric/error.hpp"
#include "qmetric/states.hpp"
#include "test_support.hpp"

using namespace qmetric;

namespace {

GroupElement z1(std::int64_t m) { return GroupElement{{m}, 0}; }
AlgebraElement lam(std::int64_t m, cplx c = 1.0) { return AlgebraElement::basis(z1(m), c); }

std::vector<GroupElement> pool_of(const Ball& ball) {
  std::vector<GroupElement> out;
  for (const auto& e : ball.entries()) out.push_back(e.element);
  return out;
}

std::vector<StateRep> sample_states(const Group& g, std::mt19937_64& rng) {
  std::vector<StateRep> out = {StateRep::trace(), StateRep::one()};
  const auto pool = pool_of(enumerate_ball(g, 2));
  for (int i = 0; i < 3; ++i) out.push_back(StateRep::density(g, test::random_element(pool, 5, rng)));
  if (g.family() != Family::infinite_dihedral) {
    std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
    std::vector<cplx> z;
    for (int i = 0; i < g.z_rank(); ++i) z.push_back(std::polar(1.0, th(rng)));
    out.push_back(StateRep::character(g, z));
  } else {
    out.push_back(StateRep::character(g, {-1.0}));
  }
  return out;
}

}  // namespace

TEST_CASE("coefficients of the basic states") {
  const auto z = make_free_abelian(1);
  const auto tr = StateRep::trace();
  CHECK(tr.coeff(z1(0), z) == cplx(1.0));
  CHECK(tr.coeff(z1(3), z) == cplx{});
  CHECK(StateRep::one().coeff(z1(-7), z) == cplx(1.0));

  const auto alt = StateRep::character(z, {-1.0});
  for (std::int64_t m = -4; m <= 4; ++m) CHECK(alt.coeff(z1(m), z) == cplx(m % 2 == 0 ? 1.0 : -1.0));

  const auto rot = StateRep::character(z, {std::polar(1.0, 0.3)});
  CHECK(std::abs(rot.coeff(z1(5), z) - std::polar(1.0, 1.5)) < 1e-14);

  // b = l0 + l1: b^*b = 2 l0 + l1 + l-1, so rho = l0 + (l1 + l-1)/2
  const auto dens = StateRep::density(z, lam(0) + lam(1));
  CHECK(std::abs(dens.coeff(z1(0), z) - 1.0) < 1e-15);
  CHECK(std::abs(dens.coeff(z1(1), z) - 0.5) < 1e-15);
  CHECK(std::abs(dens.coeff(z1(-1), z) - 0.5) < 1e-15);
  CHECK(dens.coeff(z1(2), z) == cplx{});

  // xi = (d0 + d1)/sqrt2: <l1 xi, xi> = 1/2
  const double s = 1.0 / std::sqrt(2.0);
  const auto vec = StateRep::vector(z, lam(0, s) + lam(1, s));
  CHECK(std::abs(vec.coeff(z1(1), z) - 0.5) < 1e-15);
  CHECK(std::abs(vec.coeff(z1(0), z) - 1.0) < 1e-15);
  CHECK(vec.coeff(z1(2), z) == cplx{});
}

TEST_CASE("the vector state of delta_e is the trace") {
  for (const auto& g : test::all_families()) {
    const auto v = StateRep::vector(g, AlgebraElement::basis(g.identity()));
    const auto ball = enumerate_ball(g, 4);
    for (const auto& e : ball.entries()) CHECK(v.coeff(e.element, g) == StateRep::trace().coeff(e.element, g));
  }
}

TEST_CASE("table states") {
  const auto z = make_free_abelian(1);
  AlgebraElement::Map m{{z1(0), 1.0}, {z1(1), 0.25}, {z1(-1), 0.25}};
  const auto loose = StateRep::table(m);
  CHECK(loose.coeff(z1(1), z) == cplx(0.25));
  CHECK(loose.coeff(z1(4), z) == cplx{});
  const auto strict = StateRep::table(m, true);
  CHECK_THROWS_AS(strict.coeff(z1(4), z), OutOfBallError);
}

TEST_CASE("construction errors") {
  const auto z = make_free_abelian(1);
  CHECK_THROWS_AS(StateRep::character(z, {2.0}), DomainError);
  CHECK_THROWS_AS(StateRep::character(z, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(StateRep::character(make_infinite_dihedral(), {cplx(0, 1)}), DomainError);
  CHECK_THROWS_AS(StateRep::vector(z, lam(0) + lam(1)), DomainError);
  CHECK_THROWS_AS(StateRep::density(z, AlgebraElement{}), DomainError);
}

TEST_CASE("states are unital, contractive and hermitian") {
  std::mt19937_64 rng(7);
  for (const auto& g : test::all_families()) {
    const auto ball = enumerate_ball(g, 5);
    for (const auto& s : sample_states(g, rng)) {
      CHECK(std::abs(s.coeff(g.identity(), g) - 1.0) < 1e-12);
      for (const auto& e : ball.entries()) {
        const cplx c = s.coeff(e.element, g);
        CHECK(std::abs(c) <= 1.0 + 1e-12);
        CHECK(std::abs(s.coeff(g.inv(e.element), g) - std::conj(c)) < 1e-12);
      }
    }
  }
}

TEST_CASE("pd_check") {
  const auto z = make_free_abelian(1);
  SUBCASE("a character gives a rank one Gram matrix") {
    const auto ball = enumerate_ball(z, 4);
    const auto p = pd_check(StateRep::character(z, {std::polar(1.0, 0.7)}), ball);
    CHECK(p.pass);
    CHECK(p.max_eigenvalue == doctest::Approx(9.0));
    CHECK(std::abs(p.min_eigenvalue) < 1e-10);
  }
  SUBCASE("the trace gives the identity") {
    const auto p = pd_check(StateRep::trace(), enumerate_ball(z, 3));
    CHECK(p.pass);
    CHECK(p.min_eigenvalue == doctest::Approx(1.0));
    CHECK(p.max_eigenvalue == doctest::Approx(1.0));
  }
  SUBCASE("a non positive table is rejected") {
    // f = 1 on |m| <= 1: the 5x5 Gram matrix is tridiagonal with eigenvalues 1 + 2 cos(k pi / 6)
    AlgebraElement::Map m{{z1(0), 1.0}, {z1(1), 1.0}, {z1(-1), 1.0}};
    const auto p = pd_check(StateRep::table(m), enumerate_ball(z, 2));
    CHECK_FALSE(p.pass);
    CHECK(p.min_eigenvalue == doctest::Approx(1.0 + 2.0 * std::cos(5.0 * std::numbers::pi / 6.0)).epsilon(1e-12));
    CHECK(p.max_eigenvalue == doctest::Approx(1.0 + 2.0 * std::cos(std::numbers::pi / 6.0)).epsilon(1e-12));
  }
  SUBCASE("random states pass on every family") {
    std::mt19937_64 rng(19);
    for (const auto& g : test::all_families()) {
      const auto ball = enumerate_ball(g, 3);
      for (const auto& s : sample_states(g, rng)) CHECK(pd_check(s, ball).pass);
    }
  }
  SUBCASE("Gram size cap") {
    CHECK_THROWS_AS(pd_check(StateRep::trace(), enumerate_ball(make_free_abelian(2), 40)), ResourceError);
  }
}

TEST_CASE("kappa_bounds") {
  const auto z = make_free_abelian(1);
  SUBCASE("b = lambda_e gives the trace with kappa 1") {
    const auto k = kappa_bounds(StateRep::density(z, lam(0)), enumerate_ball(z, 5));
    CHECK(k.kappa_upper == doctest::Approx(1.0));
    CHECK(k.kappa_lower == doctest::Approx(1.0));
  }
  SUBCASE("b = l0 + l1 has rho = 1 + cos theta with sup 2") {
    const auto s = StateRep::density(z, lam(0) + lam(1));
    const auto k = kappa_bounds(s, enumerate_ball(z, 200));
    CHECK(k.kappa_upper == doctest::Approx(4.0));
    CHECK(k.kappa_lower <= k.kappa_upper);
    // compression of the multiplier by 1 + cos theta: top eigenvalue 1 + cos(pi / (n + 1))
    const double top = 1.0 + std::cos(std::numbers::pi / 402.0);
    CHECK(k.kappa_lower <= top * top + 1e-12);
    CHECK(k.kappa_lower >= top * top - 1e-3);
  }
  SUBCASE("only density states") { CHECK_THROWS_AS(kappa_bounds(StateRep::trace(), enumerate_ball(z, 2)), DomainError); }
  SUBCASE("square summed coefficients stay below kappa") {
    std::mt19937_64 rng(31);
    for (const auto& g : test::all_families()) {
      const auto ball = enumerate_ball(g, 6);
      const auto pool = pool_of(enumerate_ball(g, 2));
      for (int t = 0; t < 10; ++t) {
        const auto s = StateRep::density(g, test::random_element(pool, 4, rng));
        const auto k = kappa_bounds(s, ball);
        double sq = 0;
        for (const auto& e : ball.entries()) sq += std::norm(s.coeff(e.element, g));
        CHECK(sq <= k.kappa_upper + 1e-12);
        CHECK(k.kappa_lower <= k.kappa_upper + 1e-12);
        CHECK(k.kappa_lower >= 1.0 - 1e-9);
      }
    }
  }
}
