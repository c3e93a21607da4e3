#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "qmetric/error.hpp"
#include "qmetric/word_length.hpp"
#include "test_support.hpp"

using namespace qmetric;

namespace {

GroupElement z1(std::int64_t m) { return GroupElement{{m}, 0}; }
GroupElement z2(std::int64_t a, std::int64_t b) { return GroupElement{{a, b}, 0}; }

}  // namespace

TEST_CASE("enumerate_ball on Z") {
  const auto g = make_free_abelian(1);
  const auto ball = enumerate_ball(g, 3);
  REQUIRE(ball.size() == 7);
  CHECK(ball[0].element == g.identity());
  for (std::int64_t m = -3; m <= 3; ++m) CHECK(length(ball, z1(m)) == std::abs(m));
  // ordering: by length, then canonical order
  CHECK(ball[1].element == z1(-1));
  CHECK(ball[2].element == z1(1));
}

TEST_CASE("radius zero is the identity alone") {
  for (const auto& g : test::all_families()) {
    const auto ball = enumerate_ball(g, 0);
    REQUIRE(ball.size() == 1);
    CHECK(ball[0].element == g.identity());
    CHECK(ball[0].length == 0);
  }
}

TEST_CASE("Z^2 balls match the exhaustive l1 count") {
  const auto g = make_free_abelian(2);
  const auto ball = enumerate_ball(g, 2);
  CHECK(ball.size() == 13);
  CHECK(ball.shell_sizes() == std::vector<std::size_t>{1, 4, 8});

  const auto big = enumerate_ball(g, 20);
  std::size_t count = 0;
  for (int a = -20; a <= 20; ++a)
    for (int b = -20; b <= 20; ++b)
      if (std::abs(a) + std::abs(b) <= 20) {
        ++count;
        CHECK(length(big, z2(a, b)) == std::abs(a) + std::abs(b));
      }
  CHECK(big.size() == count);
  CHECK(length(big, z2(2, -1)) == 3);
}

TEST_CASE("lengths agree with brute-force minimal words") {
  for (const auto& g : test::all_families()) {
    const auto ball = enumerate_ball(g, 4);
    for (const auto& e : ball.entries()) CHECK(test::brute_force_length(g, e.element, 4) == e.length);
  }
  const auto d = make_infinite_dihedral();
  const auto ball = enumerate_ball(d, 4);
  CHECK(length(ball, GroupElement{{2}, 1}) == 3);
}

TEST_CASE("length outside the ball names the required radius") {
  const auto g = make_free_abelian(1);
  const auto ball = enumerate_ball(g, 3);
  CHECK(length(ball, g.identity()) == 0);
  try {
    (void)length(ball, z1(9));
    FAIL("expected OutOfBallError");
  } catch (const OutOfBallError& e) {
    CHECK(e.required_radius() >= 4);
  }
}

TEST_CASE("size cap is an explicit error") {
  const auto g = make_free_abelian(2);
  CHECK_THROWS_AS(enumerate_ball(g, 50, 100), ResourceError);
  CHECK_NOTHROW(enumerate_ball(g, 6, 85));  // exactly 2*6*7 + 1 = 85 elements
}

TEST_CASE("axioms hold on every enumerated ball") {
  for (const auto& g : test::all_families()) {
    const auto ball = enumerate_ball(g, 6);
    CHECK(ball[0].length == 0);
    for (const auto& a : ball.entries()) {
      CHECK(length(ball, g.inv(a.element)) == a.length);
      for (const auto& b : ball.entries()) {
        auto i = ball.index_of(g.mul(a.element, b.element));
        if (i) CHECK(ball[*i].length <= a.length + b.length);
      }
    }
  }
}

TEST_CASE("balls are prefix consistent as the radius grows") {
  for (const auto& g : test::all_families()) {
    const auto small = enumerate_ball(g, 5);
    const auto large = enumerate_ball(g, 6);
    REQUIRE(large.size() >= small.size());
    for (std::size_t i = 0; i < small.size(); ++i) {
      CHECK(small[i].element == large[i].element);
      CHECK(small[i].length == large[i].length);
    }
  }
}

TEST_CASE("word length is minimal over random words") {
  std::mt19937_64 rng(5);
  for (const auto& g : test::all_families()) {
    const auto ball = enumerate_ball(g, 10);
    std::uniform_int_distribution<std::size_t> gen(0, g.generators().size() - 1);
    std::uniform_int_distribution<std::size_t> len(0, 10);
    for (int t = 0; t < 300; ++t) {
      std::vector<std::size_t> w(len(rng));
      for (auto& x : w) x = gen(rng);
      CHECK(length(ball, g.word_eval(w)) <= static_cast<int>(w.size()));
    }
  }
}

TEST_CASE("growth_fit") {
  SUBCASE("Z has #ball(c) = 2c + 1") {
    const auto rep = growth_fit(enumerate_ball(make_free_abelian(1), 50));
    CHECK(rep.fit_k == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.fit_l == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.residual < 1e-9);
    REQUIRE(rep.shell_bound);
    CHECK(rep.shell_bound->value == 2);
    CHECK(rep.shell_bound->provenance == BoundProvenance::analytic);
  }
  SUBCASE("Z^2 shells grow like 4k and carry no bound") {
    const auto rep = growth_fit(enumerate_ball(make_free_abelian(2), 20));
    for (int k = 1; k <= 20; ++k) CHECK(rep.shell_sizes[k] == static_cast<std::size_t>(4 * k));
    CHECK_FALSE(rep.shell_bound);
  }
  SUBCASE("dihedral shells") {
    const auto rep = growth_fit(enumerate_ball(make_infinite_dihedral(), 20));
    CHECK(rep.shell_sizes[1] == 3);
    for (int k = 2; k <= 20; ++k) CHECK(rep.shell_sizes[k] == 4);
    CHECK(rep.shell_bound->value == 4);
  }
  SUBCASE("radius too small") { CHECK_THROWS_AS(growth_fit(enumerate_ball(make_free_abelian(1), 2)), DomainError); }
  SUBCASE("custom generators give an empirical bound") {
    GroupSpec s;
    s.family = Family::free_abelian;
    s.generators = std::vector<GroupElement>{z1(1), z1(-1), z1(2), z1(-2)};
    const auto rep = growth_fit(enumerate_ball(make_group(s), 10));
    REQUIRE(rep.shell_bound);
    CHECK(rep.shell_bound->provenance == BoundProvenance::empirical);
    CHECK(rep.shell_bound->value == 4);
  }
}

TEST_CASE("shells of Z x F") {
  // (m, f) has length |m| for m != 0; (0, f) with f != e has length 2.
  for (const auto& F : {FiniteGroupTable::cyclic(2), FiniteGroupTable::cyclic(3), FiniteGroupTable::symmetric3()}) {
    const auto g = make_product_z_finite(F);
    const std::size_t n = static_cast<std::size_t>(F.order());
    const auto ball = enumerate_ball(g, 50);
    const auto& s = ball.shell_sizes();
    CHECK(s[1] == 2 * n);
    CHECK(s[2] == 3 * n - 1);
    for (int k = 3; k <= 50; ++k) CHECK(s[k] == 2 * n);
    const auto bound = analytic_shell_bound(g);
    REQUIRE(bound);
    for (int k = 1; k <= 50; ++k) CHECK(s[k] <= *bound);
  }
}

TEST_CASE("square_sum_evidence") {
  SUBCASE("Z, r = 100") {
    const auto ev = square_sum_evidence(enumerate_ball(make_free_abelian(1), 100));
    double oracle = 0;
    for (int m = 1; m <= 100; ++m) oracle += 2.0 / (double(m) * m);
    CHECK(ev.partial == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(ev.partial == doctest::Approx(3.2699).epsilon(1e-4));
    REQUIRE(ev.tail_bound);
    CHECK(*ev.tail_bound <= 0.02 + 1e-15);
    // the tail bound really covers the remainder pi^2/3 - partial
    CHECK(ev.partial + *ev.tail_bound >= std::numbers::pi * std::numbers::pi / 3);
  }
  SUBCASE("Z^2, r = 3") {
    const auto ball = enumerate_ball(make_free_abelian(2), 3);
    const auto ev = square_sum_evidence(ball);
    double oracle = 0;
    for (const auto& e : ball.entries())
      if (e.length > 0) oracle += 1.0 / (double(e.length) * e.length);
    CHECK(ev.partial == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(ev.partial == doctest::Approx(4.0 * (1 + 0.5 + 1.0 / 3)).epsilon(1e-14));
    CHECK_FALSE(ev.tail_bound);
  }
  SUBCASE("Z, r = 1") {
    const auto ev = square_sum_evidence(enumerate_ball(make_free_abelian(1), 1));
    CHECK(ev.partial == 2.0);
    CHECK(*ev.tail_bound <= 2.0);
  }
  SUBCASE("partials are nondecreasing and Z^2 tracks 4 H_r") {
    const auto g = make_free_abelian(2);
    double prev = 0, harmonic = 0;
    for (int r = 1; r <= 30; ++r) {
      harmonic += 1.0 / r;
      const auto ev = square_sum_evidence(enumerate_ball(g, r));
      CHECK(ev.partial >= prev);
      CHECK(ev.partial >= 4 * harmonic - 1e-9);
      prev = ev.partial;
    }
  }
}

TEST_CASE("QMETRIC_MAX_BALL") {
  ::setenv("QMETRIC_MAX_BALL", "10", 1);
  CHECK(max_ball_from_env() == 10);
  CHECK_THROWS_AS(enumerate_ball(make_free_abelian(1), 20), ResourceError);
  ::setenv("QMETRIC_MAX_BALL", "nonsense", 1);
  CHECK_THROWS_AS(max_ball_from_env(), ConfigError);
  ::unsetenv("QMETRIC_MAX_BALL");
  CHECK(max_ball_from_env() == kDefaultMaxBall);
}
