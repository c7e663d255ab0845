#include "helpers.hpp"

using namespace nsdde;
using testutil::code_of;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("radial projection") {
  SECTION("outside points land on the sphere") {
    const Vec t = truncate_point(Vec{3.0, 4.0}, 2.0);
    CHECK_THAT(t[0], WithinRel(1.2, 1e-12));
    CHECK_THAT(t[1], WithinRel(1.6, 1e-12));
    CHECK_THAT(norm(t), WithinRel(2.0, 1e-12));
  }
  SECTION("inside points pass through bitwise") {
    const Vec x{0.1 + 0.2, -0.7};  // deliberately carries rounding dirt
    const Vec t = truncate_point(x, 2.0);
    CHECK(t[0] == x[0]);
    CHECK(t[1] == x[1]);
  }
  SECTION("boundary points pass through bitwise") {
    const Vec x{2.0};
    CHECK(truncate_point(x, 2.0)[0] == 2.0);
  }
  SECTION("origin is fixed") {
    const Vec t = truncate_point(Vec{0.0, 0.0}, 1.0);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 0.0);
  }
  SECTION("radius must be positive and finite") {
    CHECK(code_of([] { truncate_point(Vec{1.0}, 0.0); }) == errc::invalid_radius);
    CHECK(code_of([] { truncate_point(Vec{1.0}, -1.0); }) == errc::invalid_radius);
    CHECK(code_of([] {
            truncate_point(Vec{1.0}, std::numeric_limits<double>::infinity());
          }) == errc::invalid_radius);
  }
  SECTION("projection is norm-bounded and idempotent to an ulp") {
    // re-projecting can shave one ulp when the scaled norm rounds above r,
    // so exact bit equality is not the right invariant here
    std::uint64_t st = 42;
    for (int i = 0; i < 200; ++i) {
      Vec x{static_cast<double>(splitmix64_step(st) >> 40) * 1e-2 - 40.0,
            static_cast<double>(splitmix64_step(st) >> 40) * 1e-2 - 40.0};
      const Vec t = truncate_point(x, 3.0);
      CHECK(norm(t) <= 3.0 * (1.0 + 1e-15));
      const Vec tt = truncate_point(t, 3.0);
      CHECK_THAT(tt[0], Catch::Matchers::WithinULP(t[0], 2));
      CHECK_THAT(tt[1], Catch::Matchers::WithinULP(t[1], 2));
    }
  }
}

TEST_CASE("power gauge admissibility") {
  SECTION("quarter exponent at step 2^-8 sits exactly on the admissible boundary") {
    CHECK(power_gauge(1.0 / 256.0, 0.25) == 4.0);
  }
  SECTION("too aggressive exponents are rejected eagerly") {
    CHECK(code_of([] { power_gauge(0.5, 0.5); }) == errc::inadmissible_gauge);
  }
  SECTION("a unit step sits on the lower gauge boundary") {
    // step^{-eps} >= 1 for every step in (0,1], so g = 1 is legal, not an error
    CHECK(power_gauge(1.0, 0.25) == 1.0);
  }
  SECTION("jump admissibility uses the p-th power") {
    // step^{1/4} g^p <= 1: with p = 3 the exponent budget is epsilon <= 1/12.
    CHECK_THAT(power_gauge(1.0 / 4096.0, 1.0 / 12.0, Driver::jump, 3.0),
               WithinRel(2.0, 1e-12));
    CHECK(code_of([] { power_gauge(1.0 / 4096.0, 0.25, Driver::jump, 3.0); }) ==
          errc::inadmissible_gauge);
  }
  SECTION("parameter validation") {
    CHECK(code_of([] { power_gauge(0.0, 0.25); }) == errc::invalid_parameter);
    CHECK(code_of([] { power_gauge(2.0, 0.25); }) == errc::invalid_parameter);
    CHECK(code_of([] { power_gauge(0.5, -1.0); }) == errc::invalid_parameter);
  }
}

TEST_CASE("envelope inversion") {
  SECTION("cubic oracle") {
    const double r = invert_bound([](double x) { return x * x * x; }, 8.0);
    CHECK_THAT(r, WithinRel(2.0, 1e-9));
  }
  SECTION("registered cubic-plus-root envelope oracle") {
    const CoefficientSet set = example_b();
    CHECK_THAT(set.bound(2.0), WithinRel(11.0, 1e-15));
    CHECK_THAT(invert_bound(set.bound, 11.0), WithinRel(2.0, 1e-9));
  }
  SECTION("targets below f(0) are rejected") {
    CHECK(code_of([] { return invert_bound([](double x) { return 1.0 + x; }, 0.5); }) ==
          errc::below_domain);
  }
  SECTION("unbounded searches are reported") {
    CHECK(code_of([] { return invert_bound([](double) { return 0.0; }, 1.0); }) ==
          errc::unbounded_search);
  }
  SECTION("domination is preserved: f(r) <= target") {
    const CoefficientSet set = example_b();
    for (double v : {1.1, 2.0, 3.7, 10.0, 123.0, 4096.0}) {
      const double r = invert_bound(set.bound, v);
      CHECK(set.bound(r) <= v * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("rule construction and truncated coefficients") {
  const CoefficientSet set = example_b();

  SECTION("radius follows the inverted envelope") {
    const TruncationRule rule = make_rule(set, 1.0 / 256.0, 0.25);
    CHECK(rule.gauge == 4.0);
    // 1 + r + r^3 = 4 at r ~ 1.2134
    CHECK_THAT(set.bound(rule.radius), WithinRel(4.0, 1e-9));
  }
  SECTION("truncated drift oracle at radius 2") {
    CoefficientSet big = set;
    big.bound = [](double r) { return 1.0 + r * r * r; };  // f(2) = 9
    TruncationRule rule = make_rule(big, 1.0 / 256.0, 0.25);
    rule.gauge = 9.0;
    rule.radius = invert_bound(big.bound, 9.0);
    REQUIRE_THAT(rule.radius, WithinRel(2.0, 1e-9));
    const CoefficientSet trunc = truncated_coefficients(big, rule);
    // x = 10 projects to 2: b(2, 0) = 2 - 8 + cos 0 = -5.
    CHECK_THAT(trunc.b(Vec{10.0}, Vec{0.0})[0], WithinRel(-5.0, 1e-9));
    // inside the ball the wrapped drift agrees with the raw one bitwise
    const Vec inside{0.3};
    CHECK(trunc.b(inside, inside)[0] == big.b(inside, inside)[0]);
  }
  SECTION("the neutral term is never truncated") {
    const TruncationRule rule = make_rule(set, 1.0 / 256.0, 0.25);
    const CoefficientSet trunc = truncated_coefficients(set, rule);
    const Vec far{50.0};
    CHECK(trunc.D(far)[0] == set.D(far)[0]);
  }
  SECTION("mode mismatch is rejected") {
    const TruncationRule jump_rule = TruncationRule{0.01, 0.05, 1.2, 1.0, Driver::jump, 3.0, {}};
    CHECK(code_of([&] { truncated_coefficients(set, jump_rule); }) == errc::mode_mismatch);
  }
  SECTION("diffusion is truncated alongside the drift") {
    const TruncationRule rule = make_rule(set, 1.0 / 256.0, 0.25);
    const CoefficientSet trunc = truncated_coefficients(set, rule);
    const double r = rule.radius;
    CHECK_THAT(frob(trunc.sigma(Vec{100.0}, Vec{0.0})),
               WithinRel(std::pow(r, 1.5), 1e-12));
  }
}

TEST_CASE("numeric envelope fallback dominates the coefficients") {
  CoefficientSet set = example_b();
  set.bound = nullptr;
  const BoundFn fb = numeric_bound(set);
  const CoefficientSet ref = example_b();
  for (double r : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    // envelope at r must dominate |b| and the diffusion norm on the ball,
    // probed on the axis
    const double fr = fb(r);
    for (double s : {-r, -0.5 * r, 0.0, 0.5 * r, r}) {
      const Vec x{s};
      CHECK(norm(ref.b(x, x)) <= fr * (1.0 + 1e-9));
      CHECK(frob(ref.sigma(x, x)) <= fr * (1.0 + 1e-9));
    }
    // and it must be nondecreasing
    CHECK(fb(2.0 * r) >= fr);
  }
}
