#include "helpers.hpp"

using namespace nsdde;
using testutil::code_of;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("coefficient set validation") {
  CoefficientSet s = testutil::additive_model();
  CHECK_NOTHROW(validate(s));

  SECTION("D and b are mandatory") {
    CoefficientSet t = s;
    t.D = nullptr;
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
    t = s;
    t.b = nullptr;
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
  }
  SECTION("exactly one driver") {
    CoefficientSet t = s;
    t.h = [](const Vec&, const Vec&, double) { return Vec{0.0}; };
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
    t.sigma = nullptr;
    CHECK_NOTHROW(validate(t));
  }
  SECTION("kappa must lie strictly inside (0,1)") {
    CoefficientSet t = s;
    t.kappa = 1.0;
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
    t.kappa = 0.0;
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
  }
  SECTION("the neutral map must vanish at zero") {
    CoefficientSet t = s;
    t.D = [](const Vec&) { return Vec{0.5}; };
    CHECK(code_of([&] { validate(t); }) == errc::invalid_parameter);
  }
}

TEST_CASE("model with scaled neutral feedback") {
  const CoefficientSet s = example_a(0.5);

  SECTION("frozen coefficient values") {
    CHECK(s.D(Vec{2.0})[0] == -1.0);
    CHECK(s.b(Vec{1.0}, Vec{1.0})[0] == -1.875);  // v = 1.5, v - v^3
    CHECK_THAT(frob(s.sigma(Vec{1.0}, Vec{1.0})), WithinRel(1.8371173070873836, 1e-15));
  }
  SECTION("contraction constant tracks |a|") {
    CHECK(s.kappa == 0.5);
  }
  SECTION("envelope dominates on a sample of radii") {
    for (double r : {0.5, 1.0, 3.0, 10.0}) {
      const double f = s.bound(r);
      for (double u : {-r, 0.0, r})
        for (double v : {-r, 0.0, r}) {
          CHECK(norm(s.b(Vec{u}, Vec{v})) <= f * (1.0 + 1e-12));
          CHECK(frob(s.sigma(Vec{u}, Vec{v})) <= f * (1.0 + 1e-12));
        }
    }
  }
  SECTION("neutral weights outside (-1,1) are rejected") {
    CHECK(code_of([] { example_a(1.0); }) == errc::invalid_parameter);
    CHECK(code_of([] { example_a(-1.5); }) == errc::invalid_parameter);
  }
}

TEST_CASE("model with sinusoidal neutral term") {
  const CoefficientSet s = example_b();
  CHECK(s.b(Vec{1.0}, Vec{0.0})[0] == 1.0);  // 1 - 1 + cos 0
  CHECK_THAT(s.D(Vec{1.0})[0], WithinRel(0.5 * std::sin(1.0), 1e-15));
  CHECK_THAT(frob(s.sigma(Vec{2.0}, Vec{7.0})), WithinRel(std::pow(2.0, 1.5), 1e-15));
  CHECK(s.kappa == 0.5);
  CHECK_THAT(s.bound(2.0), WithinRel(11.0, 1e-15));
  // the root branch of the envelope takes over below r ~ 0 only in theory;
  // check the max is genuinely two-branched
  CHECK(s.bound(0.5) == std::max(1.0 + 0.5 + 0.125, std::pow(0.5, 1.5)));
}

TEST_CASE("jump model") {
  const MarkMeasure marks = MarkMeasure::point(2.0, 3.0);
  const CoefficientSet s = example_jump(marks);

  SECTION("drives jumps, not a diffusion") {
    CHECK(s.has_jump());
    CHECK_FALSE(s.has_sigma());
    CHECK(s.kappa == 0.25);
  }
  SECTION("jump map scales marks by a clipped state factor") {
    CHECK(s.h(Vec{0.5}, Vec{9.0}, 2.0)[0] == 1.0);   // 2 * min(1, 0.5)
    CHECK(s.h(Vec{-4.0}, Vec{9.0}, 2.0)[0] == 2.0);  // clipped at 1
  }
  SECTION("closed-form compensator matches the quadrature oracle") {
    const CompensatorOracle closed = make_compensator(s, marks);
    CoefficientSet noclosed = s;
    noclosed.compensator = nullptr;
    const CompensatorOracle quad = make_compensator(noclosed, marks);
    for (double x : {-3.0, -0.4, 0.0, 0.7, 12.0}) {
      const double a = closed(Vec{x}, Vec{1.0})[0];
      const double b = quad(Vec{x}, Vec{1.0})[0];
      CHECK_THAT(a, WithinAbs(b, 1e-12));
      CHECK_THAT(a, WithinRel(6.0 * std::min(1.0, std::fabs(x)), 1e-12));
    }
  }
}

TEST_CASE("mark measures") {
  SECTION("moments") {
    const MarkMeasure pt = MarkMeasure::point(2.0, -3.0);
    CHECK(pt.mean_total() == -6.0);
    CHECK_THAT(pt.abs_moment(3.0), WithinRel(54.0, 1e-15));

    const MarkMeasure un = MarkMeasure::uniform(1.0, -1.0, 1.0);
    CHECK(un.mean_total() == 0.0);
    CHECK_THAT(un.abs_moment(2.0), WithinRel(1.0 / 3.0, 1e-12));

    const MarkMeasure gs = MarkMeasure::gauss(2.0, 1.0);
    CHECK(gs.mean_total() == 0.0);
    CHECK_THAT(gs.abs_moment(2.0), WithinRel(2.0, 1e-12));
    CHECK_THAT(gs.abs_moment(3.0), WithinRel(2.0 * 2.0 * std::sqrt(2.0 / M_PI), 1e-12));
  }
  SECTION("quadrature integrates polynomials exactly") {
    const MarkMeasure gs = MarkMeasure::gauss(1.5, 2.0);
    const Quadrature q = gs.quadrature(16);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      m0 += q.weights[i];
      m2 += q.weights[i] * q.nodes[i] * q.nodes[i];
      m4 += q.weights[i] * std::pow(q.nodes[i], 4.0);
    }
    CHECK_THAT(m0, WithinRel(1.5, 1e-12));            // total mass = intensity
    CHECK_THAT(m2, WithinRel(1.5 * 4.0, 1e-12));      // intensity * s^2
    CHECK_THAT(m4, WithinRel(1.5 * 3.0 * 16.0, 1e-10));  // intensity * 3 s^4
  }
  SECTION("uniform quadrature") {
    const MarkMeasure un = MarkMeasure::uniform(2.0, 0.0, 1.0);
    const Quadrature q = un.quadrature(8);
    double m0 = 0, m3 = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      m0 += q.weights[i];
      m3 += q.weights[i] * std::pow(q.nodes[i], 3.0);
    }
    CHECK_THAT(m0, WithinRel(2.0, 1e-12));
    CHECK_THAT(m3, WithinRel(2.0 * 0.25, 1e-12));
  }
  SECTION("validation") {
    CHECK(code_of([] { MarkMeasure::gauss(-1.0, 1.0); }) == errc::invalid_intensity);
    CHECK(code_of([] { MarkMeasure::gauss(1.0, 0.0); }) == errc::invalid_parameter);
    CHECK(code_of([] { MarkMeasure::uniform(1.0, 2.0, 1.0); }) == errc::invalid_parameter);
  }
}

TEST_CASE("model registry") {
  const auto& reg = model_registry();
  REQUIRE(reg.size() == 3);
  CHECK(reg[0].id == "example-a");
  CHECK(reg[0].needs_a);
  CHECK(reg[1].id == "example-b");
  CHECK(reg[2].id == "example-jump");
  CHECK(reg[2].jump_driver);

  CHECK_NOTHROW(make_registered("example-b", 0.0, std::nullopt));
  CHECK(code_of([] { make_registered("nope", 0.0, std::nullopt); }) ==
        errc::invalid_parameter);
  CHECK(code_of([] { make_registered("example-jump", 0.0, std::nullopt); }) ==
        errc::invalid_parameter);
}
