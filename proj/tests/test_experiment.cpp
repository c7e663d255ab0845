#include <cstdlib>

#include "helpers.hpp"

using namespace nsdde;
using testutil::code_of;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("rate fit oracle") {
  SECTION("exact log-linear data recovers slope and intercept") {
    const std::vector<double> deltas{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> roots;
    for (double d : deltas) roots.push_back(2.0 * std::sqrt(d));
    const RateFit f = fit_rate_ols(deltas, roots);
    CHECK_THAT(f.slope, WithinAbs(0.5, 1e-12));
    CHECK_THAT(f.intercept, WithinAbs(std::log(2.0), 1e-12));
    CHECK_THAT(f.r2, WithinAbs(1.0, 1e-12));
  }
  SECTION("input validation") {
    CHECK(code_of([] { fit_rate_ols({0.5}, {1.0}); }) == errc::not_fittable);
    CHECK(code_of([] { fit_rate_ols({0.5, 0.25}, {1.0}); }) == errc::invalid_parameter);
    CHECK(code_of([] { fit_rate_ols({0.5, 0.25}, {1.0, 0.0}); }) == errc::not_fittable);
    CHECK(code_of([] { fit_rate_ols({0.5, 0.5}, {1.0, 1.0}); }) == errc::not_fittable);
  }
  SECTION("bootstrap on perfectly coupled errors pins the slope") {
    // err[level][path] = sqrt(delta) * xi_path: every resample gives slope 1/2.
    const std::vector<double> deltas{0.25, 0.125, 0.0625};
    std::vector<std::vector<double>> per_path(3, std::vector<double>(64));
    for (std::size_t lv = 0; lv < 3; ++lv)
      for (std::size_t j = 0; j < 64; ++j)
        per_path[lv][j] = std::sqrt(deltas[lv]) * (1.0 + 0.01 * static_cast<double>(j));
    const RateFit f = fit_rate(deltas, per_path, 2.0, 4242, 500);
    CHECK_THAT(f.slope, WithinAbs(0.5, 1e-12));
    CHECK_THAT(f.ci_lo, WithinAbs(0.5, 1e-9));
    CHECK_THAT(f.ci_hi, WithinAbs(0.5, 1e-9));
    CHECK(f.ci_lo <= f.slope);
    CHECK(f.slope <= f.ci_hi);
  }
}

TEST_CASE("coupled study on the additive model has literally zero error") {
  StudyConfig cfg;
  cfg.set = testutil::additive_model();
  cfg.xi = InitialSegment::constant1(0.5);
  cfg.tau = 1.0;
  cfg.horizon = 2.0;
  cfg.levels = {2, 4};
  cfg.m_ref = 8;
  cfg.epsilon = 0.25;
  cfg.q = 2.0;
  cfg.paths = 5;
  cfg.seed = 9;

  for (ErrorMode mode : {ErrorMode::at_T, ErrorMode::uniform}) {
    cfg.mode = mode;
    const ConvergenceReport rep = strong_error_study(cfg);
    REQUIRE(rep.levels.size() == 2);
    for (const auto& L : rep.levels) {
      CHECK(L.moment == 0.0);
      CHECK(L.root == 0.0);
      CHECK(L.std_err == 0.0);
    }
    CHECK_FALSE(rep.rate.has_value());
    CHECK(rep.rate_note.find("not-fittable") != std::string::npos);
    for (const auto& row : rep.per_path)
      for (double e : row) CHECK(e == 0.0);
  }
}

TEST_CASE("study results are independent of the worker count") {
  StudyConfig cfg;
  cfg.set = example_b();
  cfg.xi = InitialSegment::constant1(0.5);
  cfg.tau = 1.0;
  cfg.horizon = 2.0;
  cfg.levels = {4, 8};
  cfg.m_ref = 32;
  cfg.epsilon = 0.25;
  cfg.q = 2.0;
  cfg.paths = 10;
  cfg.seed = 77;
  cfg.mode = ErrorMode::uniform;

  setenv("NSDDE_THREADS", "1", 1);
  const ConvergenceReport a = strong_error_study(cfg);
  setenv("NSDDE_THREADS", "4", 1);
  const ConvergenceReport b = strong_error_study(cfg);
  unsetenv("NSDDE_THREADS");

  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    CHECK(a.levels[i].moment == b.levels[i].moment);
    CHECK(a.levels[i].root == b.levels[i].root);
    CHECK(a.levels[i].std_err == b.levels[i].std_err);
  }
  CHECK(a.per_path == b.per_path);
  REQUIRE(a.rate.has_value());
  REQUIRE(b.rate.has_value());
  CHECK(a.rate->slope == b.rate->slope);
  CHECK(a.rate->ci_lo == b.rate->ci_lo);
  CHECK(a.rate->ci_hi == b.rate->ci_hi);
}

TEST_CASE("study bookkeeping") {
  StudyConfig cfg;
  cfg.set = example_b();
  cfg.xi = InitialSegment::constant1(0.5);
  cfg.levels = {4, 8};
  cfg.m_ref = 16;
  cfg.paths = 6;
  cfg.seed = 5;

  SECTION("level metadata is filled in") {
    const ConvergenceReport rep = strong_error_study(cfg);
    CHECK(rep.levels[0].m == 4);
    CHECK(rep.levels[0].delta == 0.25);
    CHECK(rep.levels[1].delta == 0.125);
    CHECK(rep.levels[0].gauge == std::pow(0.25, -0.25));
    CHECK(rep.levels[0].radius > 0.0);
    CHECK(rep.levels[0].moment > 0.0);
    CHECK(rep.per_path.size() == 2);
    CHECK(rep.per_path[0].size() == 6);
    CHECK(rep.paths == 6);
  }
  SECTION("levels must divide the reference level") {
    cfg.levels = {3};
    CHECK(code_of([&] { strong_error_study(cfg); }) == errc::grid_mismatch);
  }
  SECTION("levels must not exceed the reference level") {
    cfg.levels = {32};
    CHECK(code_of([&] { strong_error_study(cfg); }) == errc::grid_mismatch);
  }
  SECTION("a jump study needs a mark measure") {
    cfg.driver = Driver::jump;
    cfg.set = example_jump(MarkMeasure::gauss(1.0, 1.0));
    cfg.marks.reset();
    CHECK(code_of([&] { strong_error_study(cfg); }) == errc::invalid_parameter);
  }
}

TEST_CASE("jump study couples one realization across levels") {
  const MarkMeasure marks = MarkMeasure::gauss(1.0, 1.0);
  StudyConfig cfg;
  cfg.set = example_jump(marks);
  cfg.xi = InitialSegment::constant1(0.5);
  cfg.levels = {4, 8};
  cfg.m_ref = 32;
  cfg.epsilon = 1.0 / 12.0;
  cfg.jump_p = 3.0;
  cfg.q = 2.0;
  cfg.paths = 8;
  cfg.seed = 13;
  cfg.driver = Driver::jump;
  cfg.marks = marks;

  const ConvergenceReport rep = strong_error_study(cfg);
  REQUIRE(rep.levels.size() == 2);
  CHECK(rep.levels[0].moment >= 0.0);
  CHECK(rep.levels[1].moment >= 0.0);
  // rerun is bitwise identical
  const ConvergenceReport rep2 = strong_error_study(cfg);
  CHECK(rep.per_path == rep2.per_path);
}

TEST_CASE("blowups surface with path context") {
  StudyConfig cfg;
  CoefficientSet s;
  s.D = [](const Vec&) { return Vec{0.0}; };
  s.b = [](const Vec&, const Vec&) { return Vec{1e308}; };
  s.sigma = [](const Vec&, const Vec&) { return Matrix{1, 1, {0.0}}; };
  // b is constant, so the (small) truncation radius cannot tame it
  s.bound = [](double r) { return 1.0 + 100.0 * r; };
  cfg.set = s;
  cfg.xi = InitialSegment::constant1(0.0);
  cfg.levels = {2};
  cfg.m_ref = 4;
  cfg.paths = 3;
  cfg.seed = 1;
  CHECK(code_of([&] { strong_error_study(cfg); }) == errc::numerical_blowup);
}
