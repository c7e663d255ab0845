#pragma once

// Radial truncation machinery. A rule pairs a step size with a gauge value
// g(step) and the radius r = bound^{-1}(g(step)); coefficients are evaluated
// at arguments projected onto the centered ball of radius r. The neutral
// term D is never truncated, and jump marks pass through untouched.
//
// Gauge admissibility, checked eagerly at rule construction:
//   g(step) >= 1,
//   step^{1/4} * g(step)   <= 1   (Brownian driver)
//   step^{1/4} * g(step)^p <= 1   (jump driver, p the declared mark moment order)

#include <cmath>
#include <sstream>
#include <string>

#include "core.hpp"
#include "model.hpp"

namespace nsdde {

enum class Driver { brownian, jump };

// Projection onto the ball of radius r; x/|x| taken as 0 at the origin.
// Points already inside come back unchanged (same representation).
inline Vec truncate_point(const Vec& x, double r) {
  require(r > 0.0 && std::isfinite(r), errc::invalid_radius, "truncation radius must be positive");
  const double n = norm(x);
  if (n <= r) return x;
  const double scale = r / n;
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
  return out;
}

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}
}  // namespace detail

// Power gauge g(step) = step^{-epsilon} with eager admissibility checks.
inline double power_gauge(double step, double epsilon, Driver mode = Driver::brownian,
                          double jump_p = 3.0) {
  require(step > 0.0 && step <= 1.0 && std::isfinite(step), errc::invalid_parameter,
          "step must lie in (0,1]");
  require(epsilon > 0.0 && std::isfinite(epsilon), errc::invalid_parameter,
          "gauge exponent must be positive");
  const double g = std::pow(step, -epsilon);
  require(g >= 1.0, errc::inadmissible_gauge, "gauge must satisfy g(step) >= 1");
  const double quarter = std::pow(step, 0.25);
  if (mode == Driver::brownian) {
    const double lhs = quarter * g;
    if (lhs > 1.0 + 1e-12)
      raise(errc::inadmissible_gauge,
            "step^{1/4} * g(step) <= 1 violated (step=" + detail::fmt(step) +
                ", g=" + detail::fmt(g) + ", product=" + detail::fmt(lhs) + ")");
  } else {
    require(jump_p >= 1.0 && std::isfinite(jump_p), errc::invalid_parameter,
            "jump mark moment order must be >= 1");
    const double lhs = quarter * std::pow(g, jump_p);
    if (lhs > 1.0 + 1e-12)
      raise(errc::inadmissible_gauge,
            "step^{1/4} * g(step)^p <= 1 violated (step=" + detail::fmt(step) +
                ", g=" + detail::fmt(g) + ", p=" + detail::fmt(jump_p) +
                ", product=" + detail::fmt(lhs) + ")");
  }
  return g;
}

// Inverse of a strictly increasing continuous envelope, by exponential
// bracket growth from r = 1 and bisection. Stops when |f(r) - v| meets
// max(1e-12, 1e-12 |v|); if the envelope has sampling steps the lower
// bracket end is returned, which keeps f(r) <= v and so keeps domination.
inline double invert_bound(const BoundFn& f, double v) {
  require(static_cast<bool>(f), errc::invalid_parameter, "empty bound function");
  require(std::isfinite(v), errc::invalid_parameter, "bound target must be finite");
  const double f0 = f(0.0);
  if (v < f0) raise(errc::below_domain, "target " + detail::fmt(v) + " below f(0) = " + detail::fmt(f0));
  const double tol = std::max(1e-12, 1e-12 * std::fabs(v));
  double lo = 0.0, hi = 1.0;
  int doublings = 0;
  while (f(hi) < v) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1024)
      raise(errc::unbounded_search, "no bracket for target " + detail::fmt(v) +
                                        " within 1024 doublings");
  }
  double mid = lo;
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::fabs(fm - v) <= tol) return mid;
    if (fm < v)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }
  return lo;
}

struct TruncationRule {
  double step = 0.0;
  double epsilon = 0.0;
  double gauge = 0.0;
  double radius = 0.0;
  Driver mode = Driver::brownian;
  double jump_p = 3.0;
  // Optional upper step bound for gauge families that are only defined near 0.
  std::optional<double> step_limit;
};

// Rule from the power gauge and the model's envelope.
inline TruncationRule make_rule(const CoefficientSet& set, double step, double epsilon,
                                Driver mode = Driver::brownian, double jump_p = 3.0) {
  require(static_cast<bool>(set.bound), errc::invalid_parameter,
          "model carries no growth envelope; supply one or use numeric_bound");
  TruncationRule rule;
  rule.step = step;
  rule.epsilon = epsilon;
  rule.mode = mode;
  rule.jump_p = jump_p;
  rule.gauge = power_gauge(step, epsilon, mode, jump_p);
  rule.radius = invert_bound(set.bound, rule.gauge);
  require(rule.radius > 0.0, errc::invalid_radius,
          "gauge value " + detail::fmt(rule.gauge) + " gives a zero truncation radius");
  return rule;
}

// Coefficients composed with the projection. D passes through; the mark
// argument of h passes through; the closed-form compensator, when present,
// sees projected state arguments as well.
inline CoefficientSet truncated_coefficients(const CoefficientSet& set,
                                             const TruncationRule& rule) {
  validate(set);
  if (rule.mode == Driver::brownian)
    require(set.has_sigma(), errc::mode_mismatch,
            "Brownian rule applied to a model without a diffusion coefficient");
  else
    require(set.has_jump(), errc::mode_mismatch,
            "jump rule applied to a model without a jump coefficient");

  const double r = rule.radius;
  require(r > 0.0 && std::isfinite(r), errc::invalid_radius, "rule radius must be positive");

  CoefficientSet out = set;
  const DriftFn b = set.b;
  out.b = [b, r](const Vec& x, const Vec& y) {
    return b(truncate_point(x, r), truncate_point(y, r));
  };
  if (set.has_sigma()) {
    const DiffusionFn sig = set.sigma;
    out.sigma = [sig, r](const Vec& x, const Vec& y) {
      return sig(truncate_point(x, r), truncate_point(y, r));
    };
  }
  if (set.has_jump()) {
    const JumpFn h = set.h;
    out.h = [h, r](const Vec& x, const Vec& y, double u) {
      return h(truncate_point(x, r), truncate_point(y, r), u);
    };
  }
  if (set.compensator) {
    const CompensatorFn comp = set.compensator;
    out.compensator = [comp, r](const Vec& x, const Vec& y) {
      return comp(truncate_point(x, r), truncate_point(y, r));
    };
  }
  return out;
}

// Sampled envelope for models without a closed form: a running maximum of
// coefficient magnitudes over a fixed geometric radius ladder (8 rungs per
// octave), with a 1e-9 * r slope for strict monotonicity. The ladder is
// shared by all evaluation points, so the running maximum is monotone by
// construction. Slight undercoverage between rungs is accepted.
inline BoundFn numeric_bound(const CoefficientSet& set) {
  validate(set);
  const std::size_t n = set.state_dim;
  auto level = [set, n](double s) {
    double m = 0.0;
    Vec xp(n, 0.0), xm(n, 0.0), zero(n, 0.0);
    auto probe = [&](const Vec& x, const Vec& y) {
      double v = norm(set.b(x, y));
      if (set.has_sigma()) v = std::max(v, frob(set.sigma(x, y)));
      m = std::max(m, v);
    };
    for (std::size_t i = 0; i < n; ++i) {
      xp.assign(n, 0.0);
      xm.assign(n, 0.0);
      xp[i] = s;
      xm[i] = -s;
      for (const Vec* x : {&xp, &xm, &zero})
        for (const Vec* y : {&xp, &xm, &zero}) probe(*x, *y);
    }
    return m;
  };
  return [level](double r) {
    double m = level(0.0);
    if (r > 0.0) {
      // top rung rounds up so the envelope dominates the whole ball of radius r
      const int j_hi = static_cast<int>(std::ceil(8.0 * std::log2(r)));
      const int j_lo = std::max(j_hi - 240, -240);
      for (int j = j_lo; j <= j_hi; ++j) m = std::max(m, level(std::exp2(j / 8.0)));
    }
    return m + 1e-9 * r;
  };
}

}  // namespace nsdde
