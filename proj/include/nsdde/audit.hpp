#pragma once

// Numerical audits of the structural inequalities a coefficient set claims.
// Each audit samples a deterministic point set (rank-1 Weyl lattice, box
// corners, the origin), evaluates the claimed inequality as a ratio
// lhs / (constant * majorant), and reports the worst ratio with its witness.
// Pass means worst ratio <= 1 + 1e-9.
//
// Truncated-coefficient audits (A4, A4', B2) take a rule and stratify the
// sample across the four position regimes relative to the rule radius:
// both arguments inside the ball, both outside, and the two mixed cases,
// plus raw box points.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "marks.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "truncation.hpp"

namespace nsdde {

enum class Assumption { A1, A2, A3, A4, A4prime, A5, A6, A7, A8, B1, B2 };

inline const char* assumption_name(Assumption a) {
  switch (a) {
    case Assumption::A1: return "A1";
    case Assumption::A2: return "A2";
    case Assumption::A3: return "A3";
    case Assumption::A4: return "A4";
    case Assumption::A4prime: return "A4'";
    case Assumption::A5: return "A5";
    case Assumption::A6: return "A6";
    case Assumption::A7: return "A7";
    case Assumption::A8: return "A8";
    case Assumption::B1: return "B1";
    case Assumption::B2: return "B2";
  }
  return "?";
}

inline Assumption parse_assumption(const std::string& s) {
  for (Assumption a : {Assumption::A1, Assumption::A2, Assumption::A3, Assumption::A4,
                       Assumption::A4prime, Assumption::A5, Assumption::A6, Assumption::A7,
                       Assumption::A8, Assumption::B1, Assumption::B2})
    if (s == assumption_name(a)) return a;
  raise(errc::unsupported_assumption, "unknown assumption id '" + s + "'");
}

struct AuditParams {
  double kappa = 0.5;  // A1 contraction constant
  double p = 3.0;      // moment order in A3/A4 and the B1 mark integral
  double q = 2.0;      // moment order in A5
  double l = 3.0;      // polynomial growth order
  double c = 2.0;      // declared constant on the majorant
  std::function<double(double)> local_lipschitz;  // A2: radius -> constant
};

struct AuditReport {
  std::string assumption;
  std::size_t samples = 0;
  double worst_ratio = 0.0;
  bool pass = false;
  Vec witness_x, witness_y, witness_xbar, witness_ybar;
  bool two_pair = false;
  std::string note;
};

namespace audit_detail {

// frac(sqrt(prime)) directions give a well-spread rank-1 lattice.
inline double weyl_alpha(std::size_t j) {
  static const std::array<int, 16> primes = {2,  3,  5,  7,  11, 13, 17, 19,
                                             23, 29, 31, 37, 41, 43, 47, 53};
  const double s = std::sqrt(static_cast<double>(primes[j % primes.size()]) +
                             static_cast<double>(j / primes.size()));
  return s - std::floor(s);
}

inline std::vector<Vec> sample_box(std::size_t dims, double lo, double hi, std::size_t n,
                                   std::uint64_t seed) {
  std::vector<Vec> pts;
  pts.reserve(n + (dims <= 8 ? (std::size_t{1} << dims) : 0) + 1);
  if (lo <= 0.0 && 0.0 <= hi) pts.emplace_back(dims, 0.0);
  if (dims <= 8) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << dims); ++mask) {
      Vec v(dims);
      for (std::size_t j = 0; j < dims; ++j) v[j] = (mask >> j) & 1 ? hi : lo;
      pts.push_back(std::move(v));
    }
  }
  std::uint64_t state = seed;
  std::vector<double> shift(dims);
  for (auto& s : shift)
    s = static_cast<double>(splitmix64_step(state) >> 11) * 0x1.0p-53;
  for (std::size_t i = 0; i < n; ++i) {
    Vec v(dims);
    for (std::size_t j = 0; j < dims; ++j) {
      double f = shift[j] + static_cast<double>(i + 1) * weyl_alpha(j);
      f -= std::floor(f);
      v[j] = lo + (hi - lo) * f;
    }
    pts.push_back(std::move(v));
  }
  return pts;
}

inline Vec slice(const Vec& v, std::size_t off, std::size_t n) {
  return Vec(v.begin() + static_cast<long>(off), v.begin() + static_cast<long>(off + n));
}

// Rescale a point to a prescribed side of the radius: inside lands in
// [0, 0.999 r], outside in (r, reach]. Zero points pushed outside sit on the
// first axis just past r.
inline Vec place(const Vec& v, double r, double reach, bool inside) {
  const double nv = norm(v);
  Vec out = v;
  if (inside) {
    if (nv == 0.0) return out;
    const double target = 0.999 * r * std::min(1.0, nv / reach);
    const double s = target / nv;
    for (auto& c : out) c *= s;
    return out;
  }
  if (nv == 0.0) {
    out[0] = std::min(1.000001 * r, reach);
    return out;
  }
  const double target = std::min(reach, r + (reach - r) * std::min(1.0, nv / reach));
  const double s = target / nv;
  for (auto& c : out) c *= s;
  return out;
}

inline double sub_norm(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Vec vsub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Matrix msub(const Matrix& a, const Matrix& b) {
  Matrix r = a;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= b.a[i];
  return r;
}

}  // namespace audit_detail

inline AuditReport audit_assumption(Assumption id, const CoefficientSet& set,
                                    const AuditParams& prm, double box_lo, double box_hi,
                                    std::size_t n_samples, std::uint64_t seed,
                                    std::optional<TruncationRule> rule = std::nullopt,
                                    std::optional<MarkMeasure> marks = std::nullopt) {
  using namespace audit_detail;
  validate(set);
  require(box_lo < box_hi, errc::invalid_parameter, "audit box must have positive extent");
  require(n_samples >= 1, errc::invalid_parameter, "audit needs at least one sample");
  const std::size_t n = set.state_dim;

  const bool needs_rule =
      id == Assumption::A4 || id == Assumption::A4prime || id == Assumption::B2;
  const bool needs_sigma = id == Assumption::A2 || id == Assumption::A3 ||
                           id == Assumption::A4 || id == Assumption::A5 ||
                           id == Assumption::A7 || id == Assumption::A8;
  const bool needs_jump = id == Assumption::B1 || id == Assumption::B2;
  const bool two_pair = id == Assumption::A2 || id == Assumption::A5 || id == Assumption::A7 ||
                        id == Assumption::A8 || id == Assumption::B1;

  if (needs_rule)
    require(rule.has_value(), errc::invalid_parameter,
            std::string(assumption_name(id)) + " audits truncated coefficients and needs a rule");
  if (needs_sigma && !set.has_sigma())
    raise(errc::inapplicable,
          std::string(assumption_name(id)) + " constrains a diffusion coefficient this model lacks");
  if (needs_jump && !set.has_jump())
    raise(errc::inapplicable,
          std::string(assumption_name(id)) + " constrains a jump coefficient this model lacks");
  if (id == Assumption::B1)
    require(marks.has_value(), errc::invalid_parameter, "B1 needs a mark measure");
  if (id == Assumption::A2)
    require(static_cast<bool>(prm.local_lipschitz), errc::invalid_parameter,
            "A2 needs a local Lipschitz constant function of the radius");

  CoefficientSet eval = set;
  if (needs_rule) {
    TruncationRule r = *rule;
    if (!set.has_sigma() && r.mode == Driver::brownian) r.mode = Driver::jump;
    eval = truncated_coefficients(set, r);
  }

  Quadrature quad;
  if (id == Assumption::B1) quad = marks->quadrature(32);

  const std::size_t dims = (two_pair ? 4 : 2) * n;
  const std::vector<Vec> pts = sample_box(dims, box_lo, box_hi, n_samples, seed);
  const double reach = std::max(std::fabs(box_lo), std::fabs(box_hi));

  AuditReport rep;
  rep.assumption = assumption_name(id);
  rep.two_pair = two_pair;
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t used = 0;

  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec x = slice(pts[i], 0, n);
    Vec y = slice(pts[i], n, n);
    Vec xb = two_pair ? slice(pts[i], 2 * n, n) : Vec();
    Vec yb = two_pair ? slice(pts[i], 3 * n, n) : Vec();

    if (needs_rule) {
      // Four position regimes plus raw points, cycled deterministically.
      const double r = rule->radius;
      switch (i % 5) {
        case 0:
          x = place(x, r, reach, true);
          y = place(y, r, reach, true);
          break;
        case 1:
          x = place(x, r, reach, false);
          y = place(y, r, reach, false);
          break;
        case 2:
          x = place(x, r, reach, false);
          y = place(y, r, reach, true);
          break;
        case 3:
          x = place(x, r, reach, true);
          y = place(y, r, reach, false);
          break;
        default: break;
      }
    }

    double lhs = 0.0, rhs = 0.0;
    switch (id) {
      case Assumption::A1: {
        const double d = sub_norm(x, y);
        if (d == 0.0) continue;
        lhs = norm(vsub(set.D(x), set.D(y)));
        rhs = prm.kappa * d;
        break;
      }
      case Assumption::A2: {
        const double dx = sub_norm(x, xb), dy = sub_norm(y, yb);
        if (dx + dy == 0.0) continue;
        const double R = std::max(std::max(norm(x), norm(y)), std::max(norm(xb), norm(yb)));
        lhs = std::max(norm(vsub(set.b(x, y), set.b(xb, yb))),
                       frob(msub(set.sigma(x, y), set.sigma(xb, yb))));
        rhs = prm.local_lipschitz(R) * (dx + dy);
        break;
      }
      case Assumption::A3:
      case Assumption::A4: {
        const Vec bv = eval.b(x, y);
        const Matrix sv = eval.sigma(x, y);
        const double s2 = frob(sv) * frob(sv);
        lhs = dot(vsub(x, set.D(y)), bv) + 0.5 * (prm.p - 1.0) * s2;
        rhs = prm.c * (1.0 + dot(x, x) + dot(y, y));
        break;
      }
      case Assumption::A4prime:
      case Assumption::B2: {
        lhs = dot(vsub(x, set.D(y)), eval.b(x, y));
        rhs = prm.c * (1.0 + dot(x, x) + dot(y, y));
        break;
      }
      case Assumption::A5: {
        const double dx2 = sub_norm(x, xb) * sub_norm(x, xb);
        const double dy2 = sub_norm(y, yb) * sub_norm(y, yb);
        if (dx2 + dy2 == 0.0) continue;
        const Vec u = vsub(vsub(x, set.D(y)), vsub(xb, set.D(yb)));
        const double ds = frob(msub(set.sigma(x, y), set.sigma(xb, yb)));
        lhs = dot(u, vsub(set.b(x, y), set.b(xb, yb))) + 0.5 * (prm.q - 1.0) * ds * ds;
        rhs = prm.c * (dx2 + dy2);
        break;
      }
      case Assumption::A6: {
        lhs = norm(set.b(x, y));
        rhs = prm.c * (1.0 + std::pow(norm(x), prm.l) + std::pow(norm(y), prm.l));
        break;
      }
      case Assumption::A7:
      case Assumption::A8: {
        const double dx = sub_norm(x, xb), dy = sub_norm(y, yb);
        if (dx + dy == 0.0) continue;
        const double growth = 1.0 + std::pow(norm(x), prm.l) + std::pow(norm(xb), prm.l) +
                              std::pow(norm(y), prm.l) + std::pow(norm(yb), prm.l);
        const double db = norm(vsub(set.b(x, y), set.b(xb, yb)));
        const double ds = frob(msub(set.sigma(x, y), set.sigma(xb, yb)));
        if (id == Assumption::A7) {
          lhs = db + ds;
          rhs = prm.c * growth * (dx + dy);
        } else {
          const Vec u = vsub(vsub(x, set.D(y)), vsub(xb, set.D(yb)));
          const double r1 = std::max(dot(u, vsub(set.b(x, y), set.b(xb, yb))), ds * ds) /
                            (prm.c * (dx * dx + dy * dy));
          const double r2 = db / (prm.c * growth * (dx + dy));
          const double ratio = std::max(r1, r2);
          if (ratio > worst) {
            worst = ratio;
            rep.witness_x = x;
            rep.witness_y = y;
            rep.witness_xbar = xb;
            rep.witness_ybar = yb;
          }
          ++used;
          continue;
        }
        break;
      }
      case Assumption::B1: {
        const double dx = sub_norm(x, xb), dy = sub_norm(y, yb);
        if (dx + dy == 0.0) continue;
        const Vec u = vsub(vsub(x, set.D(y)), vsub(xb, set.D(yb)));
        const double r1 = dot(u, vsub(set.b(x, y), set.b(xb, yb))) /
                          (prm.c * (dx * dx + dy * dy));
        double hint = 0.0;
        for (std::size_t j = 0; j < quad.nodes.size(); ++j)
          hint += quad.weights[j] *
                  std::pow(norm(vsub(set.h(x, y, quad.nodes[j]), set.h(xb, yb, quad.nodes[j]))),
                           prm.p);
        const double r2 = hint / (prm.c * (std::pow(dx, prm.p) + std::pow(dy, prm.p)));
        const double growth = 1.0 + std::pow(norm(x), prm.l) + std::pow(norm(xb), prm.l) +
                              std::pow(norm(y), prm.l) + std::pow(norm(yb), prm.l);
        const double r3 =
            norm(vsub(set.b(x, y), set.b(xb, yb))) / (prm.c * growth * (dx + dy));
        const double ratio = std::max(r1, std::max(r2, r3));
        if (ratio > worst) {
          worst = ratio;
          rep.witness_x = x;
          rep.witness_y = y;
          rep.witness_xbar = xb;
          rep.witness_ybar = yb;
        }
        ++used;
        continue;
      }
    }

    const double ratio = lhs / rhs;
    if (ratio > worst) {
      worst = ratio;
      rep.witness_x = x;
      rep.witness_y = y;
      if (two_pair) {
        rep.witness_xbar = xb;
        rep.witness_ybar = yb;
      }
    }
    ++used;
  }

  require(used > 0, errc::invalid_parameter, "all audit samples degenerate");
  rep.samples = used;
  rep.worst_ratio = worst;
  rep.pass = worst <= 1.0 + 1e-9;
  return rep;
}

}  // namespace nsdde
