#pragma once

// Coefficient sets for neutral stochastic delay equations
//
//   d[X(t) - D(X(t - tau))] = b(X(t), X(t - tau)) dt + (noise term)
//
// with the noise term either sigma(X(t), X(t - tau)) dW(t) or a compensated
// finite-activity jump integral of h(X(t), X(t - tau), u). Exactly one of
// sigma / h is present. kappa is the declared contraction constant of D.
//
// `bound` is the growth envelope used to size truncation radii: a strictly
// increasing continuous function dominating |b| and the noise coefficient
// magnitude over centered balls. Built-in models ship closed forms; custom
// models may leave it empty and rely on the sampled fallback.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "marks.hpp"

namespace nsdde {

using StateFn = std::function<Vec(const Vec&)>;
using DriftFn = std::function<Vec(const Vec&, const Vec&)>;
using DiffusionFn = std::function<Matrix(const Vec&, const Vec&)>;
using JumpFn = std::function<Vec(const Vec&, const Vec&, double)>;
using BoundFn = std::function<double(double)>;
using CompensatorFn = std::function<Vec(const Vec&, const Vec&)>;

struct CoefficientSet {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  StateFn D;
  DriftFn b;
  DiffusionFn sigma;   // Brownian driver
  JumpFn h;            // jump driver
  double kappa = 0.5;
  BoundFn bound;
  CompensatorFn compensator;  // closed form of the h integral against the mark measure

  bool has_sigma() const { return static_cast<bool>(sigma); }
  bool has_jump() const { return static_cast<bool>(h); }
};

inline void validate(const CoefficientSet& s) {
  require(s.state_dim >= 1 && s.noise_dim >= 1, errc::invalid_parameter,
          "coefficient set dimensions must be positive");
  require(static_cast<bool>(s.D) && static_cast<bool>(s.b), errc::invalid_parameter,
          "coefficient set needs both D and b");
  require(s.has_sigma() != s.has_jump(), errc::invalid_parameter,
          "exactly one of sigma / h must be present");
  require(s.kappa > 0.0 && s.kappa < 1.0, errc::invalid_parameter,
          "kappa must lie in (0,1)");
  const Vec zero(s.state_dim, 0.0);
  require(norm(s.D(zero)) <= 1e-12, errc::invalid_parameter, "D(0) must vanish");
}

// Initial segment xi on [-tau, 0].
struct InitialSegment {
  std::function<Vec(double)> xi;

  static InitialSegment constant(Vec v) {
    return InitialSegment{[v = std::move(v)](double) { return v; }};
  }
  static InitialSegment constant1(double v) { return constant(Vec{v}); }

  Vec operator()(double t) const { return xi(t); }
};

// --- built-in scalar models --------------------------------------------

// Neutral term -a*y, drift (x+ay) - (x+ay)^3, diffusion |x+ay|^{3/2}.
inline CoefficientSet example_a(double a) {
  require(std::fabs(a) < 1.0 && std::isfinite(a), errc::invalid_parameter,
          "example-a needs |a| < 1");
  CoefficientSet s;
  s.state_dim = s.noise_dim = 1;
  s.kappa = std::max(std::fabs(a), 1e-6);
  s.D = [a](const Vec& y) { return Vec{-a * y[0]}; };
  s.b = [a](const Vec& x, const Vec& y) {
    const double v = x[0] + a * y[0];
    return Vec{v - v * v * v};
  };
  s.sigma = [a](const Vec& x, const Vec& y) {
    Matrix m(1, 1);
    m(0, 0) = std::pow(std::fabs(x[0] + a * y[0]), 1.5);
    return m;
  };
  const double c = 1.0 + std::fabs(a);
  s.bound = [c](double r) {
    const double v = c * r;
    return std::max(v + v * v * v, std::pow(v, 1.5));
  };
  return s;
}

// Neutral term sin(y)/2, drift x - x^3 + cos(y), diffusion |x|^{3/2}.
inline CoefficientSet example_b() {
  CoefficientSet s;
  s.state_dim = s.noise_dim = 1;
  s.kappa = 0.5;
  s.D = [](const Vec& y) { return Vec{0.5 * std::sin(y[0])}; };
  s.b = [](const Vec& x, const Vec& y) {
    return Vec{x[0] - x[0] * x[0] * x[0] + std::cos(y[0])};
  };
  s.sigma = [](const Vec& x, const Vec&) {
    Matrix m(1, 1);
    m(0, 0) = std::pow(std::fabs(x[0]), 1.5);
    return m;
  };
  s.bound = [](double r) {
    return std::max(1.0 + r + r * r * r, std::pow(r, 1.5));
  };
  return s;
}

// Jump-driven relative: neutral term sin(y)/4, same drift family, jump map
// u * min(1, |x|). The envelope dominates |b|; the jump map's dependence on
// the state is bounded by 1, so its size is controlled by the mark law.
inline CoefficientSet example_jump(const MarkMeasure& marks) {
  CoefficientSet s;
  s.state_dim = s.noise_dim = 1;
  s.kappa = 0.25;
  s.D = [](const Vec& y) { return Vec{0.25 * std::sin(y[0])}; };
  s.b = [](const Vec& x, const Vec& y) {
    return Vec{x[0] - x[0] * x[0] * x[0] + std::cos(y[0])};
  };
  s.h = [](const Vec& x, const Vec&, double u) {
    return Vec{u * std::min(1.0, std::fabs(x[0]))};
  };
  s.bound = [](double r) {
    return std::max(1.0 + r + r * r * r, std::pow(r, 1.5));
  };
  const double mean = marks.mean_total();
  s.compensator = [mean](const Vec& x, const Vec&) {
    return Vec{mean * std::min(1.0, std::fabs(x[0]))};
  };
  return s;
}

// --- registry -----------------------------------------------------------

struct ModelInfo {
  std::string id;
  std::string summary;
  bool needs_a = false;
  bool jump_driver = false;
};

inline const std::vector<ModelInfo>& model_registry() {
  static const std::vector<ModelInfo> reg = {
      {"example-a", "neutral -a*y, drift v-v^3 with v=x+ay, diffusion |v|^3/2", true, false},
      {"example-b", "neutral sin(y)/2, drift x-x^3+cos(y), diffusion |x|^3/2", false, false},
      {"example-jump", "neutral sin(y)/4, drift x-x^3+cos(y), jumps u*min(1,|x|)", false, true},
  };
  return reg;
}

inline CoefficientSet make_registered(const std::string& id, double a,
                                      const std::optional<MarkMeasure>& marks) {
  if (id == "example-a") return example_a(a);
  if (id == "example-b") return example_b();
  if (id == "example-jump") {
    require(marks.has_value(), errc::invalid_parameter,
            "example-jump needs a mark measure (intensity and mark distribution)");
    return example_jump(*marks);
  }
  std::string known;
  for (const auto& m : model_registry()) known += (known.empty() ? "" : ", ") + m.id;
  raise(errc::invalid_parameter, "unknown model '" + id + "' (known: " + known + ")");
}

}  // namespace nsdde
