#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "nsdde.hpp"

namespace testutil {

using namespace nsdde;

// Run `f`, expect it to throw Error, hand back the code.
template <class F>
errc code_of(F&& f) {
  try {
    std::forward<F>(f)();
  } catch (const Error& e) {
    return e.code();
  } catch (...) {
    FAIL("threw something that is not an Error");
  }
  FAIL("expected an Error, nothing was thrown");
  return errc::invalid_parameter;  // unreachable
}

inline BrownianGrid zero_noise(double horizon, double step, std::size_t dim = 1) {
  BrownianGrid g;
  g.horizon = horizon;
  g.fine_step = step;
  g.steps = static_cast<std::size_t>(std::llround(horizon / step));
  g.dim = dim;
  g.inc.assign(g.steps * dim, 0.0);
  return g;
}

// Drift-free additive model: D = 0, b = 0, sigma = identity. The scheme
// reproduces the running sum of increments exactly, which pins coupled
// errors at literal zero on shared grid points.
inline CoefficientSet additive_model() {
  CoefficientSet s;
  s.state_dim = 1;
  s.noise_dim = 1;
  s.D = [](const Vec&) { return Vec{0.0}; };
  s.b = [](const Vec&, const Vec&) { return Vec{0.0}; };
  s.sigma = [](const Vec&, const Vec&) { return Matrix{1, 1, {1.0}}; };
  s.kappa = 0.5;
  s.bound = [](double r) { return 1.0 + r; };
  return s;
}

}  // namespace testutil
