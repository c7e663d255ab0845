#pragma once

// The discrete scheme on the delay-commensurable grid t_k = k * step,
// step = tau / m, advanced in neutral-difference form: with
// z_k = y_k - D(y_{k-m}),
//
//   z_{k+1} = z_k + b(y_k, y_{k-m}) * step + sigma(y_k, y_{k-m}) * dW_k
//   y_{k+1} = z_{k+1} + D(y_{k+1-m})
//
// evaluated in exactly this grouping. Same shape for the jump driver, see
// jump_scheme.hpp. The caller chooses whether the coefficient set passed to
// a step has been truncated; simulate() wraps the raw set with its rule,
// simulate_untruncated() runs the raw set and reports blowup.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "truncation.hpp"

namespace nsdde {

struct TimeGrid {
  double tau = 0.0;
  double horizon = 0.0;  // T
  double step = 0.0;     // tau / m
  std::size_t m = 0;     // steps per delay
  std::size_t total = 0; // M = T / step

  static TimeGrid make(double tau, double horizon, std::size_t m) {
    require(tau > 0.0 && std::isfinite(tau), errc::invalid_parameter, "tau must be positive");
    require(m >= 1, errc::invalid_parameter, "need at least one step per delay");
    require(horizon > 0.0 && std::isfinite(horizon), errc::invalid_parameter,
            "horizon must be positive");
    TimeGrid g;
    g.tau = tau;
    g.m = m;
    g.step = tau / static_cast<double>(m);
    const double ratio = horizon * static_cast<double>(m) / tau;
    const auto total = static_cast<std::size_t>(std::llround(ratio));
    require(total >= 1 && std::fabs(ratio - static_cast<double>(total)) <=
                              1e-9 * std::max(1.0, ratio),
            errc::grid_mismatch, "horizon must be an integer multiple of tau/m");
    g.horizon = horizon;
    g.total = total;
    return g;
  }

  double time(long long k) const { return static_cast<double>(k) * step; }
};

// Ring buffer holding y_{k-m} .. y_k.
class DelayState {
 public:
  DelayState(std::size_t m, std::size_t dim) : m_(m), ring_(m + 1, Vec(dim, 0.0)) {}

  static DelayState seed(const InitialSegment& xi, const TimeGrid& grid, std::size_t dim) {
    DelayState s(grid.m, dim);
    for (long long k = -static_cast<long long>(grid.m); k <= 0; ++k) {
      Vec v = xi(grid.time(k));
      require(v.size() == dim, errc::invalid_parameter,
              "initial segment dimension does not match the model");
      s.ring_[s.slot(k)] = std::move(v);
    }
    s.k_ = 0;
    return s;
  }

  long long k() const { return k_; }
  const Vec& current() const { return ring_[slot(k_)]; }
  const Vec& delayed() const { return ring_[slot(k_ - static_cast<long long>(m_))]; }
  const Vec& delayed_next() const { return ring_[slot(k_ + 1 - static_cast<long long>(m_))]; }
  // Any buffered value, valid for k in [k() - m, k()].
  const Vec& at(long long k) const { return ring_[slot(k)]; }

  void push(Vec y) {
    ++k_;
    ring_[slot(k_)] = std::move(y);
  }

 private:
  std::size_t slot(long long k) const {
    const auto span = static_cast<long long>(m_) + 1;
    long long r = k % span;
    if (r < 0) r += span;
    return static_cast<std::size_t>(r);
  }

  std::size_t m_;
  std::vector<Vec> ring_;
  long long k_ = 0;
};

// One step of the Brownian-driver recursion; `set` is evaluated as given.
inline Vec step(const DelayState& s, const CoefficientSet& set, double dt, const Vec& dW) {
  require(dW.size() == set.noise_dim, errc::invalid_increment,
          "Brownian increment dimension does not match the model");
  const Vec& yk = s.current();
  const Vec& ykm = s.delayed();
  const Vec dk = set.D(ykm);
  const Vec bv = set.b(yk, ykm);
  const Vec sv = matvec(set.sigma(yk, ykm), dW);
  const Vec dn = set.D(s.delayed_next());
  Vec out(yk.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ((yk[i] - dk[i]) + bv[i] * dt + sv[i]) + dn[i];
  return out;
}

struct PathRecord {
  double tau = 0.0, horizon = 0.0, step = 0.0;
  std::size_t m = 0, total = 0, dim = 1;
  double gauge = 0.0, radius = 0.0;  // 0 when the run was untruncated
  std::uint64_t seed = 0, path_index = 0;
  std::vector<Vec> y;  // k = -m .. total, y[k + m]
  std::vector<std::uint32_t> jumps_per_interval;  // jump driver only, size total

  const Vec& at(long long k) const { return y[static_cast<std::size_t>(k + static_cast<long long>(m))]; }

  // Piecewise-constant interpolant, left endpoint on each grid cell.
  const Vec& value(double t) const {
    auto k = static_cast<long long>(std::floor(t / step));
    const auto lo = -static_cast<long long>(m);
    const auto hi = static_cast<long long>(total);
    if (k < lo) k = lo;
    if (k > hi) k = hi;
    return at(k);
  }

  double sup_norm() const {
    double s = 0.0;
    for (const auto& v : y) s = std::max(s, norm(v));
    return s;
  }
};

namespace detail {

inline BrownianGrid fit_noise_to_grid(const BrownianGrid& noise, const TimeGrid& grid) {
  require(std::fabs(noise.horizon - grid.horizon) <= 1e-9 * grid.horizon, errc::grid_mismatch,
          "noise horizon does not match the time grid");
  require(noise.steps % grid.total == 0, errc::grid_mismatch,
          "noise grid does not refine the time grid");
  return coarsen(noise, noise.steps / grid.total);
}

inline PathRecord run_brownian(const CoefficientSet& set, const TimeGrid& grid,
                               const InitialSegment& xi, const BrownianGrid& noise,
                               double gauge, double radius) {
  validate(set);
  require(set.has_sigma(), errc::mode_mismatch, "Brownian run needs a diffusion coefficient");
  require(noise.dim == set.noise_dim, errc::grid_mismatch,
          "noise dimension does not match the model");
  const BrownianGrid w = fit_noise_to_grid(noise, grid);

  PathRecord rec;
  rec.tau = grid.tau;
  rec.horizon = grid.horizon;
  rec.step = grid.step;
  rec.m = grid.m;
  rec.total = grid.total;
  rec.dim = set.state_dim;
  rec.gauge = gauge;
  rec.radius = radius;
  rec.seed = noise.seed;
  rec.path_index = noise.path_index;
  rec.y.reserve(grid.m + grid.total + 1);

  DelayState st = DelayState::seed(xi, grid, set.state_dim);
  for (long long k = -static_cast<long long>(grid.m); k <= 0; ++k) rec.y.push_back(st.at(k));

  Vec dW(set.noise_dim);
  for (std::size_t k = 0; k < grid.total; ++k) {
    for (std::size_t j = 0; j < set.noise_dim; ++j) dW[j] = w.at(k, j);
    Vec next = step(st, set, grid.step, dW);
    if (!all_finite(next))
      raise(errc::numerical_blowup,
            "non-finite state at step " + std::to_string(k + 1) + " of " +
                std::to_string(grid.total) + " (path " + std::to_string(noise.path_index) + ")");
    rec.y.push_back(next);
    st.push(std::move(next));
  }
  return rec;
}

}  // namespace detail

// Truncated scheme: coefficients wrapped by the rule, stepped on the grid.
// The rule supplies the radius; its own step need not equal the grid step,
// which lets tests build deliberately generous admissible rules.
inline PathRecord simulate(const CoefficientSet& set, const TruncationRule& rule,
                           const TimeGrid& grid, const InitialSegment& xi,
                           const BrownianGrid& noise) {
  require(rule.mode == Driver::brownian, errc::mode_mismatch,
          "simulate() drives Brownian rules; use simulate_jump() for jump rules");
  const CoefficientSet trunc = truncated_coefficients(set, rule);
  return detail::run_brownian(trunc, grid, xi, noise, rule.gauge, rule.radius);
}

// Plain scheme without any truncation; super-linear models can and do blow
// up here, reported as numerical-blowup with the offending step.
inline PathRecord simulate_untruncated(const CoefficientSet& set, const TimeGrid& grid,
                                       const InitialSegment& xi, const BrownianGrid& noise) {
  return detail::run_brownian(set, grid, xi, noise, 0.0, 0.0);
}

}  // namespace nsdde
