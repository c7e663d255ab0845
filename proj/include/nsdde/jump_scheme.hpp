#pragma once

// Jump-driver variant of the scheme. All jumps landing in (t_k, t_{k+1}]
// are applied with left-endpoint coefficient arguments, and the compensator
// integral of the truncated jump map is subtracted once per step:
//
//   z_{k+1} = z_k + b(y_k, y_{k-m}) * step
//             + sum_i h(y_k, y_{k-m}, u_i) - step * comp(y_k, y_{k-m})
//   y_{k+1} = z_{k+1} + D(y_{k+1-m})
//
// comp(x,y) = integral of h(x,y,u) against the mark measure, either in the
// model's closed form or by fixed quadrature nodes. Never by per-step Monte
// Carlo; the compensator must be deterministic in (x, y).

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "marks.hpp"
#include "noise.hpp"
#include "scheme.hpp"
#include "truncation.hpp"

namespace nsdde {

class CompensatorOracle {
 public:
  // `fn` must already integrate the truncated jump map (truncated_coefficients
  // wraps closed forms accordingly).
  static CompensatorOracle closed_form(CompensatorFn fn) {
    CompensatorOracle o;
    o.closed_ = std::move(fn);
    return o;
  }

  // Quadrature over the marks of the (truncated) jump map h.
  static CompensatorOracle quadrature(JumpFn h, Quadrature q) {
    double total = 0.0;
    for (double w : q.weights) {
      require(w >= -1e-15, errc::invalid_parameter, "quadrature weights must be nonnegative");
      total += w;
    }
    CompensatorOracle o;
    o.h_ = std::move(h);
    o.quad_ = std::move(q);
    o.weight_total_ = total;
    return o;
  }

  // Sum of quadrature weights; equals the jump intensity for rules built
  // from a mark measure. Zero for closed forms (mass lives inside fn).
  double weight_total() const { return weight_total_; }

  Vec operator()(const Vec& x, const Vec& y) const {
    if (closed_) return closed_(x, y);
    Vec acc(x.size(), 0.0);
    for (std::size_t j = 0; j < quad_.nodes.size(); ++j) {
      const Vec hv = h_(x, y, quad_.nodes[j]);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += quad_.weights[j] * hv[i];
    }
    return acc;
  }

 private:
  CompensatorFn closed_;
  JumpFn h_;
  Quadrature quad_;
  double weight_total_ = 0.0;
};

// Oracle for a truncated coefficient set: closed form if the model declares
// one, otherwise quadrature against the measure.
inline CompensatorOracle make_compensator(const CoefficientSet& truncated_set,
                                          const MarkMeasure& marks, int quad_nodes = 32) {
  if (truncated_set.compensator) return CompensatorOracle::closed_form(truncated_set.compensator);
  require(truncated_set.has_jump(), errc::mode_mismatch,
          "compensator oracle needs a jump coefficient");
  return CompensatorOracle::quadrature(truncated_set.h, marks.quadrature(quad_nodes));
}

// One step; `marks_in_interval` holds the marks of the jumps in (t_k, t_{k+1}],
// ascending jump time order.
inline Vec step_jump(const DelayState& s, const CoefficientSet& set, double dt,
                     std::span<const double> marks_in_interval, const CompensatorOracle& comp) {
  const Vec& yk = s.current();
  const Vec& ykm = s.delayed();
  const Vec dk = set.D(ykm);
  const Vec bv = set.b(yk, ykm);
  const Vec cv = comp(yk, ykm);
  const Vec dn = set.D(s.delayed_next());
  Vec out(yk.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (yk[i] - dk[i]) + bv[i] * dt;
  for (double u : marks_in_interval) {
    const Vec hv = set.h(yk, ykm, u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += hv[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - dt * cv[i]) + dn[i];
  return out;
}

inline PathRecord simulate_jump(const CoefficientSet& set, const TruncationRule& rule,
                                const TimeGrid& grid, const InitialSegment& xi,
                                const JumpRealization& jumps, const MarkMeasure& marks,
                                int quad_nodes = 32) {
  require(rule.mode == Driver::jump, errc::mode_mismatch,
          "simulate_jump() needs a jump-mode rule");
  validate(set);
  require(set.has_jump(), errc::mode_mismatch, "simulate_jump() needs a jump coefficient");
  require(std::fabs(jumps.horizon - grid.horizon) <= 1e-9 * grid.horizon, errc::grid_mismatch,
          "jump realization horizon does not match the time grid");
  const CoefficientSet trunc = truncated_coefficients(set, rule);
  const CompensatorOracle comp = make_compensator(trunc, marks, quad_nodes);

  // Bin jump times into left-open, right-closed grid cells.
  std::vector<std::vector<double>> bins(grid.total);
  std::vector<std::uint32_t> counts(grid.total, 0);
  for (std::size_t i = 0; i < jumps.times.size(); ++i) {
    const double t = jumps.times[i];
    require(t > 0.0 && t <= grid.horizon * (1.0 + 1e-12), errc::invalid_parameter,
            "jump time outside (0, T]");
    auto k = static_cast<long long>(std::ceil(t / grid.step)) - 1;
    if (k < 0) k = 0;
    if (k >= static_cast<long long>(grid.total)) k = static_cast<long long>(grid.total) - 1;
    bins[static_cast<std::size_t>(k)].push_back(jumps.marks[i]);
    ++counts[static_cast<std::size_t>(k)];
  }

  PathRecord rec;
  rec.tau = grid.tau;
  rec.horizon = grid.horizon;
  rec.step = grid.step;
  rec.m = grid.m;
  rec.total = grid.total;
  rec.dim = set.state_dim;
  rec.gauge = rule.gauge;
  rec.radius = rule.radius;
  rec.seed = jumps.seed;
  rec.path_index = jumps.path_index;
  rec.jumps_per_interval = std::move(counts);
  rec.y.reserve(grid.m + grid.total + 1);

  DelayState st = DelayState::seed(xi, grid, set.state_dim);
  for (long long k = -static_cast<long long>(grid.m); k <= 0; ++k) rec.y.push_back(st.at(k));

  for (std::size_t k = 0; k < grid.total; ++k) {
    Vec next = step_jump(st, trunc, grid.step, bins[k], comp);
    if (!all_finite(next))
      raise(errc::numerical_blowup,
            "non-finite state at step " + std::to_string(k + 1) + " of " +
                std::to_string(grid.total) + " (path " + std::to_string(jumps.path_index) + ")");
    rec.y.push_back(next);
    st.push(std::move(next));
  }
  return rec;
}

}  // namespace nsdde
