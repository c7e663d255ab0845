#pragma once

// Coupled Monte Carlo strong-error studies. Every level of a study reruns
// the same driving noise: one fine Brownian grid (or jump realization) per
// path, coarsened per level, with the reference solution computed at the
// finest step. Aggregation over paths is sequential in ascending path order
// so results are bit-identical no matter how many worker threads ran.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "core.hpp"
#include "jump_scheme.hpp"
#include "marks.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "rng.hpp"
#include "scheme.hpp"
#include "truncation.hpp"

namespace nsdde {

enum class ErrorMode { at_T, uniform };

inline const char* error_mode_name(ErrorMode m) {
  return m == ErrorMode::at_T ? "at-T" : "uniform";
}

struct StudyConfig {
  CoefficientSet set;
  InitialSegment xi;
  double tau = 1.0;
  double horizon = 2.0;
  std::vector<std::size_t> levels;  // steps per delay interval, coarse levels
  std::size_t m_ref = 0;            // steps per delay interval, reference
  double epsilon = 0.25;            // gauge exponent
  double q = 2.0;                   // error moment order
  std::size_t paths = 100;
  std::uint64_t seed = 1;
  ErrorMode mode = ErrorMode::at_T;
  Driver driver = Driver::brownian;
  double jump_p = 3.0;
  std::optional<MarkMeasure> marks;
  std::size_t quad_nodes = 32;
};

struct LevelResult {
  std::size_t m = 0;
  double delta = 0.0;
  double gauge = 0.0;
  double radius = 0.0;
  double moment = 0.0;   // (1/N) sum of err^q
  double root = 0.0;     // moment^(1/q)
  double std_err = 0.0;  // sd(err^q) / sqrt(N), moment scale
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct ConvergenceReport {
  std::vector<LevelResult> levels;
  std::vector<std::vector<double>> per_path;  // [level][path] raw errors
  std::optional<RateFit> rate;
  std::string rate_note;
  std::size_t paths = 0;
  double q = 2.0;
  std::uint64_t seed = 0;
  ErrorMode mode = ErrorMode::at_T;
  Driver driver = Driver::brownian;
};

namespace exp_detail {

inline std::size_t thread_count(std::size_t jobs) {
  std::size_t n = 0;
  if (const char* env = std::getenv("NSDDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0 && v <= 256) n = static_cast<std::size_t>(v);
  }
  if (n == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n = hw ? hw : 1;
  }
  return std::min(n, std::max<std::size_t>(jobs, 1));
}

inline double path_error(const PathRecord& coarse, const PathRecord& ref, ErrorMode mode) {
  const std::size_t factor = static_cast<std::size_t>(ref.m / coarse.m);
  auto diff_at = [&](long long k) {
    double s = 0.0;
    const Vec& a = coarse.at(k);
    const Vec& b = ref.at(k * static_cast<long long>(factor));
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  if (mode == ErrorMode::at_T) return diff_at(static_cast<long long>(coarse.total));
  double sup = 0.0;
  for (long long k = 0; k <= static_cast<long long>(coarse.total); ++k)
    sup = std::max(sup, diff_at(k));
  return sup;
}

}  // namespace exp_detail

// Ordinary least squares on the (ln delta, ln root-error) cloud.
// r2 is 1 for a two-point fit by convention.
inline RateFit fit_rate_ols(const std::vector<double>& deltas,
                            const std::vector<double>& roots) {
  require(deltas.size() == roots.size(), errc::invalid_parameter, "fit input size mismatch");
  require(deltas.size() >= 2, errc::not_fittable, "rate fit needs at least two levels");
  const std::size_t n = deltas.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(deltas[i] > 0.0, errc::invalid_parameter, "fit needs positive steps");
    require(roots[i] > 0.0, errc::not_fittable, "rate fit needs positive errors");
    lx[i] = std::log(deltas[i]);
    ly[i] = std::log(roots[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  require(sxx > 0.0, errc::not_fittable, "rate fit needs distinct steps");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.ci_lo = f.slope;
  f.ci_hi = f.slope;
  return f;
}

// Full fit plus a percentile bootstrap over whole paths: each replicate
// resamples path indices once and reuses them across levels, preserving the
// coupling between levels.
inline RateFit fit_rate(const std::vector<double>& deltas,
                        const std::vector<std::vector<double>>& per_path, double q,
                        std::uint64_t seed, std::size_t replicates = 1000) {
  require(per_path.size() == deltas.size(), errc::invalid_parameter,
          "fit input size mismatch");
  require(!per_path.empty() && !per_path.front().empty(), errc::not_fittable,
          "rate fit needs paths");
  const std::size_t n_paths = per_path.front().size();
  std::vector<double> roots(deltas.size());
  for (std::size_t lv = 0; lv < deltas.size(); ++lv) {
    require(per_path[lv].size() == n_paths, errc::invalid_parameter,
            "fit input size mismatch");
    double s = 0.0;
    for (double e : per_path[lv]) s += std::pow(e, q);
    roots[lv] = std::pow(s / static_cast<double>(n_paths), 1.0 / q);
  }
  RateFit fit = fit_rate_ols(deltas, roots);

  RngStream rng(stream_seed(seed, 0, stream_tag::bootstrap));
  std::vector<double> slopes;
  slopes.reserve(replicates);
  std::vector<std::size_t> pick(n_paths);
  for (std::size_t b = 0; b < replicates; ++b) {
    for (auto& j : pick) j = static_cast<std::size_t>(rng.below(n_paths));
    bool ok = true;
    std::vector<double> rroots(deltas.size());
    for (std::size_t lv = 0; lv < deltas.size() && ok; ++lv) {
      double s = 0.0;
      for (std::size_t j : pick) s += std::pow(per_path[lv][j], q);
      if (s <= 0.0) ok = false;
      else rroots[lv] = std::pow(s / static_cast<double>(n_paths), 1.0 / q);
    }
    if (!ok) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const std::size_t n = deltas.size();
    for (std::size_t i = 0; i < n; ++i) {
      sx += std::log(deltas[i]);
      sy += std::log(rroots[i]);
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (std::log(deltas[i]) - mx) * (std::log(deltas[i]) - mx);
      sxy += (std::log(deltas[i]) - mx) * (std::log(rroots[i]) - my);
    }
    slopes.push_back(sxy / sxx);
  }
  require(slopes.size() >= std::max<std::size_t>(replicates / 10, 2), errc::not_fittable,
          "too few valid bootstrap replicates");
  std::sort(slopes.begin(), slopes.end());
  const std::size_t B = slopes.size();
  const std::size_t ilo = static_cast<std::size_t>(std::floor(0.025 * static_cast<double>(B)));
  std::size_t ihi = static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(B)));
  if (ihi > 0) --ihi;
  fit.ci_lo = slopes[std::min(ilo, B - 1)];
  fit.ci_hi = slopes[std::min(ihi, B - 1)];
  return fit;
}

inline ConvergenceReport strong_error_study(const StudyConfig& cfg) {
  validate(cfg.set);
  require(!cfg.levels.empty(), errc::invalid_parameter, "study needs at least one level");
  require(cfg.m_ref >= 1, errc::invalid_parameter, "study needs a reference level");
  require(cfg.paths >= 1, errc::invalid_parameter, "study needs at least one path");
  require(cfg.q > 0.0, errc::invalid_parameter, "moment order must be positive");
  for (std::size_t m : cfg.levels) {
    require(m >= 1, errc::invalid_parameter, "level must be positive");
    require(cfg.m_ref % m == 0, errc::grid_mismatch,
            "reference level must be divisible by every coarse level");
    require(m <= cfg.m_ref, errc::grid_mismatch, "coarse level exceeds reference level");
  }
  if (cfg.driver == Driver::jump)
    require(cfg.marks.has_value(), errc::invalid_parameter, "jump study needs a mark measure");

  const std::size_t n_levels = cfg.levels.size();
  std::vector<TimeGrid> grids;
  std::vector<TruncationRule> rules;
  grids.reserve(n_levels);
  rules.reserve(n_levels);
  for (std::size_t m : cfg.levels) {
    grids.push_back(TimeGrid::make(cfg.tau, cfg.horizon, m));
    rules.push_back(make_rule(cfg.set, grids.back().step, cfg.epsilon, cfg.driver, cfg.jump_p));
  }
  const TimeGrid ref_grid = TimeGrid::make(cfg.tau, cfg.horizon, cfg.m_ref);
  const TruncationRule ref_rule =
      make_rule(cfg.set, ref_grid.step, cfg.epsilon, cfg.driver, cfg.jump_p);

  std::vector<std::vector<double>> errors(n_levels,
                                          std::vector<double>(cfg.paths, 0.0));

  std::mutex fail_mu;
  std::exception_ptr first_error;
  std::size_t first_error_path = static_cast<std::size_t>(-1);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= cfg.paths) return;
      try {
        PathRecord ref;
        std::optional<BrownianGrid> noise;
        std::optional<JumpRealization> jumps;
        if (cfg.driver == Driver::brownian) {
          noise = sample_brownian(cfg.seed, j, cfg.horizon, ref_grid.step, cfg.set.noise_dim);
          ref = simulate(cfg.set, ref_rule, ref_grid, cfg.xi, *noise);
        } else {
          jumps = sample_jumps(cfg.seed, j, cfg.horizon, *cfg.marks);
          ref = simulate_jump(cfg.set, ref_rule, ref_grid, cfg.xi, *jumps, *cfg.marks,
                              cfg.quad_nodes);
        }
        for (std::size_t lv = 0; lv < n_levels; ++lv) {
          PathRecord coarse;
          if (cfg.driver == Driver::brownian) {
            const BrownianGrid level_noise =
                coarsen(*noise, cfg.m_ref / cfg.levels[lv]);
            coarse = simulate(cfg.set, rules[lv], grids[lv], cfg.xi, level_noise);
          } else {
            coarse = simulate_jump(cfg.set, rules[lv], grids[lv], cfg.xi, *jumps,
                                   *cfg.marks, cfg.quad_nodes);
          }
          errors[lv][j] = exp_detail::path_error(coarse, ref, cfg.mode);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(fail_mu);
        if (j < first_error_path) {
          first_error_path = j;
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  const std::size_t n_threads = exp_detail::thread_count(cfg.paths);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ConvergenceReport rep;
  rep.paths = cfg.paths;
  rep.q = cfg.q;
  rep.seed = cfg.seed;
  rep.mode = cfg.mode;
  rep.driver = cfg.driver;
  rep.per_path = errors;
  rep.levels.resize(n_levels);
  const double invN = 1.0 / static_cast<double>(cfg.paths);
  for (std::size_t lv = 0; lv < n_levels; ++lv) {
    LevelResult& L = rep.levels[lv];
    L.m = cfg.levels[lv];
    L.delta = grids[lv].step;
    L.gauge = rules[lv].gauge;
    L.radius = rules[lv].radius;
    double s = 0.0;
    for (std::size_t j = 0; j < cfg.paths; ++j) s += std::pow(errors[lv][j], cfg.q);
    L.moment = s * invN;
    L.root = L.moment > 0.0 ? std::pow(L.moment, 1.0 / cfg.q) : 0.0;
    double var = 0.0;
    for (std::size_t j = 0; j < cfg.paths; ++j) {
      const double d = std::pow(errors[lv][j], cfg.q) - L.moment;
      var += d * d;
    }
    if (cfg.paths > 1) var /= static_cast<double>(cfg.paths - 1);
    L.std_err = std::sqrt(var * invN);
  }

  std::vector<double> deltas, roots;
  std::vector<std::vector<double>> fit_paths;
  for (std::size_t lv = 0; lv < n_levels; ++lv) {
    if (rep.levels[lv].moment > 0.0) {
      deltas.push_back(rep.levels[lv].delta);
      roots.push_back(rep.levels[lv].root);
      fit_paths.push_back(errors[lv]);
    }
  }
  if (deltas.size() >= 2) {
    try {
      rep.rate = fit_rate(deltas, fit_paths, cfg.q, cfg.seed);
    } catch (const Error& e) {
      rep.rate_note = std::string("not-fittable: ") + e.what();
    }
  } else {
    rep.rate_note = "not-fittable: fewer than two levels with positive error moments";
  }
  return rep;
}

}  // namespace nsdde
