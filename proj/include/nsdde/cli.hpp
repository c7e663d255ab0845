#pragma once

// Command-line front end. Four subcommands: simulate (dump coupled sample
// paths), converge (strong-error study with rate fit), check-assumptions
// (coefficient audits), list-models (registry).
//
// Exit codes: 0 success, 1 usage or configuration errors, 2 numerical
// failures (blowup, unfittable rate). Output files are assembled in memory
// and written only after the whole computation succeeded, so a nonzero exit
// never leaves partial files.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "audit.hpp"
#include "core.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "jump_scheme.hpp"
#include "marks.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "scheme.hpp"
#include "truncation.hpp"

namespace nsdde::cli {

namespace detail {

inline int exit_code(errc c) {
  return (c == errc::numerical_blowup || c == errc::not_fittable) ? 2 : 1;
}

struct Output {
  std::string path;
  std::string content;
};

inline void write_all(const std::vector<Output>& outs) {
  for (const auto& o : outs) {
    std::ofstream f(o.path, std::ios::binary | std::ios::trunc);
    require(f.is_open(), errc::invalid_parameter, "cannot open output file '" + o.path + "'");
    f.write(o.content.data(), static_cast<std::streamsize>(o.content.size()));
    f.flush();
    require(f.good(), errc::invalid_parameter, "failed writing output file '" + o.path + "'");
  }
}

inline double to_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    raise(errc::invalid_parameter, "cannot parse " + what + " from '" + s + "'");
  }
  require(pos == s.size(), errc::invalid_parameter,
          "trailing characters in " + what + " '" + s + "'");
  return v;
}

inline MarkMeasure parse_mark_spec(const std::string& spec, double intensity) {
  const auto colon = spec.find(':');
  require(colon != std::string::npos, errc::invalid_parameter,
          "mark distribution must look like point:c, gauss:s, or uniform:a,b");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "point") return MarkMeasure::point(intensity, to_double(rest, "mark size"));
  if (kind == "gauss") return MarkMeasure::gauss(intensity, to_double(rest, "mark scale"));
  if (kind == "uniform") {
    const auto comma = rest.find(',');
    require(comma != std::string::npos, errc::invalid_parameter,
            "uniform marks need two endpoints, e.g. uniform:-1,1");
    return MarkMeasure::uniform(intensity, to_double(rest.substr(0, comma), "mark lower end"),
                                to_double(rest.substr(comma + 1), "mark upper end"));
  }
  raise(errc::invalid_parameter, "unknown mark distribution '" + kind +
                                     "' (known: point, gauss, uniform)");
}

inline const ModelInfo& registry_info(const std::string& id) {
  for (const auto& m : model_registry())
    if (m.id == id) return m;
  make_registered(id, 0.0, std::nullopt);  // raises, naming the known models
  raise(errc::invalid_parameter, "unknown model '" + id + "'");
}

inline std::string join_components(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += csv::num(v[i]);
  }
  return s;
}

struct ModelOpts {
  std::string model;
  double a = 0.5;
  std::string mark_dist = "gauss:1";
  double mark_intensity = 1.0;
};

inline void add_model_flags(CLI::App* sub, ModelOpts& o) {
  sub->add_option("--model", o.model, "model id (see list-models)")->required();
  sub->add_option("--a", o.a, "neutral weight for models that take one, |a| < 1")
      ->capture_default_str();
  sub->add_option("--mark-dist", o.mark_dist,
                  "jump mark distribution: point:c, gauss:s, or uniform:a,b")
      ->capture_default_str();
  sub->add_option("--mark-intensity", o.mark_intensity, "jump intensity (mean rate)")
      ->capture_default_str();
}

struct ResolvedModel {
  CoefficientSet set;
  ModelInfo info;
  std::optional<MarkMeasure> marks;
};

inline ResolvedModel resolve_model(const ModelOpts& o) {
  ResolvedModel r;
  r.info = registry_info(o.model);
  if (r.info.jump_driver) r.marks = parse_mark_spec(o.mark_dist, o.mark_intensity);
  r.set = make_registered(o.model, o.a, r.marks);
  return r;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args) {
  using detail::Output;

  CLI::App app{
      "Truncated Euler-Maruyama toolkit for neutral stochastic delay equations\n"
      "driven by Brownian motion or compensated Poisson jumps"};
  app.require_subcommand(1);

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "integrate sample paths and dump them as CSV");
  detail::ModelOpts sim_model;
  detail::add_model_flags(sim, sim_model);
  double sim_tau = 1.0, sim_horizon = 2.0, sim_epsilon = 0.25, sim_xi = 0.5, sim_jump_p = 3.0;
  std::size_t sim_steps = 16, sim_paths = 1, sim_quad = 32;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "simulate.csv";
  sim->add_option("--tau", sim_tau, "delay length")->capture_default_str();
  sim->add_option("--horizon", sim_horizon, "final time T")->capture_default_str();
  sim->add_option("--steps", sim_steps, "steps per delay interval (step = tau/steps)")
      ->capture_default_str();
  sim->add_option("--epsilon", sim_epsilon, "gauge exponent, g(step) = step^-epsilon")
      ->capture_default_str();
  sim->add_option("--jump-p", sim_jump_p, "moment order in the jump admissibility bound")
      ->capture_default_str();
  sim->add_option("--paths", sim_paths, "number of independent paths")->capture_default_str();
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--xi", sim_xi, "constant initial segment value")->capture_default_str();
  sim->add_option("--quad-nodes", sim_quad, "quadrature nodes for the jump compensator")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV path")->capture_default_str();

  // --- converge ---------------------------------------------------------
  auto* conv = app.add_subcommand("converge",
                                  "coupled strong-error study across step levels with rate fit");
  detail::ModelOpts conv_model;
  detail::add_model_flags(conv, conv_model);
  double conv_tau = 1.0, conv_horizon = 2.0, conv_epsilon = 0.25, conv_xi = 0.5,
         conv_q = 2.0, conv_jump_p = 3.0;
  std::vector<std::size_t> conv_levels;
  std::size_t conv_mref = 0, conv_paths = 100, conv_quad = 32;
  std::uint64_t conv_seed = 1;
  std::string conv_mode = "at-T", conv_out = "converge.csv", conv_rate_out = "rate.csv";
  conv->add_option("--tau", conv_tau, "delay length")->capture_default_str();
  conv->add_option("--horizon", conv_horizon, "final time T")->capture_default_str();
  conv->add_option("--levels", conv_levels,
                   "comma-separated coarse levels, steps per delay interval")
      ->required()
      ->delimiter(',');
  conv->add_option("--m-ref", conv_mref, "reference level, steps per delay interval")
      ->required();
  conv->add_option("--epsilon", conv_epsilon, "gauge exponent, g(step) = step^-epsilon")
      ->capture_default_str();
  conv->add_option("--q", conv_q, "error moment order")->capture_default_str();
  conv->add_option("--jump-p", conv_jump_p, "moment order in the jump admissibility bound")
      ->capture_default_str();
  conv->add_option("--mode", conv_mode, "error functional: at-T or uniform")
      ->capture_default_str();
  conv->add_option("--paths", conv_paths, "Monte Carlo sample size")->capture_default_str();
  conv->add_option("--seed", conv_seed, "master seed")->capture_default_str();
  conv->add_option("--xi", conv_xi, "constant initial segment value")->capture_default_str();
  conv->add_option("--quad-nodes", conv_quad, "quadrature nodes for the jump compensator")
      ->capture_default_str();
  conv->add_option("--out", conv_out, "per-level output CSV path")->capture_default_str();
  conv->add_option("--rate-out", conv_rate_out, "rate fit output CSV path")
      ->capture_default_str();

  // --- check-assumptions --------------------------------------------------
  auto* chk = app.add_subcommand("check-assumptions",
                                 "audit the structural inequalities of a model's coefficients");
  detail::ModelOpts chk_model;
  detail::add_model_flags(chk, chk_model);
  std::vector<std::string> chk_list;
  double chk_box = 10.0, chk_kappa = 0.5, chk_p = 3.0, chk_q = 2.0, chk_l = 3.0, chk_c = 2.0,
         chk_tau = 1.0, chk_epsilon = 0.25;
  std::size_t chk_samples = 4096, chk_steps = 64;
  std::uint64_t chk_seed = 1;
  std::string chk_out = "assumptions.csv";
  chk->add_option("--assumptions", chk_list,
                  "comma-separated audit ids (default: the set the model is built to satisfy)")
      ->delimiter(',');
  chk->add_option("--box", chk_box, "audit box half-width, points drawn from [-box, box]")
      ->capture_default_str();
  chk->add_option("--samples", chk_samples, "lattice sample count")->capture_default_str();
  chk->add_option("--seed", chk_seed, "lattice shift seed")->capture_default_str();
  auto* chk_kappa_opt =
      chk->add_option("--kappa", chk_kappa, "A1 contraction constant (default: the model's)");
  chk->add_option("--p", chk_p, "moment order in A3/A4 and the B1 mark integral")
      ->capture_default_str();
  chk->add_option("--q", chk_q, "moment order in A5")->capture_default_str();
  chk->add_option("--l", chk_l, "polynomial growth order")->capture_default_str();
  chk->add_option("--c", chk_c, "declared constant on the majorant")->capture_default_str();
  chk->add_option("--tau", chk_tau, "delay length for truncated audits")->capture_default_str();
  chk->add_option("--steps", chk_steps, "steps per delay interval for truncated audits")
      ->capture_default_str();
  chk->add_option("--epsilon", chk_epsilon, "gauge exponent for truncated audits")
      ->capture_default_str();
  chk->add_option("--out", chk_out, "output CSV path")->capture_default_str();

  // --- list-models --------------------------------------------------------
  auto* lst = app.add_subcommand("list-models", "print the model registry");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("nsdde");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (lst->parsed()) {
      for (const auto& m : model_registry()) {
        std::string id = m.id;
        if (id.size() < 14) id.resize(14, ' ');
        std::cout << id << (m.jump_driver ? "jump      " : "brownian  ")
                  << (m.needs_a ? "requires --a  " : "              ") << m.summary << "\n";
      }
      return 0;
    }

    if (sim->parsed()) {
      const detail::ResolvedModel rm = detail::resolve_model(sim_model);
      const Driver driver = rm.info.jump_driver ? Driver::jump : Driver::brownian;
      const TimeGrid grid = TimeGrid::make(sim_tau, sim_horizon, sim_steps);
      const TruncationRule rule =
          make_rule(rm.set, grid.step, sim_epsilon, driver, sim_jump_p);
      const InitialSegment xi = InitialSegment::constant(Vec(rm.set.state_dim, sim_xi));

      std::string table;
      {
        std::string header = "path,k,t";
        for (std::size_t i = 0; i < rm.set.state_dim; ++i)
          header += ",y" + std::to_string(i);
        if (driver == Driver::jump) header += ",jumps_in_interval";
        header += ",delta,g_delta,radius,seed";
        table += header + "\r\n";
      }
      for (std::size_t j = 0; j < sim_paths; ++j) {
        PathRecord rec;
        if (driver == Driver::brownian) {
          const BrownianGrid noise =
              sample_brownian(sim_seed, j, sim_horizon, grid.step, rm.set.noise_dim);
          rec = simulate(rm.set, rule, grid, xi, noise);
        } else {
          const JumpRealization jumps = sample_jumps(sim_seed, j, sim_horizon, *rm.marks);
          rec = simulate_jump(rm.set, rule, grid, xi, jumps, *rm.marks,
                              static_cast<int>(sim_quad));
        }
        for (long long k = -static_cast<long long>(grid.m);
             k <= static_cast<long long>(grid.total); ++k) {
          table += csv::num(static_cast<unsigned long long>(j)) + ',' + csv::num(k) + ',' +
                   csv::num(static_cast<double>(k) * grid.step);
          const Vec& y = rec.at(k);
          for (double v : y) table += ',' + csv::num(v);
          if (driver == Driver::jump) {
            const unsigned long long count =
                k >= 1 ? rec.jumps_per_interval[static_cast<std::size_t>(k - 1)] : 0;
            table += ',' + csv::num(count);
          }
          table += ',' + csv::num(grid.step) + ',' + csv::num(rule.gauge) + ',' +
                   csv::num(rule.radius) + ',' +
                   csv::num(static_cast<unsigned long long>(sim_seed)) + "\r\n";
        }
      }
      detail::write_all({{sim_out, table}});
      std::cout << "simulate: " << sim_paths << " path(s), " << grid.total
                << " steps of " << csv::num(grid.step) << ", truncation radius "
                << csv::num(rule.radius) << " -> " << sim_out << "\n";
      return 0;
    }

    if (conv->parsed()) {
      const detail::ResolvedModel rm = detail::resolve_model(conv_model);
      require(conv_mode == "at-T" || conv_mode == "uniform", errc::invalid_parameter,
              "--mode must be at-T or uniform");
      StudyConfig cfg;
      cfg.set = rm.set;
      cfg.xi = InitialSegment::constant(Vec(rm.set.state_dim, conv_xi));
      cfg.tau = conv_tau;
      cfg.horizon = conv_horizon;
      cfg.levels = conv_levels;
      cfg.m_ref = conv_mref;
      cfg.epsilon = conv_epsilon;
      cfg.q = conv_q;
      cfg.paths = conv_paths;
      cfg.seed = conv_seed;
      cfg.mode = conv_mode == "at-T" ? ErrorMode::at_T : ErrorMode::uniform;
      cfg.driver = rm.info.jump_driver ? Driver::jump : Driver::brownian;
      cfg.jump_p = conv_jump_p;
      cfg.marks = rm.marks;
      cfg.quad_nodes = conv_quad;

      const ConvergenceReport rep = strong_error_study(cfg);
      for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        const LevelResult& L = rep.levels[i];
        std::cout << "level " << i << ": m=" << L.m << " delta=" << csv::num(L.delta)
                  << " radius=" << csv::num(L.radius) << " root-error=" << csv::num(L.root)
                  << "\n";
      }
      if (!rep.rate)
        raise(errc::not_fittable,
              rep.rate_note.empty() ? "rate not fittable" : rep.rate_note);
      std::cout << "rate: slope=" << csv::num(rep.rate->slope) << " ci=["
                << csv::num(rep.rate->ci_lo) << ", " << csv::num(rep.rate->ci_hi)
                << "] r2=" << csv::num(rep.rate->r2) << "\n";

      std::string levels_csv =
          "level,m,delta,g_delta,radius,n_samples,mode,q,error_moment,root_error,std_err,seed\r\n";
      for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        const LevelResult& L = rep.levels[i];
        csv::row(levels_csv,
                 {csv::num(static_cast<unsigned long long>(i)),
                  csv::num(static_cast<unsigned long long>(L.m)), csv::num(L.delta),
                  csv::num(L.gauge), csv::num(L.radius),
                  csv::num(static_cast<unsigned long long>(rep.paths)),
                  std::string(error_mode_name(rep.mode)), csv::num(rep.q),
                  csv::num(L.moment), csv::num(L.root), csv::num(L.std_err),
                  csv::num(static_cast<unsigned long long>(rep.seed))});
      }
      std::string rate_csv = "slope,ci_lo,ci_hi,r2,seed\r\n";
      csv::row(rate_csv, {csv::num(rep.rate->slope), csv::num(rep.rate->ci_lo),
                          csv::num(rep.rate->ci_hi), csv::num(rep.rate->r2),
                          csv::num(static_cast<unsigned long long>(rep.seed))});
      detail::write_all({{conv_out, levels_csv}, {conv_rate_out, rate_csv}});
      return 0;
    }

    if (chk->parsed()) {
      const detail::ResolvedModel rm = detail::resolve_model(chk_model);
      std::vector<std::string> plan = chk_list;
      if (plan.empty()) {
        if (rm.info.jump_driver) plan = {"A1", "A4'", "A6", "B2"};
        else plan = {"A1", "A3", "A4", "A4'", "A6", "A7"};
      }
      AuditParams prm;
      prm.kappa = chk_kappa_opt->count() ? chk_kappa : rm.set.kappa;
      prm.p = chk_p;
      prm.q = chk_q;
      prm.l = chk_l;
      prm.c = chk_c;
      prm.local_lipschitz = [c = chk_c, l = chk_l](double R) {
        return c * (1.0 + std::pow(R, std::max(0.0, l - 1.0)));
      };

      std::optional<TruncationRule> rule;
      std::string table =
          "assumption,samples,worst_ratio,pass,witness_x,witness_y,witness_xbar,witness_ybar,"
          "delta,g_delta,radius,seed\r\n";
      for (const auto& name : plan) {
        const Assumption id = parse_assumption(name);
        const bool needs_rule =
            id == Assumption::A4 || id == Assumption::A4prime || id == Assumption::B2;
        if (needs_rule && !rule) {
          const Driver mode = rm.info.jump_driver ? Driver::jump : Driver::brownian;
          rule = make_rule(rm.set, chk_tau / static_cast<double>(chk_steps), chk_epsilon,
                           mode, chk_p);
        }
        std::optional<MarkMeasure> marks;
        if (id == Assumption::B1) marks = rm.marks;
        const AuditReport rep =
            audit_assumption(id, rm.set, prm, -chk_box, chk_box, chk_samples, chk_seed,
                             needs_rule ? rule : std::nullopt, marks);
        std::cout << rep.assumption << ": worst ratio " << csv::num(rep.worst_ratio)
                  << " over " << rep.samples << " samples "
                  << (rep.pass ? "PASS" : "FAIL") << "\n";
        csv::row(table,
                 {rep.assumption, csv::num(static_cast<unsigned long long>(rep.samples)),
                  csv::num(rep.worst_ratio), std::string(rep.pass ? "1" : "0"),
                  detail::join_components(rep.witness_x),
                  detail::join_components(rep.witness_y),
                  detail::join_components(rep.witness_xbar),
                  detail::join_components(rep.witness_ybar),
                  needs_rule ? csv::num(rule->step) : std::string(),
                  needs_rule ? csv::num(rule->gauge) : std::string(),
                  needs_rule ? csv::num(rule->radius) : std::string(),
                  csv::num(static_cast<unsigned long long>(chk_seed))});
      }
      detail::write_all({{chk_out, table}});
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return detail::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nsdde::cli
