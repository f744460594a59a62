#include "num/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>

#include "num/diagnostics.hpp"
#include "num/dynamics.hpp"
#include "num/errors.hpp"
#include "num/iterate.hpp"
#include "num/pf_solver.hpp"
#include "num/random_scenario.hpp"
#include "output.hpp"

namespace num::cli {

namespace {

struct Common {
  std::string scenario;
  std::string output = "-";
  double tol_feas = kDefaultTolFeas;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c, bool needs_scenario = true) {
  auto* opt = sub->add_option("--scenario", c.scenario,
                              "Scenario file, builtin:aggregating[:n], random or "
                              "random-aggregating:<n>");
  if (needs_scenario) opt->required();
  sub->add_option("--output", c.output, "Output path ('-' for stdout)")->capture_default_str();
  sub->add_option("--tol-feas", c.tol_feas, "Feasibility tolerance")->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for random scenarios")->capture_default_str();
}

void write_common_manifest(CsvWriter& csv, const std::string& command, const Common& c,
                           const Scenario* s) {
  csv.manifest("command", command);
  if (s) {
    csv.manifest("scenario", c.scenario);
    if (!s->label.empty() && s->label != c.scenario) csv.manifest("label", s->label);
    csv.manifest("users", std::to_string(s->users()));
    csv.manifest("links", std::to_string(s->links()));
  }
  csv.manifest("seed", std::to_string(c.seed));
  csv.manifest("tol_feas", format_number(c.tol_feas));
  csv.manifest("output", c.output);
}

std::vector<std::string> indexed(const std::string& stem, std::size_t count) {
  std::vector<std::string> cols;
  for (std::size_t i = 1; i <= count; ++i) cols.push_back(stem + std::to_string(i));
  return cols;
}

template <class... Parts>
std::vector<std::string> concat(Parts&&... parts) {
  std::vector<std::string> all;
  (all.insert(all.end(), parts.begin(), parts.end()), ...);
  return all;
}

std::string show(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format("{:.10g}", v[i]);
  return s + ")";
}

Flow initial_point(const std::string& spec, const Scenario& s) {
  if (spec == "lexmax") return lexicographic_max_point(s.network);
  std::ifstream in(spec);
  if (!in) throw InputError("cannot open x0 file '" + spec + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto x = parse_number_list(buf.str());
  if (x.size() != s.users()) {
    throw InputError(fmt::format("x0 file '{}' has {} entries, scenario has {} users", spec,
                                 x.size(), s.users()));
  }
  return x;
}

// ---------------------------------------------------------------- pf-solve

struct PfSolveArgs {
  Common common;
  std::string prices;
  std::string rates;
  std::string solver = "dual";
  double tol = 1e-8;
  std::size_t max_iters = 100000;
};

int cmd_pf_solve(const PfSolveArgs& a, std::ostream& out, std::ostream& err) {
  const Scenario s = resolve_scenario(a.common.scenario, a.common.seed);
  if (a.prices.empty() == a.rates.empty()) throw InputError("give exactly one of --prices or --x");

  std::vector<double> p;
  std::string price_source;
  if (a.prices == "from-lexmax") {
    p = prices(s, lexicographic_max_point(s.network));
    price_source = "from-lexmax";
  } else if (!a.prices.empty()) {
    p = parse_number_list(a.prices);
    price_source = "inline";
  } else {
    p = prices(s, parse_number_list(a.rates));
    price_source = "from-x";
  }
  if (p.size() != s.users()) {
    throw InputError(fmt::format("expected {} prices, got {}", s.users(), p.size()));
  }

  Flow x;
  std::vector<double> mu(s.links(), 0.0);
  std::size_t iterations = 0;
  bool converged = true;
  if (a.solver == "dual") {
    DualSolverOptions opts;
    opts.tol = a.tol;
    opts.max_iters = a.max_iters;
    auto sol = solve_pf_dual(s.network, p, opts);
    x = std::move(sol.x);
    mu = std::move(sol.mu);
    iterations = sol.iterations;
    converged = sol.converged;
  } else if (a.solver == "string") {
    const auto shape = detect_flow_aggregating(s.network);
    if (!shape) throw InputError("--solver string needs a flow-aggregating network");
    const std::size_t n = s.users();
    AscendingInstance inst{shape->alphas, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) inst.p[i] = p[shape->user_order[i]];
    const auto sol = string_solve_with_duals(inst);
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      x[shape->user_order[i]] = sol.x[i];
      mu[shape->link_order[i]] = sol.mu[i];
    }
  } else {
    throw InputError("--solver must be 'dual' or 'string'");
  }
  const double kkt = pf_kkt_residual(s.network, p, x, mu);
  converged = converged && kkt <= a.tol;

  err << fmt::format("x   = {}\nmu  = {}\nkkt residual = {:.3e}\niterations = {}\n", show(x),
                     show(mu), kkt, iterations);
  if (!converged) {
    err << fmt::format("error: network subproblem did not reach tolerance {:.3e}\n", a.tol);
    return kExitNumerical;
  }

  OutputSink sink(a.common.output, out);
  CsvWriter csv(sink.stream());
  write_common_manifest(csv, "pf-solve", a.common, &s);
  csv.manifest("solver", a.solver);
  csv.manifest("prices", price_source);
  std::string joined;
  for (double v : p) joined += (joined.empty() ? "" : " ") + format_number(v);
  csv.manifest("p", joined);
  csv.manifest("tol", format_number(a.tol));
  csv.manifest("max_iters", std::to_string(a.max_iters));
  csv.header(concat(indexed("x", s.users()), indexed("mu", s.links()),
                    std::vector<std::string>{"kkt_residual", "iterations", "converged"}));
  std::vector<double> row = x;
  row.insert(row.end(), mu.begin(), mu.end());
  row.push_back(kkt);
  row.push_back(static_cast<double>(iterations));
  row.push_back(converged ? 1.0 : 0.0);
  csv.row(row);
  sink.commit();
  return kExitOk;
}

// --------------------------------------------------------------------- run

struct RunArgs {
  Common common;
  AlgorithmConfig config;
  std::optional<double> inner_tol;
  std::string x0 = "lexmax";
};

int cmd_run(RunArgs a, std::ostream& out, std::ostream& err) {
  const Scenario s = resolve_scenario(a.common.scenario, a.common.seed);
  a.config.tol_feas = a.common.tol_feas;
  a.config.inner_tol = a.inner_tol;
  a.config.keep_records = false;
  a.config.validate();
  const Flow x0 = initial_point(a.x0, s);
  const auto ref = reference_optimum(s, 1e-10);

  OutputSink sink(a.common.output, out);
  CsvWriter csv(sink.stream());
  write_common_manifest(csv, "run", a.common, &s);
  csv.manifest("x0", a.x0);
  csv.manifest("max_iters", std::to_string(a.config.max_iters));
  csv.manifest("stop_tol", format_number(a.config.stop_tol));
  csv.manifest("inner_tol", format_number(a.config.effective_inner_tol()));
  csv.manifest("record_every", std::to_string(a.config.record_every));
  csv.manifest("reference_kkt_residual", format_number(ref.certified_residual));
  csv.header(concat(std::vector<std::string>{"k", "a_k"}, indexed("x", s.users()),
                    std::vector<std::string>{"error2", "welfare", "descent", "min_slack"}));

  double last_error = 0.0;
  const auto trace = run_algorithm1(s, x0, a.config, [&](const IterateRecord& r) {
    last_error = l2_distance(r.x, ref.x_star);
    std::vector<double> row{static_cast<double>(r.k), step_size(r.k)};
    row.insert(row.end(), r.x.begin(), r.x.end());
    row.insert(row.end(), {last_error, r.welfare, r.descent, r.min_slack});
    csv.row(row);
    return true;
  });

  err << fmt::format("status = {}\niterations = {}\nfinal x = {}\nerror2 = {:.6e}\nerror_inf = {:.6e}\n",
                     to_string(trace.status), trace.iterations, show(trace.final_x), last_error,
                     max_abs_diff(trace.final_x, ref.x_star));
  if (trace.status == Trace::Status::kSolverFailure) {
    err << "error: " << trace.message << '\n';
    return kExitNumerical;
  }
  sink.commit();
  return kExitOk;
}

// --------------------------------------------------------------------- kmt

struct KmtArgs {
  Common common;
  KMTConfig config;
  std::string x0 = "lexmax";
  std::size_t max_rows = 10000;
};

int cmd_kmt(KmtArgs a, std::ostream& out, std::ostream& err) {
  const Scenario s = resolve_scenario(a.common.scenario, a.common.seed);
  if (!(a.config.kappa > 0.0)) throw InputError("--kappa must be positive");
  if (!(a.config.epsilon > 0.0)) throw InputError("--epsilon must be positive");
  if (!(a.config.horizon > 0.0)) throw InputError("--horizon must be positive");
  const double h = a.config.h.value_or(kmt_default_step(s, a.config.kappa, a.config.epsilon));
  const auto steps = static_cast<std::size_t>(std::ceil(a.config.horizon / h - 1e-9));
  a.config.h = h;
  a.config.sample_every = a.max_rows == 0 ? 1 : std::max<std::size_t>(1, (steps + a.max_rows - 1) / a.max_rows);
  const Flow x0 = initial_point(a.x0, s);
  const auto ref = reference_optimum(s, 1e-10);

  OutputSink sink(a.common.output, out);
  CsvWriter csv(sink.stream());
  write_common_manifest(csv, "kmt", a.common, &s);
  csv.manifest("x0", a.x0);
  csv.manifest("kappa", format_number(a.config.kappa));
  csv.manifest("epsilon", format_number(a.config.epsilon));
  csv.manifest("h", format_number(h));
  csv.manifest("horizon", format_number(a.config.horizon));
  csv.manifest("sample_every", std::to_string(a.config.sample_every));
  csv.header(concat(std::vector<std::string>{"t"}, indexed("x", s.users()),
                    std::vector<std::string>{"error2", "welfare", "min_slack"}));

  const auto trace = integrate_kmt(s, x0, a.config, ref.x_star);
  for (const auto& smp : trace.samples) {
    std::vector<double> row{smp.t};
    row.insert(row.end(), smp.x.begin(), smp.x.end());
    row.insert(row.end(), {smp.error2, smp.welfare, smp.min_slack});
    csv.row(row);
  }
  const auto& last = trace.samples.back();
  err << fmt::format("steps = {}\nh = {:.6g}\nfinal x = {}\nerror2 = {:.6e}\nmin_slack = {:.6e}\n",
                     trace.steps, h, show(last.x), last.error2, last.min_slack);
  sink.commit();
  return kExitOk;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  Common common;
  std::string kappa_list = "1,10";
  double threshold = 1e-2;
  double horizon = 100.0;
  double epsilon = 0.1;
  std::optional<double> h_kmt;
  double h_di = 0.1;
  double inner_tol = 1e-8;
};

struct Cell {
  std::string system;
  double kappa = 0.0;
  bool reached = false;
  double time = -1.0;
  double end_time = 0.0;
  double end_error = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const Scenario s = resolve_scenario(a.common.scenario, a.common.seed);
  const auto kappas = parse_number_list(a.kappa_list);
  if (kappas.empty()) throw InputError("--kappa-list is empty");
  for (double k : kappas) {
    if (!(k > 0.0)) throw InputError("every kappa must be positive");
  }
  if (!(a.threshold > 0.0)) throw InputError("--threshold must be positive");
  if (!(a.horizon > 0.0)) throw InputError("--horizon must be positive");
  if (!(a.h_di > 0.0 && a.h_di <= 1.0)) throw InputError("--h-di must lie in (0, 1]");
  const Flow x0 = lexicographic_max_point(s.network);
  const auto ref = reference_optimum(s, 1e-10);

  auto run_cell = [&](const std::string& system, double kappa) {
    Cell c;
    c.system = system;
    c.kappa = kappa;
    auto watch = [&](const StateSample& smp) {
      c.end_time = smp.t;
      c.end_error = smp.error2;
      c.min_slack = std::min(c.min_slack, smp.min_slack);
      if (smp.error2 <= a.threshold) {
        c.reached = true;
        c.time = smp.t;
        return false;
      }
      return true;
    };
    StateTrace tr;
    if (system == "di") {
      DIConfig cfg;
      cfg.kappa = kappa;
      cfg.h = a.h_di / kappa;
      cfg.horizon = a.horizon / kappa;
      cfg.inner_tol = a.inner_tol;
      cfg.sample_every = std::numeric_limits<std::size_t>::max();
      tr = integrate_scaled_di(s, x0, cfg, ref.x_star, watch);
    } else {
      KMTConfig cfg;
      cfg.kappa = kappa;
      cfg.epsilon = a.epsilon;
      if (a.h_kmt) cfg.h = *a.h_kmt / kappa;
      cfg.horizon = a.horizon / kappa;
      cfg.sample_every = std::numeric_limits<std::size_t>::max();
      tr = integrate_kmt(s, x0, cfg, ref.x_star, watch);
    }
    c.steps = tr.steps;
    return c;
  };

  std::vector<std::future<Cell>> jobs;
  for (const char* system : {"di", "kmt"}) {
    for (double k : kappas) jobs.push_back(std::async(std::launch::async, run_cell, system, k));
  }
  std::vector<Cell> cells;
  for (auto& j : jobs) cells.push_back(j.get());

  OutputSink sink(a.common.output, out);
  CsvWriter csv(sink.stream());
  write_common_manifest(csv, "compare", a.common, &s);
  csv.manifest("x0", "lexmax");
  csv.manifest("kappa_list", a.kappa_list);
  csv.manifest("threshold", format_number(a.threshold));
  csv.manifest("horizon", format_number(a.horizon) + " / kappa");
  csv.manifest("epsilon", format_number(a.epsilon));
  csv.manifest("h_kmt", a.h_kmt ? format_number(*a.h_kmt) + " / kappa" : "default");
  csv.manifest("h_di", format_number(a.h_di) + " / kappa");
  csv.manifest("inner_tol", format_number(a.inner_tol));
  csv.header({"system", "kappa", "reached", "time_to_threshold", "end_time", "end_error2",
              "min_slack", "steps"});
  for (const auto& c : cells) {
    csv.row({c.system}, {c.kappa, c.reached ? 1.0 : 0.0, c.time, c.end_time, c.end_error,
                         c.min_slack, static_cast<double>(c.steps)});
    err << fmt::format("{:<4} kappa={:<6g} {}\n", c.system, c.kappa,
                       c.reached ? fmt::format("reached {:g} at t = {:.6g}", a.threshold, c.time)
                                 : fmt::format("not reached by t = {:.6g} (error2 {:.4g})",
                                               c.end_time, c.end_error));
  }
  sink.commit();
  return kExitOk;
}

// ------------------------------------------------------------------ lexmax

int cmd_lexmax(const Common& c, std::ostream& out, std::ostream& err) {
  const Scenario s = resolve_scenario(c.scenario, c.seed);
  const Flow x = lexicographic_max_point(s.network);
  const auto slack = feasibility_slack(s.network, x, c.tol_feas);
  OutputSink sink(c.output, out);
  CsvWriter csv(sink.stream());
  write_common_manifest(csv, "lexmax", c, &s);
  csv.header(concat(indexed("x", s.users()), std::vector<std::string>{"min_slack", "feasible"}));
  std::vector<double> row = x;
  row.push_back(slack.min_slack);
  row.push_back(slack.feasible ? 1.0 : 0.0);
  csv.row(row);
  err << fmt::format("x = {}\nmin_slack = {:.6e}\n", show(x), slack.min_slack);
  sink.commit();
  return kExitOk;
}

// ----------------------------------------------------------- appendix-demo

int cmd_appendix_demo(const Common& c, double unit, std::ostream& out) {
  const auto demo = appendix_discontinuity_demo(unit);
  OutputSink sink(c.output, out);
  auto& os = sink.stream();
  CsvWriter csv(os);
  write_common_manifest(csv, "appendix-demo", c, nullptr);
  csv.manifest("c", format_number(unit));
  csv.header({"delta", "y_T1", "y_T2", "y_T3", "z_T1", "z_T2", "z_T3"});
  for (std::size_t k = 0; k < demo.deltas.size(); ++k) {
    std::vector<double> row{demo.deltas[k]};
    row.insert(row.end(), demo.along_y[k].begin(), demo.along_y[k].end());
    row.insert(row.end(), demo.along_z[k].begin(), demo.along_z[k].end());
    csv.row(row);
  }
  os << "# limit along (c, 0, delta):     " << show(demo.limit_y) << '\n';
  os << "# limit along (c, delta, delta): " << show(demo.limit_z) << '\n';
  os << "# sup-norm distance: " << format_number(demo.distance) << '\n';
  sink.commit();
  return kExitOk;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream toks(line);
    std::string tok;
    while (toks >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) throw InputError("not a number: '" + tok + "'");
      out.push_back(v);
    }
  }
  return out;
}

Scenario resolve_scenario(const std::string& spec, std::uint64_t seed) {
  auto suffix_count = [&](std::string_view prefix) -> std::optional<std::size_t> {
    if (spec.size() <= prefix.size()) return std::nullopt;
    const auto rest = spec.substr(prefix.size());
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != rest.size() || v == 0) throw InputError("bad size in scenario '" + spec + "'");
    return v;
  };
  if (spec == "builtin:aggregating") return aggregating_benchmark_scenario();
  if (spec.rfind("builtin:aggregating:", 0) == 0) {
    return aggregating_benchmark_scenario(*suffix_count("builtin:aggregating:"));
  }
  if (spec == "random") return random_scenario(seed);
  if (spec.rfind("random-aggregating:", 0) == 0) {
    return random_aggregating_scenario(seed, *suffix_count("random-aggregating:"));
  }
  return load_scenario_file(spec);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network utility maximization: feasible iterations, proportionally fair "
               "subproblems and fluid-model comparisons",
               "numtool"};
  app.require_subcommand(1);
  // `--h` is the fluid-model step, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");

  PfSolveArgs pf;
  auto* pf_cmd = app.add_subcommand("pf-solve", "Solve the proportionally fair subproblem");
  add_common(pf_cmd, pf.common);
  pf_cmd->add_option("--prices", pf.prices, "Comma-separated prices, or from-lexmax");
  pf_cmd->add_option("--x", pf.rates, "Rates from which prices p = x w'(x) are derived");
  pf_cmd->add_option("--solver", pf.solver, "dual or string")->capture_default_str();
  pf_cmd->add_option("--tol", pf.tol, "Solver tolerance")->capture_default_str();
  pf_cmd->add_option("--max-iters", pf.max_iters, "Solver iteration cap")->capture_default_str();

  RunArgs run_a;
  std::optional<double> inner_tol;
  auto* run_cmd = app.add_subcommand("run", "Run the feasible iteration and trace it");
  add_common(run_cmd, run_a.common);
  run_cmd->add_option("--max-iters", run_a.config.max_iters)->capture_default_str();
  run_cmd->add_option("--stop-tol", run_a.config.stop_tol, "Stop when |v - x|_inf <= this")
      ->capture_default_str();
  run_cmd->add_option("--inner-tol", inner_tol, "Subproblem tolerance (default min(1e-8, stop-tol/10))");
  run_cmd->add_option("--record-every", run_a.config.record_every)->capture_default_str();
  run_cmd->add_option("--x0", run_a.x0, "lexmax or a file of n rates")->capture_default_str();

  KmtArgs kmt;
  std::optional<double> kmt_h;
  auto* kmt_cmd = app.add_subcommand("kmt", "Integrate the penalty-based fluid model");
  add_common(kmt_cmd, kmt.common);
  kmt_cmd->add_option("--kappa", kmt.config.kappa)->capture_default_str();
  kmt_cmd->add_option("--epsilon", kmt.config.epsilon)->capture_default_str();
  kmt_cmd->add_option("--h", kmt_h, "Step (default: stiffness-limited, at most 0.01/kappa)");
  kmt_cmd->add_option("--horizon", kmt.config.horizon)->capture_default_str();
  kmt_cmd->add_option("--x0", kmt.x0, "lexmax or a file of n rates")->capture_default_str();
  kmt_cmd->add_option("--max-rows", kmt.max_rows, "Thin the trace to about this many rows (0: every step)")
      ->capture_default_str();

  CompareArgs cmp;
  std::optional<double> cmp_h_kmt;
  auto* cmp_cmd = app.add_subcommand("compare", "Time-to-threshold of the scaled iteration vs the fluid model");
  add_common(cmp_cmd, cmp.common);
  cmp_cmd->add_option("--kappa-list", cmp.kappa_list)->capture_default_str();
  cmp_cmd->add_option("--threshold", cmp.threshold)->capture_default_str();
  cmp_cmd->add_option("--horizon", cmp.horizon, "Horizon at kappa = 1; divided by kappa")
      ->capture_default_str();
  cmp_cmd->add_option("--epsilon", cmp.epsilon)->capture_default_str();
  cmp_cmd->add_option("--h-kmt", cmp_h_kmt, "Fluid-model step at kappa = 1; divided by kappa");
  cmp_cmd->add_option("--h-di", cmp.h_di, "Euler step at kappa = 1; divided by kappa")->capture_default_str();
  cmp_cmd->add_option("--inner-tol", cmp.inner_tol)->capture_default_str();

  Common lex;
  auto* lex_cmd = app.add_subcommand("lexmax", "Max-min fair starting point");
  add_common(lex_cmd, lex);

  Common demo;
  double unit = 1.0;
  auto* demo_cmd = app.add_subcommand("appendix-demo", "Discontinuity of T on a nested instance");
  add_common(demo_cmd, demo, false);
  demo_cmd->add_option("--c", unit, "Capacity unit")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*pf_cmd) return cmd_pf_solve(pf, out, err);
    if (*run_cmd) {
      run_a.inner_tol = inner_tol;
      return cmd_run(run_a, out, err);
    }
    if (*kmt_cmd) {
      kmt.config.h = kmt_h;
      return cmd_kmt(kmt, out, err);
    }
    if (*cmp_cmd) {
      cmp.h_kmt = cmp_h_kmt;
      return cmd_compare(cmp, out, err);
    }
    if (*lex_cmd) return cmd_lexmax(lex, out, err);
    if (*demo_cmd) return cmd_appendix_demo(demo, unit, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace num::cli
