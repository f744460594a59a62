// Acceptance suite. One line per criterion:
//
//   [PASS] C<n> <title>: <measurements> (<seconds> s)
//
// `acceptance` runs every criterion, `acceptance --criterion N` runs one.
// Exit status is nonzero if any selected criterion fails. Every tolerance
// and budget below is pinned here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "num/diagnostics.hpp"
#include "num/dynamics.hpp"
#include "num/errors.hpp"
#include "num/iterate.hpp"
#include "num/oracle.hpp"
#include "num/pf_solver.hpp"
#include "num/random_scenario.hpp"

using namespace num;

namespace {

// C1
constexpr double kFeasTol = 1e-9;
constexpr std::size_t kC1RandomCount = 50;
constexpr std::size_t kC1RandomIters = 10000;
constexpr double kC1Budget = 30.0;
// C2, C3, C4
constexpr std::size_t kC2RandomCount = 20;
constexpr std::size_t kC2MaxIters = 100000;
constexpr double kC2ErrorTol = 1e-3;
constexpr double kOracleTol = 1e-10;
constexpr double kC2Budget = 60.0;
constexpr double kDescentTol = 1e-9;
constexpr double kFixedPointTol = 1e-5;
constexpr double kFixedPointInnerTol = 1e-10;
// C5, C6
constexpr std::size_t kC5Count = 100;
constexpr std::size_t kC5MaxUsers = 20;
constexpr double kC5AgreeTol = 1e-5;
constexpr double kC5KktTol = 1e-7;
constexpr double kC5Budget = 10.0;
// C7
constexpr double kC7Epsilon = 0.1;
constexpr double kC7Horizon = 50.0;
constexpr double kC7Tol = 1e-3;
constexpr double kC7Budget = 1.0;
// C8, C9
constexpr double kC8Threshold = 1e-2;
constexpr double kC8Horizon = 100.0;  // divided by kappa
constexpr double kC8Budget = 60.0;
constexpr double kC9RatioLow = 8.0;
constexpr double kC9RatioHigh = 12.0;
// C10
constexpr double kC10Unit = 1.0;
constexpr double kC10Tol = 1e-6;
constexpr double kC10Budget = 1.0;
// C11
constexpr double kC11Step = 1e-3;
constexpr double kC11Tol = 1e-6;

const std::vector<double> kKappas{1.0, 10.0};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

/// Random desk scenario k of a list; seeds are 1-based and shared by C1 and C2.
Scenario desk_scenario(std::uint64_t seed) { return random_scenario(seed); }

// ---------------------------------------------------------------------------
// Iteration runs shared by C2 and C3.

struct ConvergenceRun {
  Flow x_star;
  bool reached = false;
  double final_error = 0.0;  ///< sup-error of the last evaluated iterate
  std::size_t iterates = 0;
  double worst_descent = std::numeric_limits<double>::infinity();
};

std::vector<Scenario> convergence_scenarios() {
  std::vector<Scenario> list{aggregating_benchmark_scenario()};
  for (std::uint64_t seed = 1; seed <= kC2RandomCount; ++seed) list.push_back(desk_scenario(seed));
  return list;
}

/// Default configuration; a run ends as soon as the error target is met,
/// otherwise after the full iteration budget.
ConvergenceRun run_to_target(const Scenario& s) {
  ConvergenceRun r;
  r.x_star = reference_optimum(s, kOracleTol).x_star;
  AlgorithmConfig cfg;
  cfg.max_iters = kC2MaxIters;
  cfg.keep_records = false;
  const Trace t = run_algorithm1(s, lexicographic_max_point(s.network), cfg, [&](const IterateRecord& rec) {
    ++r.iterates;
    r.worst_descent = std::min(r.worst_descent, rec.descent);
    r.final_error = max_abs_diff(rec.x, r.x_star);
    r.reached = r.final_error <= kC2ErrorTol;
    return !r.reached;
  });
  if (t.status == Trace::Status::kSolverFailure) throw NumericalError(t.message);
  return r;
}

struct Context {
  std::optional<std::vector<ConvergenceRun>> convergence;
  double convergence_seconds = 0.0;

  const std::vector<ConvergenceRun>& runs() {
    if (!convergence) {
      const auto t0 = Clock::now();
      std::vector<ConvergenceRun> out;
      for (const auto& s : convergence_scenarios()) out.push_back(run_to_target(s));
      convergence = std::move(out);
      convergence_seconds = seconds_since(t0);
    }
    return *convergence;
  }

  struct Crossing {
    std::string family;
    double kappa;
    std::optional<double> time;
    double end_error;
    double seconds;
  };
  std::optional<std::vector<Crossing>> crossings;
  double crossing_seconds = 0.0;

  const std::vector<Crossing>& dynamics();
};

const std::vector<Context::Crossing>& Context::dynamics() {
  if (crossings) return *crossings;
  const auto t0 = Clock::now();
  const Scenario s = aggregating_benchmark_scenario();
  const Flow x0 = lexicographic_max_point(s.network);
  const Flow x_star = reference_optimum(s, kOracleTol).x_star;
  std::vector<Crossing> out;
  auto stop_at_threshold = [](const StateSample& smp) { return !(smp.error2 <= kC8Threshold); };
  for (double kappa : kKappas) {
    const auto t1 = Clock::now();
    DIConfig di;
    di.kappa = kappa;
    di.horizon = kC8Horizon / kappa;
    const auto trd = integrate_scaled_di(s, x0, di, x_star, stop_at_threshold);
    out.push_back({"scaled-DI", kappa, time_to_threshold(trd, kC8Threshold), trd.samples.back().error2,
                   seconds_since(t1)});
  }
  for (double kappa : kKappas) {
    const auto t1 = Clock::now();
    KMTConfig kmt;
    kmt.kappa = kappa;
    kmt.horizon = kC8Horizon / kappa;
    kmt.sample_every = 100000;
    const auto trk = integrate_kmt(s, x0, kmt, x_star, stop_at_threshold);
    out.push_back({"KMT", kappa, time_to_threshold(trk, kC8Threshold), trk.samples.back().error2,
                   seconds_since(t1)});
  }
  crossings = std::move(out);
  crossing_seconds = seconds_since(t0);
  return *crossings;
}

std::string fmt_time(const std::optional<double>& t) { return t ? fmt::format("{:.4g}", *t) : "not reached"; }

// ---------------------------------------------------------------------------

Verdict criterion1(Context&) {
  const auto t0 = Clock::now();
  double worst = std::numeric_limits<double>::infinity();
  std::size_t iterates = 0, scenarios = 0;
  auto check = [&](const Scenario& s, std::size_t max_iters) {
    AlgorithmConfig cfg;
    cfg.max_iters = max_iters;
    cfg.keep_records = false;
    const Trace t = run_algorithm1(s, lexicographic_max_point(s.network), cfg, [&](const IterateRecord& rec) {
      ++iterates;
      worst = std::min(worst, rec.min_slack);
      return true;
    });
    if (t.status == Trace::Status::kSolverFailure) throw NumericalError(t.message);
    // x^(max_iters) is produced but never evaluated
    worst = std::min(worst, feasibility_slack(s.network, t.final_x, kFeasTol).min_slack);
    ++scenarios;
  };
  check(aggregating_benchmark_scenario(), kC2MaxIters);
  for (std::uint64_t seed = 1; seed <= kC1RandomCount; ++seed) check(desk_scenario(seed), kC1RandomIters);
  const double secs = seconds_since(t0);
  return {worst >= -kFeasTol && secs < kC1Budget,
          fmt::format("worst min-slack {:.3e} over {} scenarios, {} iterates; budget {} s", worst, scenarios,
                      iterates, kC1Budget)};
}

Verdict criterion2(Context& ctx) {
  const auto& runs = ctx.runs();
  std::size_t hit = 0;
  std::string misses;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.reached) {
      ++hit;
    } else {
      misses += fmt::format(" {}:{:.2e}", i == 0 ? std::string("benchmark") : fmt::format("seed{}", i),
                            r.final_error);
    }
  }
  const bool pass = hit == runs.size() && ctx.convergence_seconds < kC2Budget;
  std::string detail = fmt::format("{}/{} runs within {:.0e} of the reference optimum by {} iterations; run time "
                                   "{:.1f} s (budget {} s)",
                                   hit, runs.size(), kC2ErrorTol, kC2MaxIters, ctx.convergence_seconds, kC2Budget);
  if (!misses.empty()) detail += "; final sup-error of misses:" + misses;
  return {pass, detail};
}

Verdict criterion3(Context& ctx) {
  const auto& runs = ctx.runs();
  double worst = std::numeric_limits<double>::infinity();
  std::size_t iterates = 0;
  for (const auto& r : runs) {
    worst = std::min(worst, r.worst_descent);
    iterates += r.iterates;
  }
  return {worst >= -kDescentTol, fmt::format("min grad W . (v - x) = {:.3e} over {} iterates", worst, iterates)};
}

Verdict criterion4(Context&) {
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& s : convergence_scenarios()) {
    const Flow x_star = reference_optimum(s, kOracleTol).x_star;
    DualSolverOptions opts;
    opts.tol = kFixedPointInnerTol;
    opts.bound_P = dual_bound_P(s);
    const auto sol = solve_pf_dual(s.network, prices(s, x_star), opts);
    if (!sol.converged) throw NumericalError("dual solver did not converge at the reference optimum");
    worst = std::max(worst, max_abs_diff(sol.x, x_star));
    ++count;
  }
  return {worst <= kFixedPointTol,
          fmt::format("max |T(x*) - x*|_inf = {:.3e} over {} scenarios (tol {:.0e})", worst, count, kFixedPointTol)};
}

struct CrossValidation {
  double agree = 0.0, kkt_string = 0.0, kkt_dual = 0.0, box_violation = 0.0;
  std::size_t count = 0;
  double seconds = 0.0;
};

CrossValidation cross_validate() {
  const auto t0 = Clock::now();
  CrossValidation cv;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (std::uint64_t seed = 1; seed <= kC5Count; ++seed) {
    const std::size_t n = 1 + (seed - 1) % kC5MaxUsers;
    const Scenario s = random_aggregating_scenario(seed, n);
    Flow x = lexicographic_max_point(s.network);
    for (double& v : x) v *= frac(rng);
    const auto p = prices(s, x);

    const auto shape = detect_flow_aggregating(s.network);
    if (!shape) throw NumericalError("aggregating scenario not recognised");
    AscendingInstance inst{shape->alphas, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) inst.p[i] = p[shape->user_order[i]];
    const auto str = string_solve_with_duals(inst);
    Flow xs(n);
    std::vector<double> mus(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[shape->user_order[i]] = str.x[i];
      mus[shape->link_order[i]] = str.mu[i];
    }

    const double P = dual_bound_P(s);
    DualSolverOptions opts;
    opts.bound_P = P;
    const auto dual = solve_pf_dual(s.network, p, opts);
    if (!dual.converged) throw NumericalError(fmt::format("dual solver did not converge, seed {}", seed));

    cv.agree = std::max(cv.agree, max_abs_diff(xs, dual.x));
    cv.kkt_string = std::max(cv.kkt_string, pf_kkt_residual(s.network, p, xs, mus));
    cv.kkt_dual = std::max(cv.kkt_dual, pf_kkt_residual(s.network, p, dual.x, dual.mu));
    for (std::size_t l = 0; l < s.links(); ++l) {
      const double upper = 2.0 * P / s.network.capacity(l);
      cv.box_violation = std::max({cv.box_violation, -dual.mu[l], dual.mu[l] - upper});
    }
    ++cv.count;
  }
  cv.seconds = seconds_since(t0);
  return cv;
}

Verdict criterion5(Context&) {
  const auto cv = cross_validate();
  return {cv.agree <= kC5AgreeTol && cv.kkt_string <= kC5KktTol && cv.kkt_dual <= kC5KktTol &&
              cv.seconds < kC5Budget,
          fmt::format("{} instances: max |x_string - x_dual|_inf = {:.3e}, KKT string {:.3e}, dual {:.3e}; "
                      "{:.2f} s (budget {} s)",
                      cv.count, cv.agree, cv.kkt_string, cv.kkt_dual, cv.seconds, kC5Budget)};
}

Verdict criterion6(Context&) {
  const auto cv = cross_validate();
  return {cv.box_violation <= 0.0,
          fmt::format("{} dual optima, largest excursion outside [0, 2P/c] = {:.3e}", cv.count, cv.box_violation)};
}

Verdict criterion7(Context&) {
  const auto t0 = Clock::now();
  const Scenario s(RoutingNetwork({1.0}, {{0}}), {Utility::log()});
  // x psi(x) = 1 with psi(x) = (x - 0.9)/0.01: x^2 - 0.9 x - 0.01 = 0.
  const double b = 1.0 - kC7Epsilon, c0 = kC7Epsilon * kC7Epsilon;
  const double root = 0.5 * (b + std::sqrt(b * b + 4.0 * c0));
  const double x_star = reference_optimum(s, kOracleTol).x_star[0];
  KMTConfig cfg;
  cfg.epsilon = kC7Epsilon;
  cfg.horizon = kC7Horizon;
  cfg.sample_every = 1000000;
  const auto tr = integrate_kmt(s, std::vector<double>{0.5}, cfg);
  const double end = tr.samples.back().x[0];
  const double secs = seconds_since(t0);
  const bool pass = std::abs(end - root) <= kC7Tol && std::abs(end - x_star) > kC7Tol && secs < kC7Budget;
  return {pass, fmt::format("x({}) = {:.6f}, root {:.6f}, optimum {:.6f}; {:.3f} s", kC7Horizon, end, root, x_star,
                            secs)};
}

Verdict criterion8(Context& ctx) {
  const auto& cr = ctx.dynamics();
  bool pass = ctx.crossing_seconds < kC8Budget;
  std::string detail;
  for (double kappa : kKappas) {
    std::optional<double> di, kmt;
    double kmt_end = 0.0;
    for (const auto& c : cr) {
      if (c.kappa != kappa) continue;
      if (c.family == "scaled-DI") di = c.time;
      if (c.family == "KMT") {
        kmt = c.time;
        kmt_end = c.end_error;
      }
    }
    // Not reaching by the horizon counts as later than any crossing inside it.
    const bool earlier = di && (!kmt || *di < *kmt);
    pass = pass && earlier;
    detail += fmt::format("kappa {}: DI {} vs KMT {} (KMT error at stop {:.4f}); ", kappa, fmt_time(di),
                          fmt_time(kmt), kmt_end);
  }
  detail += fmt::format("{:.1f} s (budget {} s)", ctx.crossing_seconds, kC8Budget);
  return {pass, detail};
}

Verdict criterion9(Context& ctx) {
  const auto& cr = ctx.dynamics();
  bool pass = true;
  std::string detail;
  for (const std::string family : {"scaled-DI", "KMT"}) {
    std::optional<double> slow, fast;
    for (const auto& c : cr) {
      if (c.family != family) continue;
      if (c.kappa == kKappas.front()) slow = c.time;
      if (c.kappa == kKappas.back()) fast = c.time;
    }
    if (slow && fast && *fast > 0.0) {
      const double ratio = *slow / *fast;
      pass = pass && ratio >= kC9RatioLow && ratio <= kC9RatioHigh;
      detail += fmt::format("{} ratio {:.4f}; ", family, ratio);
    } else {
      pass = false;
      detail += fmt::format("{} ratio undefined (kappa {}: {}, kappa {}: {}); ", family, kKappas.front(),
                            fmt_time(slow), kKappas.back(), fmt_time(fast));
    }
  }
  detail += fmt::format("accepted range [{}, {}]", kC9RatioLow, kC9RatioHigh);
  return {pass, detail};
}

Verdict criterion10(Context&) {
  const auto t0 = Clock::now();
  const double c = kC10Unit;
  const auto demo = appendix_discontinuity_demo(c);
  const double ey = max_abs_diff(demo.limit_y, std::vector<double>{c, 0.0, 2 * c});
  const double ez = max_abs_diff(demo.limit_z, std::vector<double>{c, c, c});
  const double secs = seconds_since(t0);
  const bool pass = demo.deltas.back() <= 1e-6 && ey <= kC10Tol && ez <= kC10Tol &&
                    demo.distance >= c - kC10Tol && secs < kC10Budget;
  return {pass, fmt::format("limit errors {:.2e} and {:.2e}, distance {:.6f}; {:.3f} s", ey, ez, demo.distance,
                            secs)};
}

/// Best welfare over the step grid on the first n-1 users, the remaining
/// user taking all the room its route leaves. Utilities are increasing, so
/// for fixed other rates the last user's best choice is the full room.
double grid_best_welfare(const Scenario& s, double step) {
  const std::size_t n = s.users();
  // Put the user with the largest bottleneck last: it is not gridded.
  std::vector<std::size_t> order(n);
  for (std::size_t e = 0; e < n; ++e) order[e] = e;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.network.bottleneck(a) < s.network.bottleneck(b); });
  const std::size_t last = order.back();

  std::vector<std::vector<double>> table;  // w_e on the grid, gridded users only
  std::vector<std::size_t> gridded(order.begin(), order.end() - 1);
  for (std::size_t e : gridded) {
    const auto count = static_cast<std::size_t>(std::floor(s.network.bottleneck(e) / step + 1e-9));
    std::vector<double> w(count + 1);
    for (std::size_t i = 0; i <= count; ++i) w[i] = s.utilities[e].value(static_cast<double>(i) * step);
    table.push_back(std::move(w));
  }
  // The last user's room is min over its links of c(l) minus the gridded load.
  const auto last_links = s.network.route(last);
  auto on = [&](std::size_t l, std::size_t e) {
    const auto users = s.network.users_on(l);
    return std::find(users.begin(), users.end(), e) != users.end();
  };
  auto room_for = [&](const std::vector<double>& x) {
    double room = std::numeric_limits<double>::infinity();
    for (std::size_t l : last_links) {
      double used = 0.0;
      for (std::size_t g = 0; g < gridded.size(); ++g) {
        if (on(l, gridded[g])) used += x[g];
      }
      room = std::min(room, s.network.capacity(l) - used);
    }
    return room;
  };
  auto feasible = [&](const std::vector<double>& x) {
    for (std::size_t l = 0; l < s.links(); ++l) {
      double used = 0.0;
      for (std::size_t g = 0; g < gridded.size(); ++g) {
        if (on(l, gridded[g])) used += x[g];
      }
      if (used > s.network.capacity(l)) return false;
    }
    return true;
  };

  double best = -std::numeric_limits<double>::infinity();
  const Utility& u_last = s.utilities[last];
  std::vector<double> x(gridded.size());
  std::function<void(std::size_t, double)> sweep = [&](std::size_t d, double partial) {
    if (d == gridded.size()) {
      if (!feasible(x)) return;
      const double room = room_for(x);
      if (room < 0.0) return;
      best = std::max(best, partial + u_last.value(room));
      return;
    }
    for (std::size_t i = 0; i < table[d].size(); ++i) {
      x[d] = static_cast<double>(i) * step;
      sweep(d + 1, partial + table[d][i]);
    }
  };
  sweep(0, 0.0);
  return best;
}

Verdict criterion11(Context&) {
  std::vector<std::pair<std::string, Scenario>> small;
  small.emplace_back("single link", Scenario(RoutingNetwork({1.0}, {{0}}), {Utility::log()}));
  small.emplace_back("nested three-user instance", appendix_scenario(kC10Unit));
  for (std::uint64_t seed = 1; seed <= kC1RandomCount; ++seed) {
    Scenario s = desk_scenario(seed);
    if (s.users() <= 3) small.emplace_back(fmt::format("seed {}", seed), std::move(s));
  }
  double worst = -std::numeric_limits<double>::infinity();
  std::string names;
  for (const auto& [name, s] : small) {
    const double w_star = welfare(s.utilities, reference_optimum(s, kOracleTol).x_star);
    worst = std::max(worst, grid_best_welfare(s, kC11Step) - w_star);
    names += (names.empty() ? "" : ", ") + name;
  }
  return {worst <= kC11Tol, fmt::format("{} instances ({}): max grid welfare - W(x*) = {:.3e}", small.size(), names,
                                        worst)};
}

struct Criterion {
  int id;
  const char* title;
  Verdict (*check)(Context&);
};

const std::vector<Criterion> kCriteria{
    {1, "feasibility at all times", criterion1},
    {2, "global convergence", criterion2},
    {3, "ascent inner product", criterion3},
    {4, "optimum is a fixed point of T", criterion4},
    {5, "string and dual solvers agree", criterion5},
    {6, "dual prices stay in the box", criterion6},
    {7, "penalty model settles at the relaxed point", criterion7},
    {8, "scaled iteration crosses the threshold first", criterion8},
    {9, "time to threshold scales as 1/kappa", criterion9},
    {10, "discontinuity of T at the boundary", criterion10},
    {11, "reference optimum beats a brute-force grid", criterion11},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.check(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    fmt::print("[{}] C{} {}: {} ({:.2f} s)\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail,
               seconds_since(t0));
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
