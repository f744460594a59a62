#pragma once

// Solvers for the proportional-fair network subproblem
//
//   maximize  sum_e p(e) log x(e)   subject to  x >= 0,  Ax <= c,
//
// whose solution is x(e) = p(e) / sum_{l in route(e)} mu(l) for optimal
// link prices mu. Two routes: a general solver on the box-constrained dual,
// and the linear-time concave-cover ("string") solver for nested
// cumulative constraints x(1)+...+x(i) <= alpha(1)+...+alpha(i).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "num/model.hpp"

namespace num {

/// Upper bound P on max_{x in A} sum_e x(e) w_e'(x(e)), computed as
/// sum_e sup_{0 <= x <= bottleneck(e)} price(u_e, x). Optimal duals of every
/// network subproblem reachable from a feasible x lie in [0, 2P/c(l)].
double dual_bound_P(const Scenario& scenario);

struct DualSolverOptions {
  double tol = 1e-8;
  std::size_t max_iters = 100000;
  /// Bound P for the dual box [0, 2P/c(l)]. Defaults to sum_e p(e), which is
  /// valid for any fixed p; a larger value only widens the box.
  std::optional<double> bound_P;
};

struct PFSolution {
  Flow x;
  std::vector<double> mu;
  double kkt_residual = 0.0;
  /// Projected-gradient residual of the dual at mu.
  double dual_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Maximizes the concave dual
///
///   R(mu) = sum_e p(e) log(sum_{l in e} mu(l)) - sum_l mu(l) c(l)
///
/// over the box 0 <= mu(l) <= 2P/c(l), then recovers x(e) = p(e)/sum mu.
/// Users with p(e) = 0 are dropped from the objective and get x(e) = 0.
/// If recovery overshoots a capacity, x is scaled by min c(l)/load(l).
///
/// Throws InputError if p has the wrong size, a negative entry or is all
/// zero. Non-convergence is reported through `converged`, not thrown.
PFSolution solve_pf_dual(const RoutingNetwork& net, std::span<const double> p,
                         const DualSolverOptions& opts = {});

/// Max of the stationarity error |p(e)/x(e) - sum mu| (over p(e) > 0;
/// infinite if such an x(e) is zero), complementary slackness
/// |mu(l)(load(l) - c(l))|, and primal infeasibility.
double pf_kkt_residual(const RoutingNetwork& net, std::span<const double> p,
                       std::span<const double> x, std::span<const double> mu);

struct CoverPoint {
  double b;  ///< cumulative capacity
  double p;  ///< cumulative price
};

/// Upper concave envelope of a chain of points ordered by nondecreasing b.
/// `breakpoints` are indices into the input, first 0 and last n-1;
/// `slopes[i]` is the slope between breakpoints i and i+1 and strictly
/// decreases. Points sharing a b value never become interior breakpoints;
/// a chain that rises vertically out of its first point is rejected.
struct ConcaveCover {
  std::vector<std::size_t> breakpoints;
  std::vector<double> slopes;
};

ConcaveCover concave_cover(std::span<const CoverPoint> points);

/// Network subproblem under linear ascending constraints.
struct AscendingInstance {
  std::vector<double> alphas;  ///< per-stage capacity increments, >= 0
  std::vector<double> p;       ///< prices, >= 0
};

/// String algorithm: users in a cover segment of slope s > 0 get p(e)/s,
/// users in a zero-slope segment get 0. All-zero alphas yield x = 0.
Flow string_solve(const AscendingInstance& instance);

/// string_solve together with the optimal multiplier of each cumulative
/// constraint: mu(i) = s(i) - s(i+1), where s(i) is the slope of the cover
/// segment holding stage i and s(n) = 0.
struct AscendingSolution {
  Flow x;
  std::vector<double> mu;
};

AscendingSolution string_solve_with_duals(const AscendingInstance& instance);

}  // namespace num
