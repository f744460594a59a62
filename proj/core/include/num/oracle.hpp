#pragma once

// Independent checks on the system problem
//
//   maximize  W(x) = sum_e w_e(x(e))   subject to  x >= 0,  Ax <= c.
//
// Everything here depends on the model alone. In particular the reference
// optimum never goes through the network-subproblem solvers or the iterate
// loop, so it can be used to judge them.

#include <cstddef>
#include <span>
#include <vector>

#include "num/model.hpp"

namespace num {

struct ReferenceOptimum {
  Flow x_star;
  std::vector<double> mu_star;
  /// system_kkt_residual(x_star, mu_star).overall
  double certified_residual = 0.0;
  std::size_t newton_steps = 0;
};

/// Solves the system problem to a KKT residual of at most `tol`.
///
/// A primal log-barrier path followed by Newton on the KKT equations of the
/// constraints the barrier identified as active. Throws NumericalError if the
/// certified residual stays above tol.
ReferenceOptimum reference_optimum(const Scenario& scenario, double tol = 1e-10);

struct KKTReport {
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double overall = 0.0;
};

/// KKT residuals of the system problem at (x, mu). The multipliers of x >= 0
/// are derived as eta(e) = max(0, sum_{l in e} mu(l) - w_e'(x(e))), so
/// stationarity reduces to max(0, w_e'(x(e)) - sum mu) and eta(e) x(e) is
/// counted under complementary slackness.
KKTReport system_kkt_residual(const Scenario& scenario, std::span<const double> x,
                              std::span<const double> mu);

/// V(x) = W(x_star) - W(x); +infinity when W(x) is -infinity.
double lyapunov_V(const Scenario& scenario, std::span<const double> x,
                  std::span<const double> x_star);

/// grad W(x) . (v - x). Throws InputError unless x > 0.
double descent_inner_product(const Scenario& scenario, std::span<const double> x,
                             std::span<const double> v);

}  // namespace num
