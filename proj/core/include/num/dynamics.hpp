#pragma once

// Continuous-time counterparts of the iteration:
//
//   KMT        dx(e)/dt = kappa (p(e) - x(e) sum_{l in e} psi_l(load(l)))
//   scaled DI  dx/dt    = kappa (T(x) - x)
//
// with psi_l(y) = (y - c(l) + eps)^+ / eps^2. Both integrators are fixed
// step; h and horizon are in time units and scale as 1/kappa by default.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "num/model.hpp"

namespace num {

double penalty_psi(double load, double capacity, double epsilon);

std::vector<double> kmt_vector_field(std::span<const double> x, const Scenario& scenario,
                                     double kappa, double epsilon);

/// Upper estimate of the stiffness of the KMT field per unit kappa:
/// max_l (c(l) + eps) L(l) / eps^2, L(l) the longest route through l.
double kmt_stiffness_bound(const Scenario& scenario, double epsilon);

/// min(0.01, 2 / kmt_stiffness_bound) / kappa. The 0.01 cap is the nominal
/// step; the stiffness term keeps RK4 inside its stability region.
double kmt_default_step(const Scenario& scenario, double kappa, double epsilon);

struct StateSample {
  double t = 0.0;
  Flow x;
  double error2 = 0.0;  ///< ||x - x_star||_2, NaN without a reference point
  double welfare = 0.0;
  double min_slack = 0.0;
};

struct StateTrace {
  std::vector<StateSample> samples;
  /// The run ended at the horizon (false if the observer stopped it).
  bool reached_horizon = false;
  std::size_t steps = 0;
  double h = 0.0;
};

/// Called with the initial state and after every integrator step, stored or
/// not; returning false ends the run.
using StateObserver = std::function<bool(const StateSample&)>;

struct KMTConfig {
  double kappa = 1.0;
  double epsilon = 0.1;
  std::optional<double> h;  ///< kmt_default_step when empty
  double horizon = 50.0;
  std::size_t sample_every = 1;
};

/// Fixed-step RK4. Stage states and the new state are clipped at 0.
/// Throws NumericalError if any rate exceeds 1e6 or turns non-finite.
StateTrace integrate_kmt(const Scenario& scenario, std::span<const double> x0,
                         const KMTConfig& config, std::span<const double> x_star = {},
                         const StateObserver& observer = {});

struct DIConfig {
  double kappa = 1.0;
  std::optional<double> h;  ///< 0.1 / kappa when empty
  double horizon = 50.0;
  double inner_tol = 1e-8;
  std::size_t sample_every = 1;
};

/// Explicit Euler x <- x + h kappa (T(x) - x). Requires h kappa <= 1, so
/// every step is a convex combination and the state stays feasible.
/// x0 must be strictly positive and feasible.
StateTrace integrate_scaled_di(const Scenario& scenario, std::span<const double> x0,
                               const DIConfig& config, std::span<const double> x_star = {},
                               const StateObserver& observer = {});

/// First sample time with error2 <= threshold.
std::optional<double> time_to_threshold(const StateTrace& trace, double threshold);

}  // namespace num
