#pragma once

// The feasible-at-all-times iteration
//
//   p(e)  = x(e) w_e'(x(e))
//   v     = proportionally fair allocation for p
//   x    <- x + a (v - x),   a = 1/(k+2) at iteration k
//
// Each new iterate is a convex combination of two feasible points, so it
// never leaves {x >= 0, Ax <= c}.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "num/model.hpp"
#include "num/pf_solver.hpp"

namespace num {

/// a_k = 1/(k+1).
double step_size(std::size_t k);

struct AlgorithmConfig {
  std::size_t max_iters = 100000;
  /// Stop once ||v - x||_inf <= stop_tol.
  double stop_tol = 1e-7;
  /// Tolerance handed to the dual solver; defaults to min(1e-8, stop_tol/10).
  std::optional<double> inner_tol;
  std::size_t record_every = 1;
  bool keep_records = true;
  double tol_feas = kDefaultTolFeas;

  double effective_inner_tol() const;
  void validate() const;
};

struct IterateRecord {
  std::size_t k = 0;
  Flow x;             ///< x^(k)
  Flow v;             ///< T(x^(k))
  double a = 0.0;     ///< step applied to reach x^(k+1), a_{k+1}
  double welfare = 0.0;
  double descent = 0.0;  ///< grad W(x^(k)) . (v - x^(k))
  double min_slack = 0.0;
};

/// Users and links of a flow-aggregating network, outermost user first.
/// Link link_order[i] carries exactly users user_order[0..i], so its
/// constraint reads x(user_order[0]) + ... + x(user_order[i]) <= B(i).
/// `alphas` are the increments of B after tightening each B(i) to
/// min_{j >= i} B(j), which leaves the feasible set unchanged.
struct AscendingShape {
  std::vector<std::size_t> user_order;
  std::vector<std::size_t> link_order;
  std::vector<double> alphas;
};

std::optional<AscendingShape> detect_flow_aggregating(const RoutingNetwork& net);

/// Evaluates T for a fixed scenario: the string algorithm on flow-aggregating
/// networks, the dual solver otherwise. Throws NumericalError when the dual
/// solver does not reach `inner_tol`.
class PFMap {
 public:
  PFMap(const Scenario& scenario, double inner_tol);

  Flow operator()(std::span<const double> p) const;
  /// T(x) = solution for prices p = price(x).
  Flow at(std::span<const double> x) const;

  bool uses_string_solver() const noexcept { return shape_.has_value(); }

 private:
  const Scenario* scenario_;
  double inner_tol_;
  double bound_P_;
  std::optional<AscendingShape> shape_;
};

struct StepResult {
  Flow x_next;
  Flow v;
};

/// One iteration from x^(k). Requires x > 0 and feasible (InputError).
StepResult algorithm1_step(std::span<const double> x, const Scenario& scenario, std::size_t k,
                           double inner_tol);
StepResult algorithm1_step(std::span<const double> x, const PFMap& T, const Scenario& scenario,
                           std::size_t k, double tol_feas = kDefaultTolFeas);

struct Trace {
  enum class Status { kConverged, kMaxIters, kStopped, kSolverFailure };

  std::vector<IterateRecord> records;
  Status status = Status::kMaxIters;
  std::string message;
  std::size_t iterations = 0;  ///< updates applied; final_x is x^(iterations)
  Flow final_x;
};

std::string to_string(Trace::Status s);

/// Called with every recorded iterate; returning false ends the run with
/// status kStopped.
using IterateObserver = std::function<bool(const IterateRecord&)>;

/// Runs until ||v - x||_inf <= stop_tol or max_iters iterations. The first
/// and the last evaluated iterate are always recorded. x0 must be strictly
/// positive and feasible (InputError). A failing inner solve ends the run
/// with status kSolverFailure; the trace up to that point is returned.
Trace run_algorithm1(const Scenario& scenario, std::span<const double> x0,
                     const AlgorithmConfig& config = {}, const IterateObserver& observer = {});

/// Max-min fair allocation by progressive filling.
Flow lexicographic_max_point(const RoutingNetwork& net);

}  // namespace num
