#include "num/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "num/errors.hpp"
#include "num/oracle.hpp"

namespace num {

double step_size(std::size_t k) { return 1.0 / (static_cast<double>(k) + 1.0); }

double AlgorithmConfig::effective_inner_tol() const {
  return inner_tol.value_or(std::min(1e-8, stop_tol / 10.0));
}

void AlgorithmConfig::validate() const {
  if (max_iters == 0) throw InputError("max_iters must be positive");
  if (!(stop_tol > 0.0)) throw InputError("stop_tol must be positive");
  if (!(effective_inner_tol() > 0.0)) throw InputError("inner_tol must be positive");
  if (record_every == 0) throw InputError("record_every must be positive");
  if (!(tol_feas >= 0.0)) throw InputError("tol_feas must be nonnegative");
}

std::optional<AscendingShape> detect_flow_aggregating(const RoutingNetwork& net) {
  const std::size_t n = net.users();
  if (net.links() != n) return std::nullopt;

  // Outermost user has all n links, the innermost exactly one.
  std::vector<std::size_t> by_size(n + 1, n);
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t len = net.route(e).size();
    if (by_size[len] != n) return std::nullopt;
    by_size[len] = e;
  }
  AscendingShape shape;
  for (std::size_t len = n; len >= 1; --len) shape.user_order.push_back(by_size[len]);

  // Route i+1 must be route i minus one link; that link closes stage i.
  for (std::size_t i = 0; i < n; ++i) {
    const auto outer = net.route(shape.user_order[i]);
    std::vector<char> in_inner(n, 0);
    if (i + 1 < n) {
      for (std::size_t l : net.route(shape.user_order[i + 1])) in_inner[l] = 1;
    }
    std::size_t dropped = n;
    std::size_t kept = 0;
    for (std::size_t l : outer) {
      if (in_inner[l]) {
        ++kept;
      } else if (dropped == n) {
        dropped = l;
      } else {
        return std::nullopt;
      }
    }
    const std::size_t inner_len = i + 1 < n ? net.route(shape.user_order[i + 1]).size() : 0;
    if (dropped == n || kept != inner_len) return std::nullopt;
    shape.link_order.push_back(dropped);
  }

  std::vector<double> B(n);
  for (std::size_t i = 0; i < n; ++i) B[i] = net.capacity(shape.link_order[i]);
  for (std::size_t i = n - 1; i-- > 0;) B[i] = std::min(B[i], B[i + 1]);
  shape.alphas.resize(n);
  for (std::size_t i = 0; i < n; ++i) shape.alphas[i] = i == 0 ? B[0] : B[i] - B[i - 1];
  return shape;
}

PFMap::PFMap(const Scenario& scenario, double inner_tol)
    : scenario_(&scenario),
      inner_tol_(inner_tol),
      bound_P_(dual_bound_P(scenario)),
      shape_(detect_flow_aggregating(scenario.network)) {
  if (!(inner_tol > 0.0)) throw InputError("inner_tol must be positive");
}

Flow PFMap::operator()(std::span<const double> p) const {
  const std::size_t n = scenario_->users();
  if (p.size() != n) throw InputError("PFMap: price vector has wrong length");
  if (shape_) {
    AscendingInstance inst{shape_->alphas, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) inst.p[i] = p[shape_->user_order[i]];
    const Flow ordered = string_solve(inst);
    Flow v(n);
    for (std::size_t i = 0; i < n; ++i) v[shape_->user_order[i]] = ordered[i];
    return v;
  }
  DualSolverOptions opts;
  opts.tol = inner_tol_;
  opts.bound_P = bound_P_;
  auto sol = solve_pf_dual(scenario_->network, p, opts);
  if (!sol.converged) {
    std::ostringstream os;
    os << "network subproblem did not converge: KKT residual " << sol.kkt_residual
       << ", tolerance " << inner_tol_ << ", " << sol.iterations << " iterations";
    throw NumericalError(os.str());
  }
  return std::move(sol.x);
}

Flow PFMap::at(std::span<const double> x) const { return (*this)(prices(*scenario_, x)); }

namespace {

void require_interior(const Scenario& s, std::span<const double> x, double tol_feas) {
  if (x.size() != s.users()) throw InputError("iterate has wrong length");
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (!(x[e] > 0.0) || !std::isfinite(x[e])) {
      throw InputError("rate of user " + std::to_string(e + 1) + " must be positive and finite");
    }
  }
  const auto slack = feasibility_slack(s.network, x, tol_feas);
  if (!slack.feasible) {
    std::ostringstream os;
    os << "iterate is infeasible (min slack " << slack.min_slack << ")";
    throw InputError(os.str());
  }
}

}  // namespace

StepResult algorithm1_step(std::span<const double> x, const PFMap& T, const Scenario& s,
                           std::size_t k, double tol_feas) {
  require_interior(s, x, tol_feas);
  StepResult r;
  r.v = T.at(x);
  const double a = step_size(k + 1);
  r.x_next.resize(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) r.x_next[e] = x[e] + a * (r.v[e] - x[e]);
  return r;
}

StepResult algorithm1_step(std::span<const double> x, const Scenario& s, std::size_t k,
                           double inner_tol) {
  const PFMap T(s, inner_tol);
  return algorithm1_step(x, T, s, k);
}

std::string to_string(Trace::Status s) {
  switch (s) {
    case Trace::Status::kConverged:
      return "converged";
    case Trace::Status::kMaxIters:
      return "max_iters";
    case Trace::Status::kStopped:
      return "stopped";
    case Trace::Status::kSolverFailure:
      return "solver_failure";
  }
  return "unknown";
}

Trace run_algorithm1(const Scenario& s, std::span<const double> x0, const AlgorithmConfig& cfg,
                     const IterateObserver& observer) {
  cfg.validate();
  require_interior(s, x0, cfg.tol_feas);
  const PFMap T(s, cfg.effective_inner_tol());

  Trace trace;
  Flow x(x0.begin(), x0.end());
  for (std::size_t k = 0;; ++k) {
    trace.iterations = k;
    trace.final_x = x;
    if (k == cfg.max_iters) {
      trace.status = Trace::Status::kMaxIters;
      break;
    }
    StepResult step;
    try {
      step = algorithm1_step(x, T, s, k, cfg.tol_feas);
    } catch (const NumericalError& err) {
      trace.status = Trace::Status::kSolverFailure;
      trace.message = "iteration " + std::to_string(k) + ": " + err.what();
      break;
    }
    const bool done = max_abs_diff(step.v, x) <= cfg.stop_tol;
    const bool last = done || k + 1 == cfg.max_iters;
    if (k % cfg.record_every == 0 || last) {
      IterateRecord rec;
      rec.k = k;
      rec.a = step_size(k + 1);
      rec.welfare = welfare(s.utilities, x);
      rec.descent = descent_inner_product(s, x, step.v);
      rec.min_slack = feasibility_slack(s.network, x, cfg.tol_feas).min_slack;
      rec.x = x;
      rec.v = std::move(step.v);
      const bool go_on = !observer || observer(rec);
      if (cfg.keep_records) trace.records.push_back(std::move(rec));
      if (!go_on) {
        trace.status = Trace::Status::kStopped;
        break;
      }
    }
    if (done) {
      trace.status = Trace::Status::kConverged;
      break;
    }
    x = std::move(step.x_next);
  }
  return trace;
}

}  // namespace num
