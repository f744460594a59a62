#include "num/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "num/errors.hpp"
#include "num/iterate.hpp"

namespace num {

double penalty_psi(double load, double capacity, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("penalty epsilon must be positive");
  return std::max(0.0, load - capacity + epsilon) / (epsilon * epsilon);
}

namespace {

void kmt_field_into(std::span<const double> x, const Scenario& s, double kappa, double epsilon,
                    std::vector<double>& load, std::vector<double>& out) {
  const auto& net = s.network;
  std::fill(load.begin(), load.end(), 0.0);
  for (std::size_t e = 0; e < x.size(); ++e) {
    for (std::size_t l : net.route(e)) load[l] += x[e];
  }
  for (std::size_t l = 0; l < load.size(); ++l) load[l] = penalty_psi(load[l], net.capacity(l), epsilon);
  for (std::size_t e = 0; e < x.size(); ++e) {
    double route_mu = 0.0;
    for (std::size_t l : net.route(e)) route_mu += load[l];
    out[e] = kappa * (s.utilities[e].price(x[e]) - x[e] * route_mu);
  }
}

void check_x0(const Scenario& s, std::span<const double> x0, std::span<const double> x_star) {
  if (x0.size() != s.users()) throw InputError("initial state has wrong length");
  if (!x_star.empty() && x_star.size() != s.users()) {
    throw InputError("reference point has wrong length");
  }
}

// Runs `advance` for ceil(horizon / h) steps, the last one shortened to land
// on the horizon.
template <class Advance>
StateTrace drive(const Scenario& s, std::span<const double> x0, double h, double horizon,
                 std::size_t sample_every, std::span<const double> x_star,
                 const StateObserver& observer, Advance&& advance) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
  if (!(h > 0.0) || h > horizon) throw InputError("step h must lie in (0, horizon]");
  if (sample_every == 0) throw InputError("sample_every must be positive");

  auto sample = [&](double t, const Flow& x) {
    StateSample smp;
    smp.t = t;
    smp.x = x;
    smp.error2 = x_star.empty() ? std::numeric_limits<double>::quiet_NaN() : l2_distance(x, x_star);
    smp.welfare = welfare(s.utilities, x);
    smp.min_slack = feasibility_slack(s.network, x).min_slack;
    return smp;
  };

  StateTrace trace;
  trace.h = h;
  Flow x(x0.begin(), x0.end());
  auto first = sample(0.0, x);
  const bool go_on = !observer || observer(first);
  trace.samples.push_back(std::move(first));
  if (!go_on) return trace;

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * h;
    const double t = k == steps ? horizon : static_cast<double>(k) * h;
    advance(x, t - t_prev, t);
    trace.steps = k;
    auto smp = sample(t, x);
    const bool cont = !observer || observer(smp);
    if (k % sample_every == 0 || k == steps || !cont) trace.samples.push_back(std::move(smp));
    if (!cont) return trace;
  }
  trace.reached_horizon = true;
  return trace;
}

}  // namespace

std::vector<double> kmt_vector_field(std::span<const double> x, const Scenario& s, double kappa,
                                     double epsilon) {
  if (x.size() != s.users()) throw InputError("kmt_vector_field: state has wrong length");
  for (double xe : x) {
    if (!(xe >= 0.0)) throw InputError("kmt_vector_field: rates must be nonnegative");
  }
  std::vector<double> load(s.links()), out(s.users());
  kmt_field_into(x, s, kappa, epsilon, load, out);
  return out;
}

double kmt_stiffness_bound(const Scenario& s, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("penalty epsilon must be positive");
  const auto& net = s.network;
  double lambda = 0.0;
  for (std::size_t l = 0; l < s.links(); ++l) {
    std::size_t longest = 0;
    for (std::size_t e : net.users_on(l)) longest = std::max(longest, net.route(e).size());
    lambda = std::max(lambda, (net.capacity(l) + epsilon) * static_cast<double>(longest) /
                                  (epsilon * epsilon));
  }
  return lambda;
}

double kmt_default_step(const Scenario& s, double kappa, double epsilon) {
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  return std::min(0.01, 2.0 / kmt_stiffness_bound(s, epsilon)) / kappa;
}

StateTrace integrate_kmt(const Scenario& s, std::span<const double> x0, const KMTConfig& cfg,
                         std::span<const double> x_star, const StateObserver& observer) {
  check_x0(s, x0, x_star);
  for (double v : x0) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("initial rates must be finite and nonnegative");
  }
  if (!(cfg.kappa > 0.0)) throw InputError("kappa must be positive");
  if (!(cfg.epsilon > 0.0)) throw InputError("epsilon must be positive");
  const double h = cfg.h.value_or(kmt_default_step(s, cfg.kappa, cfg.epsilon));

  const std::size_t n = s.users();
  std::vector<double> load(s.links()), k1(n), k2(n), k3(n), k4(n), stage(n);
  auto clipped = [&](const Flow& x, const std::vector<double>& k, double f) {
    for (std::size_t e = 0; e < n; ++e) stage[e] = std::max(0.0, x[e] + f * k[e]);
    return std::span<const double>(stage);
  };
  auto advance = [&](Flow& x, double dt, double t) {
    kmt_field_into(x, s, cfg.kappa, cfg.epsilon, load, k1);
    kmt_field_into(clipped(x, k1, 0.5 * dt), s, cfg.kappa, cfg.epsilon, load, k2);
    kmt_field_into(clipped(x, k2, 0.5 * dt), s, cfg.kappa, cfg.epsilon, load, k3);
    kmt_field_into(clipped(x, k3, dt), s, cfg.kappa, cfg.epsilon, load, k4);
    for (std::size_t e = 0; e < n; ++e) {
      x[e] = std::max(0.0, x[e] + dt / 6.0 * (k1[e] + 2.0 * k2[e] + 2.0 * k3[e] + k4[e]));
      if (!(x[e] <= 1e6)) {
        std::ostringstream os;
        os << "KMT integration diverged at t = " << t << " (user " << e + 1 << ", rate " << x[e]
           << "); try a smaller step";
        throw NumericalError(os.str());
      }
    }
  };
  return drive(s, x0, h, cfg.horizon, cfg.sample_every, x_star, observer, advance);
}

StateTrace integrate_scaled_di(const Scenario& s, std::span<const double> x0, const DIConfig& cfg,
                               std::span<const double> x_star, const StateObserver& observer) {
  check_x0(s, x0, x_star);
  if (!(cfg.kappa > 0.0)) throw InputError("kappa must be positive");
  const double h = cfg.h.value_or(0.1 / cfg.kappa);
  if (h * cfg.kappa > 1.0 + 1e-12) throw InputError("scaled DI needs h * kappa <= 1");
  for (double v : x0) {
    if (!(v > 0.0)) throw InputError("initial rates must be strictly positive");
  }
  if (!feasibility_slack(s.network, x0).feasible) throw InputError("initial state is infeasible");

  const PFMap T(s, cfg.inner_tol);
  auto advance = [&](Flow& x, double dt, double) {
    const double a = std::min(1.0, dt * cfg.kappa);
    const Flow v = T.at(x);
    for (std::size_t e = 0; e < x.size(); ++e) x[e] += a * (v[e] - x[e]);
  };
  return drive(s, x0, h, cfg.horizon, cfg.sample_every, x_star, observer, advance);
}

std::optional<double> time_to_threshold(const StateTrace& trace, double threshold) {
  for (const auto& smp : trace.samples) {
    if (smp.error2 <= threshold) return smp.t;
  }
  return std::nullopt;
}

}  // namespace num
