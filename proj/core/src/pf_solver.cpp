#include "num/pf_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "num/errors.hpp"

namespace num {

double dual_bound_P(const Scenario& s) {
  double P = 0.0;
  for (std::size_t e = 0; e < s.users(); ++e) {
    const auto& u = s.utilities[e];
    // price is constant for log families and increasing for power, so the
    // supremum over [0, bottleneck] sits at the bottleneck.
    P += u.price(s.network.bottleneck(e));
  }
  return P;
}

double pf_kkt_residual(const RoutingNetwork& net, std::span<const double> p,
                       std::span<const double> x, std::span<const double> mu) {
  if (p.size() != net.users() || x.size() != net.users() || mu.size() != net.links()) {
    throw InputError("pf_kkt_residual: dimension mismatch");
  }
  const auto load = link_loads(net, x);
  double r = 0.0;
  for (std::size_t e = 0; e < net.users(); ++e) {
    r = std::max(r, -x[e]);
    if (p[e] > 0.0) {
      if (x[e] <= 0.0) return std::numeric_limits<double>::infinity();
      double route_mu = 0.0;
      for (std::size_t l : net.route(e)) route_mu += mu[l];
      r = std::max(r, std::abs(p[e] / x[e] - route_mu));
    }
  }
  for (std::size_t l = 0; l < net.links(); ++l) {
    r = std::max(r, std::abs(mu[l] * (load[l] - net.capacity(l))));
    r = std::max(r, load[l] - net.capacity(l));
  }
  return r;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// The dual restricted to users with p > 0 and the links they touch.
class ReducedDual {
 public:
  ReducedDual(const RoutingNetwork& net, std::span<const double> p) {
    std::vector<std::ptrdiff_t> slot(net.links(), -1);
    for (std::size_t e = 0; e < net.users(); ++e) {
      if (p[e] <= 0.0) continue;
      users_.push_back(e);
      weight_.push_back(p[e]);
      auto& r = routes_.emplace_back();
      for (std::size_t l : net.route(e)) {
        if (slot[l] < 0) {
          slot[l] = static_cast<std::ptrdiff_t>(links_.size());
          links_.push_back(l);
        }
        r.push_back(static_cast<std::size_t>(slot[l]));
      }
    }
    cap_ = VectorXd(links_.size());
    for (std::size_t k = 0; k < links_.size(); ++k) cap_[k] = net.capacity(links_[k]);
  }

  std::size_t dim() const { return links_.size(); }
  const std::vector<std::size_t>& users() const { return users_; }
  const std::vector<std::size_t>& links() const { return links_; }
  const VectorXd& capacity() const { return cap_; }

  VectorXd route_sums(const VectorXd& mu) const {
    VectorXd s(routes_.size());
    for (std::size_t i = 0; i < routes_.size(); ++i) {
      double v = 0.0;
      for (std::size_t k : routes_[i]) v += mu[k];
      s[i] = v;
    }
    return s;
  }

  double value(const VectorXd& mu) const {
    const VectorXd s = route_sums(mu);
    double r = -mu.dot(cap_);
    for (std::size_t i = 0; i < routes_.size(); ++i) {
      if (!(s[i] > 0.0)) return -std::numeric_limits<double>::infinity();
      r += weight_[i] * std::log(s[i]);
    }
    return r;
  }

  // dR/dmu(l) = load(l) - c(l) at the recovered primal x = p / s.
  VectorXd gradient(const VectorXd& mu) const {
    const VectorXd s = route_sums(mu);
    VectorXd g = -cap_;
    for (std::size_t i = 0; i < routes_.size(); ++i) {
      const double xi = weight_[i] / s[i];
      for (std::size_t k : routes_[i]) g[k] += xi;
    }
    return g;
  }

  // Negated Hessian, sum_e p(e)/s(e)^2 a_e a_e^T (positive semidefinite).
  MatrixXd curvature(const VectorXd& mu) const {
    const VectorXd s = route_sums(mu);
    MatrixXd H = MatrixXd::Zero(dim(), dim());
    for (std::size_t i = 0; i < routes_.size(); ++i) {
      const double w = weight_[i] / (s[i] * s[i]);
      for (std::size_t a : routes_[i]) {
        for (std::size_t b : routes_[i]) H(a, b) += w;
      }
    }
    return H;
  }

  std::vector<double> primal(const VectorXd& mu) const {
    const VectorXd s = route_sums(mu);
    std::vector<double> x(routes_.size());
    for (std::size_t i = 0; i < routes_.size(); ++i) x[i] = weight_[i] / s[i];
    return x;
  }

 private:
  std::vector<std::size_t> users_;
  std::vector<std::size_t> links_;
  std::vector<double> weight_;
  std::vector<std::vector<std::size_t>> routes_;
  VectorXd cap_;
};

VectorXd project(const VectorXd& v, const VectorXd& ub) {
  return v.cwiseMax(0.0).cwiseMin(ub);
}

double projected_residual(const VectorXd& mu, const VectorXd& g, const VectorXd& ub) {
  return (project(mu + g, ub) - mu).cwiseAbs().maxCoeff();
}

constexpr double kArmijo = 1e-4;

// Central path of the log barrier on the box. Leaves mu strictly inside and
// close enough to the optimum for the active set to be read off.
std::size_t barrier_phase(const ReducedDual& dual, const VectorXd& ub, double P, VectorXd& mu,
                          std::size_t budget) {
  const auto r = static_cast<double>(dual.dim());
  const double tau_end = 1e-6 * P / r;
  std::size_t steps = 0;
  for (double tau = 0.1 * P / r; tau >= tau_end && steps < budget; tau *= 0.02) {
    auto phi = [&](const VectorXd& m) {
      double v = dual.value(m);
      for (Eigen::Index k = 0; k < m.size(); ++k) v += tau * (std::log(m[k]) + std::log(ub[k] - m[k]));
      return v;
    };
    for (int inner = 0; inner < 50 && steps < budget; ++inner, ++steps) {
      const VectorXd g = dual.gradient(mu).array() + tau * (mu.cwiseInverse() - (ub - mu).cwiseInverse()).array();
      MatrixXd M = dual.curvature(mu);
      M.diagonal().array() += tau * (mu.array().square().inverse() + (ub - mu).array().square().inverse());
      const VectorXd d = M.ldlt().solve(g);
      const double dec = g.dot(d);
      if (!(dec > 1e-6 * tau * r)) break;

      double t = 1.0;
      for (Eigen::Index k = 0; k < d.size(); ++k) {
        if (d[k] < 0.0) t = std::min(t, 0.995 * mu[k] / -d[k]);
        if (d[k] > 0.0) t = std::min(t, 0.995 * (ub[k] - mu[k]) / d[k]);
      }
      const double f0 = phi(mu);
      bool accepted = false;
      for (; t > 1e-14; t *= 0.5) {
        const VectorXd trial = mu + t * d;
        if (phi(trial) >= f0 + kArmijo * t * dec) {
          mu = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }
  return steps;
}

}  // namespace

PFSolution solve_pf_dual(const RoutingNetwork& net, std::span<const double> p,
                         const DualSolverOptions& opts) {
  const std::size_t n = net.users();
  if (p.size() != n) throw InputError("solve_pf_dual: price vector has wrong length");
  double sum_p = 0.0;
  for (double pe : p) {
    if (!(pe >= 0.0) || !std::isfinite(pe)) throw InputError("solve_pf_dual: prices must be finite and nonnegative");
    sum_p += pe;
  }
  if (sum_p <= 0.0) throw InputError("solve_pf_dual: all prices are zero");
  if (!(opts.tol > 0.0)) throw InputError("solve_pf_dual: tol must be positive");

  const ReducedDual dual(net, p);
  const double P = std::max(opts.bound_P.value_or(sum_p), sum_p);
  const VectorXd ub = 2.0 * P * dual.capacity().cwiseInverse();
  VectorXd mu = P * dual.capacity().cwiseInverse();

  PFSolution sol;
  sol.iterations = barrier_phase(dual, ub, P, mu, opts.max_iters);

  auto finish = [&](const VectorXd& m) {
    sol.mu.assign(net.links(), 0.0);
    for (std::size_t k = 0; k < dual.dim(); ++k) sol.mu[dual.links()[k]] = m[static_cast<Eigen::Index>(k)];
    sol.x.assign(n, 0.0);
    const auto xr = dual.primal(m);
    for (std::size_t i = 0; i < xr.size(); ++i) sol.x[dual.users()[i]] = xr[i];
    const auto load = link_loads(net, sol.x);
    double scale = 1.0;
    for (std::size_t l = 0; l < net.links(); ++l) {
      if (load[l] > net.capacity(l)) scale = std::min(scale, net.capacity(l) / load[l]);
    }
    if (scale < 1.0) {
      for (double& xe : sol.x) xe *= scale;
    }
    sol.dual_residual = projected_residual(m, dual.gradient(m), ub);
    sol.kkt_residual = pf_kkt_residual(net, p, sol.x, sol.mu);
    sol.converged = sol.dual_residual <= opts.tol && sol.kkt_residual <= opts.tol;
  };

  // Projected Newton on the box with the active set re-read every step.
  double best_res = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (; sol.iterations < opts.max_iters; ++sol.iterations) {
    finish(mu);
    if (sol.converged) return sol;
    if (sol.dual_residual < 0.5 * best_res) {
      best_res = sol.dual_residual;
      since_best = 0;
    } else if (++since_best > 200) {
      break;
    }

    const VectorXd g = dual.gradient(mu);
    const double res = sol.dual_residual;
    const double eps = std::min(1e-3, res);
    std::vector<Eigen::Index> free;
    VectorXd d = VectorXd::Zero(mu.size());
    const MatrixXd H = dual.curvature(mu);
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
      const bool at_lower = mu[k] <= eps && g[k] < 0.0;
      const bool at_upper = mu[k] >= ub[k] - eps && g[k] > 0.0;
      if (at_lower || at_upper) {
        d[k] = g[k] / std::max(H(k, k), 1e-300);
      } else {
        free.push_back(k);
      }
    }
    if (!free.empty()) {
      const auto f = static_cast<Eigen::Index>(free.size());
      MatrixXd Hf(f, f);
      VectorXd gf(f);
      for (Eigen::Index i = 0; i < f; ++i) {
        gf[i] = g[free[i]];
        for (Eigen::Index j = 0; j < f; ++j) Hf(i, j) = H(free[i], free[j]);
      }
      Hf.diagonal().array() += 1e-12 * Hf.diagonal().maxCoeff() + 1e-300;
      VectorXd df = Hf.ldlt().solve(gf);
      double over = 0.0;
      for (Eigen::Index i = 0; i < f; ++i) over = std::max(over, std::abs(df[i]) / ub[free[i]]);
      if (over > 1.0) df /= over;
      for (Eigen::Index i = 0; i < f; ++i) d[free[i]] = df[i];
    }

    // Near the optimum R changes below its rounding error, so a full step
    // that halves the residual is taken without consulting R.
    {
      const VectorXd trial = project(mu + d, ub);
      const VectorXd s = dual.route_sums(trial);
      if ((s.array() > 0.0).all() && projected_residual(trial, dual.gradient(trial), ub) <= 0.5 * res) {
        mu = trial;
        continue;
      }
    }
    const double f0 = dual.value(mu);
    bool accepted = false;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      const VectorXd trial = project(mu + t * d, ub);
      if (dual.value(trial) >= f0 + kArmijo * g.dot(trial - mu)) {
        accepted = (trial - mu).cwiseAbs().maxCoeff() > 1e-15 * ub.maxCoeff();
        mu = trial;
        break;
      }
    }
    if (!accepted) break;
  }
  finish(mu);
  return sol;
}

}  // namespace num
