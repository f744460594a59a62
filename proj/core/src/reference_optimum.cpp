#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "num/errors.hpp"
#include "num/oracle.hpp"

namespace num {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;

struct Problem {
  const Scenario& s;
  std::vector<std::size_t> used;  // links carrying at least one user

  explicit Problem(const Scenario& sc) : s(sc) {
    for (std::size_t l = 0; l < s.links(); ++l) {
      if (!s.network.users_on(l).empty()) used.push_back(l);
    }
  }

  std::size_t n() const { return s.users(); }

  VectorXd slack(const VectorXd& x) const {
    VectorXd r(static_cast<Eigen::Index>(used.size()));
    for (std::size_t k = 0; k < used.size(); ++k) {
      double load = 0.0;
      for (std::size_t e : s.network.users_on(used[k])) load += x[static_cast<Eigen::Index>(e)];
      r[static_cast<Eigen::Index>(k)] = s.network.capacity(used[k]) - load;
    }
    return r;
  }

  // Barrier objective; -inf outside the open feasible set.
  double phi(const VectorXd& x, double tau) const {
    const VectorXd sl = slack(x);
    if (!((x.array() > 0.0).all() && (sl.array() > 0.0).all())) {
      return -std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    for (Eigen::Index e = 0; e < x.size(); ++e) {
      v += s.utilities[static_cast<std::size_t>(e)].value(x[e]) + tau * std::log(x[e]);
    }
    for (Eigen::Index k = 0; k < sl.size(); ++k) v += tau * std::log(sl[k]);
    return v;
  }
};

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Follows the central path down to tau_end; mu(l) = tau / slack(l) on exit.
std::size_t barrier_path(const Problem& pb, VectorXd& x, double tau_end) {
  const auto n = static_cast<Eigen::Index>(pb.n());
  const auto& net = pb.s.network;
  std::size_t steps = 0;
  for (double tau = 1.0;; tau = std::max(0.2 * tau, tau_end)) {
    for (int inner = 0; inner < 100; ++inner) {
      const VectorXd sl = pb.slack(x);
      VectorXd g(n);
      MatrixXd H = MatrixXd::Zero(n, n);
      for (Eigen::Index e = 0; e < n; ++e) {
        const auto& u = pb.s.utilities[static_cast<std::size_t>(e)];
        g[e] = u.derivative(x[e]) + tau / x[e];
        H(e, e) = -u.second_derivative(x[e]) + tau / (x[e] * x[e]);
      }
      for (std::size_t k = 0; k < pb.used.size(); ++k) {
        const double sk = sl[static_cast<Eigen::Index>(k)];
        const auto users = net.users_on(pb.used[k]);
        for (std::size_t a : users) {
          g[static_cast<Eigen::Index>(a)] -= tau / sk;
          for (std::size_t b : users) {
            H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += tau / (sk * sk);
          }
        }
      }
      // H is the negated Hessian, positive definite.
      const VectorXd d = H.llt().solve(g);
      const double dec = g.dot(d);
      if (!(dec > 1e-6 * tau)) break;

      double t = 1.0;
      for (Eigen::Index e = 0; e < n; ++e) {
        if (d[e] < 0.0) t = std::min(t, 0.99 * x[e] / -d[e]);
      }
      for (std::size_t k = 0; k < pb.used.size(); ++k) {
        double ds = 0.0;
        for (std::size_t e : net.users_on(pb.used[k])) ds -= d[static_cast<Eigen::Index>(e)];
        if (ds < 0.0) t = std::min(t, 0.99 * sl[static_cast<Eigen::Index>(k)] / -ds);
      }
      const double f0 = pb.phi(x, tau);
      bool moved = false;
      for (; t > 1e-12; t *= 0.5) {
        const VectorXd trial = x + t * d;
        const double f = pb.phi(trial, tau);
        // Below rounding of f the Armijo test is noise; accept interior points.
        const bool tiny = t * dec < 1e-13 * (1.0 + std::abs(f0));
        if (f >= f0 + kArmijo * t * dec || (tiny && std::isfinite(f))) {
          x = trial;
          moved = true;
          break;
        }
      }
      ++steps;
      if (!moved) break;
    }
    if (tau <= tau_end) break;
  }
  return steps;
}

// Newton on  w'(x) = A_S^T mu_S,  A_S x = c_S  for a guessed active set S.
bool polish(const Problem& pb, const std::vector<std::size_t>& active, VectorXd& x,
            VectorXd& mu_active, std::size_t& steps) {
  const auto n = static_cast<Eigen::Index>(pb.n());
  const auto a = static_cast<Eigen::Index>(active.size());
  const auto& net = pb.s.network;
  MatrixXd As = MatrixXd::Zero(a, n);
  VectorXd cs(a);
  for (Eigen::Index k = 0; k < a; ++k) {
    const std::size_t l = active[static_cast<std::size_t>(k)];
    for (std::size_t e : net.users_on(l)) As(k, static_cast<Eigen::Index>(e)) = 1.0;
    cs[k] = net.capacity(l);
  }
  auto residual = [&](const VectorXd& xx, const VectorXd& mm) {
    VectorXd F(n + a);
    for (Eigen::Index e = 0; e < n; ++e) {
      F[e] = pb.s.utilities[static_cast<std::size_t>(e)].derivative(xx[e]);
    }
    F.head(n) -= As.transpose() * mm;
    F.tail(a) = As * xx - cs;
    return F;
  };

  VectorXd F = residual(x, mu_active);
  double best = F.cwiseAbs().maxCoeff();
  for (int it = 0; it < 50 && best > 0.0; ++it, ++steps) {
    MatrixXd J = MatrixXd::Zero(n + a, n + a);
    for (Eigen::Index e = 0; e < n; ++e) {
      J(e, e) = pb.s.utilities[static_cast<std::size_t>(e)].second_derivative(x[e]);
    }
    J.topRightCorner(n, a) = -As.transpose();
    J.bottomLeftCorner(a, n) = As;
    const VectorXd dz = J.completeOrthogonalDecomposition().solve(-F);
    double t = 1.0;
    for (Eigen::Index e = 0; e < n; ++e) {
      if (dz[e] < 0.0) t = std::min(t, 0.5 * x[e] / -dz[e]);
    }
    const VectorXd xn = x + t * dz.head(n);
    const VectorXd mn = mu_active + t * dz.tail(a);
    const VectorXd Fn = residual(xn, mn);
    const double r = Fn.cwiseAbs().maxCoeff();
    if (!(r < best)) break;
    x = xn;
    mu_active = mn;
    F = Fn;
    best = r;
  }
  return std::isfinite(best);
}

}  // namespace

ReferenceOptimum reference_optimum(const Scenario& s, double tol) {
  if (!(tol > 0.0)) throw InputError("reference_optimum: tol must be positive");
  const Problem pb(s);
  const auto& net = s.network;
  const auto n = static_cast<Eigen::Index>(s.users());

  // Half of the equal split of each bottleneck: strictly interior.
  VectorXd x(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t l : net.route(static_cast<std::size_t>(e))) {
      v = std::min(v, net.capacity(l) / static_cast<double>(net.users_on(l).size()));
    }
    x[e] = 0.5 * v;
  }

  constexpr double kTauEnd = 1e-10;
  ReferenceOptimum best;
  best.newton_steps = barrier_path(pb, x, kTauEnd);
  {
    const VectorXd sl = pb.slack(x);
    best.x_star = to_std(x);
    best.mu_star.assign(s.links(), 0.0);
    for (std::size_t k = 0; k < pb.used.size(); ++k) {
      best.mu_star[pb.used[k]] = kTauEnd / sl[static_cast<Eigen::Index>(k)];
    }
    best.certified_residual = system_kkt_residual(s, best.x_star, best.mu_star).overall;
  }

  // On the central path mu(l) slack(l) = tau, so active links are those with
  // mu above sqrt(tau). Misread links are swapped and the polish repeated.
  std::vector<char> in_set(s.links(), 0);
  for (std::size_t l : pb.used) in_set[l] = best.mu_star[l] * best.mu_star[l] > kTauEnd;
  for (std::size_t round = 0; round <= s.links() && best.certified_residual > tol; ++round) {
    std::vector<std::size_t> active;
    for (std::size_t l = 0; l < s.links(); ++l) {
      if (in_set[l]) active.push_back(l);
    }
    VectorXd xp = Eigen::Map<const VectorXd>(best.x_star.data(), n);
    VectorXd mp(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      mp[static_cast<Eigen::Index>(k)] = best.mu_star[active[k]];
    }
    if (!polish(pb, active, xp, mp, best.newton_steps)) break;

    ReferenceOptimum cand;
    cand.x_star = to_std(xp);
    cand.mu_star.assign(s.links(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
      cand.mu_star[active[k]] = std::max(0.0, mp[static_cast<Eigen::Index>(k)]);
    }
    cand.certified_residual = system_kkt_residual(s, cand.x_star, cand.mu_star).overall;
    cand.newton_steps = best.newton_steps;

    bool changed = false;
    const auto load = link_loads(net, cand.x_star);
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (mp[static_cast<Eigen::Index>(k)] < -tol) {
        in_set[active[k]] = 0;
        changed = true;
      }
    }
    for (std::size_t l : pb.used) {
      if (!in_set[l] && load[l] > net.capacity(l) + tol) {
        in_set[l] = 1;
        changed = true;
      }
    }
    if (cand.certified_residual < best.certified_residual) best = std::move(cand);
    if (!changed) break;
  }

  if (!(best.certified_residual <= tol)) {
    std::ostringstream os;
    os << "reference_optimum: KKT residual " << best.certified_residual
       << " above tolerance " << tol;
    throw NumericalError(os.str());
  }
  return best;
}

}  // namespace num
