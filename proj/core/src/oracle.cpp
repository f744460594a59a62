#include <algorithm>
#include <cmath>
#include <limits>

#include "num/errors.hpp"
#include "num/oracle.hpp"

namespace num {

KKTReport system_kkt_residual(const Scenario& s, std::span<const double> x,
                              std::span<const double> mu) {
  if (x.size() != s.users() || mu.size() != s.links()) {
    throw InputError("system_kkt_residual: dimension mismatch");
  }
  const auto& net = s.network;
  const auto load = link_loads(net, x);
  KKTReport r;
  for (std::size_t e = 0; e < s.users(); ++e) {
    r.primal_infeasibility = std::max(r.primal_infeasibility, -x[e]);
    double route_mu = 0.0;
    for (std::size_t l : net.route(e)) route_mu += mu[l];
    const double wp = s.utilities[e].derivative(x[e]);
    const double eta = std::max(0.0, route_mu - wp);
    r.stationarity = std::max(r.stationarity, std::abs(wp - route_mu + eta));
    r.complementary_slackness = std::max(r.complementary_slackness, std::abs(eta * x[e]));
  }
  for (std::size_t l = 0; l < s.links(); ++l) {
    const double gap = load[l] - net.capacity(l);
    r.primal_infeasibility = std::max(r.primal_infeasibility, gap);
    r.complementary_slackness = std::max(r.complementary_slackness, std::abs(mu[l] * gap));
    r.dual_infeasibility = std::max(r.dual_infeasibility, -mu[l]);
  }
  r.overall = std::max({r.stationarity, r.complementary_slackness, r.primal_infeasibility,
                        r.dual_infeasibility});
  return r;
}

double lyapunov_V(const Scenario& s, std::span<const double> x, std::span<const double> x_star) {
  const double w = welfare(s.utilities, x);
  if (w == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
  return welfare(s.utilities, x_star) - w;
}

double descent_inner_product(const Scenario& s, std::span<const double> x,
                             std::span<const double> v) {
  if (x.size() != s.users() || v.size() != s.users()) {
    throw InputError("descent_inner_product: dimension mismatch");
  }
  double d = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (!(x[e] > 0.0)) {
      throw InputError("descent_inner_product: rate of user " + std::to_string(e + 1) +
                       " is not positive");
    }
    d += s.utilities[e].derivative(x[e]) * (v[e] - x[e]);
  }
  return d;
}

}  // namespace num
