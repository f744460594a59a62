#include "num/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "num/errors.hpp"

namespace num {

namespace {

void require_size(std::span<const double> x, std::size_t n, const char* what) {
  if (x.size() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << " entries, got " << x.size();
    throw InputError(os.str());
  }
}

}  // namespace

RoutingNetwork::RoutingNetwork(std::vector<double> capacities,
                               std::vector<std::vector<std::size_t>> routes)
    : capacities_(std::move(capacities)), routes_(std::move(routes)) {
  if (capacities_.empty()) throw InputError("network has no links");
  if (routes_.empty()) throw InputError("network has no users");
  for (std::size_t l = 0; l < capacities_.size(); ++l) {
    if (!(capacities_[l] > 0.0) || !std::isfinite(capacities_[l])) {
      throw InputError("capacity of link " + std::to_string(l + 1) +
                       " must be positive and finite");
    }
  }
  users_on_.resize(capacities_.size());
  for (std::size_t e = 0; e < routes_.size(); ++e) {
    auto& r = routes_[e];
    if (r.empty()) throw InputError("route of user " + std::to_string(e + 1) + " is empty");
    std::vector<std::size_t> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InputError("route of user " + std::to_string(e + 1) + " repeats a link");
    }
    for (std::size_t l : r) {
      if (l >= capacities_.size()) {
        throw InputError("route of user " + std::to_string(e + 1) +
                         " references unknown link " + std::to_string(l + 1));
      }
      users_on_[l].push_back(e);
    }
  }
}

double RoutingNetwork::bottleneck(std::size_t e) const {
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t l : route(e)) b = std::min(b, capacities_[l]);
  return b;
}

Utility Utility::weighted_log(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("weighted-log weight must be > 0");
  return Utility(Family::kWeightedLog, a);
}

Utility Utility::power(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InputError("power exponent must lie in (0, 1)");
  return Utility(Family::kPower, beta);
}

double Utility::value(double x) const {
  switch (family_) {
    case Family::kLog:
    case Family::kWeightedLog:
      return x > 0.0 ? param_ * std::log(x) : -std::numeric_limits<double>::infinity();
    case Family::kPower:
      return std::pow(std::max(x, 0.0), param_);
  }
  return 0.0;
}

double Utility::derivative(double x) const {
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::kLog:
    case Family::kWeightedLog:
      return param_ / x;
    case Family::kPower:
      return param_ * std::pow(x, param_ - 1.0);
  }
  return 0.0;
}

double Utility::second_derivative(double x) const {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::kLog:
    case Family::kWeightedLog:
      return -param_ / (x * x);
    case Family::kPower:
      return param_ * (param_ - 1.0) * std::pow(x, param_ - 2.0);
  }
  return 0.0;
}

double Utility::price(double x) const {
  if (x < 0.0 || std::isnan(x)) throw InputError("price: negative rate");
  switch (family_) {
    case Family::kLog:
    case Family::kWeightedLog:
      return param_;
    case Family::kPower:
      return x == 0.0 ? 0.0 : param_ * std::pow(x, param_);
  }
  return 0.0;
}

std::string to_string(const Utility& u) {
  std::ostringstream os;
  os.precision(17);
  switch (u.family()) {
    case Utility::Family::kLog:
      os << "log";
      break;
    case Utility::Family::kWeightedLog:
      os << "wlog " << u.parameter();
      break;
    case Utility::Family::kPower:
      os << "power " << u.parameter();
      break;
  }
  return os.str();
}

Scenario::Scenario(RoutingNetwork net, std::vector<Utility> utils, std::string lbl)
    : network(std::move(net)), utilities(std::move(utils)), label(std::move(lbl)) {
  if (utilities.size() != network.users()) {
    throw InputError("scenario has " + std::to_string(network.users()) + " users but " +
                     std::to_string(utilities.size()) + " utilities");
  }
}

std::vector<double> link_loads(const RoutingNetwork& net, std::span<const double> x) {
  require_size(x, net.users(), "link_loads");
  std::vector<double> load(net.links(), 0.0);
  for (std::size_t e = 0; e < net.users(); ++e) {
    for (std::size_t l : net.route(e)) load[l] += x[e];
  }
  return load;
}

Slack feasibility_slack(const RoutingNetwork& net, std::span<const double> x,
                        double tol_feas) {
  const auto load = link_loads(net, x);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < net.links(); ++l) {
    slack = std::min(slack, net.capacity(l) - load[l]);
  }
  for (double xe : x) slack = std::min(slack, xe);
  if (std::isnan(slack)) return {slack, false};
  return {slack, slack >= -tol_feas};
}

std::vector<double> prices(const Scenario& s, std::span<const double> x) {
  require_size(x, s.users(), "prices");
  std::vector<double> p(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) p[e] = s.utilities[e].price(x[e]);
  return p;
}

double welfare(std::span<const Utility> utilities, std::span<const double> x) {
  require_size(x, utilities.size(), "welfare");
  double w = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double v = utilities[e].value(x[e]);
    if (v == -std::numeric_limits<double>::infinity()) return v;
    w += v;
  }
  return w;
}

std::vector<double> welfare_gradient(std::span<const Utility> utilities,
                                     std::span<const double> x) {
  require_size(x, utilities.size(), "welfare_gradient");
  std::vector<double> g(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) g[e] = utilities[e].derivative(x[e]);
  return g;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_size(b, a.size(), "max_abs_diff");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  require_size(b, a.size(), "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace num
