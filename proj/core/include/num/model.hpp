#pragma once

// Network topology, utilities and the elementary evaluations shared by the
// solvers, the iterate loop and the dynamics.
//
// Conventions: users are indexed e = 0..n-1, links l = 0..m-1 (the scenario
// file format is 1-based). Rates are plain std::vector<double>; functions
// taking a rate vector accept std::span<const double>.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace num {

/// Single tolerance used by every "feasible at all times" check.
inline constexpr double kDefaultTolFeas = 1e-9;

using Flow = std::vector<double>;

/// Link/route incidence structure and capacities.
///
/// Every route is nonempty, every link index is valid and every capacity is
/// strictly positive; the constructor throws InputError otherwise. With c > 0
/// the feasible set {x >= 0, Ax <= c} always has an interior point.
class RoutingNetwork {
 public:
  RoutingNetwork(std::vector<double> capacities,
                 std::vector<std::vector<std::size_t>> routes);

  std::size_t links() const noexcept { return capacities_.size(); }
  std::size_t users() const noexcept { return routes_.size(); }

  double capacity(std::size_t l) const { return capacities_.at(l); }
  std::span<const double> capacities() const noexcept { return capacities_; }

  /// Links used by user e, in the order given at construction.
  std::span<const std::size_t> route(std::size_t e) const { return routes_.at(e); }

  /// Users whose route contains link l, ascending.
  std::span<const std::size_t> users_on(std::size_t l) const { return users_on_.at(l); }

  /// min over the route of e of c(l): the largest rate e could ever get.
  double bottleneck(std::size_t e) const;

 private:
  std::vector<double> capacities_;
  std::vector<std::vector<std::size_t>> routes_;
  std::vector<std::vector<std::size_t>> users_on_;
};

/// A strictly concave, strictly increasing utility on (0, inf).
///
///   log           w(x) = ln x
///   weighted-log  w(x) = a ln x,  a > 0
///   power         w(x) = x^b,     0 < b < 1
class Utility {
 public:
  enum class Family { kLog, kWeightedLog, kPower };

  static Utility log() { return Utility(Family::kLog, 1.0); }
  static Utility weighted_log(double a);
  static Utility power(double beta);

  Family family() const noexcept { return family_; }
  /// Weight a for (weighted-)log, exponent b for power.
  double parameter() const noexcept { return param_; }

  /// w(x). Log families return -infinity at x = 0.
  double value(double x) const;
  /// w'(x). +infinity at x = 0 for all three families.
  double derivative(double x) const;
  double second_derivative(double x) const;
  /// p = x w'(x), extended to x = 0 by its limit (a for log families, 0 for
  /// power). Throws InputError for x < 0.
  double price(double x) const;

  /// True when w(0) = -infinity.
  bool unbounded_at_zero() const noexcept { return family_ != Family::kPower; }

  friend bool operator==(const Utility&, const Utility&) = default;

 private:
  Utility(Family f, double p) : family_(f), param_(p) {}

  Family family_;
  double param_;
};

std::string to_string(const Utility& u);

struct Scenario {
  Scenario(RoutingNetwork net, std::vector<Utility> utils, std::string label = {});

  RoutingNetwork network;
  std::vector<Utility> utilities;
  std::string label;

  std::size_t users() const noexcept { return network.users(); }
  std::size_t links() const noexcept { return network.links(); }
};

/// Parses the line-oriented `[network]` / `[utilities]` format. Throws
/// ParseError (with line number) on syntax errors and InputError on
/// validation failures.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);
/// Inverse of load_scenario. Capacities and parameters are written with 17
/// significant digits so a round trip is exact.
std::string format_scenario(const Scenario& scenario);

/// load(l) = sum of x(e) over users e whose route contains l.
std::vector<double> link_loads(const RoutingNetwork& net, std::span<const double> x);

struct Slack {
  double min_slack;  ///< min(min_l c(l) - load(l), min_e x(e))
  bool feasible;     ///< min_slack >= -tol_feas
};

Slack feasibility_slack(const RoutingNetwork& net, std::span<const double> x,
                        double tol_feas = kDefaultTolFeas);

inline double price(const Utility& u, double x) { return u.price(x); }

/// Per-user prices p(e) = x(e) w_e'(x(e)).
std::vector<double> prices(const Scenario& s, std::span<const double> x);

/// W(x) = sum_e w_e(x(e)); -infinity if a log-family user has zero rate.
double welfare(std::span<const Utility> utilities, std::span<const double> x);

/// grad W(x) = (w_e'(x(e)))_e.
std::vector<double> welfare_gradient(std::span<const Utility> utilities,
                                     std::span<const double> x);

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double l2_distance(std::span<const double> a, std::span<const double> b);

}  // namespace num
