#pragma once

#include <cstdint>
#include <vector>

#include "num/model.hpp"

namespace num {

/// n users, n links; user e (0-based) routes through links e..n-1, so link l
/// carries users 0..l. The feasible set is x(0)+...+x(l) <= c(l).
Scenario make_flow_aggregating(std::vector<double> capacities, std::vector<Utility> utilities,
                               std::string label = {});

/// The 10-user flow-aggregating benchmark: c(l) = 10 l and power utilities
/// with exponent 0.09 e (1-based l, e).
Scenario aggregating_benchmark_scenario(std::size_t n = 10);

struct RandomScenarioOptions {
  std::size_t max_users = 10;
  std::size_t max_links = 10;
  std::size_t max_route_length = 3;
  double min_capacity = 1.0;
  double max_capacity = 10.0;
  double min_power = 0.1;
  double max_power = 0.9;
  bool allow_log = true;
  bool allow_weighted_log = true;
  bool allow_power = true;
};

/// Deterministic for a given seed and standard library.
Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& opts = {});

/// Random flow-aggregating scenario with n users (alphas ~ U[min_cap, max_cap]).
Scenario random_aggregating_scenario(std::uint64_t seed, std::size_t n,
                                     const RandomScenarioOptions& opts = {});

}  // namespace num
