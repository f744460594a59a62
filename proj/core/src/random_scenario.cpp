#include "num/random_scenario.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "num/errors.hpp"

namespace num {

namespace {

Utility random_utility(std::mt19937_64& rng, const RandomScenarioOptions& o) {
  std::vector<int> families;
  if (o.allow_log) families.push_back(0);
  if (o.allow_weighted_log) families.push_back(1);
  if (o.allow_power) families.push_back(2);
  if (families.empty()) throw InputError("random_scenario: no utility family allowed");
  std::uniform_int_distribution<std::size_t> pick(0, families.size() - 1);
  switch (families[pick(rng)]) {
    case 0:
      return Utility::log();
    case 1:
      return Utility::weighted_log(std::uniform_real_distribution<double>(0.5, 2.0)(rng));
    default:
      return Utility::power(std::uniform_real_distribution<double>(o.min_power, o.max_power)(rng));
  }
}

}  // namespace

Scenario make_flow_aggregating(std::vector<double> capacities, std::vector<Utility> utilities,
                               std::string label) {
  const std::size_t n = capacities.size();
  std::vector<std::vector<std::size_t>> routes(n);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t l = e; l < n; ++l) routes[e].push_back(l);
  }
  return Scenario(RoutingNetwork(std::move(capacities), std::move(routes)),
                  std::move(utilities), std::move(label));
}

Scenario aggregating_benchmark_scenario(std::size_t n) {
  std::vector<double> caps(n);
  std::vector<Utility> utils;
  for (std::size_t i = 0; i < n; ++i) {
    caps[i] = 10.0 * static_cast<double>(i + 1);
    utils.push_back(Utility::power(0.09 * static_cast<double>(i + 1)));
  }
  return make_flow_aggregating(std::move(caps), std::move(utils), "flow-aggregating benchmark");
}

Scenario random_scenario(std::uint64_t seed, const RandomScenarioOptions& o) {
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, o.max_users)(rng);
  const std::size_t m = std::uniform_int_distribution<std::size_t>(1, o.max_links)(rng);
  std::uniform_real_distribution<double> cap(o.min_capacity, o.max_capacity);
  std::vector<double> caps(m);
  for (auto& c : caps) c = cap(rng);

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> routes(n);
  std::vector<Utility> utils;
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(
        1, std::min(m, std::max<std::size_t>(1, o.max_route_length)))(rng);
    std::shuffle(all.begin(), all.end(), rng);
    routes[e].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(len));
    std::sort(routes[e].begin(), routes[e].end());
    utils.push_back(random_utility(rng, o));
  }
  return Scenario(RoutingNetwork(std::move(caps), std::move(routes)), std::move(utils),
                  "random seed " + std::to_string(seed));
}

Scenario random_aggregating_scenario(std::uint64_t seed, std::size_t n,
                                     const RandomScenarioOptions& o) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> alpha(o.min_capacity, o.max_capacity);
  std::vector<double> caps(n);
  double b = 0.0;
  for (auto& c : caps) c = (b += alpha(rng));
  std::vector<Utility> utils;
  for (std::size_t e = 0; e < n; ++e) utils.push_back(random_utility(rng, o));
  return make_flow_aggregating(std::move(caps), std::move(utils),
                               "random aggregating seed " + std::to_string(seed));
}

}  // namespace num
