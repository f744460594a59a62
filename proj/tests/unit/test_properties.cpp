// Invariants checked over seeded random instances.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "num/diagnostics.hpp"
#include "num/dynamics.hpp"
#include "num/iterate.hpp"
#include "num/oracle.hpp"
#include "num/pf_solver.hpp"
#include "num/random_scenario.hpp"

using namespace num;

namespace {

/// Strictly feasible point: a random fraction of the max-min fair point.
Flow random_interior(const RoutingNetwork& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Flow x = lexicographic_max_point(net);
  for (double& v : x) v *= u(rng);
  return x;
}

}  // namespace

TEST_CASE("T maps into the feasible set and satisfies the PF optimality conditions") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Scenario s = random_scenario(seed);
    const Flow x = random_interior(s.network, rng);
    const auto p = prices(s, x);
    const auto sol = solve_pf_dual(s.network, p, {.tol = 1e-10, .bound_P = dual_bound_P(s)});
    CAPTURE(seed);
    CHECK(sol.converged);
    CHECK(feasibility_slack(s.network, sol.x).feasible);
    CHECK(sol.kkt_residual <= 1e-8);
  }
}

TEST_CASE("T(x) - x is an ascent direction of the welfare") {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Scenario s = random_scenario(seed);
    const PFMap T(s, 1e-10);
    for (int trial = 0; trial < 5; ++trial) {
      const Flow x = random_interior(s.network, rng);
      CAPTURE(seed);
      CHECK(descent_inner_product(s, x, T.at(x)) >= -1e-9);
    }
  }
}

TEST_CASE("Lyapunov function is positive away from the optimum") {
  std::mt19937_64 rng(13);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario s = random_scenario(seed);
    const auto ref = reference_optimum(s);
    for (int trial = 0; trial < 5; ++trial) {
      const Flow x = random_interior(s.network, rng);
      if (max_abs_diff(x, ref.x_star) < 1e-6) continue;
      CHECK(lyapunov_V(s, x, ref.x_star) > 0.0);
    }
  }
}

TEST_CASE("string solver equals the dual solver on nested networks") {
  std::mt19937_64 rng(14);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Scenario s = random_aggregating_scenario(seed, 1 + seed % 12);
    const Flow x = random_interior(s.network, rng);
    const PFMap T(s, 1e-11);
    REQUIRE(T.uses_string_solver());
    const auto dual = solve_pf_dual(s.network, prices(s, x), {.tol = 1e-11, .bound_P = std::nullopt});
    CHECK(max_abs_diff(T.at(x), dual.x) <= 1e-6);
  }
}

TEST_CASE("iterates of the feasible scheme stay feasible") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const Scenario s = random_scenario(seed);
    AlgorithmConfig cfg;
    cfg.max_iters = 200;
    const Trace t = run_algorithm1(s, lexicographic_max_point(s.network), cfg);
    for (const auto& r : t.records) {
      CHECK(r.min_slack >= -kDefaultTolFeas);
      CHECK(r.descent >= -1e-9);
    }
  }
}

TEST_CASE("scaled-DI runs stay feasible") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = random_scenario(seed);
    DIConfig cfg;
    cfg.horizon = 5.0;
    const auto tr = integrate_scaled_di(s, lexicographic_max_point(s.network), cfg);
    for (const auto& smp : tr.samples) CHECK(smp.min_slack >= -kDefaultTolFeas);
  }
}
