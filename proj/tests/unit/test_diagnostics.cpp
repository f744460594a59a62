#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "num/diagnostics.hpp"
#include "num/errors.hpp"
#include "num/iterate.hpp"
#include "num/oracle.hpp"
#include "num/random_scenario.hpp"
#include "oracles/oracles.hpp"

using namespace num;

namespace {

Scenario single_link() { return Scenario(RoutingNetwork({1.0}, {{0}}), {Utility::log()}); }

}  // namespace

TEST_CASE("reference_optimum closed forms") {
  CHECK(reference_optimum(single_link()).x_star[0] == doctest::Approx(1.0).epsilon(1e-10));

  const Scenario two(RoutingNetwork({2.0}, {{0}, {0}}), {Utility::log(), Utility::log()});
  const auto r2 = reference_optimum(two);
  CHECK(max_abs_diff(r2.x_star, std::vector<double>{1.0, 1.0}) <= 1e-9);
  const auto g2 = oracle::grid_max_welfare(two, 1e-3);
  CHECK(max_abs_diff(g2.x, std::vector<double>{1.0, 1.0}) <= 1e-3);

  const Scenario agg = make_flow_aggregating({1.0, 4.0}, {Utility::log(), Utility::log()});
  const auto ra = reference_optimum(agg);
  CHECK(max_abs_diff(ra.x_star, std::vector<double>{1.0, 3.0}) <= 1e-9);
  const auto ga = oracle::grid_max_welfare(agg, 1e-3);
  CHECK(max_abs_diff(ga.x, std::vector<double>{1.0, 3.0}) <= 1e-3);
}

TEST_CASE("reference_optimum certifies random scenarios") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Scenario s = random_scenario(seed);
    const auto r = reference_optimum(s);
    CHECK(r.certified_residual <= 1e-10);
    CHECK(system_kkt_residual(s, r.x_star, r.mu_star).overall <= 1e-10);
    CHECK(feasibility_slack(s.network, r.x_star).feasible);
  }
}

TEST_CASE("reference_optimum beats every grid point on small scenarios") {
  std::vector<Scenario> small;
  small.push_back(single_link());
  small.emplace_back(RoutingNetwork({1.0, 2.0}, {{0, 1}, {0}, {1}}),
                     std::vector<Utility>{Utility::power(0.3), Utility::log(), Utility::power(0.7)});
  small.push_back(appendix_scenario(1.0));
  for (const auto& s : small) {
    const auto r = reference_optimum(s);
    const double w_star = welfare(s.utilities, r.x_star);
    const auto g = oracle::grid_max_welfare(s, 1e-2);
    CHECK(g.value <= w_star + 1e-6);
  }
}

TEST_CASE("system_kkt_residual examples") {
  const Scenario s = single_link();
  CHECK(system_kkt_residual(s, std::vector<double>{1.0}, std::vector<double>{1.0}).overall ==
        doctest::Approx(0.0));
  const auto r = system_kkt_residual(s, std::vector<double>{0.5}, std::vector<double>{1.0});
  CHECK(r.stationarity == doctest::Approx(1.0));
  CHECK(r.complementary_slackness == doctest::Approx(0.5));
  CHECK(r.overall == doctest::Approx(1.0));
  const auto neg = system_kkt_residual(s, std::vector<double>{1.0}, std::vector<double>{-0.5});
  CHECK(neg.dual_infeasibility == doctest::Approx(0.5));
}

TEST_CASE("lyapunov_V") {
  const Scenario s = single_link();
  const std::vector<double> star{1.0};
  CHECK(lyapunov_V(s, star, star) == 0.0);
  CHECK(lyapunov_V(s, std::vector<double>{0.5}, star) == doctest::Approx(std::log(2.0)));
  CHECK(lyapunov_V(s, std::vector<double>{0.0}, star) == std::numeric_limits<double>::infinity());
}

TEST_CASE("descent_inner_product") {
  const Scenario s = single_link();
  CHECK(descent_inner_product(s, std::vector<double>{0.5}, std::vector<double>{0.5}) == 0.0);
  CHECK(descent_inner_product(s, std::vector<double>{0.5}, std::vector<double>{1.0}) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(descent_inner_product(s, std::vector<double>{0.0}, std::vector<double>{1.0}),
                  InputError);
}

TEST_CASE("discontinuity of T on the nested three-user instance") {
  for (double c : {1.0, 2.0}) {
    const auto demo = appendix_discontinuity_demo(c);
    CHECK(demo.deltas.size() == 6);
    CHECK(demo.deltas.back() == doctest::Approx(1e-6));
    CHECK(max_abs_diff(demo.limit_y, std::vector<double>{c, 0.0, 2 * c}) <= 1e-6);
    CHECK(max_abs_diff(demo.limit_z, std::vector<double>{c, c, c}) <= 1e-6);
    CHECK(demo.distance >= c - 1e-6);
    // Only the first coordinate has a positive price at (c, 0, 0); both
    // limits give it c, so they tie on the subproblem objective there.
    CHECK(demo.limit_y[0] == doctest::Approx(demo.limit_z[0]));
  }
  CHECK_THROWS_AS(appendix_discontinuity_demo(0.0), InputError);
  CHECK_THROWS_AS(appendix_discontinuity_demo(std::nan("")), InputError);
}
