#include <cmath>

#include "num/diagnostics.hpp"
#include "num/errors.hpp"
#include "num/pf_solver.hpp"
#include "num/random_scenario.hpp"

namespace num {

Scenario appendix_scenario(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("capacity unit c must be positive and finite");
  return make_flow_aggregating({c, 2.0 * c, 3.0 * c}, std::vector<Utility>(3, Utility::power(0.5)),
                               "nested three-user instance");
}

AppendixDemo appendix_discontinuity_demo(double c) {
  const Scenario s = appendix_scenario(c);
  auto T = [&](const Flow& x) { return string_solve({{c, c, c}, prices(s, x)}); };

  AppendixDemo demo;
  demo.c = c;
  for (int k = 1; k <= 6; ++k) {
    const double delta = std::pow(10.0, -k);
    demo.deltas.push_back(delta);
    demo.along_y.push_back(T({c, 0.0, delta}));
    demo.along_z.push_back(T({c, delta, delta}));
  }
  demo.limit_y = demo.along_y.back();
  demo.limit_z = demo.along_z.back();
  demo.distance = max_abs_diff(demo.limit_y, demo.limit_z);
  return demo;
}

}  // namespace num
