#pragma once

// Oracles and checkers used by the tests, the acceptance suite and the CLI.

#include <vector>

#include "num/model.hpp"
#include "num/oracle.hpp"

namespace num {

/// T evaluated along two sequences converging to (c, 0, 0) on the nested
/// instance y(1) <= c, y(1)+y(2) <= 2c, y(1)+y(2)+y(3) <= 3c with power
/// utilities of exponent 1/2:
///
///   along y: (c, 0, delta)       -> T = (c, 0, 2c)
///   along z: (c, delta, delta)   -> T = (c, c, c)
///
/// delta runs over 1e-1 .. 1e-6 and the last value is taken as the limit.
struct AppendixDemo {
  double c = 0.0;
  std::vector<double> deltas;
  std::vector<Flow> along_y;
  std::vector<Flow> along_z;
  Flow limit_y;
  Flow limit_z;
  double distance = 0.0;  ///< ||limit_y - limit_z||_inf
};

/// The instance used by appendix_discontinuity_demo, as a scenario.
Scenario appendix_scenario(double c);

/// Throws InputError unless c > 0 and finite.
AppendixDemo appendix_discontinuity_demo(double c);

}  // namespace num
