#include <algorithm>
#include <limits>

#include "num/iterate.hpp"

namespace num {

Flow lexicographic_max_point(const RoutingNetwork& net) {
  const std::size_t n = net.users();
  const std::size_t m = net.links();
  Flow x(n, 0.0);
  std::vector<char> frozen(n, 0);
  std::size_t remaining = n;
  double level = 0.0;

  while (remaining > 0) {
    // Every unfrozen user sits at `level`; find the next link to fill up.
    double rise = std::numeric_limits<double>::infinity();
    std::vector<double> headroom(m, 0.0);
    std::vector<std::size_t> active(m, 0);
    for (std::size_t l = 0; l < m; ++l) {
      double load = 0.0;
      for (std::size_t e : net.users_on(l)) {
        load += x[e];
        if (!frozen[e]) ++active[l];
      }
      if (active[l] == 0) continue;
      headroom[l] = (net.capacity(l) - load) / static_cast<double>(active[l]);
      rise = std::min(rise, headroom[l]);
    }
    rise = std::max(rise, 0.0);
    level += rise;
    for (std::size_t e = 0; e < n; ++e) {
      if (!frozen[e]) x[e] = level;
    }
    for (std::size_t l = 0; l < m; ++l) {
      if (active[l] == 0 || headroom[l] > rise * (1.0 + 1e-12)) continue;
      for (std::size_t e : net.users_on(l)) {
        if (!frozen[e]) {
          frozen[e] = 1;
          --remaining;
        }
      }
    }
  }
  return x;
}

}  // namespace num
