#include <cmath>
#include <numeric>
#include <string>

#include "num/errors.hpp"
#include "num/pf_solver.hpp"

namespace num {

namespace {

// True when `mid` lies on or below the chord from `a` to `c` (b strictly
// increasing across the three). The relative slack absorbs rounding in the
// cumulative sums so exactly collinear inputs collapse to one segment.
bool on_or_below_chord(const CoverPoint& a, const CoverPoint& mid, const CoverPoint& c) {
  const double lhs = (mid.p - a.p) * (c.b - a.b);
  const double rhs = (c.p - a.p) * (mid.b - a.b);
  const double scale = std::abs(mid.p - a.p) * (c.b - a.b) + std::abs(c.p - a.p) * (mid.b - a.b);
  return lhs - rhs <= 1e-14 * scale;
}

}  // namespace

ConcaveCover concave_cover(std::span<const CoverPoint> pts) {
  if (pts.size() < 2) throw InputError("concave_cover: need at least two points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].b) || !std::isfinite(pts[i].p)) {
      throw InputError("concave_cover: non-finite point " + std::to_string(i));
    }
    if (i > 0 && pts[i].b < pts[i - 1].b) {
      throw InputError("concave_cover: abscissae must be nondecreasing");
    }
  }
  if (pts.back().b == pts.front().b) throw InputError("concave_cover: chain has zero width");

  std::vector<std::size_t> hull{0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& q = pts[i];
    if (pts[hull.back()].b == q.b) {
      const auto& top = pts[hull.back()];
      if (hull.size() == 1) {
        if (q.p > top.p) throw InputError("concave_cover: vertical segment at the first point");
        if (q.p < top.p) throw InputError("concave_cover: chain drops vertically");
        continue;  // duplicate of the first point
      }
      if (q.p < top.p) throw InputError("concave_cover: chain drops vertically");
      hull.pop_back();
    }
    while (hull.size() >= 2 &&
           on_or_below_chord(pts[hull[hull.size() - 2]], pts[hull.back()], q)) {
      hull.pop_back();
    }
    hull.push_back(i);
  }

  ConcaveCover cover;
  cover.breakpoints = std::move(hull);
  for (std::size_t j = 0; j + 1 < cover.breakpoints.size(); ++j) {
    const auto& a = pts[cover.breakpoints[j]];
    const auto& c = pts[cover.breakpoints[j + 1]];
    cover.slopes.push_back((c.p - a.p) / (c.b - a.b));
  }
  return cover;
}

AscendingSolution string_solve_with_duals(const AscendingInstance& inst) {
  const std::size_t n = inst.alphas.size();
  if (inst.p.size() != n) throw InputError("string_solve: alphas and prices differ in length");
  for (std::size_t e = 0; e < n; ++e) {
    if (!(inst.alphas[e] >= 0.0) || !std::isfinite(inst.alphas[e])) {
      throw InputError("string_solve: alphas must be finite and nonnegative");
    }
    if (!(inst.p[e] >= 0.0) || !std::isfinite(inst.p[e])) {
      throw InputError("string_solve: prices must be finite and nonnegative");
    }
  }
  AscendingSolution sol{Flow(n, 0.0), std::vector<double>(n, 0.0)};
  if (n == 0 || std::accumulate(inst.alphas.begin(), inst.alphas.end(), 0.0) == 0.0) return sol;

  std::vector<CoverPoint> pts(n + 1, CoverPoint{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1] = {pts[i].b + inst.alphas[i], pts[i].p + inst.p[i]};
  }
  const auto cover = concave_cover(pts);
  std::vector<double> slope(n + 1, 0.0);
  for (std::size_t j = 0; j < cover.slopes.size(); ++j) {
    const double s = cover.slopes[j];
    // point i closes stage i, i.e. user i-1
    for (std::size_t i = cover.breakpoints[j] + 1; i <= cover.breakpoints[j + 1]; ++i) {
      sol.x[i - 1] = s > 0.0 ? inst.p[i - 1] / s : 0.0;
      slope[i - 1] = std::max(s, 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) sol.mu[i] = std::max(0.0, slope[i] - slope[i + 1]);
  return sol;
}

Flow string_solve(const AscendingInstance& inst) { return string_solve_with_duals(inst).x; }

}  // namespace num
