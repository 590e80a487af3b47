#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "objectives.hpp"

namespace vnfp {

using Point3 = std::array<double, 3>;

inline Point3 to_point(const ObjectiveVector& o) { return {o.latency, o.loss, o.energy}; }

// Per-objective best (utopian) and worst (nadir) over a comparison set.
struct Bounds {
  Point3 utopian{}, nadir{};
};

inline Bounds estimate_bounds(const std::vector<Point3>& points) {
  if (points.empty()) throw std::invalid_argument("estimate_bounds: empty comparison set");
  Bounds b{points[0], points[0]};
  for (const auto& p : points)
    for (int d = 0; d < 3; ++d) {
      b.utopian[d] = std::min(b.utopian[d], p[d]);
      b.nadir[d] = std::max(b.nadir[d], p[d]);
    }
  return b;
}

inline Bounds estimate_bounds(const std::vector<ObjectiveVector>& objectives) {
  std::vector<Point3> pts;
  pts.reserve(objectives.size());
  for (const auto& o : objectives) pts.push_back(to_point(o));
  return estimate_bounds(pts);
}

// Affine map onto [0,1] per objective, clipped. An objective the comparison
// set never varies maps to 0 so it cannot distort the hypervolume.
inline Point3 normalize(const Point3& p, const Bounds& b) {
  Point3 out{};
  for (int d = 0; d < 3; ++d) {
    const double span = b.nadir[d] - b.utopian[d];
    out[d] = span > 0.0 ? std::clamp((p[d] - b.utopian[d]) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

inline std::vector<Point3> normalize(const std::vector<Point3>& front, const Bounds& b) {
  std::vector<Point3> out;
  out.reserve(front.size());
  for (const auto& p : front) out.push_back(normalize(p, b));
  return out;
}

// Exact hypervolume of a normalized 3-objective front against reference
// (1,1,1), minimization. Sweeps the points by ascending third coordinate
// while maintaining the 2-D staircase of the first two; each slab
// contributes staircase area x slab height. Dominated points fall out
// naturally; anything outside [0,1]^3 is clipped first.
inline double hypervolume(std::vector<Point3> front) {
  for (auto& p : front)
    for (double& x : p) x = std::clamp(x, 0.0, 1.0);
  front.erase(std::remove_if(front.begin(), front.end(),
                             [](const Point3& p) {
                               return p[0] >= 1.0 || p[1] >= 1.0 || p[2] >= 1.0;
                             }),
              front.end());
  if (front.empty()) return 0.0;
  std::sort(front.begin(), front.end(),
            [](const Point3& a, const Point3& b) { return a[2] < b[2]; });

  // stair: (x, y) pairs sorted by x ascending, y strictly descending.
  std::vector<std::pair<double, double>> stair;
  auto stair_area = [&stair]() {
    double area = 0.0;
    for (std::size_t i = 0; i < stair.size(); ++i) {
      const double next_x = i + 1 < stair.size() ? stair[i + 1].first : 1.0;
      area += (next_x - stair[i].first) * (1.0 - stair[i].second);
    }
    return area;
  };
  auto insert = [&stair](double x, double y) {
    auto it = std::lower_bound(stair.begin(), stair.end(), x,
                               [](const auto& s, double v) { return s.first < v; });
    if (it != stair.begin() && std::prev(it)->second <= y) return;  // dominated in 2-D
    it = stair.insert(it, {x, y});
    auto tail = std::next(it);
    while (tail != stair.end() && tail->second >= y) tail = stair.erase(tail);
  };

  double volume = 0.0;
  double z = front[0][2];
  for (const auto& p : front) {
    if (p[2] > z) {
      volume += stair_area() * (p[2] - z);
      z = p[2];
    }
    insert(p[0], p[1]);
  }
  volume += stair_area() * (1.0 - z);
  return volume;
}

// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value via the normal
// approximation with tie correction and no continuity correction. Fully
// tied inputs (zero variance) report p = 1.
inline double rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("rank_sum_p: empty sample");
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;

  std::vector<std::pair<double, int>> all;
  all.reserve(a.size() + b.size());
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end());

  double rank_sum_a = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 0) rank_sum_a += avg_rank;
    tie_term += t * t * t - t;
    i = j;
  }

  const double u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double zscore = (u - mean) / std::sqrt(var);
  return std::erfc(std::abs(zscore) / std::sqrt(2.0));
}

}  // namespace vnfp
