#pragma once

// Bounded distance matching between finite one-dimensional patches.
//
// Only the middle of two patches can be compared: a point near the end of a
// coverage interval may need a partner that was never enumerated. Points within
// K + boundary_slack of either end of the common coverage are exempt, i.e. they
// may be matched but are not required to be.

#include "cpset/matching.hpp"
#include "cpset/modelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cpset {

struct BdeResult {
  MatchingResult matching;  // left = pa, right = pb; deficiency counts unmatched core points
  Interval core;
  double k = 0.0;
  double boundary_slack = 0.0;
  double k_observed = 0.0;  // max matched displacement
  long long core_left = 0;
  long long core_right = 0;

  bool perfect_core() const { return matching.deficiency == 0; }
};

inline BdeResult bounded_distance_match(const Patch& pa, const Patch& pb, double k, double boundary_slack) {
  if (!(k > 0.0)) throw std::invalid_argument("K must be positive");
  if (!(boundary_slack >= 0.0)) throw std::invalid_argument("boundary slack must be nonnegative");
  const Interval common{std::max(pa.coverage.lo, pb.coverage.lo), std::min(pa.coverage.hi, pb.coverage.hi)};
  if (common.empty()) throw std::invalid_argument("patch coverages do not overlap");

  BdeResult res;
  res.k = k;
  res.boundary_slack = boundary_slack;
  res.core = {common.lo + k + boundary_slack, common.hi - k - boundary_slack};

  const auto& a = pa.points;
  const auto& b = pb.points;
  std::vector<char> core_a(a.size()), core_b(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) core_a[i] = res.core.contains(a[i].p1);
  for (std::size_t j = 0; j < b.size(); ++j) core_b[j] = res.core.contains(b[j].p1);
  res.core_left = std::count(core_a.begin(), core_a.end(), 1);
  res.core_right = std::count(core_b.begin(), core_b.end(), 1);

  std::vector<std::vector<Edge>> edges(a.size());
  std::vector<std::vector<int>> adj(a.size());
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (lo < b.size() && b[lo].p1 < a[i].p1 - k) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j].p1 <= a[i].p1 + k; ++j) {
      edges[i].push_back({static_cast<int>(j), -1});
      adj[i].push_back(static_cast<int>(j));
    }
  }

  // greedy nearest free neighbor as the starting matching keeps displacements short
  std::vector<int> seed(a.size(), -1);
  std::vector<char> taken(b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!core_a[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int j : adj[i]) {
      const double dist = std::abs(b[static_cast<std::size_t>(j)].p1 - a[i].p1);
      if (!taken[static_cast<std::size_t>(j)] && dist < best) {
        best = dist;
        seed[i] = j;
      }
    }
    if (seed[i] >= 0) taken[static_cast<std::size_t>(seed[i])] = 1;
  }

  const auto nb = static_cast<int>(b.size());
  const auto [ml, mr] = detail::core_matching(adj, nb, core_a, core_b, seed);
  res.matching.pairs = detail::collect_pairs(edges, ml);
  for (const auto& p : res.matching.pairs) {
    const double disp = std::abs(b[static_cast<std::size_t>(p.right)].p1 - a[static_cast<std::size_t>(p.left)].p1);
    if (disp > k) throw std::logic_error("matched displacement exceeds K");
    res.k_observed = std::max(res.k_observed, disp);
  }

  long long free_a = 0, free_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) free_a += core_a[i] && ml[i] < 0;
  for (std::size_t j = 0; j < b.size(); ++j) free_b += core_b[j] && mr[j] < 0;
  res.matching.deficiency = free_a + free_b;
  if (free_a > 0) {
    auto [s, t] = detail::alternating_reach(adj, nb, ml, mr, core_a);
    res.matching.witness_side = Side::left;
    res.matching.witness = std::move(s);
    res.matching.neighbors = std::move(t);
  } else if (free_b > 0) {
    const auto tadj = detail::transpose(adj, nb);
    auto [s, t] = detail::alternating_reach(tadj, static_cast<int>(a.size()), mr, ml, core_b);
    res.matching.witness_side = Side::right;
    res.matching.witness = std::move(s);
    res.matching.neighbors = std::move(t);
  }
  return res;
}

// Progression of the given density, offset 0, covering pa's coverage.
inline Patch equal_density_progression(const Patch& pa, double density) {
  if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
  const double spacing = 1.0 / density;
  return progression_patch(spacing, 0.0,
                           {static_cast<long long>(std::floor(pa.coverage.lo / spacing)) - 1,
                            static_cast<long long>(std::ceil(pa.coverage.hi / spacing)) + 2});
}

// n range [0, n) of a special-form patch holding about `points` points for a window of measure mes
inline IntRange n_range_for_points(long long points, double mes) {
  if (points < 1 || !(mes > 0.0)) throw std::invalid_argument("need a positive point count and measure");
  return {0, static_cast<long long>(std::ceil(static_cast<double>(points) / mes))};
}

struct MinimalK {
  double k = 0.0;      // smallest grid value of K with a perfect core matching
  double step = 0.0;
  bool found = false;  // false when no K up to the coverage length works
  BdeResult at_k;
};

// Binary search over K = i * step with boundary_slack = K. Returns not found
// once the core becomes empty before a perfect matching appears.
inline MinimalK minimal_bde_constant(const Patch& pa, const Patch& pb, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  const double span =
      std::min(pa.coverage.hi, pb.coverage.hi) - std::max(pa.coverage.lo, pb.coverage.lo);
  auto feasible = [&](long long i) {
    const double k = static_cast<double>(i) * step;
    auto r = bounded_distance_match(pa, pb, k, k);
    const bool ok = r.perfect_core() && !r.core.empty();
    return std::make_pair(ok, std::move(r));
  };
  MinimalK out;
  out.step = step;
  long long hi = 1;
  for (;;) {
    if (static_cast<double>(hi) * step * 4.0 > span) return out;
    if (feasible(hi).first) break;
    hi *= 2;
  }
  long long lo = hi / 2;  // infeasible (or zero)
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (feasible(mid).first ? hi : lo) = mid;
  }
  out.found = true;
  out.k = static_cast<double>(hi) * step;
  out.at_k = feasible(hi).second;
  return out;
}

struct CountingDiff {
  long long max_abs = 0;
  double argmax = 0.0;
  std::vector<long long> values;
};

inline CountingDiff counting_diff(const Patch& pa, const Patch& pb, const std::vector<double>& x_grid) {
  CountingDiff out;
  for (double x : x_grid) {
    const long long v = nu(pa, x) - nu(pb, x);
    out.values.push_back(v);
    if (std::abs(v) > out.max_abs || out.values.size() == 1) {
      out.max_abs = std::abs(v);
      out.argmax = x;
    }
  }
  return out;
}

}  // namespace cpset
