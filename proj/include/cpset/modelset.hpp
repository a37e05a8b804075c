#pragma once

// Finite patches of one-dimensional model sets Lambda(Gamma, W) and their
// counting function.
//
// A patch only knows the points it enumerated. For a special form lattice a
// point with index n satisfies |p1 - n| <= C with C = sup |beta^T W|, so the
// patch edges are incomplete; `coverage` is the p1 interval in which the
// enumeration is provably complete and every count query is checked against it.

#include "cpset/lattice.hpp"
#include "cpset/numeric.hpp"
#include "cpset/window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cpset {

inline constexpr double kBoundaryEpsilon = 1e-9;

struct PatchPoint {
  long long n = 0;
  IntVec m;
  double p1 = 0.0;
  Vec p2;
  bool near_boundary = false;
};

struct Patch {
  std::vector<PatchPoint> points;  // sorted by p1, ties by (n, m)
  std::optional<SpecialFormLattice> lattice;
  std::optional<Window> window;
  IntRange n_range;
  Interval coverage;
  double min_gap = std::numeric_limits<double>::infinity();

  std::size_t size() const { return points.size(); }
  std::size_t flagged() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const PatchPoint& p) { return p.near_boundary; }));
  }
};

namespace detail {

inline void finalize_patch(Patch& patch) {
  std::sort(patch.points.begin(), patch.points.end(), [](const PatchPoint& a, const PatchPoint& b) {
    if (a.p1 != b.p1) return a.p1 < b.p1;
    if (a.n != b.n) return a.n < b.n;
    return a.m < b.m;
  });
  patch.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < patch.points.size(); ++i)
    patch.min_gap = std::min(patch.min_gap, patch.points[i].p1 - patch.points[i - 1].p1);
}

// range of beta^T y over the bounding box of W
inline Interval projected_range(const Vec& beta, const Window& w) {
  if (w.bounds().empty()) return {0.0, 0.0};
  double lo = 0.0, hi = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double a = beta[i] * w.bounds().lo[i], b = beta[i] * w.bounds().hi[i];
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

}  // namespace detail

inline Patch generate_patch(const SpecialFormLattice& lat, const Window& w, IntRange n_range) {
  w.require_bounded();
  const int d = lat.dim();
  if (w.dim() != d) throw std::invalid_argument("window dimension must match alpha");
  Patch patch;
  patch.lattice = lat;
  patch.window = w;
  patch.n_range = n_range;
  const Interval slack = detail::projected_range(lat.beta, w);
  patch.coverage = {static_cast<double>(n_range.lo) + slack.hi, static_cast<double>(n_range.hi - 1) + slack.lo};
  if (n_range.empty() || w.bounds().empty()) {
    detail::finalize_patch(patch);
    return patch;
  }
  const auto& bb = w.bounds();
  IntVec lo(d), hi(d), m(d);
  for (long long n = n_range.lo; n < n_range.hi; ++n) {
    bool empty = false;
    for (int i = 0; i < d; ++i) {
      const double z = static_cast<double>(n) * lat.alpha[i];
      lo[i] = static_cast<long long>(std::ceil(bb.lo[i] - z)) - 1;
      hi[i] = static_cast<long long>(std::floor(bb.hi[i] - z)) + 1;
      empty = empty || hi[i] < lo[i];
      m[i] = lo[i];
    }
    if (empty) continue;
    for (;;) {
      Vec y = lat.p2(n, m);
      const auto verdict = w.membership(y, kBoundaryEpsilon);
      if (verdict.member) {
        const double p1 = lat.p1(n, y);
        patch.points.push_back({n, m, p1, std::move(y), verdict.status == Membership::near_boundary});
      }
      int i = 0;
      while (i < d && ++m[i] > hi[i]) {
        m[i] = lo[i];
        ++i;
      }
      if (i == d) break;
    }
  }
  detail::finalize_patch(patch);
  return patch;
}

// Arithmetic progression offset + j * spacing, j in j_range, as a patch.
inline Patch progression_patch(double spacing, double offset, IntRange j_range) {
  if (!(spacing > 0.0)) throw std::invalid_argument("progression spacing must be positive");
  Patch patch;
  patch.n_range = j_range;
  patch.coverage = {offset + static_cast<double>(j_range.lo) * spacing,
                    offset + static_cast<double>(j_range.hi - 1) * spacing};
  for (long long j = j_range.lo; j < j_range.hi; ++j)
    patch.points.push_back({j, {}, offset + static_cast<double>(j) * spacing, Vec(), false});
  detail::finalize_patch(patch);
  return patch;
}

// Enumeration from an arbitrary basis with physical dimension 1. The last basis
// coefficient is reported as n and the others as m, which matches the
// generator order of SpecialFormLattice::basis().
inline Patch generate_patch_general(const LatticeBasis& basis, const Window& w, Interval p1_box) {
  w.require_bounded();
  if (basis.m() != 1) throw std::invalid_argument("patch enumeration requires physical dimension 1");
  if (w.dim() != basis.n()) throw std::invalid_argument("window dimension must equal n");
  if (basis.condition_number() > 1e12) throw std::domain_error("basis too degenerate to enumerate");
  Patch patch;
  patch.window = w;
  patch.coverage = p1_box;
  const int k = basis.rank();
  if (p1_box.empty() || w.bounds().empty()) {
    patch.n_range = {0, 0};
    detail::finalize_patch(patch);
    return patch;
  }
  Vec zlo(k), zhi(k);
  zlo[0] = p1_box.lo;
  zhi[0] = p1_box.hi;
  zlo.tail(k - 1) = w.bounds().lo;
  zhi.tail(k - 1) = w.bounds().hi;
  const Mat inv = basis.matrix().inverse();
  IntVec lo(k), hi(k);
  for (int i = 0; i < k; ++i) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j < k; ++j) {
      const double u = inv(i, j) * zlo[j], v = inv(i, j) * zhi[j];
      a += std::min(u, v);
      b += std::max(u, v);
    }
    lo[i] = static_cast<long long>(std::floor(a)) - 1;
    hi[i] = static_cast<long long>(std::ceil(b)) + 1;
  }
  long long nmin = std::numeric_limits<long long>::max(), nmax = std::numeric_limits<long long>::min();
  IntVec c = lo;
  for (;;) {
    const Vec pt = basis.point(c);
    if (p1_box.contains(pt[0])) {
      Vec y = pt.tail(k - 1);
      const auto verdict = w.membership(y, kBoundaryEpsilon);
      if (verdict.member) {
        const long long n = c[k - 1];
        nmin = std::min(nmin, n);
        nmax = std::max(nmax, n);
        patch.points.push_back({n, IntVec(c.begin(), c.end() - 1), pt[0], std::move(y),
                                verdict.status == Membership::near_boundary});
      }
    }
    int i = 0;
    while (i < k && ++c[i] > hi[i]) {
      c[i] = lo[i];
      ++i;
    }
    if (i == k) break;
  }
  patch.n_range = patch.points.empty() ? IntRange{0, 0} : IntRange{nmin, nmax + 1};
  detail::finalize_patch(patch);
  return patch;
}

// nu(Lambda, x) = #(Lambda cap [0, x)) for x >= 0 and -#(Lambda cap [x, 0)) for x < 0.
inline long long nu(const Patch& patch, double x) {
  const double a = std::min(0.0, x), b = std::max(0.0, x);
  if (patch.coverage.empty() || a < patch.coverage.lo || b > patch.coverage.hi)
    throw std::out_of_range("coverage exceeded");
  auto below = [&](double v) {
    return std::partition_point(patch.points.begin(), patch.points.end(),
                                [v](const PatchPoint& p) { return p.p1 < v; }) -
           patch.points.begin();
  };
  const auto count = static_cast<long long>(below(b) - below(a));
  return x >= 0.0 ? count : -count;
}

// g(N) = nu(Lambda(Gamma, W), N) - sum_{n<N} chi_W(n alpha), N = 1..n_max.
inline std::vector<long long> counting_formula_gap(const SpecialFormLattice& lat, const Window& w, long long n_max) {
  if (n_max < 1) throw std::invalid_argument("N_max must be positive");
  w.require_bounded();
  const Interval slack = detail::projected_range(lat.beta, w);
  const long long n0 = static_cast<long long>(std::floor(-slack.hi)) - 1;
  const long long n1 = static_cast<long long>(std::ceil(static_cast<double>(n_max) + 1.0 - slack.lo)) + 1;
  const Patch patch = generate_patch(lat, w, {std::min(n0, 0LL), std::max(n1, n_max)});
  if (patch.coverage.empty() || patch.coverage.lo > 0.0 || patch.coverage.hi < static_cast<double>(n_max))
    throw std::out_of_range("coverage exceeded");

  const Vec origin = Vec::Zero(lat.dim());
  std::vector<long long> gap(static_cast<std::size_t>(n_max));
  long long chi_sum = 0;
  for (long long N = 1; N <= n_max; ++N) {
    chi_sum += w.chi(torus_point(origin, N - 1, lat.alpha));
    gap[static_cast<std::size_t>(N - 1)] = nu(patch, static_cast<double>(N)) - chi_sum;
  }
  return gap;
}

}  // namespace cpset
