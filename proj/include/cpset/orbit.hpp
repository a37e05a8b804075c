#pragma once

// Enumeration of A and B along a single orbit x + Z alpha + Z^d and the
// translations b_j - a_j it induces.
//
// A^n = A cap (x + n alpha + Z^d) is listed for n in the range with indices
// s_n <= j < s_{n+1}, likewise B^m with t_m. Points sharing an index j are
// paired; since both windows have the same measure, b_j - a_j = e alpha + m with
// e drawn from a finite set.

#include "cpset/numeric.hpp"
#include "cpset/window.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

namespace cpset {

struct OrbitPoint {
  long long fiber = 0;  // n with the point in x + n alpha + Z^d
  Vec point;
  bool near_boundary = false;
};

struct Displacement {
  long long j = 0;
  long long e = 0;
  IntVec m;
  double residual = 0.0;  // |b_j - (a_j + e alpha + m)|
};

struct OrbitEnumeration {
  Vec alpha;
  Vec x;
  double measure = 0.0;
  IntRange n_range;
  std::vector<long long> s;  // s[n - n_range.lo], size n_range.size() + 1
  std::vector<long long> t;  // t[m - n_range.lo] over the B fibers enumerated
  std::vector<OrbitPoint> a_points;
  std::vector<OrbitPoint> b_points;
  long long core = 0;        // pairs j in [0, core) have both a_j and b_j
  long long max_fiber = 0;   // largest #A^n or #B^m seen (plays the role of q)
  long long flagged = 0;     // orbit points within the boundary tolerance

  IntRange b_range() const { return {n_range.lo, n_range.lo + static_cast<long long>(t.size()) - 1}; }
};

namespace detail {

// W cap (base + Z^d) listed lexicographically by the integer shift.
inline std::vector<Vec> fiber_points(const Window& w, const Vec& base) {
  std::vector<Vec> out;
  const auto& bb = w.bounds();
  if (bb.empty()) return out;
  const auto d = base.size();
  IntVec lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    lo[static_cast<std::size_t>(i)] = static_cast<long long>(std::ceil(bb.lo[i] - base[i])) - 1;
    hi[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(bb.hi[i] - base[i])) + 1;
  }
  IntVec z = lo;
  for (;;) {
    Vec y = base + to_real(z);
    if (w.contains(y)) out.push_back(std::move(y));
    // last coordinate fastest so the order is lexicographic
    auto i = static_cast<std::ptrdiff_t>(d) - 1;
    while (i >= 0 && ++z[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)]) {
      z[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

}  // namespace detail

inline constexpr double kMeasureTolerance = 1e-9;

// Enumerates A^n for n in n_range and as many B^m (m >= n_range.lo) as needed
// to pair every a_j, up to twice the range length.
inline OrbitEnumeration orbit_enumerate(const Window& wa, const Window& wb, const Vec& alpha, const Vec& x,
                                        IntRange n_range) {
  wa.require_bounded();
  wb.require_bounded();
  if (wa.dim() != wb.dim() || alpha.size() != wa.dim() || x.size() != wa.dim())
    throw std::invalid_argument("dimension mismatch");
  if (std::abs(wa.measure() - wb.measure()) > kMeasureTolerance)
    throw std::invalid_argument("windows must have equal measure");
  if (n_range.empty()) throw std::invalid_argument("empty n range");

  OrbitEnumeration en;
  en.alpha = alpha;
  en.x = x;
  en.measure = wa.measure();
  en.n_range = n_range;
  en.s.push_back(0);
  en.t.push_back(0);

  auto add_fiber = [&](const Window& w, long long n, std::vector<OrbitPoint>& out, std::vector<long long>& idx) {
    const Vec base = torus_point(x, n, alpha);
    auto pts = detail::fiber_points(w, base);
    for (auto& p : pts) {
      const bool nb = w.membership(p, kTolerance).status == Membership::near_boundary;
      en.flagged += nb;
      out.push_back({n, std::move(p), nb});
    }
    en.max_fiber = std::max(en.max_fiber, static_cast<long long>(pts.size()));
    idx.push_back(idx.back() + static_cast<long long>(pts.size()));
  };

  for (long long n = n_range.lo; n < n_range.hi; ++n) add_fiber(wa, n, en.a_points, en.s);
  const long long need = en.s.back();
  for (long long m = n_range.lo; en.t.back() < need && m < n_range.lo + 2 * n_range.size(); ++m)
    add_fiber(wb, m, en.b_points, en.t);
  en.core = std::min(need, en.t.back());
  return en;
}

struct TranslationSpread {
  std::set<long long> e_values;
  std::vector<Displacement> records;
  double k1 = 0.0;  // max |m - t_m / mes B|, |s_n / mes A - n|
  double k2 = 0.0;  // max |t_m / mes B - s_n / mes A|
  double max_residual = 0.0;
  bool within_bound = true;  // every |e| <= 2 K1 + K2
};

inline constexpr long long kDefaultEScan = 1000;

// Solves b_j - a_j = e alpha + m for each paired j by scanning e = 0, 1, -1,
// 2, ... and rounding the Z^d part.
inline TranslationSpread translation_spread(const OrbitEnumeration& en, long long e_scan = kDefaultEScan,
                                            double tolerance = kTolerance) {
  TranslationSpread sp;
  const auto d = en.alpha.size();
  std::size_t fa = 0, fb = 0;  // current fiber offsets into s and t
  for (long long j = 0; j < en.core; ++j) {
    const auto& a = en.a_points[static_cast<std::size_t>(j)];
    const auto& b = en.b_points[static_cast<std::size_t>(j)];
    const Vec diff = b.point - a.point;
    bool solved = false;
    for (long long step = 0; step <= 2 * e_scan && !solved; ++step) {
      const long long e = step % 2 == 0 ? step / 2 : -(step + 1) / 2;
      const Vec rest = diff - static_cast<double>(e) * en.alpha;
      IntVec m(static_cast<std::size_t>(d));
      Vec mr(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        m[static_cast<std::size_t>(i)] = std::llround(rest[i]);
        mr[i] = static_cast<double>(m[static_cast<std::size_t>(i)]);
      }
      const double res = (rest - mr).lpNorm<Eigen::Infinity>();
      if (res < tolerance) {
        sp.records.push_back({j, e, std::move(m), res});
        sp.e_values.insert(e);
        sp.max_residual = std::max(sp.max_residual, res);
        solved = true;
      }
    }
    if (!solved) throw std::runtime_error("displacement not in Z alpha + Z^d");

    while (en.s[fa + 1] <= j) ++fa;
    while (en.t[fb + 1] <= j) ++fb;
    // fiber indices counted from n_range.lo, where s and t start at 0
    const double n = static_cast<double>(fa), m = static_cast<double>(fb);
    const double sn = static_cast<double>(en.s[fa]) / en.measure;
    const double tm = static_cast<double>(en.t[fb]) / en.measure;
    sp.k1 = std::max({sp.k1, std::abs(m - tm), std::abs(sn - n)});
    sp.k2 = std::max(sp.k2, std::abs(tm - sn));
  }
  for (const auto& r : sp.records)
    sp.within_bound = sp.within_bound && static_cast<double>(std::abs(r.e)) <= 2.0 * sp.k1 + sp.k2 + kTolerance;
  return sp;
}

}  // namespace cpset
