#pragma once

// Birkhoff sums of chi_W along the rotation x -> x + alpha on the torus.

#include "cpset/numeric.hpp"
#include "cpset/window.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpset {

struct DiscrepancyProfile {
  Vec alpha;
  std::string window_id;
  Vec x;
  double measure = 0.0;
  std::vector<long long> counts;      // sum_{k<N} chi_W(x + k alpha)
  std::vector<double> values;         // D(N) = counts[N-1] - N mes W
  std::vector<double> running_max;    // max_{N' <= N} |D(N')|

  long long n_max() const { return static_cast<long long>(values.size()); }
};

inline DiscrepancyProfile discrepancy_profile(const Window& w, const Vec& alpha, const Vec& x, long long n_max,
                                              std::string window_id = {}) {
  w.require_bounded();
  if (n_max < 1) throw std::invalid_argument("N_max must be positive");
  if (alpha.size() != w.dim() || x.size() != w.dim()) throw std::invalid_argument("dimension mismatch");
  DiscrepancyProfile p{alpha, std::move(window_id), x, w.measure(), {}, {}, {}};
  const auto n = static_cast<std::size_t>(n_max);
  p.counts.resize(n);
  p.values.resize(n);
  p.running_max.resize(n);
  long long c = 0;
  double best = 0.0;
  for (long long N = 1; N <= n_max; ++N) {
    c += w.chi(torus_point(x, N - 1, alpha));
    const auto i = static_cast<std::size_t>(N - 1);
    p.counts[i] = c;
    p.values[i] = static_cast<double>(c) - static_cast<double>(N) * p.measure;
    best = std::max(best, std::abs(p.values[i]));
    p.running_max[i] = best;
  }
  return p;
}

// sup over n in [1, n_max], j in j_range of |sum_{k=j+1}^{j+n} chi_W(x + k alpha) - n mes W|.
// With j_range = {-1} this is the running maximum of the one-sided profile.
inline double two_sided_scan(const Window& w, const Vec& alpha, const Vec& x, long long n_max, IntRange j_range) {
  w.require_bounded();
  if (n_max < 1) throw std::invalid_argument("N_max must be positive");
  if (j_range.empty()) return 0.0;
  const double mes = w.measure();
  // prefix[i] = sum_{k=j0+1}^{j0+i} (chi - mes), i = 0..len-1
  const long long len = j_range.size() + n_max;
  std::vector<double> prefix(static_cast<std::size_t>(len));
  long long c = 0;
  prefix[0] = 0.0;
  for (long long i = 1; i < len; ++i) {
    c += w.chi(torus_point(x, j_range.lo + i, alpha));
    prefix[static_cast<std::size_t>(i)] = static_cast<double>(c) - static_cast<double>(i) * mes;
  }
  // sliding max/min of prefix over (j, j + n_max]
  std::deque<long long> hi, lo;
  double best = 0.0;
  long long next = 1;
  for (long long j = 0; j < j_range.size(); ++j) {
    const long long end = j + n_max;
    for (; next <= end; ++next) {
      const double v = prefix[static_cast<std::size_t>(next)];
      while (!hi.empty() && prefix[static_cast<std::size_t>(hi.back())] <= v) hi.pop_back();
      while (!lo.empty() && prefix[static_cast<std::size_t>(lo.back())] >= v) lo.pop_back();
      hi.push_back(next);
      lo.push_back(next);
    }
    while (hi.front() <= j) hi.pop_front();
    while (lo.front() <= j) lo.pop_front();
    const double base = prefix[static_cast<std::size_t>(j)];
    best = std::max({best, prefix[static_cast<std::size_t>(hi.front())] - base,
                     base - prefix[static_cast<std::size_t>(lo.front())]});
  }
  return best;
}

enum class BrsEvidence { bounded_evidence, growth_evidence };

struct BrsVerdict {
  BrsEvidence evidence = BrsEvidence::bounded_evidence;
  long long split = 0;
  long long n_max = 0;
  double max_at_split = 0.0;
  double max_at_end = 0.0;
  double tolerance = 0.0;
};

// The running maximum of a bounded profile still creeps upward as the orbit
// approaches the window boundary (increments shrink like 1/N); an unbounded
// profile gains whole counts. The default tolerance sits between the two.
inline constexpr double kDefaultStabilizationTolerance = 0.1;

inline BrsVerdict brs_classify(const DiscrepancyProfile& profile, long long split,
                               double tolerance = kDefaultStabilizationTolerance) {
  if (split < 1 || split >= profile.n_max()) throw std::invalid_argument("split must lie in [1, N_max)");
  BrsVerdict v;
  v.split = split;
  v.n_max = profile.n_max();
  v.max_at_split = profile.running_max[static_cast<std::size_t>(split - 1)];
  v.max_at_end = profile.running_max.back();
  v.tolerance = tolerance;
  v.evidence = v.max_at_end <= v.max_at_split + tolerance ? BrsEvidence::bounded_evidence
                                                          : BrsEvidence::growth_evidence;
  return v;
}

// per_axis^d points x = (i + {sqrt p_axis}) / per_axis; the irrational offsets
// keep the grid off rational boundaries and off Z alpha + Z^d.
inline std::vector<Vec> default_x_grid(int d, int per_axis = 17) {
  if (d < 1 || d > static_cast<int>(small_primes().size())) throw std::invalid_argument("unsupported grid dimension");
  std::vector<Vec> grid;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Vec x(d);
    for (int a = 0; a < d; ++a)
      x[a] = (idx[static_cast<std::size_t>(a)] + frac(std::sqrt(static_cast<double>(small_primes()[a])))) / per_axis;
    grid.push_back(x);
    int a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] == per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return grid;
}

struct GridBrsVerdict {
  BrsEvidence evidence = BrsEvidence::bounded_evidence;
  std::vector<Vec> grid;
  std::vector<BrsVerdict> verdicts;
};

// Growth at any grid point is evidence against boundedness almost everywhere.
inline GridBrsVerdict brs_classify_grid(const Window& w, const Vec& alpha, long long n_max, long long split,
                                        const std::vector<Vec>& grid,
                                        double tolerance = kDefaultStabilizationTolerance) {
  GridBrsVerdict out;
  out.grid = grid;
  for (const auto& x : grid) {
    const auto v = brs_classify(discrepancy_profile(w, alpha, x, n_max), split, tolerance);
    if (v.evidence == BrsEvidence::growth_evidence) out.evidence = BrsEvidence::growth_evidence;
    out.verdicts.push_back(v);
  }
  return out;
}

struct PairGapProfile {
  Vec alpha;
  Vec x;
  std::vector<long long> values;       // S_N = sum_{n<N} (chi_W - chi_W')(x + n alpha)
  std::vector<long long> running_max;  // max_{N' <= N} |S_N'|
};

inline PairGapProfile pair_gap_profile(const Window& w, const Window& w2, const Vec& alpha, const Vec& x,
                                       long long n_max) {
  w.require_bounded();
  w2.require_bounded();
  if (n_max < 1) throw std::invalid_argument("N_max must be positive");
  if (w.dim() != w2.dim()) throw std::invalid_argument("windows must share a dimension");
  PairGapProfile p{alpha, x, {}, {}};
  p.values.reserve(static_cast<std::size_t>(n_max));
  p.running_max.reserve(static_cast<std::size_t>(n_max));
  long long s = 0, best = 0;
  for (long long N = 1; N <= n_max; ++N) {
    const Vec y = torus_point(x, N - 1, alpha);
    s += w.chi(y) - w2.chi(y);
    best = std::max(best, std::abs(s));
    p.values.push_back(s);
    p.running_max.push_back(best);
  }
  return p;
}

// Least-squares slope of values[i] against N = i + 1 (with intercept).
template <class T>
double linear_slope(const std::vector<T>& values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 2) throw std::invalid_argument("slope needs at least two values");
  const double mean_x = (n + 1.0) / 2.0;
  double mean_y = 0.0;
  for (const auto& v : values) mean_y += static_cast<double>(v);
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - mean_x;
    sxy += dx * (static_cast<double>(values[i]) - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct UniformityReport {
  std::vector<Vec> generators;
  std::vector<int> k_values;
  std::vector<long long> min_counts;  // min over sampled x of |W cap (P_k + x)|
  std::vector<double> ratios;         // min_counts / k^r
  double c_estimate = 0.0;
  std::optional<int> k0_estimate;
  int x_samples = 0;
  std::uint64_t seed = 0;
};

// For P_k = {sum_j m_j g_j : 0 <= m_j < k} counts the points of P_k + x lying
// in W (with multiplicity chi_W) for k = 1..k_max. Counts for P_k are built
// from P_{k-1} by adding the shell where max_j m_j = k - 1.
inline UniformityReport uniformity_scan(const Window& w, const std::vector<Vec>& generators, int k_max, int x_samples,
                                        std::uint64_t seed) {
  w.require_bounded();
  if (k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  if (x_samples < 1) throw std::invalid_argument("need at least one sample point");
  if (generators.empty()) throw std::invalid_argument("need at least one generator");
  const int d = w.dim();
  for (const auto& g : generators)
    if (g.size() != d) throw std::invalid_argument("generator dimension mismatch");
  const int r = static_cast<int>(generators.size());

  UniformityReport rep;
  rep.generators = generators;
  rep.x_samples = x_samples;
  rep.seed = seed;
  std::vector<long long> mins(static_cast<std::size_t>(k_max), std::numeric_limits<long long>::max());

  RandomStream rng(seed, 0);
  Vec y(d);
  std::vector<long long> m(static_cast<std::size_t>(r));
  for (int s = 0; s < x_samples; ++s) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform();
    long long count = 0;
    for (int k = 1; k <= k_max; ++k) {
      // shell: first axis t with m_t = k-1; axes before t range over [0, k-1), after over [0, k)
      for (int t = 0; t < r; ++t) {
        std::vector<long long> lim(static_cast<std::size_t>(r));
        bool empty = false;
        for (int a = 0; a < r; ++a) {
          lim[static_cast<std::size_t>(a)] = a < t ? k - 1 : (a == t ? 1 : k);
          empty = empty || lim[static_cast<std::size_t>(a)] == 0;
        }
        if (empty) continue;
        std::fill(m.begin(), m.end(), 0);
        for (;;) {
          for (int i = 0; i < d; ++i) {
            double acc = x[i];
            for (int a = 0; a < r; ++a) {
              const long long ma = a == t ? k - 1 : m[static_cast<std::size_t>(a)];
              acc += orbit_coordinate(0.0, ma, generators[static_cast<std::size_t>(a)][i]);
            }
            y[i] = frac(acc);
          }
          count += w.chi(y);
          int a = 0;
          while (a < r && ++m[static_cast<std::size_t>(a)] >= lim[static_cast<std::size_t>(a)]) {
            m[static_cast<std::size_t>(a)] = 0;
            ++a;
          }
          if (a == r) break;
        }
      }
      auto& slot = mins[static_cast<std::size_t>(k - 1)];
      slot = std::min(slot, count);
    }
  }

  for (int k = 1; k <= k_max; ++k) {
    rep.k_values.push_back(k);
    const long long c = mins[static_cast<std::size_t>(k - 1)];
    rep.min_counts.push_back(c);
    rep.ratios.push_back(static_cast<double>(c) / std::pow(static_cast<double>(k), r));
  }
  double c = std::numeric_limits<double>::infinity();
  for (int k = (k_max + 1) / 2; k <= k_max; ++k) c = std::min(c, rep.ratios[static_cast<std::size_t>(k - 1)]);
  rep.c_estimate = std::max(c, 0.0);
  if (rep.c_estimate > 0.0) {
    int k0 = 0;
    for (int k = 1; k <= k_max; ++k)
      if (rep.ratios[static_cast<std::size_t>(k - 1)] < rep.c_estimate) k0 = k;
    rep.k0_estimate = k0;
  }
  return rep;
}

}  // namespace cpset
