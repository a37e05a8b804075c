#pragma once

// Shared numeric vocabulary: vector types, tolerances, torus reduction and
// reproducible random streams.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpset {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = std::vector<long long>;

// absolute tolerance for real comparisons unless an operation says otherwise
inline constexpr double kTolerance = 1e-9;

// half-open integer range [lo, hi)
struct IntRange {
  long long lo = 0;
  long long hi = 0;

  long long size() const { return hi > lo ? hi - lo : 0; }
  bool empty() const { return hi <= lo; }
  bool contains(long long v) const { return lo <= v && v < hi; }
};

// closed real interval [lo, hi]; empty when lo > hi
struct Interval {
  double lo = 0.0;
  double hi = -1.0;

  bool empty() const { return !(lo <= hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double length() const { return empty() ? 0.0 : hi - lo; }
};

inline double frac(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

// {x + k*a} without losing the low-order digits of k*a: the product is split
// into p + e exactly (p - floor(p) is exact), so the error stays at a few ulps
// of 1 even for k ~ 1e7.
inline double orbit_coordinate(double x, long long k, double a) {
  const double kd = static_cast<double>(k);
  const double p = kd * a;
  const double e = std::fma(kd, a, -p);
  double r = (p - std::floor(p)) + e;
  r += frac(x);
  return frac(r);
}

inline Vec torus_point(const Vec& x, long long k, const Vec& alpha) {
  Vec y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = orbit_coordinate(x[i], k, alpha[i]);
  return y;
}

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline Vec to_real(const IntVec& v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = static_cast<double>(v[i]);
  return r;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// splitmix64 finalizer; used to derive independent stream seeds
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  // uniform on [0, 1) with 53 random bits; independent of the standard
  // library's distribution implementations
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline const std::vector<int>& small_primes() {
  static const std::vector<int> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  return primes;
}

}  // namespace cpset
