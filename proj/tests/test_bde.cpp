#include "cpset/bde.hpp"
#include "cpset/discrepancy.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

using namespace cpset;

namespace {

const double kAlpha = 0.6180339887498949;

SpecialFormLattice golden() {
  return certify_special_form(Vec::Constant(1, kAlpha), Vec::Constant(1, std::sqrt(3.0)));
}

Patch fib_patch(const Window& w, long long points) {
  return generate_patch(golden(), w, n_range_for_points(points, w.measure()));
}

Patch list_patch(std::vector<double> xs, Interval coverage) {
  Patch p;
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i < xs.size(); ++i) p.points.push_back({static_cast<long long>(i), {}, xs[i], Vec(), false});
  p.coverage = coverage;
  return p;
}

// does some matching with |a - b| <= k cover every core point on both sides?
bool brute_core_perfect(const std::vector<double>& a, const std::vector<double>& b, double k, Interval core) {
  std::vector<char> used(b.size(), 0);
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == a.size()) {
      for (std::size_t j = 0; j < b.size(); ++j)
        if (core.contains(b[j]) && !used[j]) return false;
      return true;
    }
    if (!core.contains(a[i]) && go(i + 1)) return true;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || std::abs(a[i] - b[j]) > k) continue;
      used[j] = 1;
      const bool ok = go(i + 1);
      used[j] = 0;
      if (ok) return true;
    }
    return false;
  };
  return go(0);
}

}  // namespace

TEST(Bde, RejectsNonPositiveK) {
  const auto p = progression_patch(1.0, 0.0, {0, 10});
  try {
    bounded_distance_match(p, p, 0.0, 0.0);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "K must be positive");
  }
  EXPECT_THROW(bounded_distance_match(p, p, -1.0, 0.0), std::invalid_argument);
}

TEST(Bde, IdentityMatching) {
  const auto p = fib_patch(Window::interval(0.0, kAlpha), 500);
  for (double k : {0.01, 0.5, 3.0}) {
    const auto r = bounded_distance_match(p, p, k, k);
    EXPECT_TRUE(r.perfect_core());
    EXPECT_EQ(r.k_observed, 0.0);
    for (const auto& pr : r.matching.pairs) EXPECT_EQ(pr.left, pr.right);
  }
}

TEST(Bde, CorePerfectionMatchesBruteForce) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 10.0), kd(0.2, 3.0);
  int perfect = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::uniform_int_distribution<int> n(1, 7);
    std::vector<double> a, b;
    const int na = n(rng), nb = n(rng);
    for (int i = 0; i < na; ++i) a.push_back(u(rng));
    for (int i = 0; i < nb; ++i) b.push_back(u(rng));
    const double k = kd(rng), slack = kd(rng) / 3.0;
    const auto pa = list_patch(a, {0.0, 10.0}), pb = list_patch(b, {0.0, 10.0});
    const auto r = bounded_distance_match(pa, pb, k, slack);
    std::vector<double> sa, sb;
    for (const auto& p : pa.points) sa.push_back(p.p1);
    for (const auto& p : pb.points) sb.push_back(p.p1);
    EXPECT_EQ(r.perfect_core(), brute_core_perfect(sa, sb, k, r.core)) << "trial " << trial;
    EXPECT_LE(r.k_observed, k);
    if (!r.perfect_core()) {
      ASSERT_FALSE(r.matching.witness.empty());
      EXPECT_GT(r.matching.witness.size(), r.matching.neighbors.size());
    }
    perfect += r.perfect_core();
  }
  EXPECT_GT(perfect, 40);
  EXPECT_LT(perfect, 360);
}

TEST(Bde, MatchedDisplacementsRespectK) {
  const auto pa = fib_patch(Window::interval(0.0, kAlpha), 2000);
  const auto pb = equal_density_progression(pa, kAlpha);
  for (double k : {0.3, 1.0, 1.7, 4.0}) {
    const auto r = bounded_distance_match(pa, pb, k, k);
    for (const auto& p : r.matching.pairs)
      EXPECT_LE(std::abs(pb.points[static_cast<std::size_t>(p.right)].p1 - pa.points[static_cast<std::size_t>(p.left)].p1), k);
  }
}

TEST(Bde, GoldenPatchMinimalKIsScaleInvariant) {
  const auto w = Window::interval(0.0, kAlpha);
  const auto small = fib_patch(w, 1000), large = fib_patch(w, 10000);
  const auto k_small = minimal_bde_constant(small, equal_density_progression(small, w.measure()), 1e-3);
  const auto k_large = minimal_bde_constant(large, equal_density_progression(large, w.measure()), 1e-3);
  ASSERT_TRUE(k_small.found);
  ASSERT_TRUE(k_large.found);
  EXPECT_DOUBLE_EQ(k_small.k, k_large.k);
  EXPECT_TRUE(k_large.at_k.perfect_core());
  // one step below fails
  EXPECT_FALSE(bounded_distance_match(large, equal_density_progression(large, w.measure()), k_large.k - 1e-3,
                                      k_large.k - 1e-3)
                   .perfect_core());
}

TEST(Bde, HalfIntervalMinimalKGrows) {
  const auto w = Window::interval(0.0, 0.5);
  const auto small = fib_patch(w, 100), large = fib_patch(w, 10000);
  const auto k_small = minimal_bde_constant(small, equal_density_progression(small, w.measure()), 1e-3);
  const auto k_large = minimal_bde_constant(large, equal_density_progression(large, w.measure()), 1e-3);
  ASSERT_TRUE(k_small.found);
  ASSERT_TRUE(k_large.found);
  EXPECT_GT(k_large.k, k_small.k);
}

TEST(Bde, CountingDiffExamples) {
  const auto w = Window::interval(0.0, kAlpha);
  const auto p = generate_patch(golden(), w, {-5, 2000});
  std::vector<double> grid;
  for (int i = 0; i < 500; ++i) grid.push_back(5.0 + 3.7 * i);
  EXPECT_EQ(counting_diff(p, p, grid).max_abs, 0);
  EXPECT_THROW(counting_diff(p, p, {1e6}), std::out_of_range);
}

TEST(Bde, CountingDiffStableForEqualMeasureBrsWindows) {
  const auto wa = Window::interval(0.0, kAlpha), wb = Window::interval(1.0 - kAlpha, 1.0);
  auto stat = [&](long long n) {
    const auto pa = generate_patch(golden(), wa, {-5, n}), pb = generate_patch(golden(), wb, {-5, n});
    std::vector<double> grid;
    for (double x = 3.0; x < static_cast<double>(n) - 3.0; x += 0.731) grid.push_back(x);
    return counting_diff(pa, pb, grid).max_abs;
  };
  EXPECT_EQ(stat(1000), stat(10000));
}

TEST(Bde, CountingDiffGrowsLinearlyForUnequalMeasures) {
  const auto wa = Window::interval(0.0, 0.5), wb = Window::interval(0.0, 0.3);
  const long long n = 10000;
  const auto pa = generate_patch(golden(), wa, {-5, n}), pb = generate_patch(golden(), wb, {-5, n});
  std::vector<double> grid;
  for (double x = 3.0; x < static_cast<double>(n) - 3.0; x += 1.0) grid.push_back(x);
  const auto cd = counting_diff(pa, pb, grid);
  EXPECT_NEAR(linear_slope(cd.values), 0.2, 0.01);
  auto cd_small = counting_diff(pa, pb, std::vector<double>(grid.begin(), grid.begin() + 1000));
  EXPECT_GT(cd.max_abs, 5 * cd_small.max_abs);
}
