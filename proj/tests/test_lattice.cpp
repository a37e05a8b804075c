#include "cpset/lattice.hpp"
#include "cpset/window.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cpset;

namespace {

using Rows = std::vector<std::vector<double>>;

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

LatticeBasis basis2(double a0, double a1, double b0, double b1) { return LatticeBasis(1, 1, Rows{{a0, a1}, {b0, b1}}); }

bool has_kind(const IndependenceReport& r, RelationKind k) {
  return std::any_of(r.violations.begin(), r.violations.end(), [k](const Relation& x) { return x.kind == k; });
}

// exists nonzero c in [-q, q]^2 with |c0 u + c1 v| tiny
bool brute_relation(double u, double v, int q) {
  for (int c0 = -q; c0 <= q; ++c0)
    for (int c1 = -q; c1 <= q; ++c1)
      if ((c0 || c1) && std::abs(c0 * u + c1 * v) < 1e-9) return true;
  return false;
}

}  // namespace

TEST(Lattice, RejectsRankDeficientBasis) {
  try {
    basis2(1.0, 2.0, 2.0, 4.0);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "basis not full rank");
  }
  EXPECT_THROW(LatticeBasis(0, 1, std::vector<std::vector<double>>{{1.0}}), std::invalid_argument);
  EXPECT_THROW(LatticeBasis(1, 1, std::vector<std::vector<double>>{{1.0, 0.0}}), std::invalid_argument);
}

TEST(Lattice, SpecialFormGenerators) {
  const SpecialFormLattice lat{Vec::Constant(1, kSqrt2 - 1.0), Vec::Constant(1, kSqrt3), 0};
  const auto b = lat.basis();
  EXPECT_DOUBLE_EQ(b.vector(0)[0], kSqrt3);
  EXPECT_DOUBLE_EQ(b.vector(0)[1], 1.0);
  EXPECT_DOUBLE_EQ(b.vector(1)[0], 1.0 + kSqrt3 * (kSqrt2 - 1.0));
  EXPECT_DOUBLE_EQ(b.vector(1)[1], kSqrt2 - 1.0);
  // p1 = n + beta (n alpha + m), p2 = n alpha + m
  const IntVec m{4};
  const Vec y = lat.p2(7, m);
  EXPECT_NEAR(y[0], 7 * (kSqrt2 - 1.0) + 4, 1e-12);
  EXPECT_NEAR(lat.p1(7, y), b.point({4, 7})[0], 1e-12);
}

TEST(Lattice, IntegerLatticeIsNotInGeneralPosition) {
  const auto r = check_general_position(basis2(1.0, 0.0, 0.0, 1.0), 5);
  EXPECT_FALSE(r.certified());
  EXPECT_TRUE(has_kind(r, RelationKind::p2_density));
  EXPECT_TRUE(has_kind(r, RelationKind::p1_injectivity));
}

TEST(Lattice, IrrationalSpecialFormCertified) {
  const SpecialFormLattice lat{Vec::Constant(1, kSqrt2 - 1.0), Vec::Constant(1, kSqrt3), 0};
  const auto r = check_general_position(lat.basis(), 50);
  EXPECT_TRUE(r.certified());
  EXPECT_EQ(r.bound_checked, 50);
  EXPECT_EQ(certify_special_form(lat.alpha, lat.beta).independence_bound, kDefaultIndependenceBound);
}

TEST(Lattice, BoundMustBePositive) {
  try {
    check_general_position(basis2(1.0, 0.0, 0.0, 1.0), 0);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "bound must be positive");
  }
}

TEST(Lattice, RelationsMatchBruteForce) {
  std::mt19937_64 rng(7);
  const std::vector<double> irr{kSqrt2, kSqrt3, std::sqrt(5.0), M_PI, std::exp(1.0)};
  std::uniform_int_distribution<int> pick(0, 4), num(1, 6), den(1, 5);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  // second coordinate is a rational or an irrational multiple of the first
  auto pair = [&](bool rational) {
    const double x = scale(rng);
    const double r = static_cast<double>(num(rng)) / den(rng) * (rational ? 1.0 : irr[static_cast<std::size_t>(pick(rng))]);
    return std::make_pair(x, (rng() & 1U ? r : -r) * x);
  };
  int with_relation = 0, total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto [w0, w1] = pair(rng() & 1U);
    const auto [u0, u1] = pair(rng() & 1U);
    if (std::abs(w0 * u1 - w1 * u0) < 1e-3) continue;
    const LatticeBasis b(1, 1, Rows{{w0, u0}, {w1, u1}});
    const int q = 6;
    const auto rep = check_general_position(b, q);
    EXPECT_EQ(has_kind(rep, RelationKind::p2_density), brute_relation(u0, u1, q)) << trial;
    EXPECT_EQ(has_kind(rep, RelationKind::p1_injectivity), brute_relation(w0, w1, q)) << trial;
    with_relation += !rep.certified();
    ++total;
  }
  EXPECT_GT(total, 150);
  EXPECT_GT(with_relation, 40);
}

TEST(Lattice, KernelSplitEmptyForSpecialForm) {
  const auto lat = certify_special_form(Vec::Constant(1, kSqrt2 - 1.0), Vec::Constant(1, kSqrt3));
  const auto s = kernel_split(lat.basis());
  EXPECT_TRUE(s.kernel.empty());
  EXPECT_EQ(s.complement.rank(), 2u);
  EXPECT_EQ(std::abs(s.change_of_basis.cast<double>().determinant()), 1.0);
}

TEST(Lattice, KernelSplitFindsPhysicalDirection) {
  // Z(1, 0) + Z(sqrt2, sqrt3)
  const auto s = kernel_split(basis2(1.0, 0.0, kSqrt2, kSqrt3));
  ASSERT_EQ(s.kernel.rank(), 1u);
  ASSERT_EQ(s.complement.rank(), 1u);
  EXPECT_EQ(std::abs(s.kernel.coeffs[0][0]), 1);
  EXPECT_EQ(s.kernel.coeffs[0][1], 0);
  EXPECT_LT(std::abs(s.kernel.vectors(1, 0)), 1e-12);
  EXPECT_EQ(std::abs(s.complement.coeffs[0][1]), 1);
  EXPECT_NEAR(std::abs(s.complement.vectors(1, 0)), kSqrt3, 1e-12);
  EXPECT_EQ(std::abs(s.change_of_basis.cast<double>().determinant()), 1.0);
}

TEST(Lattice, KernelSplitUnimodularInHigherRank) {
  // m = 2, n = 1: the kernel of p2 has rank 2
  const LatticeBasis b(2, 1, Rows{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.3, 0.7, kSqrt2}});
  const auto s = kernel_split(b, 5);
  EXPECT_EQ(s.kernel.rank(), 2u);
  EXPECT_EQ(s.complement.rank(), 1u);
  for (Eigen::Index j = 0; j < s.kernel.vectors.cols(); ++j) EXPECT_LT(std::abs(s.kernel.vectors(2, j)), 1e-12);
  EXPECT_EQ(std::abs(s.change_of_basis.cast<double>().determinant()), 1.0);

  // kernel generated by (2, 1, 0) in coefficients: saturation must keep it primitive
  const LatticeBasis c(2, 1, Rows{{1.0, 0.0, 1.0}, {0.0, 1.0, -2.0}, {0.5, kSqrt2, kSqrt3}});
  const auto t = kernel_split(c, 5);
  ASSERT_EQ(t.kernel.rank(), 1u);
  EXPECT_EQ(std::abs(t.kernel.coeffs[0][0]), 2);
  EXPECT_EQ(std::abs(t.kernel.coeffs[0][1]), 1);
  EXPECT_EQ(std::abs(t.change_of_basis.cast<double>().determinant()), 1.0);
}

TEST(Lattice, SpecialFormIdentityReduction) {
  const SpecialFormLattice lat{Vec::Constant(1, kSqrt2 - 1.0), Vec::Constant(1, kSqrt3), 0};
  const auto b = lat.basis();
  const auto red = to_special_form(b, check_general_position(b, 20));
  EXPECT_NEAR(red.map.a, 1.0, 1e-12);
  EXPECT_NEAR(red.map.B(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(red.lattice.alpha[0], lat.alpha[0], 1e-12);
  EXPECT_NEAR(red.lattice.beta[0], lat.beta[0], 1e-12);
}

TEST(Lattice, SpecialFormRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int done = 0;
  for (int trial = 0; trial < 200 && done < 40; ++trial) {
    const int d = 1 + trial % 3;
    Mat cols(d + 1, d + 1);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) cols(i, j) = u(rng);
    LatticeBasis b(1, d, cols);
    if (b.condition_number() > 1e3) continue;
    const auto rep = check_general_position(b, 3);
    if (!rep.certified()) continue;
    const auto red = to_special_form(b, rep);
    const auto target = red.lattice.basis();
    for (int j = 0; j <= d; ++j) {
      const Vec mapped = red.map.apply(b.vector(red.order[static_cast<std::size_t>(j)]));
      EXPECT_LT((mapped - target.vector(j)).lpNorm<Eigen::Infinity>(), 1e-9) << "trial " << trial << " j " << j;
    }
    ++done;
  }
  EXPECT_EQ(done, 40);
}

TEST(Lattice, SpecialFormRefusesUncertifiedAndReordersZeroColumn) {
  const auto b = basis2(1.0, 0.0, kSqrt2, kSqrt3);
  const auto rep = check_general_position(b, 5);
  EXPECT_FALSE(rep.certified());
  EXPECT_THROW(to_special_form(b, rep), std::domain_error);
  // with the check bypassed the zero p2 column is moved last
  const auto red = to_special_form(b, IndependenceReport{5, {}});
  EXPECT_EQ(red.order.back(), 0);
  EXPECT_THROW(to_special_form(LatticeBasis(2, 1, Rows{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.3, 0.7, 1.0}}),
                               IndependenceReport{5, {}}),
               std::invalid_argument);
}

TEST(Lattice, LiftWindowPoints) {
  const auto lat = certify_special_form(Vec::Constant(1, kSqrt2 - 1.0), Vec::Constant(1, kSqrt3));
  const auto b = lat.basis();
  const CoeffBox box{{-10, -10}, {10, 10}};
  EXPECT_TRUE(lift_window_points(b, Window::empty(1), box).empty());
  EXPECT_TRUE(lift_window_points(b, Window::interval(0.2, 0.2), box).empty());
  try {
    lift_window_points(b, Window::box(Vec::Constant(1, 0.0), Vec::Constant(1, INFINITY)), box);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "window must be bounded");
  }

  const auto w = Window::interval(-3.0, 4.5);
  const auto pts = lift_window_points(b, w, box);
  std::size_t expected = 0;
  for (long long c0 = -10; c0 <= 10; ++c0)
    for (long long c1 = -10; c1 <= 10; ++c1) {
      const double y = static_cast<double>(c0) + static_cast<double>(c1) * (kSqrt2 - 1.0);
      expected += -3.0 <= y && y < 4.5;
    }
  EXPECT_EQ(pts.size(), expected);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1].point[0], pts[i].point[0]);
  for (const auto& p : pts) EXPECT_LT((b.point(p.coeffs) - p.point).norm(), 1e-12);
}
