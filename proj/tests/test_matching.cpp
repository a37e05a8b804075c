#include "cpset/matching.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace cpset;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

std::vector<Vec> points1(const std::vector<double>& xs) {
  std::vector<Vec> out;
  for (double x : xs) out.push_back(v1(x));
  return out;
}

std::vector<Translation> shifts1(const std::vector<double>& fs) {
  std::vector<Translation> out;
  for (double f : fs) out.push_back(Translation::vector(v1(f)));
  return out;
}

// random 1-d instance on integer points with integer shifts
struct RandomInstance {
  BipartiteInstance inst;
  std::vector<std::vector<int>> adj;  // brute-force adjacency
};

RandomInstance random_instance(std::mt19937_64& rng, int max_left, int max_right) {
  std::uniform_int_distribution<int> nl(1, max_left), nr(1, max_right), pos(0, 12), nf(0, 3), sh(-3, 3);
  std::vector<double> l, r, f;
  const int a = nl(rng), b = nr(rng), c = nf(rng);
  for (int i = 0; i < a; ++i) l.push_back(pos(rng));
  for (int i = 0; i < b; ++i) r.push_back(pos(rng));
  std::set<int> fs;
  for (int i = 0; i < c; ++i) fs.insert(sh(rng));
  for (int v : fs) f.push_back(v);
  RandomInstance out;
  out.inst = build_instance(points1(l), points1(r), shifts1(f), Vec(), 0.25);
  out.adj.resize(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j)
      for (double s : f)
        if (std::abs(r[j] - (l[i] + s)) <= 0.25) {
          out.adj[i].push_back(static_cast<int>(j));
          break;
        }
  return out;
}

void expect_valid_matching(const BipartiteInstance& inst, const MatchingResult& r) {
  std::set<int> ls, rs;
  for (const auto& p : r.pairs) {
    EXPECT_TRUE(ls.insert(p.left).second);
    EXPECT_TRUE(rs.insert(p.right).second);
    const Vec diff = inst.right[static_cast<std::size_t>(p.right)] - inst.left[static_cast<std::size_t>(p.left)] -
                     inst.resolved[static_cast<std::size_t>(p.label)];
    EXPECT_LE(diff.norm(), inst.tolerance);
  }
}

void expect_konig_certificate(const BipartiteInstance& inst, const MatchingResult& r) {
  if (r.deficiency == 0) {
    EXPECT_TRUE(r.witness.empty());
    return;
  }
  ASSERT_FALSE(r.witness.empty());
  const auto nb = neighborhood(inst, r.witness_side, r.witness);
  EXPECT_EQ(nb, r.neighbors);
  // the cut is tight: |S| - |N(S)| equals the deficiency
  EXPECT_EQ(static_cast<long long>(r.witness.size()) - static_cast<long long>(nb.size()), r.deficiency);
}

}  // namespace

TEST(Matching, IdentityGraph) {
  const auto pts = points1({0.0, 1.5, 3.0, 7.25});
  const auto inst = build_instance(pts, pts, {Translation::group(0, {0})}, v1(0.618), 1e-9);
  EXPECT_EQ(inst.edge_count(), 4u);
  const auto r = max_matching(inst);
  EXPECT_EQ(r.pairs.size(), 4u);
  EXPECT_EQ(r.deficiency, 0);
  for (const auto& p : r.pairs) EXPECT_EQ(p.left, p.right);
}

TEST(Matching, EmptyTranslationSet) {
  const auto pts = points1({0.0, 1.0});
  const auto inst = build_instance(pts, pts, {}, Vec(), 1e-9);
  EXPECT_EQ(inst.edge_count(), 0u);
  const auto r = max_matching(inst);
  EXPECT_EQ(r.deficiency, 2);
  EXPECT_EQ(r.witness.size(), 2u);
  EXPECT_TRUE(r.neighbors.empty());
}

TEST(Matching, RejectsNegativeTolerance) {
  EXPECT_THROW(build_instance(points1({0.0}), points1({0.0}), {}, Vec(), -1.0), std::invalid_argument);
}

TEST(Matching, EdgeCountMatchesDoubleLoop) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec> l, r;
    for (int i = 0; i < 500; ++i) l.push_back((Vec(2) << u(rng), u(rng)).finished());
    for (int i = 0; i < 500; ++i) r.push_back((Vec(2) << u(rng), u(rng)).finished());
    const Vec alpha = (Vec(2) << 0.41421356237309503, 0.7320508075688772).finished();
    std::vector<Translation> f{Translation::group(1, {0, 0}), Translation::group(-2, {1, 0}),
                               Translation::vector((Vec(2) << 0.3, -0.9).finished())};
    const double tol = 1.5;
    const auto inst = build_instance(l, r, f, alpha, tol);
    std::size_t brute = 0;
    for (const auto& a : l)
      for (const auto& b : r)
        for (const auto& t : f)
          brute += (b - (a + t.resolve(alpha))).norm() <= tol;
    EXPECT_EQ(inst.edge_count(), brute);
    EXPECT_GT(brute, 100u);
  }
}

TEST(Matching, SinglePair) {
  const auto inst = build_instance(points1({0.0}), points1({1.0}), shifts1({1.0}), Vec(), 1e-9);
  const auto r = max_matching(inst);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.deficiency, 0);
  EXPECT_EQ(r.pairs[0].label, 0);
}

TEST(Matching, PigeonholeWitness) {
  // both left points reach the single right point
  const auto inst = build_instance(points1({0.0, 2.0}), points1({1.0}), shifts1({1.0, -1.0}), Vec(), 1e-9);
  const auto r = max_matching(inst);
  EXPECT_EQ(r.deficiency, 1);
  EXPECT_EQ(r.witness, (std::vector<int>{0, 1}));
  EXPECT_EQ(r.neighbors, (std::vector<int>{0}));
  const auto h = hall_check(inst, Side::left);
  EXPECT_FALSE(h.holds);
  EXPECT_EQ(h.witness, (std::vector<int>{0, 1}));
  EXPECT_TRUE(hall_check(inst, Side::right).holds);

  // with the single shift +1 the point 2 has no neighbor at all
  const auto lone = build_instance(points1({0.0, 2.0}), points1({1.0}), shifts1({1.0}), Vec(), 1e-9);
  const auto q = max_matching(lone);
  EXPECT_EQ(q.deficiency, 1);
  EXPECT_EQ(q.witness, (std::vector<int>{1}));
  EXPECT_TRUE(q.neighbors.empty());
}

TEST(Matching, CardinalityMatchesExhaustiveSearch) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ri = random_instance(rng, 8, 8);
    const auto r = max_matching(ri.inst);
    expect_valid_matching(ri.inst, r);
    EXPECT_EQ(static_cast<int>(r.pairs.size()), oracle::max_matching(ri.adj, static_cast<int>(ri.inst.right.size())))
        << "trial " << trial;
  }
}

TEST(Matching, KonigDualityOnBothSides) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const auto ri = random_instance(rng, 12, 12);
    const int nr = static_cast<int>(ri.inst.right.size());
    const auto left = max_matching(ri.inst, Side::left);
    EXPECT_EQ(left.deficiency, oracle::hall_deficiency(ri.adj, nr)) << "trial " << trial;
    expect_konig_certificate(ri.inst, left);
    const auto right = max_matching(ri.inst, Side::right);
    EXPECT_EQ(right.deficiency, oracle::hall_deficiency(oracle::transpose(ri.adj, nr), static_cast<int>(ri.adj.size())))
        << "trial " << trial;
    expect_konig_certificate(ri.inst, right);
  }
}

TEST(Matching, HallVerdictMatchesSubsetEnumeration) {
  std::mt19937_64 rng(53);
  int violated = 0, perfect = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto ri = random_instance(rng, 12, 12);
    const int nr = static_cast<int>(ri.inst.right.size());
    const auto hl = hall_check(ri.inst, Side::left);
    const auto hr = hall_check(ri.inst, Side::right);
    EXPECT_EQ(hl.holds, oracle::hall_deficiency(ri.adj, nr) == 0);
    EXPECT_EQ(hr.holds, oracle::hall_deficiency(oracle::transpose(ri.adj, nr), static_cast<int>(ri.adj.size())) == 0);
    if (!hl.holds) {
      ++violated;
      EXPECT_GT(hl.witness.size(), neighborhood(ri.inst, Side::left, hl.witness).size());
    }
    const bool is_perfect = max_matching(ri.inst).pairs.size() == ri.inst.left.size() &&
                            ri.inst.left.size() == ri.inst.right.size();
    EXPECT_EQ(is_perfect, hl.holds && hr.holds && ri.inst.left.size() == ri.inst.right.size());
    perfect += is_perfect;
  }
  EXPECT_GT(violated, 50);
}

TEST(Matching, SaturatingInstanceHoldsOnBothSides) {
  const auto pts = points1({0, 1, 2, 3, 4, 5});
  const auto inst = build_instance(pts, pts, shifts1({-1.0, 0.0, 1.0}), Vec(), 1e-9);
  EXPECT_TRUE(hall_check(inst, Side::left).holds);
  EXPECT_TRUE(hall_check(inst, Side::right).holds);
  EXPECT_EQ(max_matching(inst).pairs.size(), 6u);
}

TEST(Matching, GroupTranslationsResolveAgainstAlpha) {
  const double a = 0.6180339887498949;
  const auto inst = build_instance(points1({0.1}), points1({0.1 + 2 * a - 1}), {Translation::group(2, {-1})}, v1(a), 1e-9);
  EXPECT_EQ(inst.edge_count(), 1u);
  EXPECT_THROW(build_instance(points1({0.1}), points1({0.1}), {Translation::group(1, {0, 0})}, v1(a), 1e-9),
               std::invalid_argument);
}

TEST(Matching, ProductReductionIdentity) {
  const std::vector<IntVec> a{{0, 0}, {1, 0}, {0, 1}, {2, 3}};
  const auto rep = product_reduction_check(a, a, {{0, 0}, {1, 1}}, 1.0, 2, {1, 10, 100});
  EXPECT_TRUE(rep.limit_holds);
  EXPECT_TRUE(rep.hall_holds);
  EXPECT_TRUE(rep.consistent);
  for (const auto& row : rep.rows)
    for (bool ok : row.product_holds) EXPECT_TRUE(ok);
}

TEST(Matching, ProductReductionDetectsViolation) {
  const std::vector<IntVec> a{{0}, {2}, {5}}, b{{1}, {6}};
  const auto rep = product_reduction_check(a, b, {{1}}, 1.0, 1, {1, 10, 1000, 100000});
  EXPECT_FALSE(rep.limit_holds);
  EXPECT_FALSE(rep.hall_holds);
  EXPECT_TRUE(rep.consistent);
  ASSERT_FALSE(rep.violating_subset.empty());
  bool large_r_fails = false;
  for (const auto& row : rep.rows)
    if (!row.limit_holds) {
      EXPECT_GT(row.size, row.image);
      large_r_fails = large_r_fails || !row.product_holds.back();
    }
  EXPECT_TRUE(large_r_fails);
}

TEST(Matching, ProductReductionAgreesWithHallOnRandomSets) {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> n(1, 8), c(-3, 3), nf(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<IntVec> a, b, f;
    const int na = n(rng), nb = n(rng), k = nf(rng);
    for (int i = 0; i < na; ++i) a.push_back({c(rng), c(rng)});
    for (int i = 0; i < nb; ++i) b.push_back({c(rng), c(rng)});
    for (int i = 0; i < k; ++i) f.push_back({c(rng) / 2, c(rng) / 2});
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    const auto rep = product_reduction_check(a, b, f, 2.0, 2, {1, 1000000});
    EXPECT_TRUE(rep.consistent) << "trial " << trial;
  }
  EXPECT_THROW(product_reduction_check(std::vector<IntVec>(21, IntVec{0}), {}, {}, 1.0, 1, {1}), std::invalid_argument);
}
