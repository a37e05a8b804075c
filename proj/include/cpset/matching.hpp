#pragma once

// Finite bipartite matching with Hall witnesses.

#include "cpset/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace cpset {

// k alpha + m, or a raw real vector when k is absent.
struct Translation {
  std::optional<long long> k;
  IntVec m;
  Vec raw;

  static Translation group(long long k, IntVec m) { return {k, std::move(m), Vec()}; }
  static Translation vector(Vec v) { return {std::nullopt, {}, std::move(v)}; }

  bool is_group() const { return k.has_value(); }

  Vec resolve(const Vec& alpha) const {
    if (!k) return raw;
    if (alpha.size() != static_cast<Eigen::Index>(m.size())) throw std::invalid_argument("translation dimension mismatch");
    return static_cast<double>(*k) * alpha + to_real(m);
  }
};

struct Edge {
  int right = 0;
  int label = 0;  // index into the translation set, -1 when unlabeled
};

struct BipartiteInstance {
  std::vector<Vec> left;
  std::vector<Vec> right;
  std::vector<Translation> translations;
  std::vector<Vec> resolved;
  std::vector<std::vector<Edge>> edges;  // per left vertex, sorted by (right, label)
  double tolerance = 0.0;

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (const auto& e : edges) c += e.size();
    return c;
  }
};

inline BipartiteInstance build_instance(std::vector<Vec> left, std::vector<Vec> right,
                                        std::vector<Translation> translations, const Vec& alpha, double tolerance) {
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  BipartiteInstance inst;
  inst.left = std::move(left);
  inst.right = std::move(right);
  inst.translations = std::move(translations);
  inst.tolerance = tolerance;
  inst.edges.resize(inst.left.size());

  Eigen::Index d = -1;
  auto check_dim = [&](const Vec& v) {
    if (!v.allFinite()) throw std::invalid_argument("non-finite input");
    if (d < 0) d = v.size();
    if (v.size() != d) throw std::invalid_argument("point dimension mismatch");
  };
  for (const auto& v : inst.left) check_dim(v);
  for (const auto& v : inst.right) check_dim(v);
  double reach = 0.0;
  for (const auto& t : inst.translations) {
    inst.resolved.push_back(t.resolve(alpha));
    check_dim(inst.resolved.back());
    reach = std::max(reach, inst.resolved.back().norm());
  }
  if (inst.resolved.empty() || inst.left.empty() || inst.right.empty()) return inst;

  // every neighbor of a lies in a cell adjacent to a's cell
  const double width = reach + tolerance > 0.0 ? reach + tolerance : 1.0;
  auto cell_of = [&](const Vec& v) {
    IntVec c(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(v[i] / width));
    return c;
  };
  std::map<IntVec, std::vector<int>> cells;
  for (std::size_t j = 0; j < inst.right.size(); ++j) cells[cell_of(inst.right[j])].push_back(static_cast<int>(j));

  for (std::size_t i = 0; i < inst.left.size(); ++i) {
    const Vec& a = inst.left[i];
    const IntVec home = cell_of(a);
    IntVec off(static_cast<std::size_t>(d), -1);
    auto& out = inst.edges[i];
    for (;;) {
      IntVec c = home;
      for (std::size_t q = 0; q < c.size(); ++q) c[q] += off[q];
      if (auto it = cells.find(c); it != cells.end()) {
        for (int j : it->second) {
          for (std::size_t f = 0; f < inst.resolved.size(); ++f)
            if ((inst.right[static_cast<std::size_t>(j)] - (a + inst.resolved[f])).norm() <= tolerance)
              out.push_back({j, static_cast<int>(f)});
        }
      }
      std::size_t q = 0;
      while (q < off.size() && ++off[q] > 1) off[q++] = -1;
      if (q == off.size()) break;
    }
    std::sort(out.begin(), out.end(),
              [](const Edge& x, const Edge& y) { return x.right != y.right ? x.right < y.right : x.label < y.label; });
  }
  return inst;
}

enum class Side { left, right };

struct MatchedPair {
  int left = 0;
  int right = 0;
  int label = 0;
};

struct MatchingResult {
  std::vector<MatchedPair> pairs;
  long long deficiency = 0;
  Side witness_side = Side::left;
  std::vector<int> witness;    // S with |S| > |N(S)| when deficiency > 0
  std::vector<int> neighbors;  // N(S)
};

namespace detail {

// Hopcroft-Karp on adjacency lists with a starting matching. Only vertices
// with active[u] set are used on the left; free active vertices start phases.
class HopcroftKarp {
 public:
  HopcroftKarp(const std::vector<std::vector<int>>& adj, std::vector<int> match_left, std::vector<int> match_right,
               std::vector<char> active)
      : adj_(adj), ml_(std::move(match_left)), mr_(std::move(match_right)), active_(std::move(active)) {}

  void run() {
    while (bfs()) {
      it_.assign(adj_.size(), 0);
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (active_[u] && ml_[u] < 0) dfs(static_cast<int>(u));
    }
  }

  const std::vector<int>& match_left() const { return ml_; }
  const std::vector<int>& match_right() const { return mr_; }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  bool bfs() {
    dist_.assign(adj_.size(), kInf);
    std::queue<int> q;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (active_[u] && ml_[u] < 0) {
        dist_[u] = 0;
        q.push(static_cast<int>(u));
      }
    }
    bool found = false;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj_[static_cast<std::size_t>(u)]) {
        const int w = mr_[static_cast<std::size_t>(v)];
        if (w < 0) {
          found = true;
        } else if (active_[static_cast<std::size_t>(w)] && dist_[static_cast<std::size_t>(w)] == kInf) {
          dist_[static_cast<std::size_t>(w)] = dist_[static_cast<std::size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  // iterative DFS along the BFS layering
  bool dfs(int root) {
    std::vector<int> stack{root};
    std::vector<int> via;
    while (!stack.empty()) {
      const int u = stack.back();
      auto& pos = it_[static_cast<std::size_t>(u)];
      const auto& nb = adj_[static_cast<std::size_t>(u)];
      bool advanced = false;
      while (pos < nb.size()) {
        const int v = nb[pos];
        const int w = mr_[static_cast<std::size_t>(v)];
        if (w < 0) {
          // augment along the stack
          via.push_back(v);
          for (std::size_t i = 0; i < stack.size(); ++i) {
            const int a = stack[i], b = via[i];
            ml_[static_cast<std::size_t>(a)] = b;
            mr_[static_cast<std::size_t>(b)] = a;
          }
          return true;
        }
        if (active_[static_cast<std::size_t>(w)] &&
            dist_[static_cast<std::size_t>(w)] == dist_[static_cast<std::size_t>(u)] + 1) {
          via.push_back(v);
          stack.push_back(w);
          ++pos;
          advanced = true;
          break;
        }
        ++pos;
      }
      if (!advanced) {
        dist_[static_cast<std::size_t>(u)] = kInf;
        stack.pop_back();
        if (!via.empty()) via.pop_back();
      }
    }
    return false;
  }

  const std::vector<std::vector<int>>& adj_;
  std::vector<int> ml_, mr_;
  std::vector<char> active_;
  std::vector<int> dist_;
  std::vector<std::size_t> it_;
};

inline std::vector<std::vector<int>> plain_adjacency(const std::vector<std::vector<Edge>>& edges) {
  std::vector<std::vector<int>> adj(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (const auto& e : edges[i])
      if (adj[i].empty() || adj[i].back() != e.right) adj[i].push_back(e.right);
  }
  return adj;
}

inline std::vector<std::vector<int>> transpose(const std::vector<std::vector<int>>& adj, int n_right) {
  std::vector<std::vector<int>> t(static_cast<std::size_t>(n_right));
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (int v : adj[u]) t[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  return t;
}

// Alternating BFS from the unmatched vertices of `start` (a subset of one
// side) in the graph adj; returns (reached same-side set, reached other side).
inline std::pair<std::vector<int>, std::vector<int>> alternating_reach(const std::vector<std::vector<int>>& adj,
                                                                       int n_other, const std::vector<int>& match,
                                                                       const std::vector<int>& match_other,
                                                                       const std::vector<char>& start) {
  std::vector<char> seen(adj.size(), 0), seen_other(static_cast<std::size_t>(n_other), 0);
  std::queue<int> q;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (start[u] && match[u] < 0) {
      seen[u] = 1;
      q.push(static_cast<int>(u));
    }
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (seen_other[static_cast<std::size_t>(v)]) continue;
      seen_other[static_cast<std::size_t>(v)] = 1;
      const int w = match_other[static_cast<std::size_t>(v)];
      if (w >= 0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        q.push(w);
      }
    }
  }
  std::pair<std::vector<int>, std::vector<int>> out;
  for (std::size_t u = 0; u < seen.size(); ++u)
    if (seen[u]) out.first.push_back(static_cast<int>(u));
  for (std::size_t v = 0; v < seen_other.size(); ++v)
    if (seen_other[v]) out.second.push_back(static_cast<int>(v));
  return out;
}

inline std::vector<MatchedPair> collect_pairs(const std::vector<std::vector<Edge>>& edges,
                                              const std::vector<int>& match_left) {
  std::vector<MatchedPair> pairs;
  for (std::size_t u = 0; u < match_left.size(); ++u) {
    const int v = match_left[u];
    if (v < 0) continue;
    int label = -1;
    for (const auto& e : edges[u]) {
      if (e.right == v) {
        label = e.label;
        break;
      }
    }
    pairs.push_back({static_cast<int>(u), v, label});
  }
  return pairs;
}

// Maximum matching that saturates as many required vertices as possible on
// both sides. Exempt vertices may be matched but never count as deficient.
// seed_left optionally gives a starting matching for required left vertices;
// augmentation never unmatches a vertex, so a perfect seed is returned as is.
// Returns (match_left, match_right).
inline std::pair<std::vector<int>, std::vector<int>> core_matching(const std::vector<std::vector<int>>& adj, int n_right,
                                                                   const std::vector<char>& core_left,
                                                                   const std::vector<char>& core_right,
                                                                   const std::vector<int>& seed_left = {}) {
  const auto nl = adj.size();
  const auto nr = static_cast<std::size_t>(n_right);
  std::vector<int> sl(nl, -1), sr(nr, -1);
  for (std::size_t u = 0; u < seed_left.size() && u < nl; ++u) {
    const int v = seed_left[u];
    if (v < 0 || !core_left[u] || sr[static_cast<std::size_t>(v)] >= 0) continue;
    sl[u] = v;
    sr[static_cast<std::size_t>(v)] = static_cast<int>(u);
  }
  // 1. maximum matching of the required left vertices alone
  HopcroftKarp first(adj, std::move(sl), std::move(sr), core_left);
  first.run();

  // 2. from the right: each exempt right vertex gets a private dummy partner so
  //    it can always be released, then augment from free required right vertices
  auto tadj = transpose(adj, n_right);
  std::vector<int> ml(nr, -1), mr(nl, -1);
  for (std::size_t u = 0; u < nl; ++u) {
    const int v = first.match_left()[u];
    if (v >= 0) {
      ml[static_cast<std::size_t>(v)] = static_cast<int>(u);
      mr[u] = v;
    }
  }
  int next_dummy = static_cast<int>(nl);
  for (std::size_t v = 0; v < nr; ++v) {
    if (core_right[v]) continue;
    tadj[v].push_back(next_dummy);
    if (ml[v] < 0) {
      ml[v] = next_dummy;
      mr.push_back(static_cast<int>(v));
    } else {
      mr.push_back(-1);
    }
    ++next_dummy;
  }
  HopcroftKarp second(tadj, ml, mr, std::vector<char>(nr, 1));
  second.run();

  std::vector<int> match_left(nl, -1), match_right(nr, -1);
  for (std::size_t v = 0; v < nr; ++v) {
    const int u = second.match_left()[v];
    if (u >= 0 && static_cast<std::size_t>(u) < nl) {
      match_right[v] = u;
      match_left[static_cast<std::size_t>(u)] = static_cast<int>(v);
    }
  }
  return {match_left, match_right};
}

}  // namespace detail

// Maximum matching; the deficiency and witness refer to `side`.
inline MatchingResult max_matching(const BipartiteInstance& inst, Side side = Side::left) {
  const auto adj = detail::plain_adjacency(inst.edges);
  const int nr = static_cast<int>(inst.right.size());
  detail::HopcroftKarp hk(adj, std::vector<int>(adj.size(), -1), std::vector<int>(inst.right.size(), -1),
                          std::vector<char>(adj.size(), 1));
  hk.run();

  MatchingResult res;
  res.pairs = detail::collect_pairs(inst.edges, hk.match_left());
  res.witness_side = side;
  const auto n_side = side == Side::left ? inst.left.size() : inst.right.size();
  res.deficiency = static_cast<long long>(n_side - res.pairs.size());
  if (res.deficiency > 0) {
    if (side == Side::left) {
      auto [s, t] = detail::alternating_reach(adj, nr, hk.match_left(), hk.match_right(),
                                              std::vector<char>(adj.size(), 1));
      res.witness = std::move(s);
      res.neighbors = std::move(t);
    } else {
      const auto tadj = detail::transpose(adj, nr);
      auto [s, t] = detail::alternating_reach(tadj, static_cast<int>(adj.size()), hk.match_right(), hk.match_left(),
                                              std::vector<char>(tadj.size(), 1));
      res.witness = std::move(s);
      res.neighbors = std::move(t);
    }
  }
  return res;
}

struct HallVerdict {
  bool holds = true;
  Side side = Side::left;
  std::vector<int> witness;
  std::vector<int> neighbors;
};

inline HallVerdict hall_check(const BipartiteInstance& inst, Side side) {
  const auto r = max_matching(inst, side);
  return {r.deficiency == 0, side, r.witness, r.neighbors};
}

// Neighbor set of `s` on the side opposite to `side`.
inline std::vector<int> neighborhood(const BipartiteInstance& inst, Side side, const std::vector<int>& s) {
  std::vector<char> in(side == Side::left ? inst.right.size() : inst.left.size(), 0);
  if (side == Side::left) {
    for (int u : s)
      for (const auto& e : inst.edges[static_cast<std::size_t>(u)]) in[static_cast<std::size_t>(e.right)] = 1;
  } else {
    std::vector<char> chosen(inst.right.size(), 0);
    for (int v : s) chosen[static_cast<std::size_t>(v)] = 1;
    for (std::size_t u = 0; u < inst.edges.size(); ++u)
      for (const auto& e : inst.edges[u])
        if (chosen[static_cast<std::size_t>(e.right)]) in[u] = 1;
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) out.push_back(static_cast<int>(i));
  return out;
}

struct ProductReductionRow {
  std::vector<int> subset;  // indices into A
  long long size = 0;
  long long image = 0;      // |(S + F) cap B|
  bool limit_holds = true;  // |S| <= |(S + F) cap B|
  std::vector<bool> product_holds;  // per R: |S| R^s <= image (R + 2K)^s
};

struct ProductReductionReport {
  std::vector<long long> r_values;
  std::vector<ProductReductionRow> rows;
  bool limit_holds = true;
  bool hall_holds = true;
  bool consistent = true;  // limit verdict agrees with hall_check
  std::vector<int> violating_subset;
};

inline ProductReductionReport product_reduction_check(const std::vector<IntVec>& a, const std::vector<IntVec>& b,
                                                      const std::vector<IntVec>& f, double k, int s,
                                                      const std::vector<long long>& r_list) {
  if (a.size() > 20) throw std::invalid_argument("subset scan limited to 20 points");
  if (s < 1) throw std::invalid_argument("s must be positive");
  std::vector<Vec> left, right;
  std::vector<Translation> tr;
  for (const auto& p : a) left.push_back(to_real(p));
  for (const auto& p : b) right.push_back(to_real(p));
  for (const auto& g : f) tr.push_back(Translation::vector(to_real(g)));
  const auto inst = build_instance(left, right, tr, Vec(), 0.25);

  ProductReductionReport rep;
  rep.r_values = r_list;
  const auto n = a.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    ProductReductionRow row;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) row.subset.push_back(static_cast<int>(i));
    row.size = static_cast<long long>(row.subset.size());
    row.image = static_cast<long long>(neighborhood(inst, Side::left, row.subset).size());
    row.limit_holds = row.size <= row.image;
    for (long long r : r_list) {
      const double lhs = static_cast<double>(row.size) * std::pow(static_cast<double>(r), s);
      const double rhs = static_cast<double>(row.image) * std::pow(static_cast<double>(r) + 2.0 * k, s);
      row.product_holds.push_back(lhs <= rhs);
    }
    if (!row.limit_holds && rep.limit_holds) {
      rep.limit_holds = false;
      rep.violating_subset = row.subset;
    }
    rep.rows.push_back(std::move(row));
  }
  rep.hall_holds = hall_check(inst, Side::left).holds;
  rep.consistent = rep.hall_holds == rep.limit_holds;
  return rep;
}

}  // namespace cpset
