#pragma once

// Lattices in R^m x R^n with projections p1 (physical) and p2 (internal).
//
// Rational independence cannot be decided from floating point data, so it is
// certified only up to an integer bound: every relation vector with entries
// bounded by q_max is searched exhaustively and any hit is an exact witness of
// failure at tolerance kTolerance.

#include "cpset/numeric.hpp"
#include "cpset/window.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpset {

class LatticeBasis {
 public:
  // vectors[j] is the j-th basis vector, of length m + n
  LatticeBasis(int m, int n, const std::vector<std::vector<double>>& vectors) : m_(m), n_(n) {
    if (m < 1 || n < 1) throw std::invalid_argument("lattice dimensions must be positive");
    const int k = m + n;
    if (static_cast<int>(vectors.size()) != k)
      throw std::invalid_argument("basis needs exactly m+n vectors");
    basis_.resize(k, k);
    for (int j = 0; j < k; ++j) {
      if (static_cast<int>(vectors[j].size()) != k)
        throw std::invalid_argument("basis vectors must have length m+n");
      for (int i = 0; i < k; ++i) basis_(i, j) = vectors[j][i];
    }
    validate();
  }

  LatticeBasis(int m, int n, Mat columns) : m_(m), n_(n), basis_(std::move(columns)) {
    if (m < 1 || n < 1) throw std::invalid_argument("lattice dimensions must be positive");
    if (basis_.rows() != m + n || basis_.cols() != m + n)
      throw std::invalid_argument("basis needs exactly m+n vectors");
    validate();
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int rank() const { return m_ + n_; }

  const Mat& matrix() const { return basis_; }
  Vec vector(int j) const { return basis_.col(j); }
  Vec p1(int j) const { return basis_.col(j).head(m_); }
  Vec p2(int j) const { return basis_.col(j).tail(n_); }
  Mat p1_matrix() const { return basis_.topRows(m_); }
  Mat p2_matrix() const { return basis_.bottomRows(n_); }

  Vec point(const IntVec& coeffs) const { return basis_ * to_real(coeffs); }

  double condition_number() const {
    Eigen::JacobiSVD<Mat> svd(basis_);
    const auto& s = svd.singularValues();
    return s[0] / s[s.size() - 1];
  }

 private:
  void validate() const {
    if (!basis_.allFinite()) throw std::invalid_argument("basis entries must be finite");
    Eigen::FullPivLU<Mat> lu(basis_);
    lu.setThreshold(1e-15);
    if (lu.rank() < rank()) throw std::invalid_argument("basis not full rank");
  }

  int m_;
  int n_;
  Mat basis_;
};

// Gamma = {(n + beta^T(n alpha + m), n alpha + m)} in R x R^d.
struct SpecialFormLattice {
  Vec alpha;
  Vec beta;
  // integer bound up to which conditions (1) and (2) were certified; 0 when
  // the lattice was built without certification
  int independence_bound = 0;

  int dim() const { return static_cast<int>(alpha.size()); }

  double p1(long long n, const Vec& p2) const { return static_cast<double>(n) + beta.dot(p2); }

  Vec p2(long long n, const IntVec& m) const {
    Vec y(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
      y[i] = std::fma(static_cast<double>(n), alpha[i], static_cast<double>(m[i]));
    return y;
  }

  // generators (beta_j, e_j) for j < d followed by (1 + beta^T alpha, alpha)
  LatticeBasis basis() const {
    const int d = dim();
    Mat cols = Mat::Zero(d + 1, d + 1);
    for (int j = 0; j < d; ++j) {
      cols(0, j) = beta[j];
      cols(1 + j, j) = 1.0;
    }
    cols(0, d) = 1.0 + beta.dot(alpha);
    cols.col(d).tail(d) = alpha;
    return LatticeBasis(1, d, cols);
  }
};

// T(x, y) = (a x, B y)
struct DiagonalSplitMap {
  double a = 1.0;
  Mat B;

  Vec apply(const Vec& v) const {
    Vec out(v.size());
    out[0] = a * v[0];
    out.tail(v.size() - 1) = B * v.tail(v.size() - 1);
    return out;
  }
};

enum class RelationKind {
  p2_density,     // k + alpha^T q = 0: p2(Gamma) lies in a proper closed subgroup
  p1_injectivity  // sum_i c_i p1(v_i) = 0: p1 is not injective on Gamma
};

struct Relation {
  RelationKind kind;
  // p2_density: (k_1..k_m, q_1..q_n); p1_injectivity: basis coefficients
  IntVec coeffs;
  double residual = 0.0;
};

struct IndependenceReport {
  int bound_checked = 0;
  std::vector<Relation> violations;

  bool certified() const { return violations.empty(); }
};

namespace detail {

// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return out;
  for (;;) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Column subset of size rows() maximizing |det|; the first maximal subset in
// lexicographic order wins ties.
inline std::pair<std::vector<int>, double> best_columns(const Mat& a) {
  const int rows = static_cast<int>(a.rows());
  std::vector<int> best;
  double best_det = -1.0;
  for (const auto& cols : subsets(static_cast<int>(a.cols()), rows)) {
    Mat sub(rows, rows);
    for (int j = 0; j < rows; ++j) sub.col(j) = a.col(cols[j]);
    const double det = std::abs(sub.determinant());
    if (det > best_det) {
      best_det = det;
      best = cols;
    }
  }
  return {best, best_det};
}

inline std::vector<int> complement(const std::vector<int>& cols, int k) {
  std::vector<int> rest;
  for (int j = 0; j < k; ++j)
    if (std::find(cols.begin(), cols.end(), j) == cols.end()) rest.push_back(j);
  return rest;
}

// Odometer over [-bound, bound]^len calling f for every nonzero vector whose
// first nonzero entry is positive (one representative per +- pair).
template <class F>
void for_each_canonical(int len, long long bound, F&& f) {
  IntVec q(len, -bound);
  for (;;) {
    auto first = std::find_if(q.begin(), q.end(), [](long long v) { return v != 0; });
    if (first != q.end() && *first > 0) f(q);
    int i = 0;
    while (i < len && ++q[i] > bound) {
      q[i] = -bound;
      ++i;
    }
    if (i == len) break;
  }
}

inline Mat select_columns(const Mat& a, const std::vector<int>& cols) {
  Mat out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(cols[j]);
  return out;
}

inline long long ext_gcd(long long a, long long b, long long& x, long long& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  long long x1 = 0, y1 = 0;
  const long long g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

// Given integer row vectors (rows of `rows`, each of length k), returns a
// unimodular k x k matrix W whose first r rows span the saturation of their
// integer span (r = rank). Column operations V reduce rows * V to [H 0]; W
// tracks V^{-1}.
inline std::pair<IntMat, int> unimodular_completion(const IntMat& rows, int k) {
  IntMat a = rows;
  IntMat w = IntMat::Identity(k, k);
  int pivot = 0;
  for (Eigen::Index r = 0; r < a.rows() && pivot < k; ++r) {
    for (int c = pivot + 1; c < k; ++c) {
      const long long p = a(r, pivot), q = a(r, c);
      if (q == 0) continue;
      long long x = 0, y = 0;
      const long long g = ext_gcd(p, q, x, y);
      const long long pg = p / g, qg = q / g;
      // new pivot col = x*colP + y*colC, new col c = -qg*colP + pg*colC
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const long long u = a(i, pivot), v = a(i, c);
        a(i, pivot) = x * u + y * v;
        a(i, c) = -qg * u + pg * v;
      }
      // inverse row operation on W: rowP' = pg*rowP + qg*rowC, rowC' = -y*rowP + x*rowC
      for (int j = 0; j < k; ++j) {
        const long long u = w(pivot, j), v = w(c, j);
        w(pivot, j) = pg * u + qg * v;
        w(c, j) = -y * u + x * v;
      }
    }
    if (a(r, pivot) != 0) ++pivot;
  }
  return {w, pivot};
}

}  // namespace detail

inline constexpr int kDefaultIndependenceBound = 50;

// Exhaustive integer-relation scan for both general position conditions:
// density of p2(Gamma) and injectivity of p1 on Gamma.
inline IndependenceReport check_general_position(const LatticeBasis& basis, int q_max) {
  if (q_max < 1) throw std::invalid_argument("bound must be positive");
  const int m = basis.m(), n = basis.n(), k = basis.rank();
  IndependenceReport report;
  report.bound_checked = q_max;

  const Mat p2 = basis.p2_matrix();
  auto [cols2, det2] = detail::best_columns(p2);
  if (det2 < 1e-12) throw std::domain_error("p2(Gamma) cannot be dense: p2 projection is rank deficient");
  const auto rest2 = detail::complement(cols2, k);
  // alpha(:, t): coordinates of p2 of the t-th remaining vector in the chosen frame
  const Mat alpha = detail::select_columns(p2, cols2).inverse() * detail::select_columns(p2, rest2);

  detail::for_each_canonical(n, q_max, [&](const IntVec& q) {
    IntVec rel(m + n);
    double worst = 0.0;
    for (int t = 0; t < m; ++t) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += static_cast<double>(q[i]) * alpha(i, t);
      const double r = std::round(s);
      if (std::abs(r) > q_max) return;
      worst = std::max(worst, std::abs(s - r));
      if (worst >= kTolerance) return;
      rel[t] = -static_cast<long long>(r);
    }
    std::copy(q.begin(), q.end(), rel.begin() + m);
    report.violations.push_back({RelationKind::p2_density, rel, worst});
  });

  const Mat p1 = basis.p1_matrix();
  auto [cols1, det1] = detail::best_columns(p1);
  if (det1 < 1e-12) throw std::domain_error("p1 projection is rank deficient");
  const auto rest1 = detail::complement(cols1, k);
  const Mat gamma = detail::select_columns(p1, cols1).inverse() * detail::select_columns(p1, rest1);

  detail::for_each_canonical(n, q_max, [&](const IntVec& cb) {
    IntVec c(k, 0);
    for (int i = 0; i < n; ++i) c[rest1[i]] = cb[i];
    double worst = 0.0;
    for (int t = 0; t < m; ++t) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s -= gamma(t, i) * static_cast<double>(cb[i]);
      const double r = std::round(s);
      if (std::abs(r) > q_max) return;
      worst = std::max(worst, std::abs(s - r));
      if (worst >= kTolerance) return;
      c[cols1[t]] = static_cast<long long>(r);
    }
    report.violations.push_back({RelationKind::p1_injectivity, c, worst});
  });
  return report;
}

inline SpecialFormLattice certify_special_form(const Vec& alpha, const Vec& beta,
                                               int q_max = kDefaultIndependenceBound) {
  if (alpha.size() == 0 || alpha.size() != beta.size())
    throw std::invalid_argument("alpha and beta must be nonempty vectors of equal length");
  SpecialFormLattice lat{alpha, beta, 0};
  const auto report = check_general_position(lat.basis(), q_max);
  if (!report.certified()) throw std::domain_error("alpha/beta admit an integer relation: not in general position");
  lat.independence_bound = q_max;
  return lat;
}

// Integer-coefficient sublattice together with its real vectors (columns).
struct Sublattice {
  std::vector<IntVec> coeffs;
  Mat vectors;

  bool empty() const { return coeffs.empty(); }
  std::size_t rank() const { return coeffs.size(); }
};

struct KernelSplit {
  Sublattice complement;  // L: p2 injective on it, p2(L) = p2(Gamma)
  Sublattice kernel;      // N = {gamma : p2(gamma) = 0}
  detail::IntMat change_of_basis;  // rows: kernel basis then complement basis
  int search_radius = 0;
  std::size_t kernel_points_found = 0;
};

inline constexpr int kDefaultKernelRadius = 50;

// Kernel of p2 restricted to Gamma, searched over coefficient vectors with
// entries bounded by search_radius, plus a complement with Gamma = L (+) N.
inline KernelSplit kernel_split(const LatticeBasis& basis, int search_radius = kDefaultKernelRadius) {
  if (search_radius < 1) throw std::invalid_argument("search radius must be positive");
  const int k = basis.rank();
  const Mat p2 = basis.p2_matrix();
  Eigen::FullPivLU<Mat> lu(p2);
  lu.setThreshold(1e-15);
  const int r = static_cast<int>(lu.rank());

  // pivot rows/columns give an invertible r x r minor; the k - r free
  // coefficients are enumerated and the pivot coefficients solved for
  // P * A * Q = LU: column j of AQ is column Q[j] of A, row i of PA is row P^{-1}[i] of A
  std::vector<int> prow(r), pcol(r);
  Eigen::VectorXi pinv(p2.rows());
  for (Eigen::Index i = 0; i < p2.rows(); ++i) pinv[lu.permutationP().indices()[i]] = static_cast<int>(i);
  for (int i = 0; i < r; ++i) {
    prow[i] = pinv[i];
    pcol[i] = lu.permutationQ().indices()[i];
  }
  const auto free_cols = detail::complement(pcol, k);
  Mat minor(r, r), rest(r, static_cast<Eigen::Index>(free_cols.size()));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) minor(i, j) = p2(prow[i], pcol[j]);
    for (std::size_t j = 0; j < free_cols.size(); ++j) rest(i, static_cast<Eigen::Index>(j)) = p2(prow[i], free_cols[j]);
  }
  const Mat solve = r > 0 ? Mat(-minor.inverse() * rest) : Mat(0, static_cast<Eigen::Index>(free_cols.size()));

  std::vector<IntVec> found;
  detail::for_each_canonical(static_cast<int>(free_cols.size()), search_radius, [&](const IntVec& cf) {
    IntVec c(k, 0);
    for (std::size_t j = 0; j < free_cols.size(); ++j) c[free_cols[j]] = cf[j];
    for (int i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < free_cols.size(); ++j) s += solve(i, static_cast<Eigen::Index>(j)) * static_cast<double>(cf[j]);
      const double rd = std::round(s);
      if (std::abs(s - rd) >= kTolerance || std::abs(rd) > search_radius) return;
      c[pcol[i]] = static_cast<long long>(rd);
    }
    if ((p2 * to_real(c)).norm() >= 1e-12) return;
    found.push_back(c);
  });

  KernelSplit out;
  out.search_radius = search_radius;
  out.kernel_points_found = found.size();
  detail::IntMat rows(static_cast<Eigen::Index>(found.size()), k);
  for (std::size_t i = 0; i < found.size(); ++i)
    for (int j = 0; j < k; ++j) rows(static_cast<Eigen::Index>(i), j) = found[i][j];
  auto [w, kr] = detail::unimodular_completion(rows, k);
  out.change_of_basis = w;

  auto take = [&](int from, int to) {
    Sublattice s;
    s.vectors.resize(k, to - from);
    for (int i = from; i < to; ++i) {
      IntVec c(k);
      for (int j = 0; j < k; ++j) c[j] = w(i, j);
      s.vectors.col(i - from) = basis.point(c);
      s.coeffs.push_back(std::move(c));
    }
    return s;
  };
  out.kernel = take(0, kr);
  out.complement = take(kr, k);
  return out;
}

struct SpecialFormReduction {
  DiagonalSplitMap map;
  SpecialFormLattice lattice;
  // order[j] = index of the input vector playing the role of generator j
  std::vector<int> order;
};

// Reduction of a general position lattice in R x R^d to special form: the
// returned T maps input vector order[j] to (beta_j, e_j) for j < d and
// order[d] to (1 + beta^T alpha, alpha). Requires a certified report for the
// same basis.
inline SpecialFormReduction to_special_form(const LatticeBasis& basis, const IndependenceReport& certificate) {
  if (basis.m() != 1) throw std::invalid_argument("special form requires physical dimension 1");
  if (!certificate.certified()) throw std::domain_error("general position violated");
  const int d = basis.n();
  const Mat p2 = basis.p2_matrix();

  int last = -1;
  double best = -1.0;
  for (int cand = 0; cand <= d; ++cand) {
    Mat sub(d, d);
    for (int j = 0, c = 0; j <= d; ++j)
      if (j != cand) sub.col(c++) = p2.col(j);
    const double det = std::abs(sub.determinant());
    if (det > best) {
      best = det;
      last = cand;
    }
  }
  if (best < 1e-12) throw std::domain_error("general position violated: p2 columns are singular");

  SpecialFormReduction out;
  for (int j = 0; j <= d; ++j)
    if (j != last) out.order.push_back(j);
  out.order.push_back(last);

  Mat frame(d, d);
  for (int j = 0; j < d; ++j) frame.col(j) = p2.col(out.order[j]);
  out.map.B = frame.inverse();
  const Vec alpha = out.map.B * p2.col(last);
  double denom = basis.p1(last)[0];
  for (int j = 0; j < d; ++j) denom -= alpha[j] * basis.p1(out.order[j])[0];
  if (std::abs(denom) < 1e-12) throw std::domain_error("general position violated: zero scale denominator");
  out.map.a = 1.0 / denom;
  Vec beta(d);
  for (int j = 0; j < d; ++j) beta[j] = out.map.a * basis.p1(out.order[j])[0];
  out.lattice = SpecialFormLattice{alpha, beta, certificate.bound_checked};
  return out;
}

struct LiftedPoint {
  IntVec coeffs;
  Vec point;
};

// Inclusive integer box of coefficient vectors.
struct CoeffBox {
  IntVec lo;
  IntVec hi;
};

// Gamma_W restricted to a coefficient box, sorted by p1 (lexicographically for
// m > 1, ties by coefficients).
inline std::vector<LiftedPoint> lift_window_points(const LatticeBasis& basis, const Window& window,
                                                   const CoeffBox& box) {
  window.require_bounded();
  const int k = basis.rank();
  if (static_cast<int>(box.lo.size()) != k || static_cast<int>(box.hi.size()) != k)
    throw std::invalid_argument("coefficient box must have one range per basis vector");
  if (window.dim() != basis.n()) throw std::invalid_argument("window dimension must equal n");
  std::vector<LiftedPoint> out;
  if (window.measure() == 0.0 && window.bounds().empty()) return out;
  for (int i = 0; i < k; ++i)
    if (box.hi[i] < box.lo[i]) return out;
  IntVec c = box.lo;
  for (;;) {
    Vec pt = basis.point(c);
    if (window.contains(pt.tail(basis.n()))) out.push_back({c, std::move(pt)});
    int i = 0;
    while (i < k && ++c[i] > box.hi[i]) {
      c[i] = box.lo[i];
      ++i;
    }
    if (i == k) break;
  }
  const int m = basis.m();
  std::sort(out.begin(), out.end(), [m](const LiftedPoint& a, const LiftedPoint& b) {
    for (int i = 0; i < m; ++i)
      if (a.point[i] != b.point[i]) return a.point[i] < b.point[i];
    return a.coeffs < b.coeffs;
  });
  return out;
}

}  // namespace cpset
