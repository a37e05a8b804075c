#pragma once

// Bounded windows in R^d: axis boxes, parallelepipeds, unions of simplices and
// finite unions of windows. Boxes and parallelepipeds are half-open (lower
// faces in, upper faces out), so integer translates of [0,1)^d tile exactly.

#include "cpset/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace cpset {

struct BoxBounds {
  Vec lo;
  Vec hi;

  bool empty() const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) return true;
    return lo.size() == 0;
  }
  bool finite() const { return lo.allFinite() && hi.allFinite(); }
};

enum class Membership { inside, outside, near_boundary };

struct MembershipVerdict {
  Membership status = Membership::outside;
  // lower bound on the distance from x to the boundary of the window
  double margin = 0.0;
  // half-open membership decision, independent of epsilon
  bool member = false;
};

struct Box {
  Vec lo;
  Vec hi;
};

struct Parallelepiped {
  Vec origin;
  Mat edges;    // columns are edge vectors
  Mat inverse;  // edges^{-1}
};

struct Simplex {
  Mat vertices;  // d x (d+1), one vertex per column
  Mat inverse;   // (v_1 - v_0, ..., v_d - v_0)^{-1}
};

struct SimplexUnion {
  std::vector<Simplex> simplices;
};

class Window;

struct WindowUnion {
  std::vector<Window> parts;
};

namespace detail {

inline double factorial(int d) {
  double f = 1.0;
  for (int i = 2; i <= d; ++i) f *= i;
  return f;
}

inline Simplex make_simplex(const Mat& vertices) {
  const auto d = vertices.rows();
  if (vertices.cols() != d + 1) throw std::invalid_argument("simplex needs d+1 vertices");
  if (!vertices.allFinite()) throw std::invalid_argument("simplex vertices must be finite");
  Mat edge(d, d);
  for (Eigen::Index j = 0; j < d; ++j) edge.col(j) = vertices.col(j + 1) - vertices.col(0);
  const double det = edge.determinant();
  const double scale = std::max(1.0, edge.cwiseAbs().maxCoeff());
  if (std::abs(det) <= 1e-14 * std::pow(scale, static_cast<double>(d)))
    throw std::invalid_argument("simplex must be d-dimensional");
  return Simplex{vertices, edge.inverse()};
}

inline double simplex_volume(const Simplex& s) {
  return 1.0 / (std::abs(s.inverse.determinant()) * factorial(static_cast<int>(s.vertices.rows())));
}

inline Vec barycentric(const Simplex& s, const Vec& x) {
  const auto d = s.vertices.rows();
  Vec lam(d + 1);
  lam.tail(d) = s.inverse * (x - s.vertices.col(0));
  lam[0] = 1.0 - lam.tail(d).sum();
  return lam;
}

inline Mat barycentric_gradients(const Simplex& s) {
  const auto d = s.vertices.rows();
  Mat g(d + 1, d);
  g.bottomRows(d) = s.inverse;
  g.row(0) = -s.inverse.colwise().sum();
  return g;
}

// Projection extent of a vertex set onto an axis.
inline std::pair<double, double> project(const Mat& vertices, const Vec& axis) {
  Eigen::RowVectorXd p = axis.transpose() * vertices;
  return {p.minCoeff(), p.maxCoeff()};
}

// Separating-axis test for interiors of two simplices (d <= 3). Touching along
// a shared face counts as disjoint.
inline bool simplex_interiors_disjoint(const Simplex& a, const Simplex& b) {
  const auto d = a.vertices.rows();
  std::vector<Vec> axes;
  for (const Simplex* s : {&a, &b}) {
    Mat g = barycentric_gradients(*s);
    for (Eigen::Index i = 0; i < g.rows(); ++i) axes.emplace_back(g.row(i).transpose());
  }
  if (d == 3) {
    std::vector<Vec> ea, eb;
    for (const auto* pack : {&a, &b}) {
      auto& out = pack == &a ? ea : eb;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) out.emplace_back(pack->vertices.col(j) - pack->vertices.col(i));
    }
    for (const auto& u : ea)
      for (const auto& v : eb) {
        Eigen::Vector3d c = Eigen::Vector3d(u).cross(Eigen::Vector3d(v));
        if (c.norm() > 1e-12) axes.emplace_back(Vec(c));
      }
  }
  const double diameter =
      std::max(a.vertices.cwiseAbs().maxCoeff(), b.vertices.cwiseAbs().maxCoeff()) + 1.0;
  for (auto axis : axes) {
    const double n = axis.norm();
    if (n == 0.0) continue;
    axis /= n;
    auto [alo, ahi] = project(a.vertices, axis);
    auto [blo, bhi] = project(b.vertices, axis);
    const double tol = 1e-12 * diameter;
    if (ahi <= blo + tol || bhi <= alo + tol) return true;
  }
  return false;
}

inline double box_overlap_volume(const Box& a, const Box& b) {
  double v = 1.0;
  for (Eigen::Index i = 0; i < a.lo.size(); ++i) {
    const double w = std::min(a.hi[i], b.hi[i]) - std::max(a.lo[i], b.lo[i]);
    if (w <= 0.0) return 0.0;
    v *= w;
  }
  return v;
}

inline double box_volume(const Box& b) {
  double v = 1.0;
  for (Eigen::Index i = 0; i < b.lo.size(); ++i) v *= std::max(0.0, b.hi[i] - b.lo[i]);
  return v;
}

}  // namespace detail

class Window {
 public:
  using Shape = std::variant<Box, Parallelepiped, SimplexUnion, WindowUnion>;

  static Window box(const Vec& lo, const Vec& hi) {
    if (lo.size() == 0 || lo.size() != hi.size())
      throw std::invalid_argument("box bounds must have equal positive dimension");
    if (lo.hasNaN() || hi.hasNaN()) throw std::invalid_argument("box bounds must not be NaN");
    return Window(Box{lo, hi}, static_cast<int>(lo.size()), BoxBounds{lo, hi});
  }

  static Window interval(double lo, double hi) {
    return box(Vec::Constant(1, lo), Vec::Constant(1, hi));
  }

  static Window parallelepiped(const Vec& origin, const Mat& edges) {
    const auto d = origin.size();
    if (d == 0 || edges.rows() != d || edges.cols() != d)
      throw std::invalid_argument("parallelepiped needs d edge vectors of dimension d");
    if (!origin.allFinite() || !edges.allFinite())
      throw std::invalid_argument("parallelepiped data must be finite");
    const double det = edges.determinant();
    if (std::abs(det) < 1e-14) throw std::invalid_argument("parallelepiped edges must be independent");
    Vec lo = origin, hi = origin;
    for (Eigen::Index j = 0; j < d; ++j) {
      lo += edges.col(j).cwiseMin(0.0);
      hi += edges.col(j).cwiseMax(0.0);
    }
    return Window(Parallelepiped{origin, edges, edges.inverse()}, static_cast<int>(d), BoxBounds{lo, hi});
  }

  // Each matrix holds the d+1 vertices of one simplex as columns.
  static Window simplices(const std::vector<Mat>& vertex_sets, int dim) {
    if (dim <= 0) throw std::invalid_argument("simplex union needs a positive dimension");
    if (dim > 3) throw std::invalid_argument("simplex windows are supported up to dimension 3");
    SimplexUnion u;
    BoxBounds bb{Vec::Constant(dim, std::numeric_limits<double>::infinity()),
                 Vec::Constant(dim, -std::numeric_limits<double>::infinity())};
    for (const auto& v : vertex_sets) {
      if (v.rows() != dim) throw std::invalid_argument("simplex dimension mismatch");
      u.simplices.push_back(detail::make_simplex(v));
      bb.lo = bb.lo.cwiseMin(v.rowwise().minCoeff());
      bb.hi = bb.hi.cwiseMax(v.rowwise().maxCoeff());
    }
    for (std::size_t i = 0; i < u.simplices.size(); ++i)
      for (std::size_t j = i + 1; j < u.simplices.size(); ++j)
        if (!detail::simplex_interiors_disjoint(u.simplices[i], u.simplices[j]))
          throw std::invalid_argument("simplices must have pairwise disjoint interiors");
    return Window(std::move(u), dim, bb);
  }

  // Components are assumed pairwise disjoint; overlapping boxes are rejected.
  static Window union_of(std::vector<Window> parts, int dim) {
    if (dim <= 0) throw std::invalid_argument("union needs a positive dimension");
    BoxBounds bb{Vec::Constant(dim, std::numeric_limits<double>::infinity()),
                 Vec::Constant(dim, -std::numeric_limits<double>::infinity())};
    for (const auto& p : parts) {
      if (p.dim() != dim) throw std::invalid_argument("union components must share a dimension");
      if (p.measure() <= 0.0) continue;
      bb.lo = bb.lo.cwiseMin(p.bounds().lo);
      bb.hi = bb.hi.cwiseMax(p.bounds().hi);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto* a = std::get_if<Box>(&parts[i].shape_);
      if (!a) continue;
      for (std::size_t j = i + 1; j < parts.size(); ++j) {
        const auto* b = std::get_if<Box>(&parts[j].shape_);
        if (!b) continue;
        const double overlap = detail::box_overlap_volume(*a, *b);
        const double scale = std::min(detail::box_volume(*a), detail::box_volume(*b));
        if (overlap > 1e-12 * std::max(scale, 1e-300))
          throw std::invalid_argument("union components must be disjoint");
      }
    }
    return Window(WindowUnion{std::move(parts)}, dim, bb);
  }

  static Window empty(int dim) { return union_of({}, dim); }

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  const BoxBounds& bounds() const { return bounds_; }
  bool bounded() const { return bounds_.finite() || is_empty_union(); }

  void require_bounded() const {
    if (!bounded()) throw std::invalid_argument("window must be bounded");
  }

  double measure() const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            return detail::box_volume(s);
          } else if constexpr (std::is_same_v<T, Parallelepiped>) {
            return std::abs(s.edges.determinant());
          } else if constexpr (std::is_same_v<T, SimplexUnion>) {
            double v = 0.0;
            for (const auto& simplex : s.simplices) v += detail::simplex_volume(simplex);
            return v;
          } else {
            double v = 0.0;
            for (const auto& p : s.parts) v += p.measure();
            return v;
          }
        },
        shape_);
  }

  bool contains(const Vec& x) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            for (Eigen::Index i = 0; i < x.size(); ++i)
              if (!(s.lo[i] <= x[i] && x[i] < s.hi[i])) return false;
            return true;
          } else if constexpr (std::is_same_v<T, Parallelepiped>) {
            const Vec t = s.inverse * (x - s.origin);
            for (Eigen::Index i = 0; i < t.size(); ++i)
              if (!(0.0 <= t[i] && t[i] < 1.0)) return false;
            return true;
          } else if constexpr (std::is_same_v<T, SimplexUnion>) {
            for (const auto& simplex : s.simplices)
              if (detail::barycentric(simplex, x).minCoeff() >= 0.0) return true;
            return false;
          } else {
            for (const auto& p : s.parts)
              if (p.contains(x)) return true;
            return false;
          }
        },
        shape_);
  }

  MembershipVerdict membership(const Vec& x, double epsilon) const {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
    MembershipVerdict v;
    v.member = contains(x);
    v.margin = margin(x, v.member);
    if (v.margin < epsilon)
      v.status = Membership::near_boundary;
    else
      v.status = v.member ? Membership::inside : Membership::outside;
    return v;
  }

  // Multiplicity of the projection to the torus: sum over k in Z^d of 1_W(x+k).
  int chi(const Vec& x) const {
    require_bounded();
    if (bounds_.empty()) return 0;
    const auto d = static_cast<Eigen::Index>(dim_);
    std::vector<long long> lo(d), hi(d), k(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      lo[i] = static_cast<long long>(std::ceil(bounds_.lo[i] - x[i])) - 1;
      hi[i] = static_cast<long long>(std::floor(bounds_.hi[i] - x[i])) + 1;
      if (hi[i] < lo[i]) return 0;
      k[i] = lo[i];
    }
    Vec y(d);
    int count = 0;
    for (;;) {
      for (Eigen::Index i = 0; i < d; ++i) y[i] = x[i] + static_cast<double>(k[i]);
      if (contains(y)) ++count;
      Eigen::Index i = 0;
      while (i < d && ++k[i] > hi[i]) {
        k[i] = lo[i];
        ++i;
      }
      if (i == d) break;
    }
    return count;
  }

  Window translated(const Vec& v) const {
    if (v.size() != dim_) throw std::invalid_argument("translation dimension mismatch");
    Shape moved = std::visit(
        [&](const auto& s) -> Shape {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            return Box{s.lo + v, s.hi + v};
          } else if constexpr (std::is_same_v<T, Parallelepiped>) {
            return Parallelepiped{s.origin + v, s.edges, s.inverse};
          } else if constexpr (std::is_same_v<T, SimplexUnion>) {
            SimplexUnion u = s;
            for (auto& simplex : u.simplices) simplex.vertices.colwise() += v;
            return u;
          } else {
            WindowUnion u;
            for (const auto& p : s.parts) u.parts.push_back(p.translated(v));
            return u;
          }
        },
        shape_);
    BoxBounds bb = bounds_;
    if (!is_empty_union()) {
      bb.lo += v;
      bb.hi += v;
    }
    return Window(std::move(moved), dim_, bb);
  }

 private:
  Window(Shape s, int dim, BoxBounds bb) : shape_(std::move(s)), dim_(dim), bounds_(std::move(bb)) {}

  bool is_empty_union() const {
    const auto* u = std::get_if<WindowUnion>(&shape_);
    return u && u->parts.empty();
  }

  // Distance-to-boundary lower bound; exact for boxes, parallelepipeds and
  // single simplices when x is inside.
  double margin(const Vec& x, bool member) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box>) {
            if (member) {
              double m = std::numeric_limits<double>::infinity();
              for (Eigen::Index i = 0; i < x.size(); ++i)
                m = std::min({m, x[i] - s.lo[i], s.hi[i] - x[i]});
              return m;
            }
            double sq = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              const double g = std::max({s.lo[i] - x[i], 0.0, x[i] - s.hi[i]});
              sq += g * g;
            }
            return std::sqrt(sq);
          } else if constexpr (std::is_same_v<T, Parallelepiped>) {
            const Vec t = s.inverse * (x - s.origin);
            double inside = std::numeric_limits<double>::infinity();
            double outside = 0.0;
            for (Eigen::Index i = 0; i < t.size(); ++i) {
              const double rho = s.inverse.row(i).norm();
              inside = std::min({inside, t[i] / rho, (1.0 - t[i]) / rho});
              outside = std::max({outside, -t[i] / rho, (t[i] - 1.0) / rho});
            }
            return member ? inside : outside;
          } else if constexpr (std::is_same_v<T, SimplexUnion>) {
            double best_inside = 0.0;
            double best_outside = std::numeric_limits<double>::infinity();
            for (const auto& simplex : s.simplices) {
              const Vec lam = detail::barycentric(simplex, x);
              const Mat g = detail::barycentric_gradients(simplex);
              double in = std::numeric_limits<double>::infinity();
              double out = 0.0;
              for (Eigen::Index i = 0; i < lam.size(); ++i) {
                const double dist = lam[i] / g.row(i).norm();
                in = std::min(in, dist);
                out = std::max(out, -dist);
              }
              if (lam.minCoeff() >= 0.0)
                best_inside = std::max(best_inside, in);
              else
                best_outside = std::min(best_outside, out);
            }
            return member ? best_inside : best_outside;
          } else {
            double best_inside = 0.0;
            double best_outside = std::numeric_limits<double>::infinity();
            for (const auto& p : s.parts) {
              const bool in = p.contains(x);
              const double m = p.margin(x, in);
              if (in)
                best_inside = std::max(best_inside, m);
              else
                best_outside = std::min(best_outside, m);
            }
            return member ? best_inside : best_outside;
          }
        },
        shape_);
  }

  Shape shape_;
  int dim_ = 0;
  BoxBounds bounds_;
};

}  // namespace cpset
