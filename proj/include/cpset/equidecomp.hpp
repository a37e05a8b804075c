#pragma once

// Piecewise translations and Monte Carlo checks of equidecomposability up to
// measure zero.

#include "cpset/matching.hpp"
#include "cpset/numeric.hpp"
#include "cpset/orbit.hpp"
#include "cpset/window.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpset {

struct Piece {
  Window region;
  Translation translation;
};

struct PiecewiseTranslation {
  Vec alpha;  // resolves group labels k alpha + m
  std::vector<Piece> pieces;

  std::vector<Vec> resolved() const {
    std::vector<Vec> out;
    for (const auto& p : pieces) {
      if (!p.region.bounded()) throw std::invalid_argument("piece regions must be bounded");
      out.push_back(p.translation.resolve(alpha));
    }
    return out;
  }
};

enum class ApplyStatus { mapped, unmapped, ambiguous };

struct ApplyResult {
  ApplyStatus status = ApplyStatus::unmapped;
  std::optional<Vec> image;
  std::optional<std::size_t> piece;
  std::vector<std::size_t> containing;  // all pieces containing x
};

inline ApplyResult apply(const PiecewiseTranslation& pt, const Vec& x) {
  ApplyResult r;
  for (std::size_t i = 0; i < pt.pieces.size(); ++i)
    if (pt.pieces[i].region.contains(x)) r.containing.push_back(i);
  if (r.containing.size() == 1) {
    r.status = ApplyStatus::mapped;
    r.piece = r.containing.front();
    r.image = x + pt.pieces[*r.piece].translation.resolve(pt.alpha);
  } else if (r.containing.size() > 1) {
    r.status = ApplyStatus::ambiguous;
  }
  return r;
}

struct PartitionReport {
  double defect_source = 0.0;   // mes(A sym-diff union of pieces)
  double defect_overlap = 0.0;  // sum over pairs of mes(P_i cap P_j)
  double defect_target = 0.0;   // mes(B sym-diff union of translated pieces)
  double se_source = 0.0;
  double se_overlap = 0.0;
  double se_target = 0.0;
  double piece_measure = 0.0;   // sum of exact piece measures
  long long samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
  std::string reason;
};

inline constexpr int kSampleStreams = 16;
inline constexpr long long kMinSamples = 10000;

namespace detail {

inline BoxBounds union_bounds(const std::vector<const Window*>& ws, int d) {
  BoxBounds bb{Vec::Constant(d, std::numeric_limits<double>::infinity()),
               Vec::Constant(d, -std::numeric_limits<double>::infinity())};
  for (const auto* w : ws) {
    if (w->measure() <= 0.0) continue;
    bb.lo = bb.lo.cwiseMin(w->bounds().lo);
    bb.hi = bb.hi.cwiseMax(w->bounds().hi);
  }
  return bb;
}

struct Tally {
  double volume = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  long long n = 0;

  double estimate() const { return n == 0 ? 0.0 : volume * sum / static_cast<double>(n); }
  double standard_error() const {
    if (n < 2) return 0.0;
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    return volume * std::sqrt(var / static_cast<double>(n));
  }
};

// Draws `samples` uniform points from box bb split over fixed streams, so the
// result does not depend on how the streams are scheduled.
template <class F>
void sample_box(const BoxBounds& bb, long long samples, std::uint64_t seed, std::uint64_t stream_base, F&& visit) {
  const auto d = bb.lo.size();
  Vec y(d);
  for (int s = 0; s < kSampleStreams; ++s) {
    RandomStream rng(seed, stream_base + static_cast<std::uint64_t>(s));
    const long long count = samples / kSampleStreams + (s < samples % kSampleStreams ? 1 : 0);
    for (long long i = 0; i < count; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) y[k] = rng.uniform(bb.lo[k], bb.hi[k]);
      visit(y);
    }
  }
}

}  // namespace detail

inline PartitionReport verify_equidecomposition(const Window& a, const Window& b, const PiecewiseTranslation& pt,
                                                long long samples, std::uint64_t seed) {
  if (samples < kMinSamples) throw std::invalid_argument("need at least 10000 samples");
  a.require_bounded();
  b.require_bounded();
  if (a.dim() != b.dim()) throw std::invalid_argument("windows must share a dimension");
  const int d = a.dim();
  PartitionReport rep;
  rep.samples = samples;
  rep.seed = seed;
  if (std::abs(a.measure() - b.measure()) > 1e-9) {
    rep.reason = "measures differ: translations preserve measure";
    return rep;
  }
  const auto shifts = pt.resolved();
  std::vector<Window> moved;
  for (std::size_t i = 0; i < pt.pieces.size(); ++i) {
    if (pt.pieces[i].region.dim() != d) throw std::invalid_argument("piece dimension mismatch");
    moved.push_back(pt.pieces[i].region.translated(shifts[i]));
    rep.piece_measure += pt.pieces[i].region.measure();
  }

  std::vector<const Window*> src{&a}, dst{&b};
  for (const auto& p : pt.pieces) src.push_back(&p.region);
  for (const auto& w : moved) dst.push_back(&w);

  auto box_volume = [](const BoxBounds& bb) { return bb.empty() ? 0.0 : (bb.hi - bb.lo).prod(); };
  detail::Tally t_src, t_ovl, t_dst;
  const BoxBounds sb = detail::union_bounds(src, d);
  if (!sb.empty()) {
    t_src.volume = t_ovl.volume = box_volume(sb);
    detail::sample_box(sb, samples, seed, 0, [&](const Vec& y) {
      long long c = 0;
      for (const auto& p : pt.pieces) c += p.region.contains(y);
      const double s = a.contains(y) != (c > 0) ? 1.0 : 0.0;
      const double o = static_cast<double>(c * (c - 1) / 2);
      t_src.sum += s;
      t_src.sum_sq += s;
      t_ovl.sum += o;
      t_ovl.sum_sq += o * o;
      ++t_src.n;
      ++t_ovl.n;
    });
  }
  const BoxBounds db = detail::union_bounds(dst, d);
  if (!db.empty()) {
    t_dst.volume = box_volume(db);
    detail::sample_box(db, samples, seed, kSampleStreams, [&](const Vec& y) {
      bool hit = false;
      for (const auto& w : moved) {
        if (w.contains(y)) {
          hit = true;
          break;
        }
      }
      const double s = b.contains(y) != hit ? 1.0 : 0.0;
      t_dst.sum += s;
      t_dst.sum_sq += s;
      ++t_dst.n;
    });
  }
  rep.defect_source = t_src.estimate();
  rep.defect_overlap = t_ovl.estimate();
  rep.defect_target = t_dst.estimate();
  rep.se_source = t_src.standard_error();
  rep.se_overlap = t_ovl.standard_error();
  rep.se_target = t_dst.standard_error();

  const double floor = 1e-6 * std::max(a.measure(), 1.0);
  auto ok = [&](double v, double se) { return v < 3.0 * se + floor; };
  rep.pass = ok(rep.defect_source, rep.se_source) && ok(rep.defect_overlap, rep.se_overlap) &&
             ok(rep.defect_target, rep.se_target);
  if (!rep.pass) {
    rep.reason = !ok(rep.defect_source, rep.se_source)     ? "pieces do not cover A"
                 : !ok(rep.defect_overlap, rep.se_overlap) ? "pieces overlap"
                                                           : "translated pieces do not cover B";
  }
  return rep;
}

struct LabelStat {
  long long e = 0;
  IntVec m;
  long long occurrences = 0;  // matched orbit points carrying the label
  long long cells = 0;        // raster cells assigned to it
  bool dropped = false;
};

struct AssembledDecomposition {
  PiecewiseTranslation map;
  std::vector<LabelStat> labels;
  std::vector<Vec> x_grid;
  std::vector<std::string> log;
};

inline constexpr double kLabelDropFraction = 0.01;

// Aggregates the orbit pairings over x_grid: every raster cell takes the label
// (e, m) most often used by the orbit points it contains, and the cells of a
// label become one piece. Cells are clipped to the bounding box of A.
inline AssembledDecomposition pieces_from_orbit_matchings(const Window& wa, const Window& wb, const Vec& alpha,
                                                          std::vector<Vec> x_grid, IntRange n_range, double raster,
                                                          std::uint64_t seed) {
  if (!(raster > 0.0)) throw std::invalid_argument("raster must be positive");
  const int d = wa.dim();
  AssembledDecomposition out;
  out.map.alpha = alpha;
  if (x_grid.empty()) {
    RandomStream rng(seed, 0);
    for (int i = 0; i < 8; ++i) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = rng.uniform();
      x_grid.push_back(x);
    }
  }
  out.x_grid = x_grid;

  using Label = std::pair<long long, IntVec>;
  std::map<Label, long long> totals;
  std::map<IntVec, std::map<Label, long long>> votes;
  long long records = 0;
  for (const auto& x : x_grid) {
    const auto en = orbit_enumerate(wa, wb, alpha, x, n_range);
    const auto sp = translation_spread(en);
    for (const auto& r : sp.records) {
      const Vec& p = en.a_points[static_cast<std::size_t>(r.j)].point;
      IntVec cell(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) cell[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(p[k] / raster));
      Label lab{r.e, r.m};
      ++votes[cell][lab];
      ++totals[lab];
      ++records;
    }
  }

  std::map<Label, std::size_t> label_index;
  for (const auto& [lab, n] : totals) {
    LabelStat st{lab.first, lab.second, n, 0, static_cast<double>(n) < kLabelDropFraction * static_cast<double>(records)};
    if (st.dropped) {
      std::string m;
      for (auto v : lab.second) m += (m.empty() ? "" : ",") + std::to_string(v);
      out.log.push_back("dropped label e=" + std::to_string(lab.first) + " m=(" + m + ") with " + std::to_string(n) +
                        " of " + std::to_string(records) + " matches");
    } else {
      label_index[lab] = out.labels.size();
    }
    out.labels.push_back(std::move(st));
  }
  for (const auto& [lab, idx] : label_index) out.labels[idx].cells = 0;

  // majority label per cell, then runs along the last axis merged into boxes
  std::map<std::size_t, std::vector<Window>> boxes;
  const auto& abb = wa.bounds();
  auto emit = [&](std::size_t label, const IntVec& first, long long last) {
    Vec lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<double>(first[static_cast<std::size_t>(k)]) * raster;
      hi[k] = static_cast<double>(first[static_cast<std::size_t>(k)] + 1) * raster;
    }
    hi[d - 1] = static_cast<double>(last + 1) * raster;
    lo = lo.cwiseMax(abb.lo);
    hi = hi.cwiseMin(abb.hi);
    if ((hi - lo).minCoeff() > 0.0) boxes[label].push_back(Window::box(lo, hi));
  };
  std::optional<std::pair<std::size_t, IntVec>> run;
  long long run_end = 0;
  for (const auto& [cell, tally] : votes) {
    std::optional<std::size_t> best;
    long long best_n = 0;
    for (const auto& [lab, n] : tally) {
      auto it = label_index.find(lab);
      if (it == label_index.end()) continue;
      if (n > best_n) {
        best_n = n;
        best = it->second;
      }
    }
    if (!best) continue;
    ++out.labels[*best].cells;
    const bool extends = run && run->first == *best && cell.back() == run_end + 1 &&
                         std::equal(cell.begin(), cell.end() - 1, run->second.begin());
    if (extends) {
      run_end = cell.back();
      continue;
    }
    if (run) emit(run->first, run->second, run_end);
    run = std::make_pair(*best, cell);
    run_end = cell.back();
  }
  if (run) emit(run->first, run->second, run_end);

  for (auto& [idx, parts] : boxes) {
    const auto& st = out.labels[idx];
    out.map.pieces.push_back({Window::union_of(std::move(parts), d), Translation::group(st.e, st.m)});
  }
  return out;
}

}  // namespace cpset
