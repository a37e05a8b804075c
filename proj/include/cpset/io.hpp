#pragma once

// JSON and CSV formats for lattices, windows, instances and decompositions.

#include "cpset/equidecomp.hpp"
#include "cpset/lattice.hpp"
#include "cpset/matching.hpp"
#include "cpset/window.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpset {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits round-trips every double
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

inline Vec vec_from_json(const json& j) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError("expected a number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline IntVec intvec_from_json(const json& j) {
  if (j.is_number_integer()) return {j.get<long long>()};
  if (!j.is_array()) throw ConfigError("expected an integer array");
  IntVec v;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw ConfigError("expected an integer array");
    v.push_back(x.get<long long>());
  }
  return v;
}

inline json to_json(const Vec& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

// columns of the result are the listed vectors
inline Mat columns_from_json(const json& j, Eigen::Index rows) {
  if (!j.is_array()) throw ConfigError("expected a list of vectors");
  Mat m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Vec v = vec_from_json(j[c]);
    if (v.size() != rows) throw ConfigError("vector length mismatch");
    m.col(static_cast<Eigen::Index>(c)) = v;
  }
  return m;
}

inline Window window_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("window must be an object with one key");
  const auto it = j.begin();
  const std::string key = it.key();
  const json& body = it.value();
  try {
    if (key == "box") return Window::box(vec_from_json(body.at("lo")), vec_from_json(body.at("hi")));
    if (key == "parallelepiped") {
      const Vec origin = vec_from_json(body.at("origin"));
      return Window::parallelepiped(origin, columns_from_json(body.at("edges"), origin.size()));
    }
    if (key == "simplices") {
      if (!body.is_array() || body.empty()) throw ConfigError("simplices must be a nonempty list");
      const auto d = static_cast<Eigen::Index>(vec_from_json(body.at(0).at(0)).size());
      std::vector<Mat> sets;
      for (const auto& s : body) sets.push_back(columns_from_json(s, d));
      return Window::simplices(sets, static_cast<int>(d));
    }
    if (key == "union") {
      if (!body.is_array() || body.empty()) throw ConfigError("union must be a nonempty list");
      std::vector<Window> parts;
      for (const auto& p : body) parts.push_back(window_from_json(p));
      const int d = parts.front().dim();
      return Window::union_of(std::move(parts), d);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("window: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("window: ") + e.what());
  }
  throw ConfigError("unknown window kind '" + key + "'");
}

inline json to_json(const Window& w) {
  return std::visit(
      [&](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box>) {
          return {{"box", {{"lo", to_json(s.lo)}, {"hi", to_json(s.hi)}}}};
        } else if constexpr (std::is_same_v<T, Parallelepiped>) {
          json edges = json::array();
          for (Eigen::Index c = 0; c < s.edges.cols(); ++c) edges.push_back(to_json(Vec(s.edges.col(c))));
          return {{"parallelepiped", {{"origin", to_json(s.origin)}, {"edges", edges}}}};
        } else if constexpr (std::is_same_v<T, SimplexUnion>) {
          json list = json::array();
          for (const auto& simplex : s.simplices) {
            json verts = json::array();
            for (Eigen::Index c = 0; c < simplex.vertices.cols(); ++c)
              verts.push_back(to_json(Vec(simplex.vertices.col(c))));
            list.push_back(verts);
          }
          return {{"simplices", list}};
        } else {
          json list = json::array();
          for (const auto& p : s.parts) list.push_back(to_json(p));
          return {{"union", list}};
        }
      },
      w.shape());
}

struct LatticeConfig {
  std::optional<SpecialFormLattice> special;
  std::optional<LatticeBasis> basis;

  LatticeBasis as_basis() const { return special ? special->basis() : *basis; }
};

inline LatticeConfig lattice_from_json(const json& j) {
  LatticeConfig cfg;
  try {
    if (j.contains("special_form")) {
      const auto& sf = j.at("special_form");
      cfg.special = certify_special_form(vec_from_json(sf.at("alpha")), vec_from_json(sf.at("beta")));
    } else {
      const int m = j.at("m").get<int>(), n = j.at("n").get<int>();
      std::vector<std::vector<double>> vectors;
      for (const auto& v : j.at("basis")) vectors.push_back(v.get<std::vector<double>>());
      cfg.basis = LatticeBasis(m, n, vectors);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
  return cfg;
}

inline json to_json(const SpecialFormLattice& lat) {
  return {{"special_form", {{"alpha", to_json(lat.alpha)}, {"beta", to_json(lat.beta)}}}};
}

inline json to_json(const LatticeBasis& b) {
  json vectors = json::array();
  for (int j = 0; j < b.rank(); ++j) vectors.push_back(to_json(b.vector(j)));
  return {{"m", b.m()}, {"n", b.n()}, {"basis", vectors}};
}

inline Translation translation_from_json(const json& j) {
  if (j.contains("vector")) return Translation::vector(vec_from_json(j.at("vector")));
  return Translation::group(j.at("k").get<long long>(), intvec_from_json(j.at("m")));
}

inline json to_json(const Translation& t) {
  if (!t.is_group()) return {{"vector", to_json(t.raw)}};
  return {{"k", *t.k}, {"m", t.m}};
}

inline PiecewiseTranslation decomposition_from_json(const json& j) {
  PiecewiseTranslation pt;
  try {
    pt.alpha = vec_from_json(j.at("alpha"));
    for (const auto& p : j.at("pieces")) {
      json label = p;
      label.erase("window");
      pt.pieces.push_back({window_from_json(p.at("window")), translation_from_json(label)});
    }
    pt.resolved();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("decomposition: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("decomposition: ") + e.what());
  }
  return pt;
}

inline json to_json(const PiecewiseTranslation& pt) {
  json pieces = json::array();
  for (const auto& p : pt.pieces) {
    json entry = to_json(p.translation);
    entry["window"] = to_json(p.region);
    pieces.push_back(entry);
  }
  return {{"alpha", to_json(pt.alpha)}, {"pieces", pieces}};
}

// {"left": [...], "right": [...], "translations": [...], "alpha": [...], "tolerance": t}
// Points may be numbers (dimension 1) or arrays.
inline BipartiteInstance instance_from_json(const json& j) {
  try {
    std::vector<Vec> left, right;
    for (const auto& p : j.at("left")) left.push_back(vec_from_json(p));
    for (const auto& p : j.at("right")) right.push_back(vec_from_json(p));
    std::vector<Translation> tr;
    for (const auto& t : j.at("translations")) {
      if (t.is_number() || t.is_array())
        tr.push_back(Translation::vector(vec_from_json(t)));
      else
        tr.push_back(translation_from_json(t));
    }
    const Vec alpha = j.contains("alpha") ? vec_from_json(j.at("alpha")) : Vec();
    const double tol = j.value("tolerance", kTolerance);
    return build_instance(std::move(left), std::move(right), std::move(tr), alpha, tol);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
}

inline json to_json(const MatchingResult& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back({p.left, p.right, p.label});
  return {{"pairs", pairs},
          {"deficiency", r.deficiency},
          {"witness_side", r.witness_side == Side::left ? "left" : "right"},
          {"witness", r.witness},
          {"neighbors", r.neighbors}};
}

inline json to_json(const PartitionReport& r) {
  return {{"pass", r.pass},
          {"reason", r.reason},
          {"defect_source", r.defect_source},
          {"defect_overlap", r.defect_overlap},
          {"defect_target", r.defect_target},
          {"se_source", r.se_source},
          {"se_overlap", r.se_overlap},
          {"se_target", r.se_target},
          {"piece_measure", r.piece_measure},
          {"samples", r.samples},
          {"seed", r.seed}};
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> out;
    (append(out, cells), ...);
    row_strings(out);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
    text_ << '\n';
  }

  std::string str() const { return text_.str(); }

 private:
  static void append(std::vector<std::string>& out, double v) { out.push_back(fmt_real(v)); }
  static void append(std::vector<std::string>& out, long long v) { out.push_back(std::to_string(v)); }
  static void append(std::vector<std::string>& out, int v) { out.push_back(std::to_string(v)); }
  static void append(std::vector<std::string>& out, bool v) { out.push_back(v ? "1" : "0"); }
  static void append(std::vector<std::string>& out, const std::string& v) { out.push_back(v); }
  static void append(std::vector<std::string>& out, const IntVec& v) {
    for (auto x : v) out.push_back(std::to_string(x));
  }
  static void append(std::vector<std::string>& out, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(fmt_real(v[i]));
  }

  std::ostringstream text_;
};

}  // namespace cpset
