#pragma once

// Commands behind the cpset executable. Exit status: 0 success, 1 negative
// mathematical verdict, 2 bad usage or configuration.

#include "cpset/bde.hpp"
#include "cpset/discrepancy.hpp"
#include "cpset/equidecomp.hpp"
#include "cpset/io.hpp"
#include "cpset/lattice.hpp"
#include "cpset/matching.hpp"
#include "cpset/modelset.hpp"
#include "cpset/orbit.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpset {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen",   "brs",         "pairgap",    "bde",        "hall",
                                              "special-form", "orbit", "equi-verify", "equi-build", "uniformity"};
  return names;
}

struct RunConfig {
  std::string command;
  std::string lattice;
  std::string window;
  std::string window2;
  std::string instance;
  std::string decomposition;
  std::string out = ".";
  std::uint64_t seed = 0;

  long long nmax = 1000;
  std::optional<long long> split;      // defaults to nmax / 100
  std::optional<long long> n_lo;       // patch range start, default 0
  std::optional<double> k;
  std::optional<double> slack;         // defaults to K
  bool binary_search_k = false;
  double step = 1e-3;
  int kmax = 64;
  int x_samples = 16;
  double raster = 1.0 / 1024.0;
  long long samples = 100000;
  int q_max = kDefaultIndependenceBound;
  std::vector<double> x;               // base point; default grid otherwise
  std::string side = "both";
};

namespace detail {

// FNV-1a, 64 bit
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Run {
 public:
  explicit Run(const RunConfig& cfg) : cfg_(cfg) {
    if (cfg_.out.empty()) throw ConfigError("output directory required");
    std::filesystem::create_directories(cfg_.out);
  }

  const RunConfig& cfg() const { return cfg_; }

  std::string require(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("--") + what + " is required for " + cfg_.command);
    if (!std::filesystem::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
    inputs_[what] = digest(read_bytes(path));
    return path;
  }

  Window window(const std::string& path, const char* what) {
    auto w = window_from_json(read_json_file(require(path, what)));
    if (!w.bounded()) throw ConfigError(std::string(what) + " must be bounded");
    return w;
  }

  LatticeConfig lattice() { return lattice_from_json(read_json_file(require(cfg_.lattice, "lattice"))); }

  SpecialFormLattice special_lattice() {
    auto l = lattice();
    if (!l.special) throw ConfigError(cfg_.command + " needs a special_form lattice");
    return *l.special;
  }

  std::vector<Vec> x_grid(int d) const {
    if (cfg_.x.empty()) return default_x_grid(d);
    if (static_cast<int>(cfg_.x.size()) != d) throw ConfigError("--x must have one coordinate per window dimension");
    return {to_vec(cfg_.x)};
  }

  void emit(const std::string& name, const std::string& text) {
    write_text_file((std::filesystem::path(cfg_.out) / name).string(), text);
    outputs_[name] = digest(text);
  }
  void emit(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }

  int finish(int status, json parameters) {
    json m{{"command", cfg_.command},  {"version", kVersion}, {"seed", cfg_.seed}, {"inputs", inputs_},
           {"outputs", outputs_},      {"parameters", std::move(parameters)}, {"status", status}};
    write_text_file((std::filesystem::path(cfg_.out) / "manifest.json").string(), m.dump(2) + "\n");
    return status;
  }

 private:
  RunConfig cfg_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

inline long long split_of(const RunConfig& c) {
  const long long s = c.split.value_or(std::max(1LL, c.nmax / 100));
  if (s < 1 || s >= c.nmax) throw ConfigError("--split must lie in [1, nmax)");
  return s;
}

inline void write_patch(Run& run, const Patch& patch, int d) {
  std::vector<std::string> header{"n"};
  for (int i = 0; i < d; ++i) header.push_back("m" + std::to_string(i + 1));
  header.push_back("p1");
  for (int i = 0; i < d; ++i) header.push_back("p2_" + std::to_string(i + 1));
  header.push_back("flag_boundary");
  CsvWriter csv(header);
  for (const auto& p : patch.points) csv.row(p.n, p.m, p.p1, p.p2, p.near_boundary);
  run.emit("patch.csv", csv.str());
}

inline int cmd_gen(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.lattice();
  const auto w = run.window(c.window, "window");
  const long long lo = c.n_lo.value_or(0);
  Patch patch;
  json j;
  if (lat.special) {
    if (w.dim() != lat.special->dim()) throw ConfigError("window dimension must match alpha");
    patch = generate_patch(*lat.special, w, {lo, lo + c.nmax});
    j["lattice"] = to_json(*lat.special);
  } else {
    if (lat.basis->m() != 1) throw ConfigError("gen supports physical dimension 1");
    patch = generate_patch_general(*lat.basis, w,
                                   {static_cast<double>(lo), static_cast<double>(lo + c.nmax)});
    j["lattice"] = to_json(*lat.basis);
  }
  write_patch(run, patch, w.dim());
  j["window"] = to_json(w);
  j["n_range"] = {patch.n_range.lo, patch.n_range.hi};
  j["coverage"] = {patch.coverage.lo, patch.coverage.hi};
  j["min_gap"] = std::isfinite(patch.min_gap) ? json(patch.min_gap) : json(nullptr);
  j["points"] = patch.size();
  j["near_boundary"] = patch.flagged();
  run.emit("patch.json", j);
  return run.finish(0, {{"nmax", c.nmax}, {"n_lo", lo}});
}

inline int cmd_brs(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto w = run.window(c.window, "window");
  if (w.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  const long long split = split_of(c);
  const auto grid = run.x_grid(w.dim());
  const auto verdict = brs_classify_grid(w, lat.alpha, c.nmax, split, grid);

  CsvWriter summary({"x", "max_at_split", "max_at_end", "evidence"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& v = verdict.verdicts[i];
    std::string xs;
    for (Eigen::Index k = 0; k < grid[i].size(); ++k) xs += (k ? " " : "") + fmt_real(grid[i][k]);
    summary.row(xs, v.max_at_split, v.max_at_end,
                std::string(v.evidence == BrsEvidence::bounded_evidence ? "bounded" : "growth"));
  }
  run.emit("brs.csv", summary.str());

  const auto profile = discrepancy_profile(w, lat.alpha, grid.front(), c.nmax);
  CsvWriter csv({"N", "D", "running_max"});
  for (long long n = 1; n <= c.nmax; ++n)
    csv.row(n, profile.values[static_cast<std::size_t>(n - 1)], profile.running_max[static_cast<std::size_t>(n - 1)]);
  run.emit("profile.csv", csv.str());

  const bool bounded = verdict.evidence == BrsEvidence::bounded_evidence;
  run.emit("brs.json", json{{"evidence", bounded ? "bounded_evidence" : "growth_evidence"},
                            {"nmax", c.nmax},
                            {"split", split},
                            {"grid_points", grid.size()},
                            {"tolerance", kDefaultStabilizationTolerance}});
  return run.finish(bounded ? 0 : 1, {{"nmax", c.nmax}, {"split", split}});
}

inline int cmd_pairgap(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto w = run.window(c.window, "window");
  const auto w2 = run.window(c.window2, "window2");
  if (w.dim() != lat.dim() || w2.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  const long long split = split_of(c);
  const Vec x = run.x_grid(w.dim()).front();
  const auto p = pair_gap_profile(w, w2, lat.alpha, x, c.nmax);
  CsvWriter csv({"N", "S", "running_max"});
  for (long long n = 1; n <= c.nmax; ++n)
    csv.row(n, p.values[static_cast<std::size_t>(n - 1)], p.running_max[static_cast<std::size_t>(n - 1)]);
  run.emit("pairgap.csv", csv.str());
  const long long m_split = p.running_max[static_cast<std::size_t>(split - 1)];
  const long long m_end = p.running_max.back();
  run.emit("pairgap.json", json{{"x", to_json(x)},
                                {"max_at_split", m_split},
                                {"max_at_end", m_end},
                                {"slope", linear_slope(p.values)},
                                {"measure_difference", w.measure() - w2.measure()},
                                {"stable", m_split == m_end}});
  return run.finish(m_split == m_end ? 0 : 1, {{"nmax", c.nmax}, {"split", split}});
}

inline int cmd_bde(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto w = run.window(c.window, "window");
  if (w.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  const Patch pa = generate_patch(lat, w, {0, c.nmax});
  Patch pb;
  if (!c.window2.empty()) {
    const auto w2 = run.window(c.window2, "window2");
    if (w2.dim() != lat.dim()) throw ConfigError("window2 dimension must match alpha");
    pb = generate_patch(lat, w2, {0, c.nmax});
  } else {
    // unit covolume, so the density of the model set is mes W
    if (!(w.measure() > 0.0)) throw ConfigError("window must have positive measure");
    pb = equal_density_progression(pa, w.measure());
  }
  json params{{"nmax", c.nmax}};
  if (c.binary_search_k) {
    const auto mk = minimal_bde_constant(pa, pb, c.step);
    params["step"] = c.step;
    json j{{"found", mk.found}, {"step", c.step}};
    if (mk.found) {
      j["K"] = mk.k;
      j["K_observed"] = mk.at_k.k_observed;
      j["core"] = {mk.at_k.core.lo, mk.at_k.core.hi};
    }
    run.emit("bde.json", j);
    return run.finish(mk.found ? 0 : 1, params);
  }
  if (!c.k) throw ConfigError("bde needs --K or --binary-search-K");
  const double slack = c.slack.value_or(*c.k);
  const auto r = bounded_distance_match(pa, pb, *c.k, slack);
  json j = to_json(r.matching);
  j["K"] = *c.k;
  j["slack"] = slack;
  j["K_observed"] = r.k_observed;
  j["core"] = {r.core.lo, r.core.hi};
  j["core_left"] = r.core_left;
  j["core_right"] = r.core_right;
  run.emit("matching.json", j);
  params["K"] = *c.k;
  params["slack"] = slack;
  return run.finish(r.perfect_core() ? 0 : 1, params);
}

inline int cmd_hall(Run& run) {
  const auto& c = run.cfg();
  const auto inst = instance_from_json(read_json_file(run.require(c.instance, "instance")));
  if (c.side != "left" && c.side != "right" && c.side != "both") throw ConfigError("--side must be left, right or both");
  json j{{"edges", inst.edge_count()}};
  bool holds = true;
  for (Side s : {Side::left, Side::right}) {
    const char* name = s == Side::left ? "left" : "right";
    if (c.side != "both" && c.side != name) continue;
    const auto r = max_matching(inst, s);
    json side = to_json(r);
    side["holds"] = r.deficiency == 0;
    holds = holds && r.deficiency == 0;
    j[name] = side;
  }
  j["holds"] = holds;
  run.emit("hall.json", j);
  return run.finish(holds ? 0 : 1, {{"side", c.side}});
}

inline int cmd_special_form(Run& run) {
  const auto& c = run.cfg();
  const auto basis = run.lattice().as_basis();
  if (basis.m() != 1) throw ConfigError("special-form needs physical dimension 1");
  const auto report = check_general_position(basis, c.q_max);
  json rel = json::array();
  for (const auto& r : report.violations)
    rel.push_back({{"kind", r.kind == RelationKind::p2_density ? "p2_density" : "p1_injectivity"},
                   {"coeffs", r.coeffs},
                   {"residual", r.residual}});
  json j{{"bound_checked", report.bound_checked}, {"certified", report.certified()}, {"violations", rel}};
  if (report.certified()) {
    const auto red = to_special_form(basis, report);
    json b = json::array();
    for (Eigen::Index i = 0; i < red.map.B.rows(); ++i) b.push_back(to_json(Vec(red.map.B.row(i).transpose())));
    j["map"] = {{"a", red.map.a}, {"B", b}};
    j["lattice"] = to_json(red.lattice);
    j["order"] = red.order;
  }
  run.emit("special_form.json", j);
  return run.finish(report.certified() ? 0 : 1, {{"q_max", c.q_max}});
}

inline int cmd_orbit(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto wa = run.window(c.window, "window");
  const auto wb = run.window(c.window2, "window2");
  if (wa.dim() != lat.dim() || wb.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  if (std::abs(wa.measure() - wb.measure()) > kMeasureTolerance) throw ConfigError("windows must have equal measure");
  const Vec x = run.x_grid(wa.dim()).front();
  const auto en = orbit_enumerate(wa, wb, lat.alpha, x, {0, c.nmax});
  const auto sp = translation_spread(en);
  const int d = wa.dim();
  std::vector<std::string> header{"j", "fiber_a", "fiber_b"};
  for (int i = 0; i < d; ++i) header.push_back("a_" + std::to_string(i + 1));
  for (int i = 0; i < d; ++i) header.push_back("b_" + std::to_string(i + 1));
  header.push_back("e");
  for (int i = 0; i < d; ++i) header.push_back("m_" + std::to_string(i + 1));
  CsvWriter csv(header);
  for (const auto& r : sp.records) {
    const auto& a = en.a_points[static_cast<std::size_t>(r.j)];
    const auto& b = en.b_points[static_cast<std::size_t>(r.j)];
    csv.row(r.j, a.fiber, b.fiber, a.point, b.point, r.e, r.m);
  }
  run.emit("orbit.csv", csv.str());
  run.emit("orbit.json", json{{"x", to_json(x)},
                              {"E", std::vector<long long>(sp.e_values.begin(), sp.e_values.end())},
                              {"K1", sp.k1},
                              {"K2", sp.k2},
                              {"within_bound", sp.within_bound},
                              {"core", en.core},
                              {"max_fiber", en.max_fiber},
                              {"flagged", en.flagged},
                              {"max_residual", sp.max_residual}});
  return run.finish(0, {{"nmax", c.nmax}});
}

inline int cmd_equi_verify(Run& run) {
  const auto& c = run.cfg();
  const auto a = run.window(c.window, "window");
  const auto b = run.window(c.window2, "window2");
  const auto pt = decomposition_from_json(read_json_file(run.require(c.decomposition, "decomposition")));
  if (c.samples < kMinSamples) throw ConfigError("--samples must be at least 10000");
  const auto rep = verify_equidecomposition(a, b, pt, c.samples, c.seed);
  run.emit("report.json", to_json(rep));
  return run.finish(rep.pass ? 0 : 1, {{"samples", c.samples}});
}

inline int cmd_equi_build(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto a = run.window(c.window, "window");
  const auto b = run.window(c.window2, "window2");
  if (a.dim() != lat.dim() || b.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  if (std::abs(a.measure() - b.measure()) > kMeasureTolerance) throw ConfigError("windows must have equal measure");
  if (!(c.raster > 0.0)) throw ConfigError("--raster must be positive");
  const auto built = pieces_from_orbit_matchings(a, b, lat.alpha, run.x_grid(a.dim()), {0, c.nmax}, c.raster, c.seed);
  for (const auto& line : built.log) std::cerr << line << '\n';
  run.emit("decomposition.json", to_json(built.map));
  json labels = json::array();
  for (const auto& l : built.labels)
    labels.push_back({{"k", l.e}, {"m", l.m}, {"occurrences", l.occurrences}, {"cells", l.cells}, {"dropped", l.dropped}});
  run.emit("labels.json", json{{"labels", labels}, {"log", built.log}});
  return run.finish(0, {{"nmax", c.nmax}, {"raster", c.raster}});
}

inline int cmd_uniformity(Run& run) {
  const auto& c = run.cfg();
  const auto lat = run.special_lattice();
  const auto w = run.window(c.window, "window");
  if (w.dim() != lat.dim()) throw ConfigError("window dimension must match alpha");
  const auto rep = uniformity_scan(w, {lat.alpha}, c.kmax, c.x_samples, c.seed);
  CsvWriter csv({"k", "min_count", "ratio"});
  for (std::size_t i = 0; i < rep.k_values.size(); ++i) csv.row(rep.k_values[i], rep.min_counts[i], rep.ratios[i]);
  run.emit("uniformity.csv", csv.str());
  run.emit("uniformity.json", json{{"c_estimate", rep.c_estimate},
                                   {"k0_estimate", rep.k0_estimate ? json(*rep.k0_estimate) : json(nullptr)},
                                   {"x_samples", rep.x_samples},
                                   {"seed", rep.seed}});
  return run.finish(0, {{"kmax", c.kmax}, {"x_samples", c.x_samples}});
}

}  // namespace detail

inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
  try {
    detail::Run r(cfg);
    const auto& c = cfg.command;
    if (c != "hall" && c != "equi-verify" && c != "special-form" && c != "gen" && cfg.nmax < 1)
      throw ConfigError("--nmax must be positive");
    if (c == "gen") return detail::cmd_gen(r);
    if (c == "brs") return detail::cmd_brs(r);
    if (c == "pairgap") return detail::cmd_pairgap(r);
    if (c == "bde") return detail::cmd_bde(r);
    if (c == "hall") return detail::cmd_hall(r);
    if (c == "special-form") return detail::cmd_special_form(r);
    if (c == "orbit") return detail::cmd_orbit(r);
    if (c == "equi-verify") return detail::cmd_equi_verify(r);
    if (c == "equi-build") return detail::cmd_equi_build(r);
    if (c == "uniformity") return detail::cmd_uniformity(r);
    throw ConfigError("unknown command '" + c + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace cpset
