// Copyright 2026 The darnwalk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks, one per numbered criterion. Each prints a single
// "criterion N: PASS|FAIL" line with the measured numbers; the exit status is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "darnwalk/darnwalk.hpp"
#include "oracles.hpp"

namespace darnwalk {
namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

const DarningRegion kBall2 = DarningRegion::ball(Point{0.0, 0.0}, 0.25);

// 1. Builder against a double-loop enumeration, plus the handshake identity.
Verdict graph_exactness() {
  const auto g = build_lattice(kBall2, 3, 2.0);
  const auto ref = oracle::brute_force({true, {0.0, 0.0}, {0.25}}, 2, 3, 2.0);
  auto key = [&](VertexId v) {
    if (g.is_star(v)) return oracle::Key{};
    const auto c = g.coords(v);
    return oracle::Key(c.begin(), c.end());
  };
  std::set<std::pair<oracle::Key, oracle::Key>> built;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    for (VertexId y : g.neighbors(v)) {
      auto a = key(v);
      auto b = key(y);
      if (b < a) std::swap(a, b);
      built.insert({a, b});
    }
  }
  const bool edges = built == ref.edges && g.num_edges() == ref.num_edges();
  bool degrees = g.num_vertices() == ref.degree.size();
  bool measures = degrees;
  const double w = std::ldexp(1.0, -6) / 4.0;
  for (VertexId v = 0; degrees && v < g.num_vertices(); ++v) {
    const auto it = ref.degree.find(key(v));
    degrees = it != ref.degree.end() && static_cast<int>(g.degree(v)) == it->second;
    measures = measures && degrees && g.measure(v) == w * it->second;
  }
  double total = 0.0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) total += g.measure(v);
  const double hs = std::abs(total - w * 2.0 * static_cast<double>(g.num_edges()));
  Verdict out;
  out.pass = edges && degrees && measures && hs <= 1e-12;
  out.detail = "edges " + std::string(edges ? "match" : "differ") + " (" + std::to_string(g.num_edges()) +
               "), degrees " + (degrees ? "match" : "differ") + ", measures " + (measures ? "match" : "differ") +
               ", handshake error " + num(hs);
  return out;
}

// 2. Star degree slopes.
Verdict star_degree_growth() {
  struct Case {
    const char* name;
    DarningRegion region;
    int jmax;
  };
  const std::vector<Case> cases{
      {"d2 ball", kBall2, 8},
      {"d2 box", DarningRegion::box(Point{-0.25, -0.25}, Point{0.25, 0.25}), 8},
      {"d3 ball", DarningRegion::ball(Point{0.0, 0.0, 0.0}, 0.25), 5},
      {"d3 box", DarningRegion::box(Point{-0.25, -0.25, -0.25}, Point{0.25, 0.25, 0.25}), 5}};
  Verdict out;
  out.pass = true;
  for (const auto& c : cases) {
    const double slope = star_degree_scaling(c.region, 3, c.jmax).slope;
    const double target = c.region.dim() - 1.0;
    const bool ok = std::abs(slope - target) <= 0.3;
    out.pass = out.pass && ok;
    out.detail += std::string(out.detail.empty() ? "" : ", ") + c.name + " slope " + num(slope);
  }
  return out;
}

// 3. Detailed balance on every edge, kernel symmetry and mass.
Verdict detailed_balance() {
  const auto g = build_lattice(kBall2, 3, 2.0);
  const double rate = g.paper_rate();
  bool balance = true;
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    for (VertexId y : g.neighbors(x)) {
      balance = balance && g.measure(x) * (rate / g.degree(x)) == g.measure(y) * (rate / g.degree(y));
    }
  }
  std::vector<VertexId> src(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) src[v] = v;
  const double ts[] = {0.1, 0.25, 1.0};
  const auto rows = heat_kernel(g, ts, src);
  double asym = 0.0;
  double mass = 0.0;
  for (const auto& kr : rows) {
    for (VertexId x = 0; x < g.num_vertices(); ++x) {
      double s = 0.0;
      for (double p : kr.row(x)) s += p;
      mass = std::max(mass, std::abs(s - 1.0));
      for (VertexId y = x + 1; y < g.num_vertices(); ++y) {
        asym = std::max(asym, std::abs(kr.density(g, x, y) - kr.density(g, y, x)));
      }
    }
  }
  Verdict out;
  out.pass = balance && asym <= 1e-9 && mass <= 1e-10;
  out.detail = std::string("detailed balance ") + (balance ? "exact" : "violated") + ", max |p - p^T| " +
               num(asym) + ", max |mass - 1| " + num(mass);
  return out;
}

// 4. Generator on |x|^2 and on a class-G bump.
Verdict generator_consistency() {
  double quad_err = 0.0;
  for (int j = 3; j <= 8; ++j) {
    const auto g = build_lattice(kBall2, j, 2.0);
    const auto lf = generator_apply(g, evaluate(g, TestFunction::quadratic(2)));
    for (VertexId v : interior_set(g).ids) quad_err = std::max(quad_err, std::abs(lf[v] - 1.0));
  }
  const double inner = farthest_distance(kBall2, Point{0.0, 0.0}) + 0.25;
  const auto bump = TestFunction::bump(Point{0.0, 0.0}, inner, inner + 1.0);
  std::map<int, GeneratorLevel> lv;
  for (int j = 3; j <= 8; ++j) lv[j] = generator_bound_check(build_lattice(kBall2, j, 2.0), bump);
  bool ratios_ok = true;
  std::string ratios;
  for (int j = 4; j < 7; ++j) {
    const double r = lv[j + 1].max_interior_error / lv[j].max_interior_error;
    ratios_ok = ratios_ok && r >= 0.3 && r <= 0.7;
    ratios += (ratios.empty() ? "" : " ") + num(r);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (int j = 3; j <= 8; ++j) {
    xs.push_back(j);
    ys.push_back(std::log2(std::abs(lv[j].max_value)));
  }
  const double slope = least_squares_slope(xs, ys);
  Verdict out;
  out.pass = quad_err <= 1e-10 && ratios_ok && std::abs(slope) <= 0.1;
  out.detail = "max |L|x|^2 - 1| on S^j " + num(quad_err) + ", bump error ratios j=4..7 [" + ratios +
               "] (need [0.3, 0.7]), log2 max L f slope " + num(slope);
  return out;
}

// 5. Isoperimetric minima at j=4 and j=5 and the bitmask cross-check.
Verdict isoperimetric_uniformity() {
  const auto fams = parse_families("connected:6,balls:1..16,star:2");
  double mins[2];
  bool truncated = false;
  for (int i = 0; i < 2; ++i) {
    const auto g = build_lattice(kBall2, 4 + i, 2.0);
    const auto rep = isoperimetry_report(g, fams);
    mins[i] = rep.min_ratio;
    truncated = truncated || rep.truncated;
  }
  const auto g4 = build_lattice(kBall2, 4, 2.0);
  const double singleton = iso_ratio(g4, make_vertex_set(g4, {*g4.find_point(Point{1.0, 1.0})}));
  const auto plain = build_lattice(DarningRegion::empty(2), 1, 1.5);
  const auto mine = enumerate_family(plain, parse_families("connected:6")[0]);
  const auto [ref, count] = oracle::BitmaskOracle().min_ratio(6);
  const bool agree = std::abs(mine.min_ratio - ref) <= 1e-12 && mine.sets == count;
  const double factor = std::max(mins[0], mins[1]) / std::min(mins[0], mins[1]);
  Verdict out;
  out.pass = mins[0] > 0.0 && mins[1] > 0.0 && factor <= 2.0 && singleton == 1.0 && agree && !truncated;
  out.detail = "min ratio j=4 " + num(mins[0]) + ", j=5 " + num(mins[1]) + ", factor " + num(factor) +
               ", interior singleton " + num(singleton) + ", bitmask oracle " + (agree ? "agrees" : "differs") +
               " (" + std::to_string(count) + " sets)";
  return out;
}

// 6. On-diagonal supremum and off-diagonal prefactor across j=2..5.
Verdict heat_kernel_bounds() {
  std::vector<DarnedLattice> graphs;
  for (int j = 2; j <= 5; ++j) graphs.push_back(build_lattice(kBall2, j, 2.0));
  std::vector<const DarnedLattice*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  const double ts[] = {0.05, 0.1, 0.25, 0.5, 1.0};
  const auto on = ondiag_bound_check(ptrs, ts, false);
  std::vector<double> c6;
  for (const auto& g : graphs) {
    std::vector<VertexId> src{*g.star(), *g.find_point(Point{0.5, 0.0}), nearest_to_origin(g),
                              *g.find_point(Point{2.0, 2.0}), *g.find_point(Point{2.0, 0.0})};
    c6.push_back(offdiag_bound_check(g, ts, src).c6);
  }
  const double c6_factor = *std::max_element(c6.begin(), c6.end()) / *std::min_element(c6.begin(), c6.end());
  std::string sups;
  for (double s : on.level_sup) sups += (sups.empty() ? "" : " ") + num(s);
  std::string cs;
  for (double c : c6) cs += (cs.empty() ? "" : " ") + num(c);
  Verdict out;
  out.pass = on.ratio <= 4.0 && std::isfinite(c6_factor) && c6_factor <= 4.0;
  out.detail = "on-diagonal sup per level [" + sups + "], ratio to j=2 " + num(on.ratio) + "; C6 per level [" + cs +
               "], spread " + num(c6_factor);
  return out;
}

// 7. Monte Carlo marginal against the uniformization row.
Verdict oracle_gate_check() {
  const auto g = build_lattice(kBall2, 3, 4.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  WalkConfig w;
  w.horizon = 0.25;
  w.num_paths = 100000;
  w.seed = 42;
  const double ts[] = {0.25};
  const auto m = marginal(g, w, x0, ts);
  const auto chi = oracle_gate(g, m[0], x0, RateMode::kPaper, 0.01);
  Verdict out;
  out.pass = !chi.rejected && m[0].exited == 0;
  out.detail = "chi2 " + num(chi.statistic) + " on " + std::to_string(chi.dof) + " dof, critical " + num(chi.critical) +
               ", p " + num(chi.p_value) + ", exited " + std::to_string(m[0].exited);
  return out;
}

// 8. Annulus hitting probabilities in d=2 (j=6) and d=3 (j=4).
Verdict hitting_limit() {
  Verdict out;
  out.pass = true;
  struct Case {
    int dim;
    int level;
  };
  for (const Case cs : {Case{2, 6}, Case{3, 4}}) {
    json j = {{"dimension", cs.dim},
              {"region", {{"shape", "ball"}, {"center", std::vector<double>(static_cast<std::size_t>(cs.dim), 0.0)},
                          {"radius", 0.25}}},
              {"x0", cs.dim == 2 ? std::vector<double>{0.5, 0.0} : std::vector<double>{0.5, 0.0, 0.0}},
              {"levels", {cs.level}},
              {"window", 2.0},
              {"bmd", {{"outer_radius", 1.0}, {"hitting_paths", 100000}}}};
    const RunConfig c = parse_run_config(j);
    GraphSet graphs(c);
    const auto h = annulus_hitting(graphs.at(cs.level), graphs.start(cs.level), c, cs.level);
    out.pass = out.pass && h.within && h.stats.exited == 0;
    out.detail += std::string(out.detail.empty() ? "" : "; ") + "d=" + std::to_string(cs.dim) + " j=" +
                  std::to_string(cs.level) + " P=" + num(h.stats.hit.value()) + " target " + num(*h.target) +
                  " |diff| " + num(std::abs(h.stats.hit.value() - *h.target)) + " tol " + num(h.tolerance);
  }
  return out;
}

// 9. KS trend, occupation decay and tightness over j=4..6.
Verdict convergence_surrogates() {
  json j = {{"levels", {4, 5, 6}},
            {"window", 4.0},
            {"T", 1.0},
            {"num_paths", 100000},
            {"time_grid", {0.25}},
            {"gate_time", 0.25}};
  const RunConfig c = parse_run_config(j);
  GraphSet graphs(c);
  const auto lc = level_consistency(graphs);
  const auto occ = star_occupation(graphs);
  const auto tight = tightness_probe(graphs);
  Verdict out;
  std::string ks;
  for (const auto& p : lc.pairs) ks += (ks.empty() ? "" : " ") + num(p.ks_rho);
  const bool trend_ok = lc.gates_passed && !lc.trends.empty() && lc.trends[0].decreasing;
  const bool top_ok = lc.gates_passed && !lc.trends.empty() && lc.trends[0].top_below_critical;
  std::string ratios;
  for (const auto& r : occ.ratios) ratios += (ratios.empty() ? "" : " ") + (r.ratio ? num(*r.ratio) : "n/a");
  out.pass = trend_ok && top_ok && occ.decays && tight.no_growth;
  out.detail = "KS(j,j+1) [" + ks + "] critical " + num(lc.pairs.back().ks_critical) + " gates " +
               (lc.gates_passed ? "passed" : "rejected") + ", trend " + (trend_ok ? "decreasing" : "not decreasing") +
               ", top pair " + (top_ok ? "below" : "above") + " critical; occupation ratios [" + ratios + "] " +
               (occ.decays ? "ok" : "too large") + "; tightness " + (tight.no_growth ? "no growth" : "growth");
  return out;
}

// 10. Two runs of the same configuration produce identical files.
Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "darnwalk_acceptance_determinism";
  fs::remove_all(dir);
  json j = {{"levels", {3, 4}},
            {"window", 2.0},
            {"T", 0.5},
            {"num_paths", 20000},
            {"time_grid", {0.1, 0.25, 0.5}},
            {"gate_time", 0.25},
            {"experiments", {"graphs", "level_consistency", "tightness", "star_occupation", "bmd_comparison"}},
            {"output_dir", dir.string()},
            {"star_occupation", {{"times", {0.25, 0.5}}}},
            {"bmd", {{"hitting_paths", 20000}, {"diffusion_paths", 20000}}}};
  const RunConfig c = parse_run_config(j);
  auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files[fs::relative(e.path(), dir).generic_string()] = ss.str();
    }
    return files;
  };
  const auto first = run(c);
  auto a = snapshot();
  fs::remove_all(dir);
  const auto second = run(c);
  auto b = snapshot();
  json ma = first.manifest;
  json mb = second.manifest;
  ma.erase("wall_times");
  mb.erase("wall_times");
  a.erase("manifest.json");
  b.erase("manifest.json");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) differing += (b.count(name) && b[name] == bytes) ? 0 : 1;
  Verdict out;
  out.pass = first.exit_code == 0 && second.exit_code == 0 && a.size() == b.size() && differing == 0 && ma == mb;
  out.detail = std::to_string(a.size()) + " output files compared, " + std::to_string(differing) +
               " differ; manifest outside wall_times " + (ma == mb ? "identical" : "differs") +
               (first.exit_code == 0 ? "" : "; first run status " + first.manifest["status"].dump());
  fs::remove_all(dir);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no runtime limit
  std::function<Verdict()> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "graph and measure exactness", 1.0, graph_exactness},
      {2, "star degree growth", 30.0, star_degree_growth},
      {3, "detailed balance and kernel symmetry", 10.0, detailed_balance},
      {4, "generator consistency", 60.0, generator_consistency},
      {5, "isoperimetric uniformity", 120.0, isoperimetric_uniformity},
      {6, "heat kernel bounds", 180.0, heat_kernel_bounds},
      {7, "Monte Carlo against oracle", 60.0, oracle_gate_check},
      {8, "annulus hitting limit", 300.0, hitting_limit},
      {9, "convergence surrogates", 600.0, convergence_surrogates},
      {10, "determinism", 0.0, determinism}};
  return all;
}

}  // namespace
}  // namespace darnwalk

int main(int argc, char** argv) {
  using namespace darnwalk;
  CLI::App app{"darnwalk acceptance checks"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "criterion number(s); all when omitted")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    std::printf("criterion %d: %s | %s | %s | %.2fs%s\n", c.id, pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs,
                in_time ? "" : " (over the runtime limit)");
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
