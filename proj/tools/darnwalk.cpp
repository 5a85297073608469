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

// darnwalk command-line tool.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "darnwalk/darnwalk.hpp"

namespace dw = darnwalk;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("not a number: " + item);
    out.push_back(v);
  }
  return out;
}

/// "4..8" or "4,5,7".
std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    if (lo > hi) throw std::invalid_argument("empty level range " + s);
    for (int j = lo; j <= hi; ++j) out.push_back(j);
    return out;
  }
  for (const auto& item : split(s, ',')) out.push_back(std::stoi(item));
  return out;
}

dw::Point parse_point(const std::string& s, int dim, char sep = ',') {
  const auto xs = [&] {
    std::vector<double> v;
    for (const auto& item : split(s, sep)) v.push_back(std::stod(item));
    return v;
  }();
  if (xs.empty() || static_cast<int>(xs.size()) > dim) {
    throw std::invalid_argument("point '" + s + "' needs 1.." + std::to_string(dim) + " coordinates");
  }
  dw::Point p(dim);
  for (std::size_t i = 0; i < xs.size(); ++i) p[static_cast<int>(i)] = xs[i];
  return p;
}

dw::VertexId vertex_at(const dw::DarnedLattice& g, const dw::Point& p) {
  const auto v = g.find_point(p);
  if (!v) throw std::invalid_argument("point is not a vertex of this graph");
  return *v;
}

/// star | origin | <id> | x:y[:z]
dw::VertexId parse_source(const dw::DarnedLattice& g, const std::string& tok) {
  if (tok == "star") {
    if (!g.star()) throw std::invalid_argument("graph has no star vertex");
    return *g.star();
  }
  if (tok == "origin") return dw::nearest_to_origin(g);
  if (tok.find(':') != std::string::npos) return vertex_at(g, parse_point(tok, g.dim(), ':'));
  std::size_t used = 0;
  const unsigned long id = std::stoul(tok, &used);
  if (used != tok.size() || id >= g.num_vertices()) throw std::invalid_argument("bad vertex id " + tok);
  return static_cast<dw::VertexId>(id);
}

dw::json iso_json(const dw::IsoReport& r) {
  dw::json j;
  j["level"] = r.level;
  j["min_ratio"] = dw::finite_or_null(r.min_ratio);
  j["min_star"] = dw::finite_or_null(r.min_star);
  j["min_star_free"] = dw::finite_or_null(r.min_star_free);
  j["truncated"] = r.truncated;
  j["families"] = dw::json::array();
  for (const auto& f : r.families) {
    j["families"].push_back({{"name", f.name},
                             {"sets", f.sets},
                             {"truncated", f.truncated},
                             {"min_ratio", dw::finite_or_null(f.min_ratio)},
                             {"min_star", dw::finite_or_null(f.min_star)},
                             {"min_star_free", dw::finite_or_null(f.min_star_free)},
                             {"argmin", f.argmin}});
  }
  return j;
}

int cmd_build_graph(const std::string& config, int level, const std::string& out, const std::string& summary) {
  const dw::RunConfig c = dw::load_run_config(config);
  const int j = level > 0 ? level : c.levels.front();
  const dw::DarnedLattice g = dw::build_lattice(c.region, j, c.window);
  dw::save_graph(g, out);
  const dw::json s = dw::graph_summary(g);
  if (!summary.empty()) dw::write_json_file(summary, s);
  std::cout << s.dump() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string graph;
  double horizon = 1.0;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 42;
  std::string times = "0.1,0.25,0.5,1.0";
  std::string x0 = "0.5";
  std::string rate_mode = "paper";
  double escape_threshold = 0.01;
  std::string out;
  std::string dump_paths;
  std::uint64_t dump_count = 10;
};

int cmd_simulate(const SimulateArgs& a) {
  const dw::DarnedLattice g = dw::load_graph(a.graph);
  dw::WalkConfig w;
  w.rate_mode = dw::parse_rate_mode(a.rate_mode);
  w.horizon = a.horizon;
  w.seed = a.seed;
  w.num_paths = a.paths;
  const dw::VertexId x0 = vertex_at(g, parse_point(a.x0, g.dim()));
  const auto times = parse_doubles(a.times);
  const auto ms = dw::marginal(g, w, x0, times, a.escape_threshold);
  dw::json j;
  j["schema_version"] = 1;
  j["graph"] = dw::graph_summary(g);
  j["x0"] = {{"id", x0}, {"position", dw::json::array()}};
  for (int i = 0; i < g.dim(); ++i) j["x0"]["position"].push_back(g.position(x0)[i]);
  j["T"] = a.horizon;
  j["num_paths"] = a.paths;
  j["seed"] = a.seed;
  j["rate_mode"] = dw::to_string(w.rate_mode);
  j["marginals"] = dw::json::array();
  for (const auto& m : ms) {
    double mean_rho = 0.0;
    dw::json counts = dw::json::array();
    for (dw::VertexId v = 0; v < g.num_vertices(); ++v) {
      if (m.counts[v] == 0) continue;
      counts.push_back({v, m.counts[v]});
      mean_rho += static_cast<double>(m.counts[v]) * dw::quotient_metric(g, x0, v);
    }
    const double star = g.star() ? static_cast<double>(m.counts[*g.star()]) / static_cast<double>(a.paths) : 0.0;
    j["marginals"].push_back({{"t", m.t},
                              {"exited", m.exited},
                              {"exit_fraction", m.exit_fraction},
                              {"flagged", m.flagged},
                              {"p_star", star},
                              {"mean_rho", m.num_paths ? dw::json(mean_rho / static_cast<double>(m.num_paths)) : dw::json(nullptr)},
                              {"counts", counts}});
    if (m.flagged) {
      std::cerr << "warning: escape fraction " << m.exit_fraction << " at t=" << m.t
                << " exceeds " << a.escape_threshold << "; consider a larger window\n";
    }
  }
  dw::write_json_file(a.out, j);
  if (!a.dump_paths.empty()) {
    std::vector<std::string> header{"path", "t", "vertex"};
    const char* axes[] = {"x", "y", "z", "w"};
    for (int i = 0; i < g.dim(); ++i) header.push_back(axes[i]);
    dw::CsvWriter csv(header);
    for (std::uint64_t p = 0; p < std::min(a.dump_count, a.paths); ++p) {
      const dw::WalkPath path = dw::sample_path(g, w, x0, p);
      for (const auto& e : path.events) {
        std::vector<std::string> row{std::to_string(p), dw::CsvWriter::number(e.t), std::to_string(e.v)};
        if (g.is_star(e.v)) {
          for (int i = 0; i < g.dim(); ++i) row.push_back("");
        } else {
          const dw::Point x = g.position(e.v);
          for (int i = 0; i < g.dim(); ++i) row.push_back(dw::CsvWriter::number(x[i]));
        }
        csv.row(row);
      }
    }
    csv.save(a.dump_paths);
  }
  return 0;
}

int cmd_heat_kernel(const std::string& graph, double t, const std::string& sources, const std::string& rate_mode,
                    const std::string& out) {
  const dw::DarnedLattice g = dw::load_graph(graph);
  std::vector<dw::VertexId> src;
  for (const auto& tok : split(sources, ',')) src.push_back(parse_source(g, tok));
  dw::HeatKernelOptions opts;
  opts.rate = dw::jump_rate(g, dw::parse_rate_mode(rate_mode));
  const double ts[] = {t};
  const auto rows = dw::heat_kernel(g, ts, src, opts);
  dw::CsvWriter csv({"x_id", "y_id", "d_j", "p", "bound_ratio"});
  double worst = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const dw::MetricTable dist = dw::graph_distance(g, src[i]);
    for (dw::VertexId y = 0; y < g.num_vertices(); ++y) {
      const double p = rows[0].density(g, i, y);
      const double ratio = p / dw::offdiag_envelope(g.dim(), g.level(), t, dist[y]);
      worst = std::max(worst, ratio);
      csv.row({std::to_string(src[i]), std::to_string(y), dw::CsvWriter::number(dist[y]),
               dw::CsvWriter::number(p), dw::CsvWriter::number(ratio)});
    }
  }
  csv.save(out);
  std::cout << "max bound_ratio " << worst << "\n";
  return 0;
}

int cmd_generator_check(const std::string& fname, const std::string& levels, const std::string& config,
                        double window, const std::string& out) {
  dw::DarningRegion region = dw::DarningRegion::ball(dw::Point{0.0, 0.0}, 0.25);
  if (!config.empty()) {
    const dw::RunConfig c = dw::load_run_config(config);
    region = c.region;
    window = c.window;
  }
  const int d = region.dim();
  const dw::Point center = [&] {
    const auto& b = region.bounds();
    dw::Point c(d);
    for (int i = 0; i < d; ++i) c[i] = 0.5 * (b.lo[i] + b.hi[i]);
    return c;
  }();
  dw::TestFunction f = dw::TestFunction::quadratic(d);
  if (fname == "bump") {
    const double inner = dw::farthest_distance(region, center) + 0.25;
    f = dw::TestFunction::bump(center, inner, inner + 1.0);
  } else if (fname != "quadratic") {
    throw std::invalid_argument("--f must be bump or quadratic");
  }
  dw::CsvWriter csv({"level", "max_interior_error", "error_ratio", "max_value", "star_value",
                     "max_star_adjacent", "max_interior", "max_other"});
  double prev = 0.0;
  for (int j : parse_levels(levels)) {
    const dw::DarnedLattice g = dw::build_lattice(region, j, window);
    const dw::GeneratorLevel r = fname == "bump" ? dw::generator_bound_check(g, f) : dw::generator_level(g, f);
    csv.row({std::to_string(j), dw::CsvWriter::number(r.max_interior_error),
             prev > 0.0 ? dw::CsvWriter::number(r.max_interior_error / prev) : "",
             dw::CsvWriter::number(r.max_value), dw::CsvWriter::number(r.star_value),
             dw::CsvWriter::number(r.max_star_adjacent), dw::CsvWriter::number(r.max_interior),
             dw::CsvWriter::number(r.max_other)});
    prev = r.max_interior_error;
  }
  csv.save(out);
  return 0;
}

int cmd_isoperimetry(const std::string& graph, const std::string& families, std::uint64_t budget, std::uint64_t seed,
                     const std::string& out) {
  const dw::DarnedLattice g = dw::load_graph(graph);
  const auto fams = dw::parse_families(families);
  dw::IsoOptions opts;
  opts.budget = budget;
  opts.seed = seed;
  const dw::IsoReport rep = dw::isoperimetry_report(g, fams, opts);
  dw::json j = iso_json(rep);
  j["schema_version"] = 1;
  j["families_requested"] = families;
  dw::write_json_file(out, j);
  std::cout << "min iso_ratio " << rep.min_ratio << (rep.truncated ? " (truncated)" : "") << "\n";
  return 0;
}

int cmd_converge(const std::string& config, const std::string& out) {
  dw::RunConfig c = dw::load_run_config(config);
  if (!out.empty()) c.output_dir = out;
  dw::GraphSet graphs(c, true);
  const auto rep = dw::level_consistency(graphs);
  dw::json j;
  j["schema_version"] = 1;
  j["config_hash"] = dw::config_hash(c);
  j["seed"] = c.seed;
  j["result"] = dw::to_json(rep);
  const std::filesystem::path dir(c.output_dir);
  dw::write_json_file((dir / "converge.json").string(), j);
  dw::to_csv(rep).save((dir / "converge.csv").string());
  for (const auto& t : rep.trends) {
    std::cout << "t=" << t.t << " decreasing=" << t.decreasing << " top_below_critical=" << t.top_below_critical
              << "\n";
  }
  if (!rep.gates_passed) std::cout << "oracle gate rejected; no verdict\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"darned lattice random walks"};
  app.set_version_flag("--version", std::string(DARNWALK_VERSION));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string summary;
  int level = 0;
  auto* build = app.add_subcommand("build-graph", "build E^j and write a binary dump");
  build->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  build->add_option("--level", level, "level j (default: first configured level)");
  build->add_option("--out", out, "graph dump path")->required();
  build->add_option("--summary", summary, "summary JSON path");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "sample X^j and write marginals");
  simulate->add_option("--graph", sim.graph)->required()->check(CLI::ExistingFile);
  simulate->add_option("--T", sim.horizon, "time horizon");
  simulate->add_option("--paths", sim.paths);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--marginal-times", sim.times, "comma-separated times in [0, T]");
  simulate->add_option("--x0", sim.x0, "start point, comma-separated (missing coordinates are 0)");
  simulate->add_option("--rate-mode", sim.rate_mode)->check(CLI::IsMember({"paper", "matched"}));
  simulate->add_option("--escape-threshold", sim.escape_threshold);
  simulate->add_option("--out", sim.out)->required();
  simulate->add_option("--dump-paths", sim.dump_paths, "CSV of full paths (t, vertex, x, y[, z])");
  simulate->add_option("--dump-count", sim.dump_count, "number of paths to dump");

  std::string graph;
  double t = 0.25;
  std::string sources = "star,origin";
  std::string rate_mode = "paper";
  auto* heat = app.add_subcommand("heat-kernel", "exact p_j(t, x, y) by uniformization");
  heat->add_option("--graph", graph)->required()->check(CLI::ExistingFile);
  heat->add_option("--t", t)->check(CLI::PositiveNumber);
  heat->add_option("--sources", sources, "star, origin, vertex id or x:y[:z]");
  heat->add_option("--rate-mode", rate_mode)->check(CLI::IsMember({"paper", "matched"}));
  heat->add_option("--out", out)->required();

  std::string fname = "bump";
  std::string levels = "4..8";
  double window = 2.0;
  auto* gen = app.add_subcommand("generator-check", "L^j f against (1/2d) Laplacian f");
  gen->add_option("--f", fname)->check(CLI::IsMember({"bump", "quadratic"}));
  gen->add_option("--levels", levels, "range a..b or list");
  gen->add_option("--config", config, "take region and window from a run configuration");
  gen->add_option("--window", window);
  gen->add_option("--out", out)->required();

  std::string families = "connected:6,balls:1..16,star:2";
  std::uint64_t budget = 500000000;
  std::uint64_t seed = 1;
  auto* iso = app.add_subcommand("isoperimetry", "minimum iso_ratio over set families");
  iso->add_option("--graph", graph)->required()->check(CLI::ExistingFile);
  iso->add_option("--families", families);
  iso->add_option("--budget", budget, "maximum sets per family");
  iso->add_option("--seed", seed);
  iso->add_option("--out", out)->required();

  auto* conv = app.add_subcommand("converge", "level consistency study");
  conv->add_option("--config", config)->required()->check(CLI::ExistingFile);
  conv->add_option("--out", out, "output directory (default: from config)");

  auto* run = app.add_subcommand("run", "run the configured experiments");
  run->add_option("--config", config)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*build) return cmd_build_graph(config, level, out, summary);
    if (*simulate) return cmd_simulate(sim);
    if (*heat) return cmd_heat_kernel(graph, t, sources, rate_mode, out);
    if (*gen) return cmd_generator_check(fname, levels, config, window, out);
    if (*iso) return cmd_isoperimetry(graph, families, budget, seed, out);
    if (*conv) return cmd_converge(config, out);
    if (*run) {
      const auto res = dw::run(dw::load_run_config(config));
      std::cout << res.manifest["status"].dump() << "\n";
      return res.exit_code;
    }
  } catch (const dw::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
