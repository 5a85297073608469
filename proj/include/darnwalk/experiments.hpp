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

#ifndef DARNWALK_EXPERIMENTS_HPP_
#define DARNWALK_EXPERIMENTS_HPP_

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "darnwalk/dynamics.hpp"
#include "darnwalk/io.hpp"
#include "darnwalk/lattice.hpp"
#include "darnwalk/parallel.hpp"
#include "darnwalk/rng.hpp"
#include "darnwalk/spectral.hpp"
#include "darnwalk/stats.hpp"

#ifndef DARNWALK_VERSION
#define DARNWALK_VERSION "0.3.0"
#endif

namespace darnwalk {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seed of one (experiment, level) job; jobs never share a stream.
enum class SeedTag : std::uint64_t {
  kLevelConsistency = 1,
  kTightness = 2,
  kStarOccupation = 3,
  kHitting = 4,
  kDiffusion = 5,
};

inline std::uint64_t job_seed(std::uint64_t seed, SeedTag tag, int level) {
  return derive_seed(seed, static_cast<std::uint64_t>(tag) * 1000u + static_cast<std::uint64_t>(level));
}

// ---------------------------------------------------------------------------
// Graphs.

inline std::string graph_file(const RunConfig& c, int level) {
  return (std::filesystem::path(c.output_dir) / "graphs" /
          ("E_d" + std::to_string(c.dimension) + "_j" + std::to_string(level) + ".bin"))
      .string();
}

/// Lattices per level, built on demand. With caching on, graphs are read from
/// output_dir/graphs when a matching dump exists and written there otherwise.
class GraphSet {
 public:
  explicit GraphSet(RunConfig cfg, bool cache = false) : cfg_(std::move(cfg)), cache_(cache) {}

  const DarnedLattice& at(int level) {
    auto it = graphs_.find(level);
    if (it != graphs_.end()) return it->second;
    return graphs_.emplace(level, obtain(level)).first->second;
  }

  /// Start vertex x0 at the given level.
  VertexId start(int level) {
    const DarnedLattice& g = at(level);
    const auto v = g.find_point(cfg_.x0);
    if (!v) throw ExperimentError("x0 is not a vertex of E^j at j=" + std::to_string(level));
    return *v;
  }

  const RunConfig& config() const { return cfg_; }
  /// Levels whose graph came from an existing dump.
  const std::vector<int>& loaded() const { return loaded_; }

 private:
  DarnedLattice obtain(int level) {
    const std::string path = graph_file(cfg_, level);
    if (cache_ && std::filesystem::exists(path)) {
      try {
        DarnedLattice g = load_graph(path);
        if (g.level() == level && g.dim() == cfg_.dimension && g.window() == cfg_.window &&
            region_to_json(g.region()) == region_to_json(cfg_.region)) {
          loaded_.push_back(level);
          return g;
        }
      } catch (const std::exception&) {
        // stale or foreign dump; rebuild below
      }
    }
    DarnedLattice g = build_lattice(cfg_.region, level, cfg_.window);
    if (cache_) save_graph(g, path);
    return g;
  }

  RunConfig cfg_;
  bool cache_;
  std::map<int, DarnedLattice> graphs_;
  std::vector<int> loaded_;
};

inline WalkConfig walk_config(const RunConfig& c, std::uint64_t seed, std::uint64_t paths, double horizon) {
  WalkConfig w;
  w.rate_mode = c.rate_mode;
  w.horizon = horizon;
  w.seed = seed;
  w.num_paths = paths;
  return w;
}

/// Sequence verdict: decreasing with at most one inversion once there are at
/// least three terms; two terms must decrease strictly.
inline bool decreasing_trend(std::span<const double> xs) {
  const int inv = stats::decreasing_inversions(xs);
  const int allowed = xs.size() >= 3 ? 1 : 0;
  if (xs.size() == 2 && !(xs[1] < xs[0])) return false;
  return inv <= allowed;
}

// ---------------------------------------------------------------------------
// Level consistency.

struct PairDistance {
  int level = 0;  // compares level and level + 1 (next configured level)
  int next_level = 0;
  double t = 0.0;
  double ks_rho = 0.0;
  double ks_critical = 0.0;
  std::vector<double> ks_coordinate;
  double tv_bins = 0.0;
};

struct OracleGate {
  int level = 0;
  double t = 0.0;
  bool evaluated = false;
  std::string skipped;  // reason when not evaluated
  stats::ChiSquareResult chi;
};

struct TrendVerdict {
  double t = 0.0;
  std::vector<double> ks;
  int inversions = 0;
  bool decreasing = false;
  bool top_below_critical = false;
};

struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> times;
  std::vector<std::vector<double>> exit_fraction;  // [level][time]
  std::vector<PairDistance> pairs;
  std::vector<OracleGate> gates;
  bool gates_passed = true;
  std::vector<TrendVerdict> trends;  // empty when a gate blocked the verdict
};

namespace detail {

inline double rho_or_inf(const DarnedLattice& g, VertexId x0, VertexId v) {
  return v == kNoVertex ? std::numeric_limits<double>::infinity() : quotient_metric(g, x0, v);
}

/// Coarse spatial bin of side 1/4; the star and the exited state get their
/// own bins.
inline std::vector<std::int64_t> coarse_bin(const DarnedLattice& g, VertexId v) {
  if (v == kNoVertex) return {LLONG_MIN + 1};
  if (g.is_star(v)) return {LLONG_MIN};
  std::vector<std::int64_t> key;
  for (auto c : g.coords(v)) {
    key.push_back(static_cast<std::int64_t>(std::floor(std::ldexp(static_cast<double>(c), -g.level()) * 4.0)));
  }
  return key;
}

}  // namespace detail

/// Chi-square test of an empirical marginal against the uniformization row
/// from the same start vertex.
inline stats::ChiSquareResult oracle_gate(const DarnedLattice& g, const MarginalSample& m, VertexId x0,
                                          RateMode mode, double alpha = 0.01) {
  HeatKernelOptions opts;
  opts.rate = jump_rate(g, mode);
  const double ts[] = {m.t};
  const VertexId src[] = {x0};
  const auto rows = heat_kernel(g, ts, src, opts);
  const auto row = rows[0].row(0);
  return stats::chi_square_gof(m.counts, row, alpha);
}

inline ConvergenceReport level_consistency(GraphSet& graphs) {
  const RunConfig& c = graphs.config();
  if (c.levels.size() < 2) throw ExperimentError("level_consistency needs at least two levels");
  ConvergenceReport rep;
  rep.levels = c.levels;
  rep.times = c.time_grid;
  std::vector<double> sample_times = c.time_grid;
  sample_times.push_back(c.gate_time);
  std::sort(sample_times.begin(), sample_times.end());
  sample_times.erase(std::unique(sample_times.begin(), sample_times.end()), sample_times.end());
  const double horizon = sample_times.back();
  auto index_of = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(sample_times.begin(), sample_times.end(), t) -
                                    sample_times.begin());
  };

  std::vector<PositionTable> tables;
  for (int level : c.levels) {
    const DarnedLattice& g = graphs.at(level);
    const VertexId x0 = graphs.start(level);
    const WalkConfig w = walk_config(c, job_seed(c.seed, SeedTag::kLevelConsistency, level), c.num_paths, horizon);
    PositionTable tab = sample_positions(g, w, x0, sample_times);
    const auto ms = marginals_from(g, tab, c.escape_threshold);
    std::vector<double> ef;
    for (double t : c.time_grid) ef.push_back(ms[index_of(t)].exit_fraction);
    rep.exit_fraction.push_back(ef);
    for (const auto& m : ms) {
      if (m.flagged) {
        throw ExperimentError("escape fraction " + std::to_string(m.exit_fraction) + " at j=" +
                              std::to_string(level) + ", t=" + std::to_string(m.t) +
                              " exceeds the threshold " + std::to_string(c.escape_threshold) +
                              "; raise the window radius W or lower T");
      }
    }
    OracleGate gate;
    gate.level = level;
    gate.t = c.gate_time;
    if (g.num_vertices() > c.oracle_max_vertices) {
      gate.skipped = "graph above oracle_max_vertices";
    } else {
      gate.evaluated = true;
      gate.chi = oracle_gate(g, ms[index_of(c.gate_time)], x0, c.rate_mode);
      if (gate.chi.rejected) rep.gates_passed = false;
    }
    rep.gates.push_back(gate);
    tables.push_back(std::move(tab));
  }

  const int d = c.dimension;
  for (std::size_t li = 0; li + 1 < c.levels.size(); ++li) {
    const DarnedLattice& ga = graphs.at(c.levels[li]);
    const DarnedLattice& gb = graphs.at(c.levels[li + 1]);
    const VertexId xa = graphs.start(c.levels[li]);
    const VertexId xb = graphs.start(c.levels[li + 1]);
    for (double t : c.time_grid) {
      const std::size_t k = index_of(t);
      PairDistance pd;
      pd.level = c.levels[li];
      pd.next_level = c.levels[li + 1];
      pd.t = t;
      std::vector<double> ra;
      std::vector<double> rb;
      std::vector<std::vector<double>> ca(static_cast<std::size_t>(d));
      std::vector<std::vector<double>> cb(static_cast<std::size_t>(d));
      std::map<std::vector<std::int64_t>, std::pair<std::uint64_t, std::uint64_t>> bins;
      auto collect = [&](const DarnedLattice& g, VertexId x0, const PositionTable& tab, std::vector<double>& r,
                         std::vector<std::vector<double>>& coord, bool first) {
        for (std::uint64_t p = 0; p < tab.num_paths; ++p) {
          const VertexId v = tab.at(p, k);
          r.push_back(detail::rho_or_inf(g, x0, v));
          auto& cell = bins[detail::coarse_bin(g, v)];
          (first ? cell.first : cell.second)++;
          if (v == kNoVertex || g.is_star(v)) continue;
          const auto cc = g.coords(v);
          for (int i = 0; i < d; ++i) {
            coord[static_cast<std::size_t>(i)].push_back(std::ldexp(static_cast<double>(cc[static_cast<std::size_t>(i)]), -g.level()));
          }
        }
      };
      collect(ga, xa, tables[li], ra, ca, true);
      collect(gb, xb, tables[li + 1], rb, cb, false);
      pd.ks_rho = stats::ks_statistic(ra, rb);
      pd.ks_critical = stats::ks_critical_value(0.01, ra.size(), rb.size());
      for (int i = 0; i < d; ++i) {
        const auto& a = ca[static_cast<std::size_t>(i)];
        const auto& b = cb[static_cast<std::size_t>(i)];
        pd.ks_coordinate.push_back(a.empty() || b.empty() ? 0.0 : stats::ks_statistic(a, b));
      }
      std::vector<std::uint64_t> ba;
      std::vector<std::uint64_t> bb;
      for (const auto& [key, cnt] : bins) {
        ba.push_back(cnt.first);
        bb.push_back(cnt.second);
      }
      pd.tv_bins = stats::tv_distance(ba, bb);
      rep.pairs.push_back(pd);
    }
  }

  if (rep.gates_passed) {
    for (double t : c.time_grid) {
      TrendVerdict tv;
      tv.t = t;
      const PairDistance* top = nullptr;
      for (const auto& pd : rep.pairs) {
        if (pd.t == t) {
          tv.ks.push_back(pd.ks_rho);
          top = &pd;
        }
      }
      tv.inversions = stats::decreasing_inversions(tv.ks);
      tv.decreasing = decreasing_trend(tv.ks);
      tv.top_below_critical = top && top->ks_rho < top->ks_critical;
      rep.trends.push_back(tv);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Tightness probes.

struct TightnessLevel {
  int level = 0;
  std::vector<stats::Proportion> sup_exceeds;      // per M
  std::vector<stats::Proportion> modulus_exceeds;  // per theta
  std::uint64_t escaped = 0;
};

struct GrowthCheck {
  double value = 0.0;    // the M or theta of the row
  double first = 0.0;    // P at the first level
  double max = 0.0;      // max over levels
  double allowed = 0.0;  // 2 sqrt(se_j^2 + se_first^2) at the maximizing level
  bool no_growth = true;
};

struct TightnessReport {
  std::vector<double> sup_levels;
  std::vector<double> thetas;
  double delta1 = 0.0;
  double horizon = 0.0;
  std::vector<TightnessLevel> levels;
  std::vector<GrowthCheck> sup_checks;
  std::vector<GrowthCheck> modulus_checks;
  bool no_growth = true;
};

namespace detail {

inline GrowthCheck growth_check(double value, const std::vector<stats::Proportion>& ps) {
  GrowthCheck g;
  g.value = value;
  g.first = ps.front().value();
  g.max = g.first;
  const double se0 = ps.front().se();
  for (const auto& p : ps) {
    const double allowed = 2.0 * std::sqrt(p.se() * p.se() + se0 * se0);
    if (p.value() - g.first > allowed) g.no_growth = false;
    if (p.value() >= g.max) {
      g.max = p.value();
      g.allowed = allowed;
    }
  }
  return g;
}

}  // namespace detail

inline TightnessReport tightness_probe(GraphSet& graphs) {
  const RunConfig& c = graphs.config();
  const TightnessOptions& o = c.tightness;
  TightnessReport rep;
  rep.sup_levels = o.sup_levels;
  rep.thetas = o.thetas;
  rep.delta1 = o.delta1;
  rep.horizon = c.horizon;
  for (int level : c.levels) {
    const DarnedLattice& g = graphs.at(level);
    const VertexId x0 = graphs.start(level);
    const WalkConfig w = walk_config(c, job_seed(c.seed, SeedTag::kTightness, level), o.num_paths, c.horizon);
    std::vector<double> sup(o.num_paths, 0.0);
    std::vector<std::uint8_t> mod(o.num_paths * o.thetas.size(), 0);
    std::vector<std::uint8_t> esc(o.num_paths, 0);
    parallel_chunks(o.num_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const WalkPath path = sample_path(g, w, x0, p);
        double s = 0.0;
        for (const auto& e : path.events) s = std::max(s, quotient_metric(g, x0, e.v));
        sup[p] = s;
        esc[p] = path.exited_window ? 1 : 0;
        for (std::size_t k = 0; k < o.thetas.size(); ++k) {
          mod[p * o.thetas.size() + k] = modulus_exceeds(g, path, o.thetas[k], o.delta1) ? 1 : 0;
        }
      }
    });
    TightnessLevel tl;
    tl.level = level;
    for (double m : o.sup_levels) {
      stats::Proportion pr{0, o.num_paths};
      for (double s : sup) pr.hits += s > m ? 1 : 0;
      tl.sup_exceeds.push_back(pr);
    }
    for (std::size_t k = 0; k < o.thetas.size(); ++k) {
      stats::Proportion pr{0, o.num_paths};
      for (std::uint64_t p = 0; p < o.num_paths; ++p) pr.hits += mod[p * o.thetas.size() + k];
      tl.modulus_exceeds.push_back(pr);
    }
    for (auto e : esc) tl.escaped += e;
    rep.levels.push_back(std::move(tl));
  }
  for (std::size_t i = 0; i < o.sup_levels.size(); ++i) {
    std::vector<stats::Proportion> ps;
    for (const auto& tl : rep.levels) ps.push_back(tl.sup_exceeds[i]);
    rep.sup_checks.push_back(detail::growth_check(o.sup_levels[i], ps));
    rep.no_growth = rep.no_growth && rep.sup_checks.back().no_growth;
  }
  for (std::size_t i = 0; i < o.thetas.size(); ++i) {
    std::vector<stats::Proportion> ps;
    for (const auto& tl : rep.levels) ps.push_back(tl.modulus_exceeds[i]);
    rep.modulus_checks.push_back(detail::growth_check(o.thetas[i], ps));
    rep.no_growth = rep.no_growth && rep.modulus_checks.back().no_growth;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Star occupation.

struct OccupationPoint {
  int level = 0;
  double t = 0.0;
  double time_floor = 0.0;  // (2^j delta)^{-2/d}
  bool above_floor = true;
  stats::Proportion outside;  // X_t not in S^j; exited paths count as outside
};

struct OccupationRatio {
  int level = 0;
  int next_level = 0;
  double t = 0.0;
  std::optional<double> ratio;  // empty when the lower level has P = 0
  bool ok = true;
};

struct OccupationOracle {
  int level = 0;
  double t = 0.0;
  double exact = 0.0;
  stats::Proportion mc;
  bool agrees = false;  // within 3 SE
};

struct StarOccupationReport {
  double delta = 0.0;
  std::vector<OccupationPoint> points;
  std::vector<OccupationRatio> ratios;
  std::vector<OccupationOracle> oracle;
  std::vector<std::string> warnings;
  bool decays = true;
  bool oracle_ok = true;
};

inline double occupation_time_floor(int level, int dim, double delta) {
  return std::pow(std::ldexp(delta, level), -2.0 / dim);
}

namespace detail {

inline std::vector<stats::Proportion> outside_counts(const DarnedLattice& g, const PositionTable& tab) {
  const InteriorSet s = interior_set(g);
  std::vector<stats::Proportion> out;
  for (std::size_t k = 0; k < tab.times.size(); ++k) {
    stats::Proportion pr{0, tab.num_paths};
    for (std::uint64_t p = 0; p < tab.num_paths; ++p) {
      const VertexId v = tab.at(p, k);
      if (v == kNoVertex || !s.mask[v]) ++pr.hits;
    }
    out.push_back(pr);
  }
  return out;
}

}  // namespace detail

inline StarOccupationReport star_occupation(GraphSet& graphs) {
  const RunConfig& c = graphs.config();
  const StarOccupationOptions& o = c.star_occupation;
  StarOccupationReport rep;
  rep.delta = o.delta;
  const std::vector<double>& times = o.times;
  std::vector<std::vector<stats::Proportion>> per_level;
  auto run_level = [&](int level) {
    const DarnedLattice& g = graphs.at(level);
    const WalkConfig w = walk_config(c, job_seed(c.seed, SeedTag::kStarOccupation, level), c.num_paths, times.back());
    return detail::outside_counts(g, sample_positions(g, w, graphs.start(level), times));
  };
  for (int level : c.levels) {
    const auto counts = run_level(level);
    for (std::size_t k = 0; k < times.size(); ++k) {
      OccupationPoint pt;
      pt.level = level;
      pt.t = times[k];
      pt.time_floor = occupation_time_floor(level, c.dimension, o.delta);
      pt.above_floor = times[k] >= pt.time_floor;
      pt.outside = counts[k];
      if (!pt.above_floor) {
        rep.warnings.push_back("t=" + std::to_string(times[k]) + " below the time floor " +
                               std::to_string(pt.time_floor) + " at j=" + std::to_string(level) +
                               "; excluded from the verdict");
      }
      rep.points.push_back(pt);
    }
    per_level.push_back(counts);
  }
  for (std::size_t li = 0; li + 1 < c.levels.size(); ++li) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto& a = rep.points[li * times.size() + k];
      const auto& b = rep.points[(li + 1) * times.size() + k];
      if (!a.above_floor || !b.above_floor) continue;
      OccupationRatio r;
      r.level = a.level;
      r.next_level = b.level;
      r.t = times[k];
      if (a.outside.hits > 0) {
        r.ratio = b.outside.value() / a.outside.value();
        r.ok = *r.ratio <= 0.75;
      } else {
        r.ok = b.outside.hits == 0;
      }
      rep.decays = rep.decays && r.ok;
      rep.ratios.push_back(r);
    }
  }
  // Exact cross-check at the oracle level.
  if (o.oracle_level >= 1) {
    const int level = o.oracle_level;
    const DarnedLattice& g = graphs.at(level);
    if (g.num_vertices() <= c.oracle_max_vertices) {
      const auto pos = std::find(c.levels.begin(), c.levels.end(), level);
      const auto counts = pos != c.levels.end()
                              ? per_level[static_cast<std::size_t>(pos - c.levels.begin())]
                              : run_level(level);
      const InteriorSet s = interior_set(g);
      HeatKernelOptions opts;
      opts.rate = jump_rate(g, c.rate_mode);
      const VertexId src[] = {graphs.start(level)};
      const auto rows = heat_kernel(g, times, src, opts);
      for (std::size_t k = 0; k < times.size(); ++k) {
        OccupationOracle oc;
        oc.level = level;
        oc.t = times[k];
        const auto row = rows[k].row(0);
        for (VertexId v = 0; v < g.num_vertices(); ++v) {
          if (!s.mask[v]) oc.exact += row[v];
        }
        oc.mc = counts[k];
        oc.agrees = std::abs(oc.mc.value() - oc.exact) <= 3.0 * std::max(oc.mc.se(), 1.0 / static_cast<double>(oc.mc.trials));
        rep.oracle_ok = rep.oracle_ok && oc.agrees;
        rep.oracle.push_back(oc);
      }
    } else {
      rep.warnings.push_back("oracle level graph above oracle_max_vertices; cross-check skipped");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Comparison with Brownian motion away from K.

/// P_x[hit the ball of radius r before the sphere of radius R], |x| in [r, R].
inline double annulus_hit_probability(int dim, double r, double big_r, double x) {
  if (!(0.0 < r && r < big_r)) throw std::invalid_argument("annulus: need 0 < r < R");
  if (x <= r) return 1.0;
  if (x >= big_r) return 0.0;
  if (dim == 2) return std::log(big_r / x) / std::log(big_r / r);
  const double e = 2.0 - dim;
  return (std::pow(x, e) - std::pow(big_r, e)) / (std::pow(r, e) - std::pow(big_r, e));
}

struct HittingLevel {
  int level = 0;
  HittingStats stats;
  std::optional<double> target;
  double tolerance = 0.0;  // 3 SE + 0.1 2^{-j}
  bool within = false;
};

struct DiffusionResult {
  RateMode mode = RateMode::kPaper;
  int level = 0;
  double horizon = 0.0;
  DiffusionEstimate estimate;
  double expected = 0.0;
  bool within = false;  // 5 percent
};

struct BmdReport {
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  double start_radius = 0.0;
  std::vector<HittingLevel> hitting;
  std::vector<DiffusionResult> diffusion;
  std::vector<std::string> notes;
};

/// Vertices used by the diffusion measurement: S^j vertices at least
/// `margin` away from K.
inline std::vector<std::uint8_t> diffusion_mask(const DarnedLattice& g, double margin) {
  std::vector<std::uint8_t> mask = interior_set(g).mask;
  for (VertexId v = 0; v < g.num_regular(); ++v) {
    if (g.distance_to_region(v) < margin) mask[v] = 0;
  }
  return mask;
}

inline HittingLevel annulus_hitting(const DarnedLattice& g, VertexId x0, const RunConfig& c, int level) {
  const Ball* ball = std::get_if<Ball>(&c.region.shape());
  if (!ball) throw ExperimentError("annulus hitting needs a ball region");
  HittingQuery q;
  q.targets.assign(g.num_vertices(), 0);
  if (!g.star()) throw ExperimentError("annulus hitting needs a star vertex");
  q.targets[*g.star()] = 1;
  q.outer_radius = c.bmd.outer_radius;
  q.center = ball->center;
  WalkConfig w = walk_config(c, job_seed(c.seed, SeedTag::kHitting, level), c.bmd.hitting_paths, 1.0);
  HittingLevel h;
  h.level = level;
  h.stats = hitting_stats(g, w, x0, q);
  const double x = detail::distance(c.x0, ball->center);
  h.target = annulus_hit_probability(c.dimension, ball->radius, c.bmd.outer_radius, x);
  h.tolerance = 3.0 * h.stats.hit.se() + 0.1 * g.spacing();
  h.within = std::abs(h.stats.hit.value() - *h.target) <= h.tolerance;
  return h;
}

inline DiffusionResult diffusion_measurement(const DarnedLattice& g, VertexId x0, const RunConfig& c,
                                             RateMode mode) {
  DiffusionResult r;
  r.mode = mode;
  r.level = g.level();
  r.horizon = c.bmd.diffusion_horizon;
  WalkConfig w = walk_config(c, job_seed(c.seed, SeedTag::kDiffusion, g.level()), c.bmd.diffusion_paths,
                             c.bmd.diffusion_horizon);
  w.rate_mode = mode;
  r.estimate = diffusion_rate(g, w, x0, diffusion_mask(g, c.bmd.diffusion_margin));
  // Each jump moves one coordinate by h, so the rate is lambda h^2 / d.
  r.expected = jump_rate(g, mode) * g.spacing() * g.spacing() / c.dimension;
  r.within = std::abs(r.estimate.rate - r.expected) <= 0.05 * r.expected;
  return r;
}

inline BmdReport bmd_comparison(GraphSet& graphs) {
  const RunConfig& c = graphs.config();
  BmdReport rep;
  rep.outer_radius = c.bmd.outer_radius;
  const Ball* ball = std::get_if<Ball>(&c.region.shape());
  if (ball) {
    rep.inner_radius = ball->radius;
    rep.start_radius = detail::distance(c.x0, ball->center);
    if (!(rep.start_radius < c.bmd.outer_radius)) {
      rep.notes.push_back("x0 outside the outer sphere; hitting comparison skipped");
    } else {
      for (int level : c.levels) {
        rep.hitting.push_back(annulus_hitting(graphs.at(level), graphs.start(level), c, level));
      }
    }
  } else {
    rep.notes.push_back("no closed-form hitting target for a non-ball region");
  }
  const int top = c.levels.back();
  for (RateMode mode : {RateMode::kPaper, RateMode::kMatched}) {
    rep.diffusion.push_back(diffusion_measurement(graphs.at(top), graphs.start(top), c, mode));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization.

inline json to_json(const stats::Proportion& p) {
  return {{"value", p.value()}, {"se", p.se()}, {"hits", p.hits}, {"trials", p.trials}};
}

inline json to_json(const stats::ChiSquareResult& r) {
  return {{"statistic", finite_or_null(r.statistic)}, {"dof", r.dof},
          {"p_value", finite_or_null(r.p_value)},     {"critical", finite_or_null(r.critical)},
          {"rejected", r.rejected},                   {"bins", r.bins}};
}

inline json to_json(const ConvergenceReport& r) {
  json j;
  j["levels"] = r.levels;
  j["times"] = r.times;
  j["exit_fraction"] = r.exit_fraction;
  j["pairs"] = json::array();
  for (const auto& p : r.pairs) {
    j["pairs"].push_back({{"level", p.level},
                          {"next_level", p.next_level},
                          {"t", p.t},
                          {"ks_rho", p.ks_rho},
                          {"ks_critical", p.ks_critical},
                          {"ks_coordinate", p.ks_coordinate},
                          {"tv_bins", p.tv_bins}});
  }
  j["oracle_gates"] = json::array();
  for (const auto& g : r.gates) {
    json gj{{"level", g.level}, {"t", g.t}, {"evaluated", g.evaluated}};
    if (g.evaluated) {
      gj["chi_square"] = to_json(g.chi);
    } else {
      gj["skipped"] = g.skipped;
    }
    j["oracle_gates"].push_back(gj);
  }
  j["gates_passed"] = r.gates_passed;
  if (r.gates_passed) {
    j["verdict"] = json::array();
    for (const auto& t : r.trends) {
      j["verdict"].push_back({{"t", t.t},
                              {"ks_sequence", t.ks},
                              {"inversions", t.inversions},
                              {"decreasing", t.decreasing},
                              {"top_below_critical", t.top_below_critical}});
    }
  } else {
    j["verdict"] = nullptr;
  }
  return j;
}

inline json to_json(const GrowthCheck& g) {
  return {{"value", g.value}, {"first", g.first}, {"max", g.max}, {"allowed", g.allowed}, {"no_growth", g.no_growth}};
}

inline json to_json(const TightnessReport& r) {
  json j;
  j["M"] = r.sup_levels;
  j["thetas"] = r.thetas;
  j["delta1"] = r.delta1;
  j["T"] = r.horizon;
  j["levels"] = json::array();
  for (const auto& l : r.levels) {
    json lj{{"level", l.level}, {"escaped", l.escaped}};
    lj["sup_exceeds"] = json::array();
    for (const auto& p : l.sup_exceeds) lj["sup_exceeds"].push_back(to_json(p));
    lj["modulus_exceeds"] = json::array();
    for (const auto& p : l.modulus_exceeds) lj["modulus_exceeds"].push_back(to_json(p));
    j["levels"].push_back(lj);
  }
  j["sup_checks"] = json::array();
  for (const auto& g : r.sup_checks) j["sup_checks"].push_back(to_json(g));
  j["modulus_checks"] = json::array();
  for (const auto& g : r.modulus_checks) j["modulus_checks"].push_back(to_json(g));
  j["no_growth"] = r.no_growth;
  return j;
}

inline json to_json(const StarOccupationReport& r) {
  json j;
  j["delta"] = r.delta;
  j["points"] = json::array();
  for (const auto& p : r.points) {
    j["points"].push_back({{"level", p.level},
                           {"t", p.t},
                           {"time_floor", p.time_floor},
                           {"above_floor", p.above_floor},
                           {"outside_Sj", to_json(p.outside)}});
  }
  j["ratios"] = json::array();
  for (const auto& q : r.ratios) {
    j["ratios"].push_back({{"level", q.level},
                           {"next_level", q.next_level},
                           {"t", q.t},
                           {"ratio", q.ratio ? json(*q.ratio) : json(nullptr)},
                           {"ok", q.ok}});
  }
  j["oracle"] = json::array();
  for (const auto& o : r.oracle) {
    j["oracle"].push_back({{"level", o.level}, {"t", o.t}, {"exact", o.exact}, {"mc", to_json(o.mc)}, {"agrees", o.agrees}});
  }
  j["warnings"] = r.warnings;
  j["decays"] = r.decays;
  j["oracle_ok"] = r.oracle_ok;
  return j;
}

inline json to_json(const BmdReport& r) {
  json j;
  j["inner_radius"] = r.inner_radius;
  j["outer_radius"] = r.outer_radius;
  j["start_radius"] = r.start_radius;
  j["hitting"] = json::array();
  for (const auto& h : r.hitting) {
    json hist = json::array();
    for (auto v : h.stats.histogram) hist.push_back(v);
    j["hitting"].push_back({{"level", h.level},
                            {"hit", to_json(h.stats.hit)},
                            {"outer", h.stats.outer},
                            {"censored", h.stats.censored},
                            {"exited", h.stats.exited},
                            {"mean_hit_time", finite_or_null(h.stats.mean_hit_time)},
                            {"histogram_max", finite_or_null(h.stats.histogram_max)},
                            {"histogram", hist},
                            {"target", h.target ? json(*h.target) : json(nullptr)},
                            {"tolerance", h.tolerance},
                            {"within", h.within}});
  }
  j["diffusion"] = json::array();
  for (const auto& d : r.diffusion) {
    j["diffusion"].push_back({{"rate_mode", to_string(d.mode)},
                              {"level", d.level},
                              {"horizon", d.horizon},
                              {"rate", finite_or_null(d.estimate.rate)},
                              {"se", finite_or_null(d.estimate.se)},
                              {"per_coordinate", d.estimate.per_coordinate},
                              {"jumps", d.estimate.jumps},
                              {"time", d.estimate.time},
                              {"expected", d.expected},
                              {"within", d.within}});
  }
  j["notes"] = r.notes;
  return j;
}

// CSV tables, one row per measured quantity.

inline CsvWriter to_csv(const ConvergenceReport& r) {
  CsvWriter w({"level", "next_level", "t", "ks_rho", "ks_critical", "tv_bins"});
  for (const auto& p : r.pairs) {
    w.row({std::to_string(p.level), std::to_string(p.next_level), CsvWriter::number(p.t),
           CsvWriter::number(p.ks_rho), CsvWriter::number(p.ks_critical), CsvWriter::number(p.tv_bins)});
  }
  return w;
}

inline CsvWriter to_csv(const TightnessReport& r) {
  CsvWriter w({"level", "kind", "parameter", "probability", "se"});
  for (const auto& l : r.levels) {
    for (std::size_t i = 0; i < r.sup_levels.size(); ++i) {
      w.row({std::to_string(l.level), "sup_rho_gt_M", CsvWriter::number(r.sup_levels[i]),
             CsvWriter::number(l.sup_exceeds[i].value()), CsvWriter::number(l.sup_exceeds[i].se())});
    }
    for (std::size_t i = 0; i < r.thetas.size(); ++i) {
      w.row({std::to_string(l.level), "modulus_gt_delta1", CsvWriter::number(r.thetas[i]),
             CsvWriter::number(l.modulus_exceeds[i].value()), CsvWriter::number(l.modulus_exceeds[i].se())});
    }
  }
  return w;
}

inline CsvWriter to_csv(const StarOccupationReport& r) {
  CsvWriter w({"level", "t", "time_floor", "above_floor", "p_outside_Sj", "se"});
  for (const auto& p : r.points) {
    w.row({std::to_string(p.level), CsvWriter::number(p.t), CsvWriter::number(p.time_floor),
           p.above_floor ? "true" : "false", CsvWriter::number(p.outside.value()), CsvWriter::number(p.outside.se())});
  }
  return w;
}

inline CsvWriter to_csv(const BmdReport& r) {
  CsvWriter w({"level", "quantity", "rate_mode", "estimate", "se", "target"});
  for (const auto& h : r.hitting) {
    w.row({std::to_string(h.level), "annulus_hit", "", CsvWriter::number(h.stats.hit.value()),
           CsvWriter::number(h.stats.hit.se()), h.target ? CsvWriter::number(*h.target) : ""});
  }
  for (const auto& d : r.diffusion) {
    w.row({std::to_string(d.level), "variance_rate", to_string(d.mode), CsvWriter::number(d.estimate.rate),
           CsvWriter::number(d.estimate.se), CsvWriter::number(d.expected)});
  }
  return w;
}

// ---------------------------------------------------------------------------
// Orchestration.

struct RunResult {
  int exit_code = 0;
  json manifest;
};

namespace detail {

inline json report_envelope(const RunConfig& c, const std::string& name, json body) {
  json j;
  j["schema_version"] = 1;
  j["experiment"] = name;
  j["config_hash"] = config_hash(c);
  j["seed"] = c.seed;
  j["result"] = std::move(body);
  return j;
}

}  // namespace detail

/// Runs the configured experiments in dependency order and writes one JSON
/// and one CSV per experiment plus manifest.json into output_dir. A failing
/// experiment is recorded in the manifest; the others still run.
inline RunResult run(const RunConfig& c) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  const fs::path out(c.output_dir);
  fs::create_directories(out);
  GraphSet graphs(c, true);
  RunResult res;
  json manifest;
  manifest["schema_version"] = 1;
  manifest["darnwalk_version"] = DARNWALK_VERSION;
  manifest["config_hash"] = config_hash(c);
  manifest["config"] = run_config_to_json(c);
  manifest["seed"] = c.seed;
  json seeds = json::object();
  json status = json::object();
  json walls = json::object();
  json artifacts = json::array();

  auto want = [&](const std::string& name) {
    return std::find(c.experiments.begin(), c.experiments.end(), name) != c.experiments.end();
  };
  auto stage = [&](const std::string& name, SeedTag tag, auto&& body) {
    if (!want(name)) return;
    json s = json::object();
    for (int level : c.levels) s[std::to_string(level)] = job_seed(c.seed, tag, level);
    seeds[name] = s;
    const auto t0 = clock::now();
    try {
      auto [report, table] = body();
      const std::string jpath = (out / (name + ".json")).string();
      const std::string cpath = (out / (name + ".csv")).string();
      write_json_file(jpath, detail::report_envelope(c, name, std::move(report)));
      table.save(cpath);
      artifacts.push_back(name + ".json");
      artifacts.push_back(name + ".csv");
      status[name] = {{"ok", true}};
    } catch (const std::exception& e) {
      status[name] = {{"ok", false}, {"error", e.what()}};
      res.exit_code = 1;
    }
    walls[name] = std::chrono::duration<double>(clock::now() - t0).count();
  };

  // graphs first: every other stage depends on them.
  if (want("graphs") || !c.experiments.empty()) {
    const auto t0 = clock::now();
    try {
      json summaries = json::array();
      CsvWriter table({"level", "num_vertices", "num_edges", "star_degree", "m_total", "m_complement_Sj"});
      for (int level : c.levels) {
        const json s = graph_summary(graphs.at(level));
        summaries.push_back(s);
        table.row({std::to_string(level), std::to_string(s["num_vertices"].get<std::size_t>()),
                   std::to_string(s["num_edges"].get<std::size_t>()),
                   std::to_string(s["star_degree"].get<std::uint32_t>()),
                   CsvWriter::number(s["m_total"].get<double>()),
                   CsvWriter::number(s["m_complement_Sj"].get<double>())});
        artifacts.push_back(fs::relative(graph_file(c, level), out).generic_string());
      }
      if (want("graphs")) {
        write_json_file((out / "graphs.json").string(), detail::report_envelope(c, "graphs", summaries));
        table.save((out / "graphs.csv").string());
        artifacts.push_back("graphs.json");
        artifacts.push_back("graphs.csv");
        status["graphs"] = {{"ok", true}};
      }
    } catch (const std::exception& e) {
      status["graphs"] = {{"ok", false}, {"error", e.what()}};
      res.exit_code = 1;
    }
    walls["graphs"] = std::chrono::duration<double>(clock::now() - t0).count();
  }
  stage("level_consistency", SeedTag::kLevelConsistency, [&] {
    const auto r = level_consistency(graphs);
    return std::pair{to_json(r), to_csv(r)};
  });
  stage("tightness", SeedTag::kTightness, [&] {
    const auto r = tightness_probe(graphs);
    return std::pair{to_json(r), to_csv(r)};
  });
  stage("star_occupation", SeedTag::kStarOccupation, [&] {
    const auto r = star_occupation(graphs);
    return std::pair{to_json(r), to_csv(r)};
  });
  stage("bmd_comparison", SeedTag::kHitting, [&] {
    const auto r = bmd_comparison(graphs);
    return std::pair{to_json(r), to_csv(r)};
  });

  manifest["experiment_seeds"] = seeds;
  manifest["status"] = status;
  manifest["artifacts"] = artifacts;
  // Wall times vary between runs; everything else in the output directory is
  // reproducible bit for bit.
  manifest["wall_times"] = walls;
  write_json_file((out / "manifest.json").string(), manifest);
  res.manifest = std::move(manifest);
  return res;
}

}  // namespace darnwalk

#endif  // DARNWALK_EXPERIMENTS_HPP_
