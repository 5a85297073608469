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

#ifndef DARNWALK_DYNAMICS_HPP_
#define DARNWALK_DYNAMICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "darnwalk/lattice.hpp"
#include "darnwalk/parallel.hpp"
#include "darnwalk/rng.hpp"
#include "darnwalk/stats.hpp"

namespace darnwalk {

enum class RateMode {
  kPaper,    // lambda_j = 2^{2j}
  kMatched,  // lambda_j = 2d * 2^{2j}
};

inline double jump_rate(const DarnedLattice& g, RateMode mode) {
  const double base = g.paper_rate();
  return mode == RateMode::kMatched ? 2.0 * g.dim() * base : base;
}

inline const char* to_string(RateMode mode) {
  return mode == RateMode::kMatched ? "matched" : "paper";
}

inline RateMode parse_rate_mode(const std::string& s) {
  if (s == "paper") return RateMode::kPaper;
  if (s == "matched") return RateMode::kMatched;
  throw std::invalid_argument("unknown rate mode '" + s + "' (expected paper or matched)");
}

struct WalkConfig {
  RateMode rate_mode = RateMode::kPaper;
  double horizon = 1.0;  // T_max
  std::uint64_t seed = 42;
  std::uint64_t num_paths = 100000;

  void validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("walk horizon must be positive");
    if (num_paths < 1) throw std::invalid_argument("num_paths must be at least 1");
  }
};

struct WalkEvent {
  double t = 0.0;
  VertexId v = 0;
};

struct WalkPath {
  std::vector<WalkEvent> events;  // first event is (0, start)
  std::optional<double> hit_star_time;
  bool exited_window = false;
  double horizon = 0.0;
};

/// Jump law Q_j(x, .): uniform over the neighbours of x.
struct StepKernel {
  std::span<const VertexId> targets;
  double prob = 0.0;
};

inline StepKernel step_kernel(const DarnedLattice& g, VertexId x) {
  if (x >= g.num_vertices()) throw std::out_of_range("step_kernel: invalid vertex");
  const auto nb = g.neighbors(x);
  if (nb.empty()) throw LatticeError("step_kernel: isolated vertex " + std::to_string(x));
  return {nb, 1.0 / static_cast<double>(nb.size())};
}

enum class WalkEnd { kHorizon, kExited, kStopped };

namespace detail {

// One trajectory. visit(t, v) is called at the start and after every jump;
// returning false stops the walk. Arrival on the window face censors it.
template <class Visit>
WalkEnd run_walk(const DarnedLattice& g, double rate, VertexId start, double horizon,
                 RandomStream& rng, Visit&& visit) {
  VertexId x = start;
  double t = 0.0;
  if (!visit(t, x)) return WalkEnd::kStopped;
  if (g.on_window_face(x)) return WalkEnd::kExited;
  while (true) {
    t += rng.exponential(rate);
    if (t >= horizon) return WalkEnd::kHorizon;
    const auto nb = g.neighbors(x);
    x = nb[rng.below(static_cast<std::uint32_t>(nb.size()))];
    if (!visit(t, x)) return WalkEnd::kStopped;
    if (g.on_window_face(x)) return WalkEnd::kExited;
  }
}

inline void check_start(const DarnedLattice& g, VertexId start) {
  if (start >= g.num_vertices()) throw std::out_of_range("invalid start vertex");
  if (g.degree(start) == 0) throw LatticeError("start vertex is isolated");
}

}  // namespace detail

/// Samples one path of X^j; stream selects the independent RNG stream.
inline WalkPath sample_path(const DarnedLattice& g, const WalkConfig& cfg, VertexId start,
                            std::uint64_t stream) {
  cfg.validate();
  detail::check_start(g, start);
  RandomStream rng(cfg.seed, stream);
  WalkPath path;
  path.horizon = cfg.horizon;
  const WalkEnd end = detail::run_walk(g, jump_rate(g, cfg.rate_mode), start, cfg.horizon, rng,
                                       [&](double t, VertexId v) {
                                         path.events.push_back({t, v});
                                         if (g.is_star(v) && !path.hit_star_time) {
                                           path.hit_star_time = t;
                                         }
                                         return true;
                                       });
  path.exited_window = end == WalkEnd::kExited;
  return path;
}

/// X_t for every path and every time of a grid; kNoVertex once the path has
/// left the window.
struct PositionTable {
  std::vector<double> times;
  std::uint64_t num_paths = 0;
  std::vector<VertexId> ids;  // ids[path * times.size() + k]
  std::vector<std::uint8_t> exited;
  std::uint64_t num_exited = 0;

  VertexId at(std::uint64_t path, std::size_t k) const { return ids[path * times.size() + k]; }
};

inline PositionTable sample_positions(const DarnedLattice& g, const WalkConfig& cfg,
                                      VertexId start, std::span<const double> times) {
  cfg.validate();
  detail::check_start(g, start);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || times[k] > cfg.horizon) {
      throw std::invalid_argument("marginal time outside [0, T]");
    }
    if (k > 0 && times[k] < times[k - 1]) throw std::invalid_argument("marginal times must be sorted");
  }
  PositionTable out;
  out.times.assign(times.begin(), times.end());
  out.num_paths = cfg.num_paths;
  const std::size_t nt = times.size();
  out.ids.assign(cfg.num_paths * nt, kNoVertex);
  out.exited.assign(cfg.num_paths, 0);
  const double rate = jump_rate(g, cfg.rate_mode);
  const double horizon = nt ? times.back() : 0.0;
  parallel_chunks(cfg.num_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(cfg.seed, p);
      VertexId* row = out.ids.data() + p * nt;
      std::size_t k = 0;
      VertexId current = start;
      const WalkEnd how = detail::run_walk(g, rate, start, horizon, rng, [&](double t, VertexId v) {
        while (k < nt && times[k] < t) row[k++] = current;
        current = v;
        return true;
      });
      if (how == WalkEnd::kExited) {
        out.exited[p] = 1;
      } else {
        while (k < nt) row[k++] = current;
      }
    }
  });
  for (auto e : out.exited) out.num_exited += e;
  return out;
}

struct MarginalSample {
  double t = 0.0;
  std::vector<std::uint64_t> counts;  // per vertex id, exited paths excluded
  std::uint64_t num_paths = 0;        // paths counted in `counts`
  std::uint64_t exited = 0;           // paths censored at or before t
  double exit_fraction = 0.0;
  bool flagged = false;               // exit_fraction above the threshold
};

inline std::vector<MarginalSample> marginals_from(const DarnedLattice& g,
                                                  const PositionTable& table,
                                                  double exit_threshold = 0.01) {
  std::vector<MarginalSample> out;
  for (std::size_t k = 0; k < table.times.size(); ++k) {
    MarginalSample m;
    m.t = table.times[k];
    m.counts.assign(g.num_vertices(), 0);
    for (std::uint64_t p = 0; p < table.num_paths; ++p) {
      const VertexId v = table.at(p, k);
      if (v == kNoVertex) {
        ++m.exited;
      } else {
        ++m.counts[v];
        ++m.num_paths;
      }
    }
    m.exit_fraction = static_cast<double>(m.exited) / static_cast<double>(table.num_paths);
    m.flagged = m.exit_fraction > exit_threshold;
    out.push_back(std::move(m));
  }
  return out;
}

/// Empirical law of X_t at each time of the grid.
inline std::vector<MarginalSample> marginal(const DarnedLattice& g, const WalkConfig& cfg,
                                            VertexId start, std::span<const double> times,
                                            double exit_threshold = 0.01) {
  return marginals_from(g, sample_positions(g, cfg, start, times), exit_threshold);
}

/// Stop set for hitting experiments: a target vertex set, an optional outer
/// sphere |x - center| >= outer_radius, and a time horizon (may be infinite).
struct HittingQuery {
  std::vector<std::uint8_t> targets;  // mask over vertex ids
  std::optional<double> outer_radius;
  Point center;
  double horizon = std::numeric_limits<double>::infinity();
  int histogram_bins = 20;
};

struct HittingStats {
  stats::Proportion hit;         // hit before horizon, outer sphere and window exit
  std::uint64_t outer = 0;       // stopped on the outer sphere first
  std::uint64_t censored = 0;    // horizon reached first
  std::uint64_t exited = 0;      // window face reached first
  double mean_hit_time = 0.0;
  double histogram_max = 0.0;    // upper edge of the histogram
  std::vector<std::uint64_t> histogram;  // hitting times of the hits
};

inline HittingStats hitting_stats(const DarnedLattice& g, const WalkConfig& cfg, VertexId start,
                                  const HittingQuery& q) {
  if (cfg.num_paths < 1) throw std::invalid_argument("num_paths must be at least 1");
  detail::check_start(g, start);
  if (q.targets.size() != g.num_vertices()) throw std::invalid_argument("target mask size mismatch");
  if (std::find(q.targets.begin(), q.targets.end(), 1) == q.targets.end()) {
    throw std::invalid_argument("hitting_stats: empty target set");
  }
  if (q.outer_radius && q.center.dim() != g.dim()) {
    throw std::invalid_argument("hitting_stats: center dimension mismatch");
  }
  // Outer stop test in lattice units: |c - center 2^j|^2 >= (R 2^j)^2.
  std::vector<double> center(static_cast<std::size_t>(g.dim()), 0.0);
  double r2 = 0.0;
  if (q.outer_radius) {
    for (int i = 0; i < g.dim(); ++i) center[static_cast<std::size_t>(i)] = std::ldexp(q.center[i], g.level());
    r2 = std::ldexp(*q.outer_radius, g.level());
    r2 *= r2;
  }
  auto outside = [&](VertexId v) {
    if (!q.outer_radius || g.is_star(v)) return false;
    const auto c = g.coords(v);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double dx = static_cast<double>(c[i]) - center[i];
      s += dx * dx;
    }
    return s >= r2 * (1.0 - 1e-14);
  };

  enum : std::uint8_t { kCensored, kHit, kOuter, kExited };
  std::vector<std::uint8_t> outcome(cfg.num_paths, kCensored);
  std::vector<double> when(cfg.num_paths, 0.0);
  const double rate = jump_rate(g, cfg.rate_mode);
  parallel_chunks(cfg.num_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(cfg.seed, p);
      const WalkEnd how = detail::run_walk(g, rate, start, q.horizon, rng, [&](double t, VertexId v) {
        if (q.targets[v]) {
          outcome[p] = kHit;
          when[p] = t;
          return false;
        }
        if (outside(v)) {
          outcome[p] = kOuter;
          return false;
        }
        return true;
      });
      if (how == WalkEnd::kExited) outcome[p] = kExited;
    }
  });

  HittingStats s;
  s.hit.trials = cfg.num_paths;
  double sum_t = 0.0;
  for (std::uint64_t p = 0; p < cfg.num_paths; ++p) {
    switch (outcome[p]) {
      case kHit:
        ++s.hit.hits;
        sum_t += when[p];
        s.histogram_max = std::max(s.histogram_max, when[p]);
        break;
      case kOuter: ++s.outer; break;
      case kExited: ++s.exited; break;
      default: ++s.censored; break;
    }
  }
  if (s.hit.hits) s.mean_hit_time = sum_t / static_cast<double>(s.hit.hits);
  if (std::isfinite(q.horizon)) s.histogram_max = q.horizon;
  s.histogram.assign(static_cast<std::size_t>(std::max(1, q.histogram_bins)), 0);
  for (std::uint64_t p = 0; p < cfg.num_paths; ++p) {
    if (outcome[p] != kHit) continue;
    std::size_t b = 0;
    if (s.histogram_max > 0.0) {
      b = static_cast<std::size_t>(when[p] / s.histogram_max * static_cast<double>(s.histogram.size()));
    }
    ++s.histogram[std::min(b, s.histogram.size() - 1)];
  }
  return s;
}

namespace detail {

// Skorokhod modulus on a piecewise-constant path: value i holds on
// [s[i], s[i+1]) with s[0] = 0 and the last piece ending at T. Partitions
// 0 = t_0 < ... < t_{n-1} < T <= t_n with gaps >= theta; oscillation over
// [t_{i-1}, t_i) restricted to [0, T].
//
// dist(a, b) is the metric between piece values; `step` bounds the distance
// moved by one jump (infinity disables the skip-ahead).
template <class Dist>
class ModulusSolver {
 public:
  ModulusSolver(std::span<const double> s, double horizon, Dist dist, double step)
      : s_(s), horizon_(horizon), dist_(dist), step_(step) {}

  /// True iff w(theta) <= eps.
  bool feasible(double theta, double eps) const {
    const std::size_t k = s_.size();
    if (k == 0) return true;
    const std::vector<std::size_t> bad = bad_indices(eps);
    const std::size_t none = k;
    if (bad[0] == none) return true;
    if (!(theta < horizon_)) return false;

    // earliest[r]: earliest cut time in piece r reachable by a valid prefix.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> earliest(k, inf);
    earliest[0] = 0.0;
    // Windows of predecessors p < r with bad[p] >= r (any cut up to s_r) and
    // bad[p] > r (cuts inside piece r too). Both slide monotonically since
    // bad is nondecreasing.
    MinWindow upto;
    MinWindow inside;
    std::size_t added = 0;
    for (std::size_t r = 1; r < k; ++r) {
      while (added < r) {
        if (earliest[added] < inf) {
          upto.push(added, earliest[added]);
          inside.push(added, earliest[added]);
        }
        ++added;
      }
      upto.drop_while([&](std::size_t p) { return bad[p] < r; });
      inside.drop_while([&](std::size_t p) { return bad[p] <= r; });
      const double end = r + 1 < k ? s_[r + 1] : horizon_;
      double best = inf;
      if (!upto.empty() && upto.min() + theta <= s_[r]) best = s_[r];
      if (!inside.empty()) {
        const double c = std::max(s_[r], inside.min() + theta);
        if (c < end && c < horizon_) best = std::min(best, c);
      }
      earliest[r] = best;
      if (best < inf && bad[r] == none) return true;
    }
    return false;
  }

  /// Exact modulus by search over the attainable values.
  double value(double theta) const {
    const std::size_t k = s_.size();
    if (k <= 1) return 0.0;
    std::vector<double> cand;
    if (k <= 2048) {
      cand.reserve(k * (k - 1) / 2 + 1);
      cand.push_back(0.0);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) cand.push_back(dist_(a, b));
      }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      std::size_t lo = 0;
      std::size_t hi = cand.size() - 1;
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (feasible(theta, cand[mid])) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      return cand[lo];
    }
    double hi = 0.0;
    for (std::size_t a = 0; a < k; ++a) hi = std::max(hi, dist_(0, a));
    hi *= 2.0;
    double lo = 0.0;
    if (feasible(theta, 0.0)) return 0.0;
    for (int it = 0; it < 64 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(theta, mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

 private:
  struct MinWindow {
    std::deque<std::pair<std::size_t, double>> q;  // increasing values
    void push(std::size_t i, double v) {
      while (!q.empty() && q.back().second >= v) q.pop_back();
      q.emplace_back(i, v);
    }
    template <class Pred>
    void drop_while(Pred pred) {
      while (!q.empty() && pred(q.front().first)) q.pop_front();
    }
    bool empty() const { return q.empty(); }
    double min() const { return q.front().second; }
  };

  // bad[p]: first piece r > p such that pieces p..r oscillate more than eps,
  // or k if none. It is the suffix minimum of first[a], the first b > a
  // with dist(a, b) > eps.
  std::vector<std::size_t> bad_indices(double eps) const {
    const std::size_t k = s_.size();
    std::vector<std::size_t> bad(k, k);
    std::size_t suffix = k;
    for (std::size_t a = k; a-- > 0;) {
      std::size_t b = a + 1;
      while (b < k && b < suffix) {
        const double r = dist_(a, b);
        if (r > eps) break;
        // Every index skipped is provably within eps of a.
        std::size_t skip = 1;
        if (std::isfinite(step_) && step_ > 0.0) {
          skip = static_cast<std::size_t>(std::floor((eps - r) / step_)) + 1;
        }
        b += skip;
      }
      suffix = std::min(suffix, std::min(b, k));
      bad[a] = suffix;
    }
    return bad;
  }

  std::span<const double> s_;
  double horizon_;
  Dist dist_;
  double step_;
};

template <class Dist>
ModulusSolver<Dist> make_modulus_solver(std::span<const double> s, double horizon, Dist dist,
                                        double step) {
  return ModulusSolver<Dist>(s, horizon, dist, step);
}

}  // namespace detail

struct PathStatistics {
  double sup_rho = 0.0;          // sup_{t <= T} rho(x0, X_t)
  std::vector<double> modulus;   // w_rho(X, theta, T) per theta
  bool escaped = false;          // left the window
};

/// Jump times and vertices of a path, truncated to [0, T].
inline std::vector<double> jump_times(const WalkPath& path) {
  std::vector<double> s;
  s.reserve(path.events.size());
  for (const auto& e : path.events) s.push_back(e.t);
  return s;
}

/// w_rho(X, theta, T) for one sampled path, exact.
inline double modulus(const DarnedLattice& g, const WalkPath& path, double theta) {
  const auto s = jump_times(path);
  auto dist = [&](std::size_t a, std::size_t b) {
    return quotient_metric(g, path.events[a].v, path.events[b].v);
  };
  return detail::make_modulus_solver(std::span<const double>(s), path.horizon, dist, g.spacing())
      .value(theta);
}

/// True iff w_rho(X, theta, T) > eps.
inline bool modulus_exceeds(const DarnedLattice& g, const WalkPath& path, double theta, double eps) {
  const auto s = jump_times(path);
  auto dist = [&](std::size_t a, std::size_t b) {
    return quotient_metric(g, path.events[a].v, path.events[b].v);
  };
  return !detail::make_modulus_solver(std::span<const double>(s), path.horizon, dist, g.spacing())
              .feasible(theta, eps);
}

inline PathStatistics path_statistics(const DarnedLattice& g, const WalkPath& path, VertexId x0,
                                      std::span<const double> thetas) {
  PathStatistics st;
  for (const auto& e : path.events) st.sup_rho = std::max(st.sup_rho, quotient_metric(g, x0, e.v));
  for (double th : thetas) st.modulus.push_back(modulus(g, path, th));
  st.escaped = path.exited_window;
  return st;
}

/// Per-coordinate variance rate of X away from K and the window face:
/// quadratic variation of the jumps made from `inside` vertices over the time
/// spent there.
struct DiffusionEstimate {
  double rate = 0.0;  // mean over coordinates, per unit time
  double se = 0.0;    // delta-method standard error of the ratio
  std::vector<double> per_coordinate;
  std::uint64_t jumps = 0;
  double time = 0.0;
};

inline DiffusionEstimate diffusion_rate(const DarnedLattice& g, const WalkConfig& cfg,
                                        VertexId start, std::span<const std::uint8_t> inside) {
  cfg.validate();
  detail::check_start(g, start);
  if (inside.size() != g.num_vertices()) throw std::invalid_argument("inside mask size mismatch");
  const auto d = static_cast<std::size_t>(g.dim());
  const double rate = jump_rate(g, cfg.rate_mode);
  const double h2 = g.spacing() * g.spacing();
  std::vector<double> qv(cfg.num_paths * d, 0.0);
  std::vector<double> tau(cfg.num_paths, 0.0);
  std::vector<std::uint64_t> jumps(cfg.num_paths, 0);
  parallel_chunks(cfg.num_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(cfg.seed, p);
      VertexId prev = kNoVertex;
      double prev_t = 0.0;
      const WalkEnd how = detail::run_walk(g, rate, start, cfg.horizon, rng, [&](double t, VertexId v) {
        if (prev != kNoVertex && inside[prev] && !g.is_star(v)) {
          tau[p] += t - prev_t;
          const auto a = g.coords(prev);
          const auto b = g.coords(v);
          for (std::size_t i = 0; i < d; ++i) {
            const double dx = static_cast<double>(b[i] - a[i]);
            qv[p * d + i] += dx * dx * h2;
          }
          ++jumps[p];
        }
        prev = v;
        prev_t = t;
        return true;
      });
      if (how == WalkEnd::kHorizon && inside[prev]) tau[p] += cfg.horizon - prev_t;
    }
  });
  DiffusionEstimate est;
  est.per_coordinate.assign(d, 0.0);
  std::vector<double> q(cfg.num_paths, 0.0);
  for (std::uint64_t p = 0; p < cfg.num_paths; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      est.per_coordinate[i] += qv[p * d + i];
      q[p] += qv[p * d + i] / static_cast<double>(d);
    }
    est.time += tau[p];
    est.jumps += jumps[p];
  }
  if (est.time <= 0.0) return est;
  double sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    est.per_coordinate[i] /= est.time;
    sq += est.per_coordinate[i];
  }
  est.rate = sq / static_cast<double>(d);
  double var = 0.0;
  for (std::uint64_t p = 0; p < cfg.num_paths; ++p) {
    const double r = q[p] - est.rate * tau[p];
    var += r * r;
  }
  est.se = std::sqrt(var) / est.time;
  return est;
}

}  // namespace darnwalk

#endif  // DARNWALK_DYNAMICS_HPP_
