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

#ifndef DARNWALK_ISOPERIMETRY_HPP_
#define DARNWALK_ISOPERIMETRY_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "darnwalk/lattice.hpp"
#include "darnwalk/parallel.hpp"
#include "darnwalk/rng.hpp"

namespace darnwalk {

class IsoError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite nonempty vertex set with cached measure and connectivity.
struct VertexSet {
  std::vector<VertexId> ids;  // sorted, unique
  double measure = 0.0;
  bool connected = false;

  bool contains(VertexId v) const { return std::binary_search(ids.begin(), ids.end(), v); }
};

inline VertexSet make_vertex_set(const DarnedLattice& g, std::vector<VertexId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) throw IsoError("vertex set must be nonempty");
  if (ids.back() >= g.num_vertices()) throw IsoError("vertex set id out of range");
  VertexSet s;
  s.ids = std::move(ids);
  for (VertexId v : s.ids) s.measure += g.measure(v);
  std::vector<std::uint8_t> in(g.num_vertices(), 0);
  for (VertexId v : s.ids) in[v] = 1;
  std::vector<VertexId> stack{s.ids.front()};
  in[s.ids.front()] = 2;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    for (VertexId w : g.neighbors(u)) {
      if (in[w] == 1) {
        in[w] = 2;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  s.connected = reached == s.ids.size();
  return s;
}

/// Number of edges between A and its complement.
inline std::uint64_t cut_edges(const DarnedLattice& g, const VertexSet& a) {
  if (a.ids.size() >= g.num_vertices()) throw IsoError("cut of the whole graph: complement is empty");
  std::uint64_t n = 0;
  for (VertexId x : a.ids) {
    for (VertexId y : g.neighbors(x)) {
      if (!a.contains(y)) ++n;
    }
  }
  return n;
}

/// mu(A, E \ A) with the common edge weight 2^{-jd} / (2d).
inline double cut_weight(const DarnedLattice& g, const VertexSet& a) {
  return g.edge_weight() * static_cast<double>(cut_edges(g, a));
}

/// The same cut as sum of weighted degrees minus twice the internal weight.
inline double cut_weight_by_degrees(const DarnedLattice& g, const VertexSet& a) {
  if (a.ids.size() >= g.num_vertices()) throw IsoError("cut of the whole graph: complement is empty");
  std::uint64_t deg = 0;
  std::uint64_t internal = 0;  // oriented internal edges
  for (VertexId x : a.ids) {
    deg += g.degree(x);
    for (VertexId y : g.neighbors(x)) {
      if (a.contains(y)) ++internal;
    }
  }
  return g.edge_weight() * static_cast<double>(deg) - g.edge_weight() * static_cast<double>(internal);
}

inline double iso_ratio_from(const DarnedLattice& g, double cut, double measure) {
  const double d = g.dim();
  return cut / (g.spacing() * std::pow(measure, (d - 1.0) / d));
}

/// mu(A, A^c) / (2^{-j} m_j(A)^{(d-1)/d}).
inline double iso_ratio(const DarnedLattice& g, const VertexSet& a) {
  return iso_ratio_from(g, cut_weight(g, a), a.measure);
}

// ---------------------------------------------------------------------------
// Families.

struct FamilySpec {
  enum class Kind { kConnected, kBalls, kStar, kRandom };
  Kind kind = Kind::kConnected;
  int max_size = 1;    // connected: |A| <= max_size; random: set size
  int r_min = 1;       // balls: hop radius range
  int r_max = 1;
  int hops = 0;        // star neighbourhoods up to this many hops
  int count = 0;       // random: number of sets

  std::string name() const {
    switch (kind) {
      case Kind::kConnected: return "connected:" + std::to_string(max_size);
      case Kind::kBalls: return "balls:" + std::to_string(r_min) + ".." + std::to_string(r_max);
      case Kind::kStar: return "star:" + std::to_string(hops);
      default: return "random:" + std::to_string(count) + "x" + std::to_string(max_size);
    }
  }
};

/// Parses "connected:6,balls:1..16,star:2,random:100x20".
inline std::vector<FamilySpec> parse_families(const std::string& text) {
  std::vector<FamilySpec> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw IsoError("bad " + what + " in family '" + item + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw IsoError("family '" + item + "' needs kind:args");
    const std::string kind = item.substr(0, colon);
    const std::string args = item.substr(colon + 1);
    FamilySpec f;
    if (kind == "connected") {
      f.kind = FamilySpec::Kind::kConnected;
      f.max_size = number(args, "size");
      if (f.max_size < 1 || f.max_size > 8) throw IsoError("connected sets are enumerated for sizes 1..8");
    } else if (kind == "balls") {
      f.kind = FamilySpec::Kind::kBalls;
      const auto dots = args.find("..");
      if (dots == std::string::npos) {
        f.r_min = f.r_max = number(args, "radius");
      } else {
        f.r_min = number(args.substr(0, dots), "radius");
        f.r_max = number(args.substr(dots + 2), "radius");
      }
      if (f.r_min < 0 || f.r_max < f.r_min) throw IsoError("bad ball radius range in '" + item + "'");
    } else if (kind == "star") {
      f.kind = FamilySpec::Kind::kStar;
      f.hops = number(args, "hop count");
      if (f.hops < 0) throw IsoError("negative hop count");
    } else if (kind == "random") {
      f.kind = FamilySpec::Kind::kRandom;
      const auto x = args.find('x');
      if (x == std::string::npos) throw IsoError("random family needs COUNTxSIZE");
      f.count = number(args.substr(0, x), "count");
      f.max_size = number(args.substr(x + 1), "size");
      if (f.count < 1 || f.max_size < 1) throw IsoError("random family needs positive count and size");
    } else {
      throw IsoError("unknown family kind '" + kind + "'");
    }
    out.push_back(f);
  }
  if (out.empty()) throw IsoError("no families given");
  return out;
}

struct IsoRecord {
  std::size_t size = 0;
  bool contains_star = false;
  double measure = 0.0;
  double cut = 0.0;
  double ratio = 0.0;
};

struct FamilyResult {
  std::string name;
  std::uint64_t sets = 0;
  bool truncated = false;  // budget exceeded, partial result
  double min_ratio = std::numeric_limits<double>::infinity();
  double min_star = std::numeric_limits<double>::infinity();       // sets containing a*
  double min_star_free = std::numeric_limits<double>::infinity();  // sets avoiding a*
  std::vector<VertexId> argmin;
  std::vector<IsoRecord> records;  // kept for the small structured families
};

struct IsoOptions {
  std::uint64_t budget = 500000000;  // max sets per family
  std::uint64_t seed = 1;
};

namespace detail {

struct IsoBest {
  double ratio = std::numeric_limits<double>::infinity();
  double star = std::numeric_limits<double>::infinity();
  double star_free = std::numeric_limits<double>::infinity();
  std::vector<VertexId> argmin;
  std::uint64_t sets = 0;

  void offer(const DarnedLattice& g, std::span<const VertexId> set, double cut, double measure,
             bool has_star) {
    const double r = iso_ratio_from(g, cut, measure);
    ++sets;
    if (has_star) {
      star = std::min(star, r);
    } else {
      star_free = std::min(star_free, r);
    }
    if (r < ratio) {
      ratio = r;
      argmin.assign(set.begin(), set.end());
    }
  }

  void merge(const IsoBest& o) {
    sets += o.sets;
    star = std::min(star, o.star);
    star_free = std::min(star_free, o.star_free);
    if (o.ratio < ratio) {
      ratio = o.ratio;
      argmin = o.argmin;
    }
  }
};

// Redelmeier enumeration of connected sets whose smallest id is the root.
// Each set is visited exactly once; cut and degree sums are updated
// incrementally: cut(S + v) = cut(S) + deg(v) - 2 |N(v) cap S|.
class ConnectedEnumerator {
 public:
  ConnectedEnumerator(const DarnedLattice& g, int max_size, std::atomic<std::uint64_t>& counter,
                      std::uint64_t budget)
      : g_(g),
        max_size_(static_cast<std::size_t>(max_size)),
        in_set_(g.num_vertices(), 0),
        seen_(g.num_vertices(), 0),
        counter_(counter),
        budget_(budget) {}

  bool aborted() const { return aborted_; }

  void run_root(VertexId root, IsoBest& best) {
    root_ = root;
    set_.assign(1, root);
    in_set_[root] = 1;
    seen_[root] = 1;
    cut_ = g_.degree(root);
    degsum_ = g_.degree(root);
    has_star_ = g_.is_star(root);
    report(best);
    std::vector<VertexId> untried;
    for (VertexId y : g_.neighbors(root)) {
      if (y > root && !seen_[y]) {
        seen_[y] = 1;
        untried.push_back(y);
      }
    }
    if (max_size_ > 1) extend(untried, best);
    for (VertexId y : g_.neighbors(root)) seen_[y] = 0;
    seen_[root] = 0;
    in_set_[root] = 0;
  }

 private:
  void report(IsoBest& best) {
    if (counter_.fetch_add(1, std::memory_order_relaxed) >= budget_) {
      aborted_ = true;
      return;
    }
    best.offer(g_, set_, g_.edge_weight() * static_cast<double>(cut_),
               g_.edge_weight() * static_cast<double>(degsum_), has_star_);
  }

  void extend(std::vector<VertexId> untried, IsoBest& best) {
    while (!untried.empty() && !aborted_) {
      const VertexId v = untried.back();
      untried.pop_back();
      std::uint64_t inside = 0;
      for (VertexId y : g_.neighbors(v)) inside += in_set_[y];
      const std::uint64_t dv = g_.degree(v);
      cut_ = cut_ + dv - 2 * inside;
      degsum_ += dv;
      set_.push_back(v);
      in_set_[v] = 1;
      const bool had_star = has_star_;
      has_star_ = has_star_ || g_.is_star(v);
      report(best);
      if (set_.size() < max_size_) {
        std::vector<VertexId> next = untried;
        const std::size_t first_new = next.size();
        for (VertexId y : g_.neighbors(v)) {
          if (y > root_ && !seen_[y]) {
            seen_[y] = 1;
            next.push_back(y);
          }
        }
        std::vector<VertexId> fresh(next.begin() + static_cast<std::ptrdiff_t>(first_new), next.end());
        extend(std::move(next), best);
        for (VertexId y : fresh) seen_[y] = 0;
      }
      has_star_ = had_star;
      in_set_[v] = 0;
      set_.pop_back();
      degsum_ -= dv;
      cut_ = cut_ + 2 * inside - dv;
    }
  }

  const DarnedLattice& g_;
  std::size_t max_size_;
  std::vector<std::uint8_t> in_set_;
  std::vector<std::uint8_t> seen_;
  std::atomic<std::uint64_t>& counter_;
  std::uint64_t budget_;
  bool aborted_ = false;
  VertexId root_ = 0;
  std::vector<VertexId> set_;
  std::uint64_t cut_ = 0;
  std::uint64_t degsum_ = 0;
  bool has_star_ = false;
};

inline IsoRecord record_of(const DarnedLattice& g, const VertexSet& a) {
  IsoRecord r;
  r.size = a.ids.size();
  r.contains_star = g.star() && a.contains(*g.star());
  r.measure = a.measure;
  r.cut = cut_weight(g, a);
  r.ratio = iso_ratio_from(g, r.cut, r.measure);
  return r;
}

inline void add_record(const DarnedLattice& g, const VertexSet& a, FamilyResult& out) {
  if (a.ids.size() >= g.num_vertices()) return;
  const IsoRecord r = record_of(g, a);
  out.records.push_back(r);
  ++out.sets;
  if (r.contains_star) {
    out.min_star = std::min(out.min_star, r.ratio);
  } else {
    out.min_star_free = std::min(out.min_star_free, r.ratio);
  }
  if (r.ratio < out.min_ratio) {
    out.min_ratio = r.ratio;
    out.argmin = a.ids;
  }
}

inline std::vector<VertexId> hop_ball(const DarnedLattice& g, VertexId center, int radius) {
  const MetricTable t = graph_distance(g, center);
  std::vector<VertexId> ids;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (t.hops[v] >= 0 && t.hops[v] <= radius) ids.push_back(v);
  }
  return ids;
}

}  // namespace detail

/// Enumerates one family and reports its minimum ratios.
inline FamilyResult enumerate_family(const DarnedLattice& g, const FamilySpec& f,
                                     const IsoOptions& opts = {}) {
  FamilyResult out;
  out.name = f.name();
  switch (f.kind) {
    case FamilySpec::Kind::kConnected: {
      // Roots are split into fixed blocks; block results merge in order.
      const std::size_t nv = g.num_vertices();
      constexpr std::size_t kRootsPerBlock = 256;
      const std::size_t blocks = (nv + kRootsPerBlock - 1) / kRootsPerBlock;
      std::vector<detail::IsoBest> best(blocks);
      std::vector<std::uint8_t> aborted(blocks, 0);
      std::atomic<std::uint64_t> counter{0};
      parallel_items(blocks, [&](std::size_t b) {
        detail::ConnectedEnumerator en(g, f.max_size, counter, opts.budget);
        const std::size_t end = std::min(nv, (b + 1) * kRootsPerBlock);
        for (std::size_t r = b * kRootsPerBlock; r < end && !en.aborted(); ++r) {
          en.run_root(static_cast<VertexId>(r), best[b]);
        }
        aborted[b] = en.aborted();
      });
      detail::IsoBest all;
      for (const auto& b : best) all.merge(b);
      out.sets = all.sets;
      out.min_ratio = all.ratio;
      out.min_star = all.star;
      out.min_star_free = all.star_free;
      out.argmin = all.argmin;
      out.truncated = std::find(aborted.begin(), aborted.end(), 1) != aborted.end();
      break;
    }
    case FamilySpec::Kind::kBalls: {
      const VertexId c = nearest_to_origin(g);
      for (int r = f.r_min; r <= f.r_max; ++r) {
        detail::add_record(g, make_vertex_set(g, detail::hop_ball(g, c, r)), out);
      }
      break;
    }
    case FamilySpec::Kind::kStar: {
      const auto star = g.star();
      if (!star) throw IsoError("star family requested on a graph without a star");
      for (int h = 0; h <= f.hops; ++h) {
        detail::add_record(g, make_vertex_set(g, detail::hop_ball(g, *star, h)), out);
      }
      break;
    }
    case FamilySpec::Kind::kRandom: {
      const auto size = static_cast<std::size_t>(f.max_size);
      if (size >= g.num_vertices()) throw IsoError("random set size must be below the vertex count");
      std::vector<std::uint8_t> in(g.num_vertices(), 0);
      for (int i = 0; i < f.count; ++i) {
        RandomStream rng(opts.seed, static_cast<std::uint64_t>(i));
        std::vector<VertexId> ids{static_cast<VertexId>(rng.below(static_cast<std::uint32_t>(g.num_vertices())))};
        in[ids[0]] = 1;
        std::vector<VertexId> frontier;
        for (VertexId y : g.neighbors(ids[0])) frontier.push_back(y);
        while (ids.size() < size && !frontier.empty()) {
          const std::size_t k = rng.below(static_cast<std::uint32_t>(frontier.size()));
          const VertexId v = frontier[k];
          frontier[k] = frontier.back();
          frontier.pop_back();
          if (in[v]) continue;
          in[v] = 1;
          ids.push_back(v);
          for (VertexId y : g.neighbors(v)) {
            if (!in[y]) frontier.push_back(y);
          }
        }
        for (VertexId v : ids) in[v] = 0;
        detail::add_record(g, make_vertex_set(g, std::move(ids)), out);
      }
      break;
    }
  }
  return out;
}

struct IsoReport {
  int level = 0;
  std::vector<FamilyResult> families;
  double min_ratio = std::numeric_limits<double>::infinity();
  double min_star = std::numeric_limits<double>::infinity();
  double min_star_free = std::numeric_limits<double>::infinity();
  bool truncated = false;
};

inline IsoReport isoperimetry_report(const DarnedLattice& g, std::span<const FamilySpec> families,
                                     const IsoOptions& opts = {}) {
  IsoReport rep;
  rep.level = g.level();
  for (const auto& f : families) {
    if (f.kind == FamilySpec::Kind::kStar && !g.star()) continue;
    rep.families.push_back(enumerate_family(g, f, opts));
    const auto& r = rep.families.back();
    rep.min_ratio = std::min(rep.min_ratio, r.min_ratio);
    rep.min_star = std::min(rep.min_star, r.min_star);
    rep.min_star_free = std::min(rep.min_star_free, r.min_star_free);
    rep.truncated = rep.truncated || r.truncated;
  }
  return rep;
}

/// Both sides of the comparison used for sets containing the star: the cut
/// in E^j against (1/2d) of the cut of B = (A \ {a*}) cup K_j in the full
/// lattice 2^-j Z^d, together with mu_j(K_j) and m_j(a*).
struct StarCaseCheck {
  double lhs = 0.0;        // mu_E(A, E \ A)
  double rhs = 0.0;        // (1/2d) mu_Z(B, Z \ B)
  bool holds = false;      // lhs >= rhs
  double mu_b = 0.0;       // mu_j(B) = 2^{-jd} #B
  double lhs_ratio = 0.0;  // lhs / (2^-j mu_j(B)^{(d-1)/d})
  double mu_kj = 0.0;      // mu_j(K_j)
  double m_star = 0.0;     // m_j(a*)
};

inline StarCaseCheck star_case_check(const DarnedLattice& g, const VertexSet& a) {
  const auto star = g.star();
  if (!star || !a.contains(*star)) throw IsoError("star_case_check needs a set containing the star");
  const int d = g.dim();
  const auto du = static_cast<std::size_t>(d);
  std::vector<std::uint8_t> in_b(g.box_size(), 0);
  std::vector<std::int32_t> pts;
  for (VertexId v : a.ids) {
    if (g.is_star(v)) continue;
    const auto c = g.coords(v);
    in_b[*g.box_index(c)] = 1;
    pts.insert(pts.end(), c.begin(), c.end());
  }
  const auto kp = g.region_points();
  for (std::size_t i = 0; i < g.num_region_points(); ++i) {
    const auto c = kp.subspan(i * du, du);
    in_b[*g.box_index(c)] = 1;
    pts.insert(pts.end(), c.begin(), c.end());
  }
  std::uint64_t boundary = 0;
  std::vector<std::int32_t> y(du);
  const std::size_t nb = pts.size() / du;
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t axis = 0; axis < du; ++axis) {
      for (int step : {-1, 1}) {
        std::copy(pts.begin() + static_cast<std::ptrdiff_t>(i * du),
                  pts.begin() + static_cast<std::ptrdiff_t>((i + 1) * du), y.begin());
        y[axis] += step;
        const auto idx = g.box_index(y);
        if (!idx || !in_b[*idx]) ++boundary;
      }
    }
  }
  StarCaseCheck out;
  out.lhs = cut_weight(g, a);
  out.rhs = g.edge_weight() * static_cast<double>(boundary) / (2.0 * d);
  out.holds = out.lhs >= out.rhs;
  const double cell = std::ldexp(1.0, -g.level() * d);
  out.mu_b = cell * static_cast<double>(nb);
  out.lhs_ratio = out.lhs / (g.spacing() * std::pow(out.mu_b, (d - 1.0) / d));
  out.mu_kj = cell * static_cast<double>(g.num_region_points());
  out.m_star = g.measure(*star);
  return out;
}

}  // namespace darnwalk

#endif  // DARNWALK_ISOPERIMETRY_HPP_
