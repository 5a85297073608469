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

#ifndef DARNWALK_LATTICE_HPP_
#define DARNWALK_LATTICE_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "darnwalk/geometry.hpp"

namespace darnwalk {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The finite-window darned lattice E^j: regular vertices of the window
/// outside K in box order, followed by the star vertex a*_j.
///
/// Regular vertex coordinates are stored as integers c with position c * 2^-j.
/// Adjacency is CSR with sorted neighbor lists; the star, when present, has
/// the largest id so it always sorts last in a regular vertex's list.
class DarnedLattice {
 public:
  int level() const { return level_; }
  int dim() const { return dim_; }
  double window() const { return window_; }
  /// Window half-width in lattice units, W * 2^j.
  std::int32_t half_width() const { return half_width_; }
  double spacing() const { return std::ldexp(1.0, -level_); }
  /// lambda_j = 2^{2j}.
  double paper_rate() const { return std::ldexp(1.0, 2 * level_); }
  /// Common edge weight 2^{-jd} / (2d).
  double edge_weight() const {
    return std::ldexp(1.0, -level_ * dim_) / (2.0 * dim_);
  }

  std::size_t num_vertices() const { return offsets_.size() - 1; }
  std::size_t num_regular() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::optional<VertexId> star() const {
    if (star_ == kNoVertex) return std::nullopt;
    return star_;
  }
  bool is_star(VertexId v) const { return v == star_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::uint32_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  double measure(VertexId v) const { return edge_weight() * degree(v); }
  double total_measure() const {
    return edge_weight() * static_cast<double>(neighbors_.size());
  }

  std::span<const std::int32_t> coords(VertexId v) const {
    if (v >= num_regular()) throw LatticeError("coords: not a regular vertex");
    const auto d = static_cast<std::size_t>(dim_);
    return {coords_.data() + v * d, d};
  }
  Point position(VertexId v) const {
    const auto c = coords(v);
    Point p(dim_);
    for (int i = 0; i < dim_; ++i) p[i] = std::ldexp(static_cast<double>(c[static_cast<std::size_t>(i)]), -level_);
    return p;
  }
  /// Euclidean distance to K, cached at build; zero for the star.
  double distance_to_region(VertexId v) const { return dist_to_region_[v]; }
  bool on_window_face(VertexId v) const { return face_[v] != 0; }

  std::optional<VertexId> find(std::span<const std::int32_t> c) const {
    const auto idx = box_index(c);
    if (!idx) return std::nullopt;
    const VertexId v = box_to_id_[*idx];
    if (v == kNoVertex) return std::nullopt;
    return v;
  }
  /// Vertex at a lattice point p; a point of K maps to the star.
  std::optional<VertexId> find_point(const Point& p) const {
    if (p.dim() != dim_) return std::nullopt;
    std::vector<std::int32_t> c(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
      const double s = std::ldexp(p[i], level_);
      if (s != std::round(s)) return std::nullopt;
      c[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::lround(s));
    }
    if (auto v = find(c)) return v;
    if (!box_index(c)) return std::nullopt;
    return star();
  }

  const DarningRegion& region() const { return region_; }

  /// K_j = K cap 2^-j Z^d restricted to the window, flattened coordinates.
  std::span<const std::int32_t> region_points() const { return k_points_; }
  std::size_t num_region_points() const { return k_points_.size() / static_cast<std::size_t>(dim_); }

  std::size_t box_size() const { return box_to_id_.size(); }
  std::optional<std::size_t> box_index(std::span<const std::int32_t> c) const {
    std::size_t idx = 0;
    std::size_t stride = 1;
    const auto side = static_cast<std::size_t>(2 * half_width_ + 1);
    for (int i = 0; i < dim_; ++i) {
      const std::int32_t x = c[static_cast<std::size_t>(i)];
      if (x < -half_width_ || x > half_width_) return std::nullopt;
      idx += static_cast<std::size_t>(x + half_width_) * stride;
      stride *= side;
    }
    return idx;
  }

  /// Assembles a lattice from raw parts (builder and graph loader).
  static DarnedLattice from_parts(DarningRegion region, int level, double window,
                                  std::vector<std::int32_t> coords,
                                  std::vector<std::uint32_t> offsets,
                                  std::vector<VertexId> neighbors, bool has_star);

 private:
  explicit DarnedLattice(DarningRegion region) : region_(std::move(region)) {}

  DarningRegion region_;
  int level_ = 0;
  int dim_ = 0;
  double window_ = 0.0;
  std::int32_t half_width_ = 0;
  VertexId star_ = kNoVertex;
  std::vector<std::int32_t> coords_;
  std::vector<std::uint32_t> offsets_;
  std::vector<VertexId> neighbors_;
  std::vector<VertexId> box_to_id_;
  std::vector<double> dist_to_region_;
  std::vector<std::uint8_t> face_;
  std::vector<std::int32_t> k_points_;
};

namespace detail {

inline Point lattice_point(std::span<const std::int32_t> c, int level) {
  Point p(static_cast<int>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    p[static_cast<int>(i)] = std::ldexp(static_cast<double>(c[i]), -level);
  }
  return p;
}

// True iff some of the 2d lattice edges at c meets K (window ignored).
inline bool star_adjacent(const DarningRegion& region, std::span<const std::int32_t> c,
                          int level) {
  const Point p = lattice_point(c, level);
  std::array<std::int32_t, kMaxDim> nb{};
  for (std::size_t i = 0; i < c.size(); ++i) nb[i] = c[i];
  const std::span<const std::int32_t> nbs(nb.data(), c.size());
  for (std::size_t axis = 0; axis < c.size(); ++axis) {
    for (int step : {-1, 1}) {
      nb[axis] = c[axis] + step;
      const bool hit = segment_intersects(region, p, lattice_point(nbs, level));
      nb[axis] = c[axis];
      if (hit) return true;
    }
  }
  return false;
}

// Advances a coordinate odometer over [-n, n]^d; false after the last point.
inline bool next_coord(std::vector<std::int32_t>& c, std::int32_t lo, std::int32_t hi) {
  for (auto& x : c) {
    if (x < hi) {
      ++x;
      return true;
    }
    x = lo;
  }
  return false;
}

}  // namespace detail

inline DarnedLattice DarnedLattice::from_parts(DarningRegion region, int level,
                                               double window,
                                               std::vector<std::int32_t> coords,
                                               std::vector<std::uint32_t> offsets,
                                               std::vector<VertexId> neighbors,
                                               bool has_star) {
  DarnedLattice g(std::move(region));
  g.level_ = level;
  g.dim_ = g.region_.dim();
  g.window_ = window;
  const double n = std::ldexp(window, level);
  g.half_width_ = static_cast<std::int32_t>(std::lround(n));
  g.coords_ = std::move(coords);
  g.offsets_ = std::move(offsets);
  g.neighbors_ = std::move(neighbors);
  const std::size_t num_regular = g.coords_.size() / static_cast<std::size_t>(g.dim_);
  if (g.offsets_.size() != num_regular + (has_star ? 2u : 1u)) {
    throw LatticeError("inconsistent vertex count in lattice parts");
  }
  g.star_ = has_star ? static_cast<VertexId>(num_regular) : kNoVertex;

  std::size_t box = 1;
  for (int i = 0; i < g.dim_; ++i) box *= static_cast<std::size_t>(2 * g.half_width_ + 1);
  g.box_to_id_.assign(box, kNoVertex);
  g.dist_to_region_.assign(g.num_vertices(), 0.0);
  g.face_.assign(g.num_vertices(), 0);
  for (VertexId v = 0; v < num_regular; ++v) {
    const auto c = g.coords(v);
    const auto idx = g.box_index(c);
    if (!idx) throw LatticeError("vertex outside window");
    g.box_to_id_[*idx] = v;
    for (auto x : c) {
      if (x == -g.half_width_ || x == g.half_width_) g.face_[v] = 1;
    }
    g.dist_to_region_[v] = distance_to(g.region_, g.position(v));
  }
  std::vector<std::int32_t> c(static_cast<std::size_t>(g.dim_), -g.half_width_);
  do {
    if (g.box_to_id_[*g.box_index(c)] == kNoVertex) {
      g.k_points_.insert(g.k_points_.end(), c.begin(), c.end());
    }
  } while (detail::next_coord(c, -g.half_width_, g.half_width_));
  return g;
}

struct BuildOptions {
  /// Fail when the graph is disconnected (a star without edges counts).
  bool require_connected = true;
};

/// Builds E^j on the window [-W, W]^d.
///
/// Regular edges join nearest lattice neighbours whose segment misses K. A
/// regular vertex is joined to the star iff one of its 2d lattice edges meets
/// K; edges leaving the window are tested too.
inline DarnedLattice build_lattice(const DarningRegion& region, int level, double window,
                                   BuildOptions opts = {}) {
  if (level < 1 || level > 24) throw LatticeError("level j must be in [1, 24]");
  const int d = region.dim();
  const double scaled = std::ldexp(window, level);
  if (!(window > 0.0) || scaled != std::round(scaled)) {
    throw LatticeError("window radius must be a positive multiple of 2^-j");
  }
  if (!region.is_empty()) {
    const int k0 = extent(region, Point(d)).k0;
    if (window < 2.0 * k0) {
      throw LatticeError("window radius " + std::to_string(window) +
                         " too small for K: need W >= 2*k0 = " + std::to_string(2 * k0));
    }
  }
  const auto n = static_cast<std::int32_t>(std::lround(scaled));
  const auto side = static_cast<std::size_t>(2 * n + 1);
  std::size_t box = 1;
  for (int i = 0; i < d; ++i) {
    box *= side;
    if (box > (std::size_t{1} << 31)) throw LatticeError("window too large for this level");
  }

  // Pass 1: classify points, assign dense ids in box order.
  std::vector<VertexId> box_to_id(box, kNoVertex);
  std::vector<std::int32_t> coords;
  std::vector<std::int32_t> c(static_cast<std::size_t>(d), -n);
  const Bounds& kb = region.bounds();
  auto near_region = [&](std::span<const std::int32_t> x, std::int32_t pad) {
    if (region.is_empty()) return false;
    for (int i = 0; i < d; ++i) {
      const double lo = std::ldexp(static_cast<double>(x[static_cast<std::size_t>(i)] - pad), -level);
      const double hi = std::ldexp(static_cast<double>(x[static_cast<std::size_t>(i)] + pad), -level);
      if (hi < kb.lo[i] - kGeomTol || lo > kb.hi[i] + kGeomTol) return false;
    }
    return true;
  };
  std::size_t idx = 0;
  VertexId next_id = 0;
  do {
    if (!(near_region(c, 0) && contains(region, detail::lattice_point(c, level)))) {
      box_to_id[idx] = next_id++;
      coords.insert(coords.end(), c.begin(), c.end());
    }
    ++idx;
  } while (detail::next_coord(c, -n, n));

  const std::size_t num_regular = next_id;
  const bool has_star = !region.is_empty();
  const VertexId star = static_cast<VertexId>(num_regular);

  // Pass 2: adjacency.
  std::vector<std::uint32_t> offsets;
  offsets.reserve(num_regular + 2);
  offsets.push_back(0);
  std::vector<VertexId> neighbors;
  neighbors.reserve(num_regular * static_cast<std::size_t>(2 * d));
  std::vector<VertexId> star_nbrs;
  std::vector<std::int32_t> y(static_cast<std::size_t>(d));
  std::vector<VertexId> row;
  for (VertexId v = 0; v < num_regular; ++v) {
    const std::span<const std::int32_t> x(coords.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(d),
                                          static_cast<std::size_t>(d));
    const bool check_k = near_region(x, 1);
    const Point px = detail::lattice_point(x, level);
    bool to_star = false;
    row.clear();
    for (int axis = 0; axis < d; ++axis) {
      for (int step : {-1, 1}) {
        std::copy(x.begin(), x.end(), y.begin());
        y[static_cast<std::size_t>(axis)] += step;
        if (check_k && segment_intersects(region, px, detail::lattice_point(y, level))) {
          to_star = true;
          continue;
        }
        const std::int32_t ya = y[static_cast<std::size_t>(axis)];
        if (ya < -n || ya > n) continue;
        std::size_t yi = 0;
        std::size_t stride = 1;
        for (int i = 0; i < d; ++i) {
          yi += static_cast<std::size_t>(y[static_cast<std::size_t>(i)] + n) * stride;
          stride *= side;
        }
        row.push_back(box_to_id[yi]);
      }
    }
    std::sort(row.begin(), row.end());
    if (to_star) {
      row.push_back(star);
      star_nbrs.push_back(v);
    }
    neighbors.insert(neighbors.end(), row.begin(), row.end());
    offsets.push_back(static_cast<std::uint32_t>(neighbors.size()));
  }
  if (has_star) {
    neighbors.insert(neighbors.end(), star_nbrs.begin(), star_nbrs.end());
    offsets.push_back(static_cast<std::uint32_t>(neighbors.size()));
  }

  DarnedLattice g = DarnedLattice::from_parts(region, level, window, std::move(coords),
                                              std::move(offsets), std::move(neighbors),
                                              has_star);
  if (opts.require_connected) {
    std::vector<std::uint8_t> seen(g.num_vertices(), 0);
    std::queue<VertexId> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop();
      for (VertexId w : g.neighbors(u)) {
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          q.push(w);
        }
      }
    }
    if (reached != g.num_vertices()) {
      VertexId missing = 0;
      while (seen[missing]) ++missing;
      throw LatticeError("lattice is disconnected: reached " + std::to_string(reached) +
                         " of " + std::to_string(g.num_vertices()) +
                         " vertices from vertex 0; first unreached id " +
                         std::to_string(missing) +
                         (g.is_star(missing) ? " (star has no edges)" : ""));
    }
  }
  return g;
}

struct StarDegree {
  int level = 0;
  std::uint64_t degree = 0;
  /// #K_j, lattice points inside K.
  std::uint64_t region_points = 0;
};

struct StarDegreeScaling {
  std::vector<StarDegree> levels;
  /// Least-squares slope of log2 v_j(a*) against j.
  double slope = 0.0;
};

/// Star degree v_j(a*_j) counted directly on the lattice around K. It does
/// not depend on the window once the window holds K.
inline StarDegree count_star_degree(const DarningRegion& region, int level) {
  if (region.is_empty()) return StarDegree{level, 0, 0};
  const int d = region.dim();
  const Bounds& b = region.bounds();
  std::vector<std::int32_t> lo(static_cast<std::size_t>(d));
  std::vector<std::int32_t> hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    lo[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::floor(std::ldexp(b.lo[i], level))) - 2;
    hi[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::ceil(std::ldexp(b.hi[i], level))) + 2;
  }
  StarDegree out{level, 0, 0};
  std::vector<std::int32_t> c = lo;
  while (true) {
    if (contains(region, detail::lattice_point(c, level))) {
      ++out.region_points;
    } else if (detail::star_adjacent(region, c, level)) {
      ++out.degree;
    }
    std::size_t i = 0;
    for (; i < c.size(); ++i) {
      if (c[i] < hi[i]) {
        ++c[i];
        break;
      }
      c[i] = lo[i];
    }
    if (i == c.size()) break;
  }
  return out;
}

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

inline StarDegreeScaling star_degree_scaling(const DarningRegion& region, int j_min,
                                             int j_max) {
  if (j_min < 1 || j_max < j_min) throw LatticeError("star_degree_scaling: bad level range");
  StarDegreeScaling out;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int j = j_min; j <= j_max; ++j) {
    out.levels.push_back(count_star_degree(region, j));
    if (out.levels.back().degree > 0) {
      xs.push_back(j);
      ys.push_back(std::log2(static_cast<double>(out.levels.back().degree)));
    }
  }
  if (xs.size() >= 2) out.slope = least_squares_slope(xs, ys);
  return out;
}

/// Graph distances d_j(source, .) = 2^-j * hop count.
struct MetricTable {
  VertexId source = 0;
  double spacing = 1.0;
  std::vector<std::int32_t> hops;  // -1 when unreachable

  double operator[](VertexId v) const {
    return hops[v] < 0 ? std::numeric_limits<double>::infinity() : spacing * hops[v];
  }
};

inline MetricTable graph_distance(const DarnedLattice& g, VertexId source) {
  if (source >= g.num_vertices()) throw LatticeError("graph_distance: invalid source");
  MetricTable t{source, g.spacing(), std::vector<std::int32_t>(g.num_vertices(), -1)};
  std::vector<VertexId> frontier{source};
  std::vector<VertexId> next;
  t.hops[source] = 0;
  std::int32_t depth = 0;
  while (!frontier.empty()) {
    ++depth;
    next.clear();
    for (VertexId u : frontier) {
      for (VertexId w : g.neighbors(u)) {
        if (t.hops[w] < 0) {
          t.hops[w] = depth;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }
  return t;
}

/// rho(x, y) = min(|x - y|, dist(x, K) + dist(y, K)); dist(a*, K) = 0.
inline double quotient_metric(const DarnedLattice& g, VertexId x, VertexId y) {
  if (x == y) return 0.0;
  const double via_k = g.distance_to_region(x) + g.distance_to_region(y);
  if (g.is_star(x) || g.is_star(y)) return via_k;
  const auto cx = g.coords(x);
  const auto cy = g.coords(y);
  double s = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    const double dx = static_cast<double>(cx[i] - cy[i]);
    s += dx * dx;
  }
  return std::min(std::ldexp(std::sqrt(s), -g.level()), via_k);
}

/// rho from a vertex to an arbitrary point of E \ {a*}.
inline double quotient_metric(const DarnedLattice& g, VertexId x, const Point& p) {
  const double dp = distance_to(g.region(), p);
  if (g.is_star(x)) return dp;
  return std::min(detail::distance(g.position(x), p), g.distance_to_region(x) + dp);
}

/// True for x in S^j: a regular vertex whose 2d lattice neighbours are all
/// present. A vertex that lost one edge to K keeps degree 2d through its star
/// edge, so the degree alone does not decide membership.
inline bool in_interior(const DarnedLattice& g, VertexId v) {
  if (g.is_star(v) || g.degree(v) != static_cast<std::uint32_t>(2 * g.dim())) return false;
  const auto nb = g.neighbors(v);
  return !g.is_star(nb.back());
}

struct InteriorSet {
  /// S^j: regular vertices with all 2d lattice neighbours.
  std::vector<VertexId> ids;
  std::vector<std::uint8_t> mask;
  /// m_j(E^j \ S^j).
  double complement_measure = 0.0;
};

inline InteriorSet interior_set(const DarnedLattice& g) {
  InteriorSet s;
  s.mask.assign(g.num_vertices(), 0);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (in_interior(g, v)) {
      s.ids.push_back(v);
      s.mask[v] = 1;
    } else {
      s.complement_measure += g.measure(v);
    }
  }
  return s;
}

/// Regular vertex closest to the origin (ties to the lowest id).
inline VertexId nearest_to_origin(const DarnedLattice& g) {
  VertexId best = 0;
  std::int64_t best_r = std::numeric_limits<std::int64_t>::max();
  for (VertexId v = 0; v < g.num_regular(); ++v) {
    std::int64_t r = 0;
    for (auto x : g.coords(v)) r += static_cast<std::int64_t>(x) * x;
    if (r < best_r) {
      best_r = r;
      best = v;
    }
  }
  return best;
}

}  // namespace darnwalk

#endif  // DARNWALK_LATTICE_HPP_
