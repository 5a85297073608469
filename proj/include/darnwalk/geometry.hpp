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

#ifndef DARNWALK_GEOMETRY_HPP_
#define DARNWALK_GEOMETRY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace darnwalk {

inline constexpr int kMaxDim = 4;

// Absolute tolerance for membership and intersection predicates. Lattice
// coordinates are dyadic, so points exactly on the boundary of K are common.
inline constexpr double kGeomTol = 1e-12;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point of R^d with d <= kMaxDim, stored inline.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
      throw GeometryError("point dimension must be in [1, " +
                          std::to_string(kMaxDim) + "]");
    }
  }
  Point(std::initializer_list<double> values)
      : Point(static_cast<int>(values.size())) {
    std::copy(values.begin(), values.end(), x_.begin());
  }
  explicit Point(std::span<const double> values)
      : Point(static_cast<int>(values.size())) {
    std::copy(values.begin(), values.end(), x_.begin());
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return x_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const {
    return {x_.data(), static_cast<std::size_t>(dim_)};
  }

  bool is_finite() const {
    for (int i = 0; i < dim_; ++i) {
      if (!std::isfinite(x_[static_cast<std::size_t>(i)])) return false;
    }
    return true;
  }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a[i] != b[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDim> x_{};
  int dim_ = 0;
};

namespace detail {

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline Point sub(const Point& a, const Point& b) {
  Point r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Point lerp(const Point& a, const Point& b, double t) {
  Point r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
  return r;
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Point& a, const Point& b) {
  return norm(sub(a, b));
}

// Distance from p to the closed segment [a, b].
inline double point_segment_distance(const Point& p, const Point& a,
                                     const Point& b) {
  const Point ab = sub(b, a);
  const double len2 = dot(ab, ab);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(dot(sub(p, a), ab) / len2, 0.0, 1.0);
  return distance(p, lerp(a, b, t));
}

inline double cross2(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Distance between closed planar segments [a, b] and [c, d].
inline double segment_segment_distance_2d(const Point& a, const Point& b,
                                          const Point& c, const Point& d) {
  const double o1 = cross2(a, b, c);
  const double o2 = cross2(a, b, d);
  const double o3 = cross2(c, d, a);
  const double o4 = cross2(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) &&
      ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment_distance(a, c, d),
                   point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b),
                   point_segment_distance(d, a, b)});
}

// Solves the n x n system a * x = b in place by partial pivoting. Returns
// false when the matrix is numerically singular.
inline bool solve_small(std::vector<double> a, std::vector<double> b,
                        std::size_t n, std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return true;
}

inline double determinant(std::vector<double> a, std::size_t n) {
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (a[piv * n + col] == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
    }
  }
  return det;
}

// Calls fn(indices) for every k-subset of {0, ..., n-1}.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(std::span<const std::size_t>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t t = i; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
}

}  // namespace detail

struct AxisBox {
  Point lo;
  Point hi;
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Closed halfspace {x : normal . x <= offset}.
struct Halfspace {
  Point normal;
  double offset = 0.0;
};

struct HalfspacePolytope {
  std::vector<Halfspace> faces;
};

/// Simple closed polygon in the plane; the loop closes implicitly.
struct Polygon2D {
  std::vector<Point> vertices;
};

/// Debug-only stand-in for K = {}; graphs built on it are plain lattices.
struct EmptyRegion {};

struct Bounds {
  Point lo;
  Point hi;
};

/// The compact darning region K. Construction validates the shape.
class DarningRegion {
 public:
  using Shape =
      std::variant<AxisBox, Ball, HalfspacePolytope, Polygon2D, EmptyRegion>;

  static DarningRegion box(Point lo, Point hi);
  static DarningRegion ball(Point center, double radius);
  static DarningRegion polytope(std::vector<Halfspace> faces);
  static DarningRegion polygon(std::vector<Point> vertices);
  static DarningRegion empty(int dim);

  int dim() const { return dim_; }
  bool is_empty() const { return std::holds_alternative<EmptyRegion>(shape_); }
  const Shape& shape() const { return shape_; }
  const Bounds& bounds() const { return bounds_; }
  /// Polytope vertices (empty for other shapes).
  const std::vector<Point>& polytope_vertices() const { return vertices_; }
  std::string kind() const;

 private:
  DarningRegion(Shape shape, int dim) : shape_(std::move(shape)), dim_(dim) {}

  Shape shape_;
  int dim_ = 0;
  Bounds bounds_;
  std::vector<Point> vertices_;
};

namespace detail {

inline void check_dim(const DarningRegion& region, const Point& p) {
  if (p.dim() != region.dim()) {
    throw GeometryError("dimension mismatch: region has d=" +
                        std::to_string(region.dim()) + ", point has d=" +
                        std::to_string(p.dim()));
  }
}

inline bool polytope_contains(const HalfspacePolytope& poly, const Point& p,
                              double tol) {
  for (const auto& f : poly.faces) {
    if (dot(f.normal, p) > f.offset + tol) return false;
  }
  return true;
}

inline bool polygon_strictly_inside(const Polygon2D& poly, const Point& p) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, k = v.size() - 1; i < v.size(); k = i++) {
    if ((v[i][1] > p[1]) != (v[k][1] > p[1])) {
      const double x =
          v[k][0] + (p[1] - v[k][1]) * (v[i][0] - v[k][0]) / (v[i][1] - v[k][1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_boundary_distance(const Polygon2D& poly, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0, k = v.size() - 1; i < v.size(); k = i++) {
    best = std::min(best, point_segment_distance(p, v[k], v[i]));
  }
  return best;
}

}  // namespace detail

/// True iff p lies in the closed region K.
inline bool contains(const DarningRegion& region, const Point& p) {
  detail::check_dim(region, p);
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, AxisBox>) {
          for (int i = 0; i < p.dim(); ++i) {
            if (p[i] < s.lo[i] - kGeomTol || p[i] > s.hi[i] + kGeomTol) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<S, Ball>) {
          return detail::distance(p, s.center) <= s.radius + kGeomTol;
        } else if constexpr (std::is_same_v<S, HalfspacePolytope>) {
          return detail::polytope_contains(s, p, kGeomTol);
        } else if constexpr (std::is_same_v<S, Polygon2D>) {
          return detail::polygon_strictly_inside(s, p) ||
                 detail::polygon_boundary_distance(s, p) <= kGeomTol;
        } else {
          return false;
        }
      },
      region.shape());
}

/// True iff the closed segment [p, q] meets K. Exact up to kGeomTol.
inline bool segment_intersects(const DarningRegion& region, const Point& p,
                               const Point& q) {
  detail::check_dim(region, p);
  detail::check_dim(region, q);
  if (p == q) throw GeometryError("degenerate segment: p == q");
  if (region.is_empty()) return false;
  if (contains(region, p) || contains(region, q)) return true;

  // Cheap reject against the bounding box.
  const Bounds& b = region.bounds();
  for (int i = 0; i < p.dim(); ++i) {
    if (std::max(p[i], q[i]) < b.lo[i] - kGeomTol ||
        std::min(p[i], q[i]) > b.hi[i] + kGeomTol) {
      return false;
    }
  }

  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          const Point d = detail::sub(q, p);
          const double t = std::clamp(
              -detail::dot(detail::sub(p, s.center), d) / detail::dot(d, d), 0.0,
              1.0);
          return detail::distance(detail::lerp(p, q, t), s.center) <=
                 s.radius + kGeomTol;
        } else if constexpr (std::is_same_v<S, AxisBox>) {
          double t0 = 0.0;
          double t1 = 1.0;
          for (int i = 0; i < p.dim(); ++i) {
            const double lo = s.lo[i] - kGeomTol;
            const double hi = s.hi[i] + kGeomTol;
            const double dir = q[i] - p[i];
            if (dir == 0.0) {
              if (p[i] < lo || p[i] > hi) return false;
              continue;
            }
            double ta = (lo - p[i]) / dir;
            double tb = (hi - p[i]) / dir;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<S, HalfspacePolytope>) {
          double t0 = 0.0;
          double t1 = 1.0;
          for (const auto& f : s.faces) {
            const double a = detail::dot(f.normal, p) - f.offset - kGeomTol;
            const double slope = detail::dot(f.normal, detail::sub(q, p));
            // a + slope * t <= 0
            if (slope == 0.0) {
              if (a > 0.0) return false;
              continue;
            }
            const double root = -a / slope;
            if (slope > 0.0) {
              t1 = std::min(t1, root);
            } else {
              t0 = std::max(t0, root);
            }
            if (t0 > t1) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<S, Polygon2D>) {
          const auto& v = s.vertices;
          for (std::size_t i = 0, k = v.size() - 1; i < v.size(); k = i++) {
            if (detail::segment_segment_distance_2d(p, q, v[k], v[i]) <= kGeomTol) {
              return true;
            }
          }
          return false;
        } else {
          return false;
        }
      },
      region.shape());
}

/// Euclidean distance from p to K; zero iff contains(region, p).
inline double distance_to(const DarningRegion& region, const Point& p) {
  detail::check_dim(region, p);
  if (region.is_empty()) return std::numeric_limits<double>::infinity();
  if (contains(region, p)) return 0.0;
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          return detail::distance(p, s.center) - s.radius;
        } else if constexpr (std::is_same_v<S, AxisBox>) {
          double acc = 0.0;
          for (int i = 0; i < p.dim(); ++i) {
            const double e = std::max({s.lo[i] - p[i], 0.0, p[i] - s.hi[i]});
            acc += e * e;
          }
          return std::sqrt(acc);
        } else if constexpr (std::is_same_v<S, HalfspacePolytope>) {
          // The projection onto a convex polytope is the projection onto the
          // affine hull of the face containing it, so the minimum over all
          // feasible affine-hull projections is exact.
          const std::size_t d = static_cast<std::size_t>(p.dim());
          const std::size_t m = s.faces.size();
          double best = std::numeric_limits<double>::infinity();
          std::vector<double> gram;
          std::vector<double> rhs;
          std::vector<double> lambda;
          for (std::size_t k = 1; k <= std::min(d, m); ++k) {
            detail::for_each_subset(m, k, [&](std::span<const std::size_t> idx) {
              gram.assign(k * k, 0.0);
              rhs.assign(k, 0.0);
              for (std::size_t a = 0; a < k; ++a) {
                const auto& fa = s.faces[idx[a]];
                rhs[a] = detail::dot(fa.normal, p) - fa.offset;
                for (std::size_t b2 = 0; b2 < k; ++b2) {
                  gram[a * k + b2] = detail::dot(fa.normal, s.faces[idx[b2]].normal);
                }
              }
              if (!detail::solve_small(gram, rhs, k, lambda)) return;
              Point x = p;
              for (std::size_t a = 0; a < k; ++a) {
                const auto& fa = s.faces[idx[a]];
                for (int i = 0; i < p.dim(); ++i) x[i] -= lambda[a] * fa.normal[i];
              }
              if (detail::polytope_contains(s, x, 1e-9)) {
                best = std::min(best, detail::distance(p, x));
              }
            });
          }
          return best;
        } else if constexpr (std::is_same_v<S, Polygon2D>) {
          return detail::polygon_boundary_distance(s, p);
        } else {
          return std::numeric_limits<double>::infinity();
        }
      },
      region.shape());
}

/// Half-side k0 of the smallest integer cube [-k0, k0]^d holding K and x0.
struct Extent {
  int k0 = 1;
};

inline Extent extent(const DarningRegion& region, const Point& x0) {
  detail::check_dim(region, x0);
  double r = 0.0;
  for (int i = 0; i < x0.dim(); ++i) r = std::max(r, std::abs(x0[i]));
  if (!region.is_empty()) {
    const Bounds& b = region.bounds();
    for (int i = 0; i < region.dim(); ++i) {
      r = std::max({r, std::abs(b.lo[i]), std::abs(b.hi[i])});
    }
  }
  return Extent{std::max(1, static_cast<int>(std::ceil(r - kGeomTol)))};
}

/// max over q in K of |q - p|; -infinity for the empty region.
inline double farthest_distance(const DarningRegion& region, const Point& p) {
  detail::check_dim(region, p);
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          return detail::distance(s.center, p) + s.radius;
        } else if constexpr (std::is_same_v<S, AxisBox>) {
          double sum = 0.0;
          for (int i = 0; i < p.dim(); ++i) {
            const double e = std::max(std::abs(s.lo[i] - p[i]), std::abs(s.hi[i] - p[i]));
            sum += e * e;
          }
          return std::sqrt(sum);
        } else if constexpr (std::is_same_v<S, HalfspacePolytope>) {
          double r = 0.0;
          for (const Point& v : region.polytope_vertices()) r = std::max(r, detail::distance(v, p));
          return r;
        } else if constexpr (std::is_same_v<S, Polygon2D>) {
          double r = 0.0;
          for (const Point& v : s.vertices) r = std::max(r, detail::distance(v, p));
          return r;
        } else {
          return -std::numeric_limits<double>::infinity();
        }
      },
      region.shape());
}

// ---------------------------------------------------------------------------
// Construction and validation.

inline std::string DarningRegion::kind() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, AxisBox>) return "box";
        else if constexpr (std::is_same_v<S, Ball>) return "ball";
        else if constexpr (std::is_same_v<S, HalfspacePolytope>) return "polytope";
        else if constexpr (std::is_same_v<S, Polygon2D>) return "polygon";
        else return "empty";
      },
      shape_);
}

inline DarningRegion DarningRegion::box(Point lo, Point hi) {
  if (lo.dim() != hi.dim()) throw GeometryError("box: lo/hi dimension mismatch");
  if (lo.dim() < 2) throw GeometryError("box: dimension must be >= 2");
  if (!lo.is_finite() || !hi.is_finite()) throw GeometryError("box: non-finite bound");
  for (int i = 0; i < lo.dim(); ++i) {
    if (!(lo[i] < hi[i])) throw GeometryError("box: need lo < hi on every axis");
  }
  DarningRegion r(AxisBox{lo, hi}, lo.dim());
  r.bounds_ = Bounds{lo, hi};
  return r;
}

inline DarningRegion DarningRegion::ball(Point center, double radius) {
  if (center.dim() < 2) throw GeometryError("ball: dimension must be >= 2");
  if (!center.is_finite() || !std::isfinite(radius)) {
    throw GeometryError("ball: non-finite parameters");
  }
  if (!(radius > 0.0)) throw GeometryError("ball: radius must be positive");
  DarningRegion r(Ball{center, radius}, center.dim());
  Point lo(center.dim());
  Point hi(center.dim());
  for (int i = 0; i < center.dim(); ++i) {
    lo[i] = center[i] - radius;
    hi[i] = center[i] + radius;
  }
  r.bounds_ = Bounds{lo, hi};
  return r;
}

inline DarningRegion DarningRegion::polytope(std::vector<Halfspace> faces) {
  if (faces.empty()) throw GeometryError("polytope: no faces");
  const int dim = faces.front().normal.dim();
  if (dim < 2) throw GeometryError("polytope: dimension must be >= 2");
  const auto d = static_cast<std::size_t>(dim);
  for (auto& f : faces) {
    if (f.normal.dim() != dim) throw GeometryError("polytope: mixed dimensions");
    if (!f.normal.is_finite() || !std::isfinite(f.offset)) {
      throw GeometryError("polytope: non-finite face");
    }
    const double n = detail::norm(f.normal);
    if (n == 0.0) throw GeometryError("polytope: zero normal");
    for (int i = 0; i < dim; ++i) f.normal[i] /= n;
    f.offset /= n;
  }
  const std::size_t m = faces.size();
  if (m < d + 1) throw GeometryError("polytope: unbounded (fewer than d+1 faces)");

  // Normals must span R^d, otherwise the recession cone contains a line.
  bool spans = false;
  detail::for_each_subset(m, d, [&](std::span<const std::size_t> idx) {
    if (spans) return;
    std::vector<double> a(d * d);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r * d + c] = faces[idx[r]].normal[static_cast<int>(c)];
    }
    if (std::abs(detail::determinant(a, d)) > 1e-12) spans = true;
  });
  if (!spans) throw GeometryError("polytope: unbounded (normals do not span R^d)");

  // Pointed cone: nontrivial iff some extreme ray, i.e. the kernel of d-1
  // normals, satisfies every constraint.
  detail::for_each_subset(m, d - 1, [&](std::span<const std::size_t> idx) {
    Point ray(dim);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> minor;
      for (std::size_t r = 0; r < d - 1; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          if (c != k) minor.push_back(faces[idx[r]].normal[static_cast<int>(c)]);
        }
      }
      const double cof = detail::determinant(minor, d - 1);
      ray[static_cast<int>(k)] = (k % 2 == 0) ? cof : -cof;
    }
    const double len = detail::norm(ray);
    if (len < 1e-12) return;
    for (double sign : {1.0, -1.0}) {
      bool feasible = true;
      for (const auto& f : faces) {
        if (sign * detail::dot(f.normal, ray) > 1e-12 * len) {
          feasible = false;
          break;
        }
      }
      if (feasible) throw GeometryError("polytope: unbounded recession direction");
    }
  });

  HalfspacePolytope poly{faces};
  std::vector<Point> verts;
  detail::for_each_subset(m, d, [&](std::span<const std::size_t> idx) {
    std::vector<double> a(d * d);
    std::vector<double> b(d);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r * d + c] = faces[idx[r]].normal[static_cast<int>(c)];
      b[r] = faces[idx[r]].offset;
    }
    std::vector<double> x;
    if (!detail::solve_small(a, b, d, x)) return;
    Point v(dim);
    for (std::size_t c = 0; c < d; ++c) v[static_cast<int>(c)] = x[c];
    if (detail::polytope_contains(poly, v, 1e-9)) verts.push_back(v);
  });
  if (verts.empty()) throw GeometryError("polytope: empty");
  Point centroid(dim);
  for (const auto& v : verts) {
    for (int i = 0; i < dim; ++i) centroid[i] += v[i] / static_cast<double>(verts.size());
  }
  for (const auto& f : faces) {
    if (detail::dot(f.normal, centroid) > f.offset - 1e-9) {
      throw GeometryError("polytope: empty interior");
    }
  }
  DarningRegion r(poly, dim);
  Point lo = verts.front();
  Point hi = verts.front();
  for (const auto& v : verts) {
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  r.bounds_ = Bounds{lo, hi};
  r.vertices_ = std::move(verts);
  return r;
}

inline DarningRegion DarningRegion::polygon(std::vector<Point> vertices) {
  // Drop an explicit closing vertex.
  if (vertices.size() >= 2 && vertices.front() == vertices.back()) vertices.pop_back();
  if (vertices.size() < 3) throw GeometryError("polygon: need at least 3 vertices");
  for (const auto& v : vertices) {
    if (v.dim() != 2) throw GeometryError("polygon: vertices must be 2-D");
    if (!v.is_finite()) throw GeometryError("polygon: non-finite vertex");
  }
  const std::size_t n = vertices.size();
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % n];
    if (a == b) throw GeometryError("polygon: repeated consecutive vertex");
    area2 += a[0] * b[1] - a[1] * b[0];
  }
  if (std::abs(area2) < 1e-12) throw GeometryError("polygon: zero area");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const bool adjacent = (k == i + 1) || (i == 0 && k == n - 1);
      if (adjacent) continue;
      if (detail::segment_segment_distance_2d(vertices[i], vertices[(i + 1) % n],
                                              vertices[k], vertices[(k + 1) % n]) <=
          kGeomTol) {
        throw GeometryError("polygon: not simple (edges " + std::to_string(i) +
                            " and " + std::to_string(k) + " meet)");
      }
    }
  }
  Point lo = vertices.front();
  Point hi = vertices.front();
  for (const auto& v : vertices) {
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  DarningRegion r(Polygon2D{std::move(vertices)}, 2);
  r.bounds_ = Bounds{lo, hi};
  return r;
}

inline DarningRegion DarningRegion::empty(int dim) {
  if (dim < 2 || dim > kMaxDim) throw GeometryError("empty region: bad dimension");
  DarningRegion r(EmptyRegion{}, dim);
  r.bounds_ = Bounds{Point(dim), Point(dim)};
  return r;
}

}  // namespace darnwalk

#endif  // DARNWALK_GEOMETRY_HPP_
