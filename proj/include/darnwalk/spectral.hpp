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

#ifndef DARNWALK_SPECTRAL_HPP_
#define DARNWALK_SPECTRAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "darnwalk/geometry.hpp"
#include "darnwalk/lattice.hpp"
#include "darnwalk/parallel.hpp"
#include "darnwalk/rng.hpp"

namespace darnwalk {

using VertexFunction = std::vector<double>;

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Test functions with closed-form Laplacians.

/// f(x) = |x|^2.
struct Quadratic {};

/// Radial bump around `center`: equal to `plateau` for r <= inner, zero for
/// r >= outer, plateau * (1 - S(u)) in between with u = (r - inner) /
/// (outer - inner) and S(u) = u^4 (35 - 84u + 70u^2 - 20u^3). S has three
/// vanishing derivatives at both ends, so f is C^3.
struct SmoothBump {
  Point center;
  double inner = 0.5;
  double outer = 1.5;
  double plateau = 1.0;
};

/// f(x) = prod_i x_i^{powers[i]}, total degree at most 3.
struct CoordinatePoly {
  std::array<int, kMaxDim> powers{};
};

class TestFunction {
 public:
  using Kind = std::variant<Quadratic, SmoothBump, CoordinatePoly>;

  static TestFunction quadratic(int dim) { return TestFunction(Quadratic{}, dim); }

  static TestFunction bump(Point center, double inner, double outer, double plateau = 1.0) {
    if (!(inner > 0.0) || !(outer > inner)) {
      throw std::invalid_argument("bump: need 0 < inner < outer");
    }
    const int d = center.dim();
    return TestFunction(SmoothBump{std::move(center), inner, outer, plateau}, d);
  }

  static TestFunction poly(int dim, std::span<const int> powers) {
    if (static_cast<int>(powers.size()) != dim) throw std::invalid_argument("poly: one power per axis");
    CoordinatePoly p;
    int total = 0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
      if (powers[i] < 0) throw std::invalid_argument("poly: negative power");
      p.powers[i] = powers[i];
      total += powers[i];
    }
    if (total > 3) throw std::invalid_argument("poly: total degree must be at most 3");
    return TestFunction(p, dim);
  }

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }

  std::string name() const {
    if (std::holds_alternative<Quadratic>(kind_)) return "quadratic";
    if (std::holds_alternative<SmoothBump>(kind_)) return "bump";
    return "poly";
  }

  double value(const Point& x) const {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Quadratic>) {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i) s += x[i] * x[i];
            return s;
          } else if constexpr (std::is_same_v<F, SmoothBump>) {
            const double r = detail::distance(x, f.center);
            if (r <= f.inner) return f.plateau;
            if (r >= f.outer) return 0.0;
            return f.plateau * (1.0 - smoothstep((r - f.inner) / (f.outer - f.inner)));
          } else {
            double v = 1.0;
            for (int i = 0; i < dim_; ++i) v *= std::pow(x[i], f.powers[static_cast<std::size_t>(i)]);
            return v;
          }
        },
        kind_);
  }

  /// Exact Laplacian.
  double laplacian(const Point& x) const {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Quadratic>) {
            return 2.0 * dim_;
          } else if constexpr (std::is_same_v<F, SmoothBump>) {
            const double r = detail::distance(x, f.center);
            if (r <= f.inner || r >= f.outer) return 0.0;
            const double w = f.outer - f.inner;
            const double u = (r - f.inner) / w;
            const double d1 = -f.plateau * 140.0 * std::pow(u * (1.0 - u), 3) / w;
            const double d2 = -f.plateau * 420.0 * u * u * (1.0 - u) * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
            return d2 + (dim_ - 1) * d1 / r;
          } else {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i) {
              const int a = f.powers[static_cast<std::size_t>(i)];
              if (a < 2) continue;
              double term = a * (a - 1) * std::pow(x[i], a - 2);
              for (int k = 0; k < dim_; ++k) {
                if (k != i) term *= std::pow(x[k], f.powers[static_cast<std::size_t>(k)]);
              }
              s += term;
            }
            return s;
          }
        },
        kind_);
  }

  /// Membership in the class G: constant on a neighbourhood of K.
  bool class_g(const DarningRegion& region) const {
    if (const auto* b = std::get_if<SmoothBump>(&kind_)) {
      if (region.is_empty()) return true;
      return farthest_distance(region, b->center) < b->inner;
    }
    if (const auto* p = std::get_if<CoordinatePoly>(&kind_)) {
      for (int a : p->powers) {
        if (a != 0) return false;
      }
      return true;
    }
    return false;
  }

  static double smoothstep(double u) {
    const double u2 = u * u;
    return u2 * u2 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u2 * u);
  }

 private:
  TestFunction(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("test function dimension out of range");
  }

  Kind kind_;
  int dim_;
};

/// Samples f on the graph. The star takes the value of f on K for class-G
/// functions, and the mean of f over K_j otherwise (the value at the centre
/// of K's bounding box when K_j is empty).
inline VertexFunction evaluate(const DarnedLattice& g, const TestFunction& f) {
  if (f.dim() != g.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  VertexFunction out(g.num_vertices(), 0.0);
  for (VertexId v = 0; v < g.num_regular(); ++v) out[v] = f.value(g.position(v));
  if (const auto star = g.star()) {
    const auto d = static_cast<std::size_t>(g.dim());
    const auto kp = g.region_points();
    const std::size_t nk = g.num_region_points();
    const std::size_t used = f.class_g(g.region()) ? std::min<std::size_t>(nk, 1) : nk;
    double s = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
      s += f.value(detail::lattice_point(kp.subspan(i * d, d), g.level()));
    }
    if (used) {
      out[*star] = s / static_cast<double>(used);
    } else {
      const Bounds& b = g.region().bounds();
      Point mid(g.dim());
      for (int i = 0; i < g.dim(); ++i) mid[i] = 0.5 * (b.lo[i] + b.hi[i]);
      out[*star] = f.value(mid);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet form and generator.

/// E^j(f, f) = 2^{-(d-2)j} / (4d) * sum over oriented edges (f(x) - f(y))^2.
inline double dirichlet_energy(const DarnedLattice& g, std::span<const double> f) {
  if (f.size() != g.num_vertices()) throw std::invalid_argument("dirichlet_energy: size mismatch");
  double s = 0.0;
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    for (VertexId y : g.neighbors(x)) {
      const double diff = f[x] - f[y];
      s += diff * diff;
    }
  }
  return std::ldexp(1.0, -(g.dim() - 2) * g.level()) / (4.0 * g.dim()) * s;
}

/// <f, h> in L^2(m_j).
inline double inner_product(const DarnedLattice& g, std::span<const double> f,
                            std::span<const double> h) {
  double s = 0.0;
  for (VertexId x = 0; x < g.num_vertices(); ++x) s += g.measure(x) * f[x] * h[x];
  return s;
}

/// L^j f(x) = 2^{2j} sum_{y ~ x} (f(y) - f(x)) / v_j(x), at every vertex.
inline VertexFunction generator_apply(const DarnedLattice& g, std::span<const double> f) {
  if (f.size() != g.num_vertices()) throw std::invalid_argument("generator_apply: size mismatch");
  const double rate = g.paper_rate();
  VertexFunction out(g.num_vertices(), 0.0);
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    const auto nb = g.neighbors(x);
    double s = 0.0;
    for (VertexId y : nb) s += f[y] - f[x];
    out[x] = nb.empty() ? 0.0 : rate * s / static_cast<double>(nb.size());
  }
  return out;
}

/// L^j f(a*) from the star-adjacent regular vertices, found by scanning
/// their adjacency rather than the star's own list.
inline double generator_at_star(const DarnedLattice& g, std::span<const double> f) {
  const auto star = g.star();
  if (!star) throw SpectralError("generator_at_star: graph has no star");
  double s = 0.0;
  std::uint64_t count = 0;
  for (VertexId x = 0; x < g.num_regular(); ++x) {
    const auto nb = g.neighbors(x);
    if (!nb.empty() && nb.back() == *star) {
      s += f[x] - f[*star];
      ++count;
    }
  }
  if (count == 0) throw SpectralError("generator_at_star: star has no neighbours");
  return g.paper_rate() * s / static_cast<double>(count);
}

struct GeneratorLevel {
  int level = 0;
  /// max over S^j of |L^j f - (1/2d) Laplacian f|.
  double max_interior_error = 0.0;
  /// max over E^j of L^j f, and its parts.
  double max_value = -std::numeric_limits<double>::infinity();
  VertexId argmax = 0;
  double star_value = 0.0;
  double max_star_adjacent = -std::numeric_limits<double>::infinity();
  double max_interior = -std::numeric_limits<double>::infinity();
  double max_other = -std::numeric_limits<double>::infinity();
};

/// Generator of f on one level, compared with (1/2d) Laplacian f on S^j.
inline GeneratorLevel generator_level(const DarnedLattice& g, const TestFunction& f) {
  const VertexFunction fv = evaluate(g, f);
  const VertexFunction lf = generator_apply(g, fv);
  GeneratorLevel out;
  out.level = g.level();
  const auto star = g.star();
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    if (lf[x] > out.max_value) {
      out.max_value = lf[x];
      out.argmax = x;
    }
    if (g.is_star(x)) {
      out.star_value = lf[x];
      continue;
    }
    const auto nb = g.neighbors(x);
    if (star && !nb.empty() && nb.back() == *star) {
      out.max_star_adjacent = std::max(out.max_star_adjacent, lf[x]);
    } else if (in_interior(g, x)) {
      out.max_interior = std::max(out.max_interior, lf[x]);
    } else {
      out.max_other = std::max(out.max_other, lf[x]);
    }
    if (in_interior(g, x)) {
      const double target = f.laplacian(g.position(x)) / (2.0 * g.dim());
      out.max_interior_error = std::max(out.max_interior_error, std::abs(lf[x] - target));
    }
  }
  return out;
}

/// Generator bound for a class-G function; rejects functions that are not
/// constant near K.
inline GeneratorLevel generator_bound_check(const DarnedLattice& g, const TestFunction& f) {
  if (!f.class_g(g.region())) {
    throw SpectralError("generator_bound_check: " + f.name() +
                        " is not constant on a neighbourhood of K");
  }
  return generator_level(g, f);
}

// ---------------------------------------------------------------------------
// Heat kernel by uniformization.

struct HeatKernelOptions {
  double tail = 1e-12;
  std::size_t max_terms = 4000000;
  double rate = 0.0;  // 0 selects lambda_j = 2^{2j}
};

namespace detail {

inline double log_poisson(std::size_t n, double mu) {
  if (mu <= 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mu + static_cast<double>(n) * std::log(mu) - std::lgamma(static_cast<double>(n) + 1.0);
}

// Smallest N with n > mu and sum_{m > N} w_m < tol, using
// sum_{m > N} w_m <= w_{N+1} (N + 2) / (N + 2 - mu).
inline std::size_t poisson_terms(double mu, double tol, std::size_t cap) {
  auto n = static_cast<std::size_t>(std::floor(mu));
  while (true) {
    if (n > cap) {
      throw SpectralError("heat kernel: truncation order exceeds max_terms=" + std::to_string(cap) +
                          " (lambda*t=" + std::to_string(mu) + "); raise the cap or lower t");
    }
    const auto n2 = static_cast<double>(n + 2);
    if (n2 > mu) {
      const double bound = std::exp(log_poisson(n + 1, mu)) * n2 / (n2 - mu);
      if (bound < tol) return n;
    }
    ++n;
  }
}

inline double rate_of(const DarnedLattice& g, const HeatKernelOptions& opts) {
  return opts.rate > 0.0 ? opts.rate : g.paper_rate();
}

// Propagates the indicator rows of a block of sources under the jump chain:
// v_{n+1}(y) = sum_{x ~ y} v_n(x) / v_j(x). visit(n, v) sees the block in
// vertex-major layout v[y * B + b].
template <class Visit>
void propagate_rows(const DarnedLattice& g, std::span<const VertexId> src, std::size_t n_max,
                    Visit&& visit) {
  const std::size_t nv = g.num_vertices();
  const std::size_t nb = src.size();
  std::vector<double> inv(nv, 0.0);
  for (VertexId x = 0; x < nv; ++x) inv[x] = g.degree(x) ? 1.0 / g.degree(x) : 0.0;
  std::vector<double> cur(nv * nb, 0.0);
  std::vector<double> nxt(nv * nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) cur[src[b] * nb + b] = 1.0;
  std::vector<double> acc(nb);
  for (std::size_t n = 0;; ++n) {
    visit(n, std::span<const double>(cur));
    if (n == n_max) break;
    for (VertexId y = 0; y < nv; ++y) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (VertexId x : g.neighbors(y)) {
        const double w = inv[x];
        const double* row = cur.data() + static_cast<std::size_t>(x) * nb;
        for (std::size_t b = 0; b < nb; ++b) acc[b] += row[b] * w;
      }
      std::copy(acc.begin(), acc.end(), nxt.begin() + static_cast<std::ptrdiff_t>(y * nb));
    }
    cur.swap(nxt);
  }
}

inline constexpr std::size_t kSourceBlock = 8;
inline constexpr double kNegligibleWeight = 1e-30;

inline void check_times(std::span<const double> times) {
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("heat kernel: times must be positive");
  }
}

inline void check_sources(const DarnedLattice& g, std::span<const VertexId> sources) {
  for (VertexId s : sources) {
    if (s >= g.num_vertices()) throw std::out_of_range("heat kernel: invalid source vertex");
  }
}

}  // namespace detail

/// Rows P_t(x, .) for a set of sources at one time.
struct KernelRows {
  double t = 0.0;
  std::vector<VertexId> sources;
  std::size_t num_vertices = 0;
  std::vector<double> prob;  // P_t(sources[i], y) at i * num_vertices + y

  std::span<const double> row(std::size_t i) const {
    return {prob.data() + i * num_vertices, num_vertices};
  }
  /// p_j(t, x, y) = P_t(x, y) / m_j(y).
  double density(const DarnedLattice& g, std::size_t i, VertexId y) const {
    return prob[i * num_vertices + y] / g.measure(y);
  }
};

/// P_t rows for every time in `times`, one uniformization pass per source
/// block.
inline std::vector<KernelRows> heat_kernel(const DarnedLattice& g, std::span<const double> times,
                                           std::span<const VertexId> sources,
                                           const HeatKernelOptions& opts = {}) {
  detail::check_times(times);
  detail::check_sources(g, sources);
  const double rate = detail::rate_of(g, opts);
  const std::size_t nv = g.num_vertices();
  std::vector<KernelRows> out(times.size());
  std::size_t n_max = 0;
  std::vector<std::size_t> terms(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    out[k].t = times[k];
    out[k].sources.assign(sources.begin(), sources.end());
    out[k].num_vertices = nv;
    out[k].prob.assign(sources.size() * nv, 0.0);
    terms[k] = detail::poisson_terms(rate * times[k], opts.tail, opts.max_terms);
    n_max = std::max(n_max, terms[k]);
  }
  const std::size_t blocks = (sources.size() + detail::kSourceBlock - 1) / detail::kSourceBlock;
  parallel_items(blocks, [&](std::size_t blk) {
    const std::size_t first = blk * detail::kSourceBlock;
    const std::size_t nb = std::min(detail::kSourceBlock, sources.size() - first);
    detail::propagate_rows(g, sources.subspan(first, nb), n_max,
                           [&](std::size_t n, std::span<const double> v) {
                             for (std::size_t k = 0; k < times.size(); ++k) {
                               if (n > terms[k]) continue;
                               const double w = std::exp(detail::log_poisson(n, rate * times[k]));
                               if (w < detail::kNegligibleWeight) continue;
                               double* dst = out[k].prob.data() + first * nv;
                               for (std::size_t b = 0; b < nb; ++b) {
                                 for (VertexId y = 0; y < nv; ++y) {
                                   dst[b * nv + y] += w * v[y * nb + b];
                                 }
                               }
                             }
                           });
  });
  return out;
}

/// P_t(x, x) for each time and source: diag[k][i].
inline std::vector<std::vector<double>> heat_kernel_diagonal(const DarnedLattice& g,
                                                             std::span<const double> times,
                                                             std::span<const VertexId> sources,
                                                             const HeatKernelOptions& opts = {}) {
  detail::check_times(times);
  detail::check_sources(g, sources);
  const double rate = detail::rate_of(g, opts);
  std::vector<std::vector<double>> diag(times.size(), std::vector<double>(sources.size(), 0.0));
  std::size_t n_max = 0;
  std::vector<std::size_t> terms(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    terms[k] = detail::poisson_terms(rate * times[k], opts.tail, opts.max_terms);
    n_max = std::max(n_max, terms[k]);
  }
  const std::size_t blocks = (sources.size() + detail::kSourceBlock - 1) / detail::kSourceBlock;
  parallel_items(blocks, [&](std::size_t blk) {
    const std::size_t first = blk * detail::kSourceBlock;
    const std::size_t nb = std::min(detail::kSourceBlock, sources.size() - first);
    const auto src = sources.subspan(first, nb);
    detail::propagate_rows(g, src, n_max, [&](std::size_t n, std::span<const double> v) {
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (n > terms[k]) continue;
        const double w = std::exp(detail::log_poisson(n, rate * times[k]));
        if (w < detail::kNegligibleWeight) continue;
        for (std::size_t b = 0; b < nb; ++b) diag[k][first + b] += w * v[src[b] * nb + b];
      }
    });
  });
  return diag;
}

/// (P_t f)(x) = E^x f(X_t).
inline VertexFunction semigroup_apply(const DarnedLattice& g, double t, std::span<const double> f,
                                      const HeatKernelOptions& opts = {}) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
  if (f.size() != g.num_vertices()) throw std::invalid_argument("semigroup_apply: size mismatch");
  const double mu = detail::rate_of(g, opts) * t;
  const std::size_t n_max = detail::poisson_terms(mu, opts.tail, opts.max_terms);
  const std::size_t nv = g.num_vertices();
  VertexFunction cur(f.begin(), f.end());
  VertexFunction nxt(nv);
  VertexFunction out(nv, 0.0);
  for (std::size_t n = 0;; ++n) {
    const double w = std::exp(detail::log_poisson(n, mu));
    if (w >= detail::kNegligibleWeight) {
      for (VertexId x = 0; x < nv; ++x) out[x] += w * cur[x];
    }
    if (n == n_max) break;
    for (VertexId x = 0; x < nv; ++x) {
      const auto nb = g.neighbors(x);
      double s = 0.0;
      for (VertexId y : nb) s += cur[y];
      nxt[x] = nb.empty() ? cur[x] : s / static_cast<double>(nb.size());
    }
    cur.swap(nxt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Heat kernel bound checks.

/// Sources where the on-diagonal density peaks: small-degree vertices (window
/// corners and their neighbourhoods, face midpoints), the star and its
/// neighbours, plus a coarse grid of S^j with spacing 1/2.
inline std::vector<VertexId> diagonal_candidates(const DarnedLattice& g) {
  const int d = g.dim();
  const std::int32_t n = g.half_width();
  std::vector<std::uint8_t> pick(g.num_vertices(), 0);
  const std::int32_t coarse = std::max<std::int32_t>(1, static_cast<std::int32_t>(std::ldexp(0.5, g.level())));
  for (VertexId v = 0; v < g.num_regular(); ++v) {
    const auto x = g.coords(v);
    int near_corner = 0;
    bool on_grid = true;
    int face_mid = 0;
    for (auto xi : x) {
      if (n - std::abs(xi) <= 2) ++near_corner;
      if (xi % coarse != 0) on_grid = false;
      if (std::abs(xi) == n || xi == 0) ++face_mid;
    }
    if (near_corner == d || on_grid) pick[v] = 1;
    if (face_mid == d && g.on_window_face(v)) pick[v] = 1;
  }
  if (const auto star = g.star()) {
    pick[*star] = 1;
    for (VertexId y : g.neighbors(*star)) pick[y] = 1;
  }
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (pick[v]) out.push_back(v);
  }
  return out;
}

struct OnDiagPoint {
  int level = 0;
  double t = 0.0;
  double value = 0.0;  // M(j, t) = max_x p_j(t, x, x) t^{d/2}
  VertexId argmax = 0;
};

/// M(j, t) over a time grid for one graph; sources default to all vertices.
inline std::vector<OnDiagPoint> ondiag_values(const DarnedLattice& g, std::span<const double> times,
                                              std::span<const VertexId> sources,
                                              const HeatKernelOptions& opts = {}) {
  const auto diag = heat_kernel_diagonal(g, times, sources, opts);
  std::vector<OnDiagPoint> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    OnDiagPoint pt{g.level(), times[k], 0.0, 0};
    const double scale = std::pow(times[k], 0.5 * g.dim());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const double v = diag[k][i] / g.measure(sources[i]) * scale;
      if (v > pt.value) {
        pt.value = v;
        pt.argmax = sources[i];
      }
    }
    out.push_back(pt);
  }
  return out;
}

struct OnDiagReport {
  std::vector<OnDiagPoint> points;
  std::vector<double> level_sup;  // sup over t per level, in input order
  double base = 0.0;              // sup over t at the first level
  double sup = 0.0;               // sup over all levels and times
  double ratio = 0.0;             // sup / base
  bool exhaustive = false;        // all vertices used as sources
};

/// On-diagonal scan over several levels. With exhaustive=false each level
/// uses diagonal_candidates().
inline OnDiagReport ondiag_bound_check(std::span<const DarnedLattice* const> graphs,
                                       std::span<const double> times, bool exhaustive,
                                       const HeatKernelOptions& opts = {}) {
  OnDiagReport rep;
  rep.exhaustive = exhaustive;
  for (const DarnedLattice* g : graphs) {
    std::vector<VertexId> src;
    if (exhaustive) {
      src.resize(g->num_vertices());
      for (VertexId v = 0; v < g->num_vertices(); ++v) src[v] = v;
    } else {
      src = diagonal_candidates(*g);
    }
    const auto pts = ondiag_values(*g, times, src, opts);
    double s = 0.0;
    for (const auto& p : pts) s = std::max(s, p.value);
    rep.level_sup.push_back(s);
    rep.points.insert(rep.points.end(), pts.begin(), pts.end());
  }
  if (!rep.level_sup.empty()) {
    rep.base = rep.level_sup.front();
    rep.sup = *std::max_element(rep.level_sup.begin(), rep.level_sup.end());
    rep.ratio = rep.base > 0.0 ? rep.sup / rep.base : 0.0;
  }
  return rep;
}

/// Off-diagonal comparison function t^{-d/2} (exp(-d^2 / 64t) + exp(-2^j d / 4)).
inline double offdiag_envelope(int dim, int level, double t, double dj) {
  return std::pow(t, -0.5 * dim) * (std::exp(-dj * dj / (64.0 * t)) + std::exp(-std::ldexp(dj, level) / 4.0));
}

struct OffDiagReport {
  int level = 0;
  double c6 = 0.0;        // max ratio p / envelope
  double near_max = 0.0;  // pairs with d_j <= 16 2^j t
  double far_max = 0.0;   // pairs with d_j > 16 2^j t
  std::size_t pairs = 0;
  VertexId x = 0;
  VertexId y = 0;
  double t = 0.0;
};

/// Empirical prefactor of the off-diagonal bound over sources x all y.
inline OffDiagReport offdiag_bound_check(const DarnedLattice& g, std::span<const double> times,
                                         std::span<const VertexId> sources,
                                         const HeatKernelOptions& opts = {}) {
  const auto rows = heat_kernel(g, times, sources, opts);
  OffDiagReport rep;
  rep.level = g.level();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const MetricTable dist = graph_distance(g, sources[i]);
    for (const auto& kr : rows) {
      const double split = std::ldexp(16.0 * kr.t, g.level());
      for (VertexId y = 0; y < g.num_vertices(); ++y) {
        const double dj = dist[y];
        const double ratio = kr.density(g, i, y) / offdiag_envelope(g.dim(), g.level(), kr.t, dj);
        ++rep.pairs;
        if (dj <= split) {
          rep.near_max = std::max(rep.near_max, ratio);
        } else {
          rep.far_max = std::max(rep.far_max, ratio);
        }
        if (ratio > rep.c6) {
          rep.c6 = ratio;
          rep.x = sources[i];
          rep.y = y;
          rep.t = kr.t;
        }
      }
    }
  }
  return rep;
}

struct NashReport {
  double c_min = std::numeric_limits<double>::infinity();
  std::vector<double> ratios;
};

/// Nash ratio E(f, f) / (|f|_2^{2+4/d} |f|_1^{-4/d}) in L^p(m_j) for random
/// nonnegative functions supported on graph balls of physical radius up to
/// max_radius around vertices within `spread` of the origin.
inline NashReport nash_check(const DarnedLattice& g, std::size_t samples, std::uint64_t seed,
                             double max_radius = 0.5, double spread = 1.0) {
  std::vector<VertexId> centers;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.is_star(v)) {
      centers.push_back(v);
      continue;
    }
    const auto c = g.coords(v);
    double r2 = 0.0;
    for (auto x : c) r2 += std::ldexp(static_cast<double>(x), -g.level()) * std::ldexp(static_cast<double>(x), -g.level());
    if (r2 <= spread * spread) centers.push_back(v);
  }
  if (centers.empty()) throw SpectralError("nash_check: no centres in range");
  const double d = g.dim();
  NashReport rep;
  std::vector<double> f(g.num_vertices(), 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    RandomStream rng(seed, s);
    const VertexId c = centers[rng.below(static_cast<std::uint32_t>(centers.size()))];
    const auto hops = static_cast<std::int32_t>(std::floor(rng.uniform() * std::ldexp(max_radius, g.level())));
    const MetricTable dist = graph_distance(g, c);
    std::fill(f.begin(), f.end(), 0.0);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      if (dist.hops[v] >= 0 && dist.hops[v] <= hops) f[v] = rng.uniform();
    }
    double l1 = 0.0;
    double l2 = 0.0;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      l1 += g.measure(v) * std::abs(f[v]);
      l2 += g.measure(v) * f[v] * f[v];
    }
    const double energy = dirichlet_energy(g, f);
    const double denom = std::pow(l2, 1.0 + 2.0 / d) * std::pow(l1, -4.0 / d);
    const double ratio = energy / denom;
    rep.ratios.push_back(ratio);
    rep.c_min = std::min(rep.c_min, ratio);
  }
  return rep;
}

}  // namespace darnwalk

#endif  // DARNWALK_SPECTRAL_HPP_
