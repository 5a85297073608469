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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "darnwalk/dynamics.hpp"
#include "darnwalk/spectral.hpp"
#include "darnwalk/stats.hpp"

namespace darnwalk {
namespace {

const DarningRegion kBall = DarningRegion::ball(Point{0.0, 0.0}, 0.25);

WalkConfig config(std::uint64_t paths, double horizon, std::uint64_t seed = 42) {
  WalkConfig w;
  w.num_paths = paths;
  w.horizon = horizon;
  w.seed = seed;
  return w;
}

TEST(StepKernel, UniformOverNeighbours) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const auto interior = *g.find_point(Point{1.0, 1.0});
  EXPECT_DOUBLE_EQ(step_kernel(g, interior).prob, 0.25);
  const VertexId star = *g.star();
  EXPECT_DOUBLE_EQ(step_kernel(g, star).prob, 1.0 / g.degree(star));
}

TEST(DetailedBalance, ExactOnEveryEdge) {
  // m(x) q(x, y) with q = lambda / deg(x) must be symmetric.
  const auto g = build_lattice(kBall, 3, 2.0);
  const double rate = g.paper_rate();
  for (VertexId x = 0; x < g.num_vertices(); ++x) {
    for (VertexId y : g.neighbors(x)) {
      EXPECT_DOUBLE_EQ(g.measure(x) * rate / g.degree(x), g.measure(y) * rate / g.degree(y));
    }
  }
}

TEST(SamplePath, NoJumpProbability) {
  const auto g = build_lattice(kBall, 1, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const auto w = config(20000, 0.25);
  int still = 0;
  for (std::uint64_t p = 0; p < w.num_paths; ++p) {
    const auto path = sample_path(g, w, x0, p);
    ASSERT_GE(path.events.size(), 1u);
    EXPECT_EQ(path.events[0].t, 0.0);
    EXPECT_EQ(path.events[0].v, x0);
    still += path.events.size() == 1 ? 1 : 0;
  }
  const double q = std::exp(-g.paper_rate() * 0.25);
  EXPECT_NEAR(still / 20000.0, q, 4.0 * std::sqrt(q * (1 - q) / 20000.0));
}

TEST(SamplePath, MeanJumpCountIsPoisson) {
  // lambda T = 2^8 / 4 = 64.
  const auto g = build_lattice(kBall, 4, 4.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const auto w = config(10000, 0.25);
  double jumps = 0.0;
  for (std::uint64_t p = 0; p < w.num_paths; ++p) {
    const auto path = sample_path(g, w, x0, p);
    ASSERT_FALSE(path.exited_window);
    jumps += static_cast<double>(path.events.size() - 1);
  }
  EXPECT_NEAR(jumps / 10000.0, 64.0, 3.0 * 8.0 / 100.0);
}

TEST(SamplePath, DeterministicPerStream) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const auto w = config(1, 1.0);
  const auto a = sample_path(g, w, x0, 17);
  const auto b = sample_path(g, w, x0, 17);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].t, b.events[i].t);
    EXPECT_EQ(a.events[i].v, b.events[i].v);
  }
  const auto c = sample_path(g, w, x0, 18);
  EXPECT_NE(c.events.back().t, a.events.back().t);
}

TEST(SamplePath, StartAtStarIsSupported) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const auto path = sample_path(g, config(1, 0.5), *g.star(), 0);
  EXPECT_EQ(path.hit_star_time, 0.0);
}

TEST(SamplePath, BadStartThrows) {
  const auto g = build_lattice(kBall, 2, 2.0);
  EXPECT_THROW(sample_path(g, config(1, 1.0), static_cast<VertexId>(g.num_vertices()), 0),
               std::out_of_range);
}

TEST(Marginal, TimeZeroIsPointMass) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const double ts[] = {0.0};
  const auto m = marginal(g, config(1000, 1.0), x0, ts);
  EXPECT_EQ(m[0].counts[x0], 1000u);
}

TEST(Marginal, ChiSquareAgainstKernelLevelTwo) {
  const auto g = build_lattice(kBall, 2, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const double ts[] = {0.25};
  const auto m = marginal(g, config(100000, 0.25), x0, ts);
  const VertexId src[] = {x0};
  const auto rows = heat_kernel(g, ts, src);
  const auto chi = stats::chi_square_gof(m[0].counts, rows[0].row(0), 0.01);
  EXPECT_FALSE(chi.rejected) << chi.statistic << " vs " << chi.critical;
}

TEST(Marginal, IndependentRunsClose) {
  const auto g = build_lattice(kBall, 2, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const double ts[] = {0.25};
  const auto a = marginal(g, config(100000, 0.25, 1), x0, ts);
  const auto b = marginal(g, config(100000, 0.25, 2), x0, ts);
  EXPECT_LE(stats::tv_distance(a[0].counts, b[0].counts), 0.02);
}

TEST(Marginal, EscapeIsFlagged) {
  const auto g = build_lattice(kBall, 2, 2.0);
  const VertexId x0 = *g.find_point(Point{1.5, 0.0});
  const double ts[] = {4.0};
  const auto m = marginal(g, config(2000, 4.0), x0, ts, 0.01);
  EXPECT_GT(m[0].exited, 0u);
  EXPECT_TRUE(m[0].flagged);
  std::uint64_t total = m[0].exited;
  for (auto c : m[0].counts) total += c;
  EXPECT_EQ(total, 2000u);
}

TEST(Hitting, StartInTargets) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  HittingQuery q;
  q.targets.assign(g.num_vertices(), 0);
  q.targets[x0] = 1;
  const auto h = hitting_stats(g, config(100, 1.0), x0, q);
  EXPECT_EQ(h.hit.hits, 100u);
  EXPECT_EQ(h.mean_hit_time, 0.0);
}

TEST(Hitting, OutcomesPartitionPaths) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  HittingQuery q;
  q.targets.assign(g.num_vertices(), 0);
  q.targets[*g.star()] = 1;
  q.outer_radius = 1.0;
  q.center = Point{0.0, 0.0};
  q.horizon = 0.05;
  const auto h = hitting_stats(g, config(5000, 1.0), x0, q);
  EXPECT_EQ(h.hit.hits + h.outer + h.censored + h.exited, 5000u);
  EXPECT_GT(h.censored, 0u);
}

// ---------------------------------------------------------------------------
// Modulus.

// Exhaustive oracle: jump times, theta and T on a grid of spacing 1; cut
// points restricted to that grid, which is exact for such inputs.
double modulus_oracle(const std::vector<int>& jumps, const std::vector<double>& values, int horizon, int theta) {
  auto piece_at = [&](int cell) {
    int p = 0;
    while (p + 1 < static_cast<int>(jumps.size()) && jumps[static_cast<std::size_t>(p + 1)] <= cell) ++p;
    return p;
  };
  auto osc = [&](int a, int b) {  // cells [a, b)
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int c = a; c < b; ++c) {
      const double v = values[static_cast<std::size_t>(piece_at(c))];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(horizon) + 1, inf);
  best[0] = 0.0;
  for (int c = theta; c < horizon; ++c) {
    for (int p = 0; p + theta <= c; ++p) {
      if (best[static_cast<std::size_t>(p)] == inf) continue;
      best[static_cast<std::size_t>(c)] = std::min(best[static_cast<std::size_t>(c)],
                                                   std::max(best[static_cast<std::size_t>(p)], osc(p, c)));
    }
  }
  double out = inf;
  for (int p = 0; p < horizon; ++p) {
    if (best[static_cast<std::size_t>(p)] == inf) continue;
    out = std::min(out, std::max(best[static_cast<std::size_t>(p)], osc(p, horizon)));
  }
  return out;
}

TEST(Modulus, MatchesExhaustiveOracle) {
  RandomStream rng(5, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int horizon = 24;
    const int theta = 1 + static_cast<int>(rng.below(8));
    std::vector<int> jumps{0};
    for (int c = 1; c < horizon; ++c) {
      if (rng.uniform() < 0.35) jumps.push_back(c);
    }
    std::vector<double> values;
    double x = 0.0;
    for (std::size_t i = 0; i < jumps.size(); ++i) {
      values.push_back(x);
      x += static_cast<double>(static_cast<int>(rng.below(5)) - 2);
    }
    std::vector<double> s(jumps.begin(), jumps.end());
    auto dist = [&](std::size_t a, std::size_t b) { return std::abs(values[a] - values[b]); };
    const double want = modulus_oracle(jumps, values, horizon, theta);
    const double got_plain = detail::make_modulus_solver(std::span<const double>(s), horizon, dist,
                                                         std::numeric_limits<double>::infinity())
                                 .value(theta);
    const double got_skip = detail::make_modulus_solver(std::span<const double>(s), horizon, dist, 2.0).value(theta);
    EXPECT_EQ(got_plain, want) << "trial " << trial;
    EXPECT_EQ(got_skip, want) << "trial " << trial;
  }
}

TEST(Modulus, ConstantPathIsZero) {
  const auto g = build_lattice(kBall, 3, 2.0);
  WalkPath path;
  path.events.push_back({0.0, 0});
  path.horizon = 1.0;
  EXPECT_EQ(modulus(g, path, 0.1), 0.0);
  EXPECT_EQ(modulus(g, path, 2.0), 0.0);
}

TEST(Modulus, SingleJumpCanBeCut) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId a = *g.find_point(Point{0.5, 0.0});
  const VertexId b = g.neighbors(a)[0];
  WalkPath path;
  path.events = {{0.0, a}, {0.5, b}};
  path.horizon = 1.0;
  EXPECT_EQ(modulus(g, path, 0.4), 0.0);
  EXPECT_DOUBLE_EQ(modulus(g, path, 1.0), quotient_metric(g, a, b));
}

TEST(Modulus, MonotoneInTheta) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const VertexId x0 = *g.find_point(Point{0.5, 0.0});
  const auto w = config(1, 1.0);
  for (std::uint64_t p = 0; p < 20; ++p) {
    const auto path = sample_path(g, w, x0, p);
    double prev = 0.0;
    for (double th : {0.01, 0.05, 0.1, 0.3, 1.0, 2.0}) {
      const double v = modulus(g, path, th);
      EXPECT_GE(v, prev);
      EXPECT_EQ(modulus_exceeds(g, path, th, v), false);
      if (v > 0.0) {
        EXPECT_TRUE(modulus_exceeds(g, path, th, std::nextafter(v, 0.0)));
      }
      prev = v;
    }
  }
}

TEST(Diffusion, PaperRateIsOneOverD) {
  const auto g = build_lattice(kBall, 4, 2.0);
  const VertexId x0 = *g.find_point(Point{1.0, 0.0});
  auto mask = interior_set(g).mask;
  for (VertexId v = 0; v < g.num_regular(); ++v) {
    if (g.distance_to_region(v) < 0.25) mask[v] = 0;
  }
  const auto est = diffusion_rate(g, config(10000, 0.25), x0, mask);
  EXPECT_NEAR(est.rate, 0.5, 0.025);
  EXPECT_GT(est.se, 0.0);
}

}  // namespace
}  // namespace darnwalk
