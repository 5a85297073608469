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
#include <set>

#include <gtest/gtest.h>

#include "darnwalk/lattice.hpp"
#include "darnwalk/rng.hpp"
#include "oracles.hpp"

namespace darnwalk {
namespace {

const DarningRegion kBall = DarningRegion::ball(Point{0.0, 0.0}, 0.25);

oracle::Key key_of(const DarnedLattice& g, VertexId v) {
  if (g.is_star(v)) return {};
  const auto c = g.coords(v);
  return oracle::Key(c.begin(), c.end());
}

void expect_matches_oracle(const DarnedLattice& g, const oracle::Graph& ref) {
  std::set<std::pair<oracle::Key, oracle::Key>> built;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    for (VertexId y : g.neighbors(v)) {
      auto a = key_of(g, v);
      auto b = key_of(g, y);
      if (b < a) std::swap(a, b);
      built.insert({a, b});
    }
  }
  EXPECT_EQ(built, ref.edges);
  EXPECT_EQ(g.num_edges(), ref.num_edges());
  ASSERT_EQ(g.num_vertices(), ref.degree.size());
  const double w = std::ldexp(1.0, -g.level() * g.dim()) / (2.0 * g.dim());
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const int deg = ref.degree.at(key_of(g, v));
    EXPECT_EQ(static_cast<int>(g.degree(v)), deg);
    EXPECT_EQ(g.measure(v), w * deg);
  }
}

TEST(BuildLattice, MatchesBruteForceBall) {
  const auto g = build_lattice(kBall, 3, 2.0);
  expect_matches_oracle(g, oracle::brute_force({true, {0.0, 0.0}, {0.25}}, 2, 3, 2.0));
}

TEST(BuildLattice, MatchesBruteForceOffCentreBox) {
  const auto k = DarningRegion::box(Point{-0.3, -0.1}, Point{0.2, 0.45});
  const auto g = build_lattice(k, 3, 2.0);
  expect_matches_oracle(g, oracle::brute_force({false, {-0.3, -0.1}, {0.2, 0.45}}, 2, 3, 2.0));
}

TEST(BuildLattice, MatchesBruteForce3d) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0, 0.0}, 0.3);
  const auto g = build_lattice(k, 2, 2.0);
  expect_matches_oracle(g, oracle::brute_force({true, {0.0, 0.0, 0.0}, {0.3}}, 3, 2, 2.0));
}

TEST(BuildLattice, HandshakeIdentity) {
  const auto g = build_lattice(kBall, 4, 2.0);
  const double w = std::ldexp(1.0, -8) / 4.0;
  EXPECT_NEAR(g.total_measure(), w * 2.0 * static_cast<double>(g.num_edges()), 1e-12);
}

TEST(BuildLattice, StarAdjacencyAtLevelOne) {
  const auto g = build_lattice(kBall, 1, 2.0);
  const auto v = g.find_point(Point{0.5, 0.0});
  ASSERT_TRUE(v);
  const auto nb = g.neighbors(*v);
  EXPECT_NE(std::find(nb.begin(), nb.end(), *g.star()), nb.end());
}

TEST(BuildLattice, InvariantsHold) {
  const auto g = build_lattice(kBall, 4, 2.0);
  const VertexId star = *g.star();
  EXPECT_GE(g.degree(star), 1u);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const auto nb = g.neighbors(v);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
    for (VertexId y : nb) {
      EXPECT_NE(y, v);
      const auto back = g.neighbors(y);
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), v));
    }
    if (!g.is_star(v)) {
      EXPECT_LE(g.degree(v), 4u);
      EXPECT_FALSE(contains(kBall, g.position(v)));
    }
  }
}

TEST(BuildLattice, FarVertexHasFullDegree) {
  const auto g = build_lattice(kBall, 3, 2.0);
  const auto v = g.find_point(Point{1.0, 1.0});
  ASSERT_TRUE(v);
  EXPECT_EQ(g.degree(*v), 4u);
  EXPECT_TRUE(interior_set(g).mask[*v]);
  EXPECT_FALSE(interior_set(g).mask[*g.star()]);
}

TEST(BuildLattice, WindowTooSmallThrows) {
  EXPECT_THROW(build_lattice(kBall, 3, 1.0), LatticeError);
  EXPECT_THROW(build_lattice(kBall, 3, 2.0 + 1.0 / 16.0), LatticeError);
}

TEST(BuildLattice, EmptyRegionIsPlainLattice) {
  const auto g = build_lattice(DarningRegion::empty(2), 2, 1.0);
  EXPECT_FALSE(g.star());
  EXPECT_EQ(g.num_vertices(), 81u);
  EXPECT_EQ(g.num_edges(), 2u * 9u * 8u);
}

TEST(BuildLattice, RefinementKeepsVertices) {
  const auto coarse = build_lattice(kBall, 3, 2.0);
  const auto fine = build_lattice(kBall, 5, 2.0);
  for (VertexId v = 0; v < coarse.num_regular(); v += 7) {
    EXPECT_TRUE(fine.find_point(coarse.position(v)));
  }
}

TEST(StarDegree, MatchesBuilder) {
  for (int j = 2; j <= 5; ++j) {
    const auto g = build_lattice(kBall, j, 2.0);
    EXPECT_EQ(count_star_degree(kBall, j).degree, g.degree(*g.star()));
  }
}

TEST(StarDegree, SlopeBallAndBox2d) {
  EXPECT_NEAR(star_degree_scaling(kBall, 3, 8).slope, 1.0, 0.3);
  const auto box = DarningRegion::box(Point{-0.25, -0.25}, Point{0.25, 0.25});
  EXPECT_NEAR(star_degree_scaling(box, 3, 8).slope, 1.0, 0.3);
  const auto s = star_degree_scaling(box, 4, 9);
  for (std::size_t i = 0; i + 1 < s.levels.size(); ++i) {
    EXPECT_LE(s.levels[i + 1].degree, 8u * s.levels[i].degree);
  }
}

TEST(StarDegree, Slope3d) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0, 0.0}, 0.25);
  EXPECT_NEAR(star_degree_scaling(k, 3, 5).slope, 2.0, 0.3);
}

TEST(GraphDistance, Basics) {
  const auto g = build_lattice(kBall, 2, 2.0);
  const VertexId x = *g.find_point(Point{0.5, 0.0});
  const VertexId y = *g.find_point(Point{-0.5, 0.0});
  const MetricTable t = graph_distance(g, x);
  EXPECT_EQ(t[x], 0.0);
  for (VertexId n : g.neighbors(x)) EXPECT_EQ(t[n], 0.25);
  // (0.5,0) -> a* -> (-0.5,0).
  EXPECT_EQ(t[y], 0.5);
}

TEST(QuotientMetric, Examples) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0}, 1.0);
  const auto g = build_lattice(k, 1, 4.0);
  const VertexId a = *g.find_point(Point{2.0, 0.0});
  const VertexId b = *g.find_point(Point{-2.0, 0.0});
  EXPECT_DOUBLE_EQ(quotient_metric(g, a, b), 2.0);
  EXPECT_EQ(quotient_metric(g, *g.star(), *g.star()), 0.0);
  EXPECT_DOUBLE_EQ(quotient_metric(g, a, *g.star()), 1.0);
}

TEST(QuotientMetric, BelowGraphDistance) {
  for (int j = 2; j <= 4; ++j) {
    const auto g = build_lattice(kBall, j, 2.0);
    RandomStream rng(3, static_cast<std::uint64_t>(j));
    for (int i = 0; i < 100; ++i) {
      const VertexId x = rng.below(static_cast<std::uint32_t>(g.num_vertices()));
      const VertexId y = rng.below(static_cast<std::uint32_t>(g.num_vertices()));
      EXPECT_LE(quotient_metric(g, x, y), graph_distance(g, x)[y] + 1e-12);
    }
  }
}

TEST(InteriorSet, ComplementMeasureHalves) {
  const double a = interior_set(build_lattice(kBall, 4, 2.0)).complement_measure;
  const double b = interior_set(build_lattice(kBall, 5, 2.0)).complement_measure;
  EXPECT_GE(b / a, 0.3);
  EXPECT_LE(b / a, 0.7);
}

}  // namespace
}  // namespace darnwalk
