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

#include <gtest/gtest.h>

#include "darnwalk/geometry.hpp"
#include "darnwalk/rng.hpp"

namespace darnwalk {
namespace {

TEST(Contains, BallCentreAndBoundary) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0}, 1.0);
  EXPECT_TRUE(contains(k, Point{0.0, 0.0}));
  EXPECT_TRUE(contains(k, Point{1.0, 0.0}));
  EXPECT_FALSE(contains(k, Point{1.0, 0.01}));
}

TEST(Contains, BoxOutside) {
  const auto k = DarningRegion::box(Point{-1.0, -1.0}, Point{1.0, 1.0});
  EXPECT_FALSE(contains(k, Point{2.0, 0.0}));
  EXPECT_TRUE(contains(k, Point{1.0, -1.0}));
}

TEST(Contains, DimensionMismatchThrows) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0}, 1.0);
  EXPECT_THROW(contains(k, Point{0.0, 0.0, 0.0}), GeometryError);
}

TEST(Contains, PolytopeAndPolygonAgreeOnTriangle) {
  // x >= 0, y >= 0, x + y <= 1 both ways.
  const auto poly = DarningRegion::polytope({{Point{-1.0, 0.0}, 0.0}, {Point{0.0, -1.0}, 0.0}, {Point{1.0, 1.0}, 1.0}});
  const auto gon = DarningRegion::polygon({Point{0.0, 0.0}, Point{1.0, 0.0}, Point{0.0, 1.0}});
  RandomStream rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    const Point p{rng.uniform() * 3.0 - 1.0, rng.uniform() * 3.0 - 1.0};
    EXPECT_EQ(contains(poly, p), contains(gon, p)) << p[0] << "," << p[1];
  }
}

TEST(SegmentIntersects, BallExamples) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0}, 0.25);
  EXPECT_FALSE(segment_intersects(k, Point{0.5, 0.0}, Point{0.5, 0.5}));
  EXPECT_TRUE(segment_intersects(k, Point{-0.5, 0.0}, Point{0.5, 0.0}));
}

TEST(SegmentIntersects, BoxFaceIsClosed) {
  const auto k = DarningRegion::box(Point{-1.0, -1.0}, Point{1.0, 1.0});
  EXPECT_TRUE(segment_intersects(k, Point{1.0, 2.0}, Point{1.0, -2.0}));
  EXPECT_FALSE(segment_intersects(k, Point{1.5, 2.0}, Point{1.5, -2.0}));
}

TEST(SegmentIntersects, DegenerateSegmentThrows) {
  const auto k = DarningRegion::ball(Point{0.0, 0.0}, 0.25);
  EXPECT_THROW(segment_intersects(k, Point{1.0, 1.0}, Point{1.0, 1.0}), GeometryError);
}

// Sampling along the segment never finds a hit the exact test missed, and a
// sampled hit is always reported.
TEST(SegmentIntersects, AgreesWithDenseSampling) {
  const auto k = DarningRegion::ball(Point{0.1, -0.2}, 0.3);
  RandomStream rng(11, 0);
  for (int i = 0; i < 500; ++i) {
    const Point p{rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
    const Point q{rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0};
    bool sampled = false;
    for (int s = 0; s <= 20000 && !sampled; ++s) {
      sampled = contains(k, Point{std::lerp(p[0], q[0], s / 20000.0), std::lerp(p[1], q[1], s / 20000.0)});
    }
    if (sampled) {
      EXPECT_TRUE(segment_intersects(k, p, q));
    }
  }
}

TEST(DistanceTo, Examples) {
  const auto ball = DarningRegion::ball(Point{0.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(distance_to(ball, Point{2.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(distance_to(ball, Point{0.5, 0.0}), 0.0);
  const auto box = DarningRegion::box(Point{-1.0, -1.0}, Point{1.0, 1.0});
  EXPECT_DOUBLE_EQ(distance_to(box, Point{2.0, 2.0}), std::sqrt(2.0));
}

TEST(Extent, Examples) {
  EXPECT_EQ(extent(DarningRegion::ball(Point{0.0, 0.0}, 0.25), Point{0.5, 0.0}).k0, 1);
  EXPECT_EQ(extent(DarningRegion::box(Point{-1.0, -1.0}, Point{1.0, 1.0}), Point{3.0, 0.0}).k0, 3);
  EXPECT_EQ(extent(DarningRegion::ball(Point{2.0, 0.0}, 1.0), Point{0.0, 0.0}).k0, 3);
}

TEST(FarthestDistance, BallAndBox) {
  EXPECT_DOUBLE_EQ(farthest_distance(DarningRegion::ball(Point{1.0, 0.0}, 0.5), Point{0.0, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(farthest_distance(DarningRegion::box(Point{-1.0, -1.0}, Point{1.0, 1.0}), Point{0.0, 0.0}),
                   std::sqrt(2.0));
}

TEST(Construction, RejectsBadShapes) {
  EXPECT_THROW(DarningRegion::ball(Point{0.0, 0.0}, 0.0), GeometryError);
  EXPECT_THROW(DarningRegion::box(Point{1.0, 0.0}, Point{0.0, 1.0}), GeometryError);
  // Two parallel halfspaces leave a slab, which is unbounded.
  EXPECT_THROW(DarningRegion::polytope({{Point{1.0, 0.0}, 1.0}, {Point{-1.0, 0.0}, 1.0}}), GeometryError);
}

}  // namespace
}  // namespace darnwalk
