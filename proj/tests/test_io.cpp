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

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "darnwalk/io.hpp"

namespace darnwalk {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "darnwalk_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string pointer_of(const json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "";
}

TEST(RegionJson, RoundTrip) {
  const std::vector<DarningRegion> regions{
      DarningRegion::ball(Point{0.1, -0.2}, 0.3),
      DarningRegion::box(Point{-0.25, 0.0, 0.0}, Point{0.25, 0.5, 0.125}),
      DarningRegion::polytope({{Point{1.0, 0.0}, 0.25}, {Point{-1.0, 0.0}, 0.25},
                               {Point{0.0, 1.0}, 0.25}, {Point{0.0, -1.0}, 0.25}}),
      DarningRegion::polygon({Point{0.0, 0.0}, Point{0.5, 0.0}, Point{0.0, 0.5}}),
      DarningRegion::empty(3)};
  for (const auto& r : regions) {
    const json j = region_to_json(r);
    const DarningRegion back = region_from_json(json::parse(j.dump()));
    EXPECT_EQ(region_to_json(back), j);
    EXPECT_EQ(back.dim(), r.dim());
  }
}

TEST(RegionJson, ErrorsCarryPointers) {
  auto ptr = [](const char* text) {
    try {
      region_from_json(json::parse(text), "/region", 2);
    } catch (const ConfigError& e) {
      return e.pointer();
    }
    return std::string();
  };
  EXPECT_EQ(ptr(R"({"shape":"ball","center":[0,0],"radius":-1})"), "/region/radius");
  EXPECT_EQ(ptr(R"({"shape":"ball","center":[0,0,0],"radius":1})"), "/region/center");
  EXPECT_EQ(ptr(R"({"shape":"ball","radius":1})"), "/region/center");
  EXPECT_EQ(ptr(R"({"shape":"blob"})"), "/region/shape");
  EXPECT_EQ(ptr(R"({"shape":"polytope","faces":[{"normal":[1,0]}]})"), "/region/faces/0/offset");
  EXPECT_EQ(ptr(R"({"shape":"box","lo":[1,1],"hi":[0,0]})"), "/region");
}

TEST(RunConfigJson, DefaultsAndRoundTrip) {
  const RunConfig c = parse_run_config(json::object());
  EXPECT_EQ(c.dimension, 2);
  EXPECT_EQ(c.levels, (std::vector<int>{3, 4, 5, 6}));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_TRUE(c.experiments.empty());
  const json j = run_config_to_json(c);
  EXPECT_EQ(run_config_to_json(parse_run_config(j)), j);
  EXPECT_EQ(config_hash(c), config_hash(parse_run_config(j)));
  RunConfig other = c;
  other.seed = 43;
  EXPECT_NE(config_hash(c), config_hash(other));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(RunConfigJson, RejectsWithPointers) {
  EXPECT_EQ(pointer_of(json{{"bogus", 1}}), "/bogus");
  EXPECT_EQ(pointer_of(json{{"levels", {3, 3}}}), "/levels/1");
  EXPECT_EQ(pointer_of(json{{"levels", {0}}}), "/levels/0");
  EXPECT_EQ(pointer_of(json{{"x0", {0.0, 0.0}}}), "/x0");
  EXPECT_EQ(pointer_of(json{{"x0", {0.3, 0.5}}}), "/x0/0");
  EXPECT_EQ(pointer_of(json{{"window", 1.0}}), "/window");
  EXPECT_EQ(pointer_of(json{{"window", 2.1}}), "/window");
  EXPECT_EQ(pointer_of(json{{"rate_mode", "fast"}}), "/rate_mode");
  EXPECT_EQ(pointer_of(json{{"seed", -1}}), "/seed");
  EXPECT_EQ(pointer_of(json{{"time_grid", {0.5, 0.25}}}), "/time_grid/1");
  EXPECT_EQ(pointer_of(json{{"time_grid", {2.0}}}), "/time_grid/0");
  EXPECT_EQ(pointer_of(json{{"experiments", {"graphs", "nope"}}}), "/experiments/1");
  EXPECT_EQ(pointer_of(json{{"tightness", {{"thetas", {0.0}}}}}), "/tightness/thetas/0");
  EXPECT_EQ(pointer_of(json{{"bmd", {{"extra", 1}}}}), "/bmd/extra");
  EXPECT_EQ(pointer_of(json{{"dimension", 3}}), "/region");
  EXPECT_EQ(pointer_of(json::array()), "/");
}

TEST(RunConfigJson, ThreeDimensional) {
  const json j = {{"dimension", 3},
                  {"region", {{"shape", "ball"}, {"center", {0, 0, 0}}, {"radius", 0.25}}},
                  {"x0", {0.5, 0, 0}},
                  {"window", 2.0}};
  const RunConfig c = parse_run_config(j);
  EXPECT_EQ(c.x0.dim(), 3);
}

TEST(Csv, QuotingAndNumbers) {
  EXPECT_EQ(CsvWriter::quote("plain"), "plain");
  EXPECT_EQ(CsvWriter::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvWriter::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(CsvWriter::quote("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(CsvWriter::number(0.5), "0.5");
  EXPECT_EQ(CsvWriter::number(std::numeric_limits<double>::quiet_NaN()), "");
  EXPECT_EQ(std::stod(CsvWriter::number(0.1)), 0.1);
  CsvWriter w({"a", "b"});
  w.row({"1", "x,y"});
  EXPECT_EQ(w.str(), "a,b\r\n1,\"x,y\"\r\n");
  EXPECT_THROW(w.row({"1"}), IoError);
}

TEST(GraphFile, SaveLoadRoundTrip) {
  for (const auto& region : {DarningRegion::ball(Point{0.0, 0.0}, 0.25), DarningRegion::empty(2),
                             DarningRegion::box(Point{0.0, 0.0, 0.0}, Point{0.25, 0.25, 0.25})}) {
    const auto g = build_lattice(region, 2, 2.0);
    const auto path = scratch("g.bin").string();
    save_graph(g, path);
    const auto h = load_graph(path);
    EXPECT_EQ(h.level(), g.level());
    EXPECT_EQ(h.dim(), g.dim());
    EXPECT_EQ(h.window(), g.window());
    EXPECT_EQ(h.star().has_value(), g.star().has_value());
    EXPECT_EQ(region_to_json(h.region()), region_to_json(g.region()));
    ASSERT_EQ(h.num_vertices(), g.num_vertices());
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      const auto a = g.neighbors(v);
      const auto b = h.neighbors(v);
      ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
      EXPECT_EQ(g.distance_to_region(v), h.distance_to_region(v));
    }
    EXPECT_EQ(graph_summary(h), graph_summary(g));
  }
}

TEST(GraphFile, CorruptFilesRejected) {
  const auto g = build_lattice(DarningRegion::ball(Point{0.0, 0.0}, 0.25), 2, 2.0);
  const auto path = scratch("c.bin").string();
  save_graph(g, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  write(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(load_graph(path), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  write(bad);
  EXPECT_THROW(load_graph(path), IoError);
  EXPECT_THROW(load_graph(scratch("missing.bin").string()), IoError);
}

TEST(GraphSummary, Fields) {
  const auto g = build_lattice(DarningRegion::ball(Point{0.0, 0.0}, 0.25), 3, 2.0);
  const json s = graph_summary(g);
  EXPECT_EQ(s["num_vertices"], g.num_vertices());
  EXPECT_EQ(s["star_degree"], g.degree(*g.star()));
  EXPECT_NEAR(s["m_total"].get<double>(), 2.0 * g.edge_weight() * static_cast<double>(g.num_edges()), 1e-12);
}

}  // namespace
}  // namespace darnwalk
