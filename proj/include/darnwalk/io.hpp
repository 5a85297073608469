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

#ifndef DARNWALK_IO_HPP_
#define DARNWALK_IO_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "darnwalk/dynamics.hpp"
#include "darnwalk/geometry.hpp"
#include "darnwalk/lattice.hpp"

namespace darnwalk {

using json = nlohmann::ordered_json;

/// Invalid configuration; what() starts with the JSON pointer of the field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& pointer, const std::string& message)
      : std::invalid_argument((pointer.empty() ? std::string("/") : pointer) + ": " + message),
        pointer_(pointer.empty() ? "/" : pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(ptr + "/" + key, "missing required field");
  return *it;
}

inline double get_number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw ConfigError(ptr, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(ptr, "expected a finite number");
  return x;
}

inline std::int64_t get_integer(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::string get_string(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw ConfigError(ptr, "expected a string");
  return v.get<std::string>();
}

inline Point get_point(const json& v, const std::string& ptr, int dim = 0) {
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError(ptr, "expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
  }
  if (dim > 0 && static_cast<int>(v.size()) != dim) {
    throw ConfigError(ptr, "expected " + std::to_string(dim) + " coordinates, got " +
                               std::to_string(v.size()));
  }
  Point p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    p[static_cast<int>(i)] = get_number(v[i], ptr + "/" + std::to_string(i));
  }
  return p;
}

inline json point_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Region JSON.

/// {"shape":"ball","center":[0,0],"radius":0.25}
/// {"shape":"box","lo":[-1,-1],"hi":[1,1]}
/// {"shape":"polytope","faces":[{"normal":[1,0],"offset":1}, ...]}
/// {"shape":"polygon","vertices":[[0,0],[1,0],[0,1]]}
/// {"shape":"empty","dimension":2}   (plain lattice, debug only)
inline DarningRegion region_from_json(const json& j, const std::string& ptr = "", int dim = 0) {
  const std::string shape = detail::get_string(detail::require(j, "shape", ptr), ptr + "/shape");
  try {
    if (shape == "ball") {
      Point c = detail::get_point(detail::require(j, "center", ptr), ptr + "/center", dim);
      const double r = detail::get_number(detail::require(j, "radius", ptr), ptr + "/radius");
      if (!(r > 0.0)) throw ConfigError(ptr + "/radius", "radius must be positive");
      return DarningRegion::ball(c, r);
    }
    if (shape == "box") {
      Point lo = detail::get_point(detail::require(j, "lo", ptr), ptr + "/lo", dim);
      Point hi = detail::get_point(detail::require(j, "hi", ptr), ptr + "/hi", lo.dim());
      return DarningRegion::box(lo, hi);
    }
    if (shape == "polytope") {
      const json& faces = detail::require(j, "faces", ptr);
      if (!faces.is_array()) throw ConfigError(ptr + "/faces", "expected an array");
      std::vector<Halfspace> hs;
      for (std::size_t i = 0; i < faces.size(); ++i) {
        const std::string fp = ptr + "/faces/" + std::to_string(i);
        Halfspace h;
        h.normal = detail::get_point(detail::require(faces[i], "normal", fp), fp + "/normal", dim);
        h.offset = detail::get_number(detail::require(faces[i], "offset", fp), fp + "/offset");
        hs.push_back(h);
      }
      return DarningRegion::polytope(std::move(hs));
    }
    if (shape == "polygon") {
      const json& vs = detail::require(j, "vertices", ptr);
      if (!vs.is_array()) throw ConfigError(ptr + "/vertices", "expected an array");
      std::vector<Point> pts;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        pts.push_back(detail::get_point(vs[i], ptr + "/vertices/" + std::to_string(i), 2));
      }
      return DarningRegion::polygon(std::move(pts));
    }
    if (shape == "empty") {
      const auto d = detail::get_integer(detail::require(j, "dimension", ptr), ptr + "/dimension");
      return DarningRegion::empty(static_cast<int>(d));
    }
  } catch (const GeometryError& e) {
    throw ConfigError(ptr, e.what());
  }
  throw ConfigError(ptr + "/shape", "unknown shape '" + shape +
                                        "' (expected ball, box, polytope, polygon or empty)");
}

inline json region_to_json(const DarningRegion& region) {
  return std::visit(
      [&](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        json j;
        if constexpr (std::is_same_v<S, Ball>) {
          j["shape"] = "ball";
          j["center"] = detail::point_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<S, AxisBox>) {
          j["shape"] = "box";
          j["lo"] = detail::point_json(s.lo);
          j["hi"] = detail::point_json(s.hi);
        } else if constexpr (std::is_same_v<S, HalfspacePolytope>) {
          j["shape"] = "polytope";
          j["faces"] = json::array();
          for (const auto& f : s.faces) {
            json fj;
            fj["normal"] = detail::point_json(f.normal);
            fj["offset"] = f.offset;
            j["faces"].push_back(fj);
          }
        } else if constexpr (std::is_same_v<S, Polygon2D>) {
          j["shape"] = "polygon";
          j["vertices"] = json::array();
          for (const auto& v : s.vertices) j["vertices"].push_back(detail::point_json(v));
        } else {
          j["shape"] = "empty";
          j["dimension"] = region.dim();
        }
        return j;
      },
      region.shape());
}

// ---------------------------------------------------------------------------
// Run configuration.

struct TightnessOptions {
  std::vector<double> sup_levels{2.0};  // M grid
  std::vector<double> thetas{0.1};
  double delta1 = 0.5;
  std::uint64_t num_paths = 10000;
};

struct StarOccupationOptions {
  double delta = 0.25;
  std::vector<double> times{0.5, 1.0};
  int oracle_level = 3;
};

struct BmdOptions {
  double outer_radius = 1.0;
  std::uint64_t hitting_paths = 100000;
  std::uint64_t diffusion_paths = 100000;
  double diffusion_horizon = 0.25;
  double diffusion_margin = 0.25;  // distance kept from K
};

struct RunConfig {
  int schema_version = 1;
  int dimension = 2;
  DarningRegion region = DarningRegion::ball(Point{0.0, 0.0}, 0.25);
  std::vector<int> levels{3, 4, 5, 6};
  double window = 4.0;
  Point x0{0.5, 0.0};
  double horizon = 1.0;
  std::uint64_t num_paths = 100000;
  std::uint64_t seed = 42;
  RateMode rate_mode = RateMode::kPaper;
  double escape_threshold = 0.01;
  std::vector<double> time_grid{0.1, 0.25, 0.5, 1.0};
  double gate_time = 0.25;
  std::size_t oracle_max_vertices = 200000;
  std::vector<std::string> experiments;
  std::string output_dir = "darnwalk_out";
  TightnessOptions tightness;
  StarOccupationOptions star_occupation;
  BmdOptions bmd;
};

inline const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{"graphs", "level_consistency", "tightness",
                                              "star_occupation", "bmd_comparison"};
  return names;
}

namespace detail {

inline std::vector<double> get_number_list(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], ptr + "/" + std::to_string(i)));
  return out;
}

inline void check_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(ptr + "/" + it.key(), "unknown field");
  }
}

inline bool is_dyadic(double x, int level) {
  const double s = std::ldexp(x, level);
  return s == std::round(s);
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  using detail::get_integer;
  using detail::get_number;
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  detail::check_keys(j, "", {"schema_version", "dimension", "region", "levels", "window", "x0", "T",
                             "num_paths", "seed", "rate_mode", "escape_threshold", "time_grid",
                             "gate_time", "oracle_max_vertices", "experiments", "output_dir",
                             "tightness", "star_occupation", "bmd"});
  RunConfig c;
  if (j.contains("schema_version")) {
    c.schema_version = static_cast<int>(get_integer(j["schema_version"], "/schema_version"));
    if (c.schema_version != 1) throw ConfigError("/schema_version", "unsupported schema version");
  }
  if (j.contains("dimension")) {
    c.dimension = static_cast<int>(get_integer(j["dimension"], "/dimension"));
    if (c.dimension < 2 || c.dimension > kMaxDim) {
      throw ConfigError("/dimension", "dimension must be in [2, " + std::to_string(kMaxDim) + "]");
    }
  }
  if (j.contains("region")) {
    c.region = region_from_json(j["region"], "/region", c.dimension);
  } else if (c.dimension != 2) {
    throw ConfigError("/region", "missing required field");
  }
  if (c.region.dim() != c.dimension) throw ConfigError("/region", "region dimension differs from /dimension");
  if (j.contains("levels")) {
    const json& lv = j["levels"];
    if (!lv.is_array() || lv.empty()) throw ConfigError("/levels", "expected a nonempty array of integers");
    c.levels.clear();
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const auto l = get_integer(lv[i], "/levels/" + std::to_string(i));
      if (l < 1 || l > 16) throw ConfigError("/levels/" + std::to_string(i), "level must be in [1, 16]");
      if (!c.levels.empty() && l <= c.levels.back()) {
        throw ConfigError("/levels/" + std::to_string(i), "levels must be strictly increasing");
      }
      c.levels.push_back(static_cast<int>(l));
    }
  }
  if (j.contains("x0")) c.x0 = detail::get_point(j["x0"], "/x0", c.dimension);
  if (c.x0.dim() != c.dimension) throw ConfigError("/x0", "x0 dimension differs from /dimension");
  for (int i = 0; i < c.dimension; ++i) {
    if (!detail::is_dyadic(c.x0[i], c.levels.front())) {
      throw ConfigError("/x0/" + std::to_string(i), "coordinate must be a multiple of 2^-j at the coarsest level");
    }
  }
  if (contains(c.region, c.x0)) throw ConfigError("/x0", "start point lies in K");
  if (j.contains("window")) {
    c.window = get_number(j["window"], "/window");
  }
  if (!(c.window > 0.0) || !detail::is_dyadic(c.window, c.levels.front())) {
    throw ConfigError("/window", "window must be a positive multiple of 2^-j at the coarsest level");
  }
  if (!c.region.is_empty()) {
    const int k0 = extent(c.region, Point(c.dimension)).k0;
    if (c.window < 2.0 * k0) {
      throw ConfigError("/window", "window must be at least 2*k0 = " + std::to_string(2 * k0));
    }
  }
  if (j.contains("T")) {
    c.horizon = get_number(j["T"], "/T");
    if (!(c.horizon > 0.0)) throw ConfigError("/T", "T must be positive");
  }
  if (j.contains("num_paths")) {
    const auto n = get_integer(j["num_paths"], "/num_paths");
    if (n < 1) throw ConfigError("/num_paths", "num_paths must be at least 1");
    c.num_paths = static_cast<std::uint64_t>(n);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw ConfigError("/seed", "expected a nonnegative integer");
    }
    if (j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() < 0) {
      throw ConfigError("/seed", "expected a nonnegative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("rate_mode")) {
    try {
      c.rate_mode = parse_rate_mode(detail::get_string(j["rate_mode"], "/rate_mode"));
    } catch (const std::invalid_argument& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError("/rate_mode", e.what());
    }
  }
  if (j.contains("escape_threshold")) {
    c.escape_threshold = get_number(j["escape_threshold"], "/escape_threshold");
    if (c.escape_threshold < 0.0 || c.escape_threshold > 1.0) {
      throw ConfigError("/escape_threshold", "must lie in [0, 1]");
    }
  }
  auto check_times = [&](const std::vector<double>& ts, const std::string& ptr, bool allow_zero) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const bool ok = (allow_zero ? ts[i] >= 0.0 : ts[i] > 0.0) && ts[i] <= c.horizon;
      if (!ok) throw ConfigError(ptr + "/" + std::to_string(i), "time must lie in (0, T]");
      if (i > 0 && ts[i] <= ts[i - 1]) throw ConfigError(ptr + "/" + std::to_string(i), "times must increase");
    }
  };
  if (j.contains("time_grid")) c.time_grid = detail::get_number_list(j["time_grid"], "/time_grid");
  check_times(c.time_grid, "/time_grid", true);
  if (j.contains("gate_time")) c.gate_time = get_number(j["gate_time"], "/gate_time");
  if (!(c.gate_time > 0.0) || c.gate_time > c.horizon) throw ConfigError("/gate_time", "time must lie in (0, T]");
  if (j.contains("oracle_max_vertices")) {
    c.oracle_max_vertices = static_cast<std::size_t>(get_integer(j["oracle_max_vertices"], "/oracle_max_vertices"));
  }
  if (j.contains("experiments")) {
    const json& ex = j["experiments"];
    if (!ex.is_array()) throw ConfigError("/experiments", "expected an array of names");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const std::string ptr = "/experiments/" + std::to_string(i);
      const std::string name = detail::get_string(ex[i], ptr);
      const auto& known = known_experiments();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        throw ConfigError(ptr, "unknown experiment '" + name + "'");
      }
      c.experiments.push_back(name);
    }
  }
  if (j.contains("output_dir")) c.output_dir = detail::get_string(j["output_dir"], "/output_dir");
  if (j.contains("tightness")) {
    const json& t = j["tightness"];
    if (!t.is_object()) throw ConfigError("/tightness", "expected an object");
    detail::check_keys(t, "/tightness", {"M", "thetas", "delta1", "num_paths"});
    if (t.contains("M")) c.tightness.sup_levels = detail::get_number_list(t["M"], "/tightness/M");
    if (t.contains("thetas")) c.tightness.thetas = detail::get_number_list(t["thetas"], "/tightness/thetas");
    for (std::size_t i = 0; i < c.tightness.thetas.size(); ++i) {
      if (!(c.tightness.thetas[i] > 0.0)) throw ConfigError("/tightness/thetas/" + std::to_string(i), "theta must be positive");
    }
    if (t.contains("delta1")) c.tightness.delta1 = get_number(t["delta1"], "/tightness/delta1");
    if (t.contains("num_paths")) {
      const auto n = get_integer(t["num_paths"], "/tightness/num_paths");
      if (n < 1) throw ConfigError("/tightness/num_paths", "must be at least 1");
      c.tightness.num_paths = static_cast<std::uint64_t>(n);
    }
  }
  if (j.contains("star_occupation")) {
    const json& s = j["star_occupation"];
    if (!s.is_object()) throw ConfigError("/star_occupation", "expected an object");
    detail::check_keys(s, "/star_occupation", {"delta", "times", "oracle_level"});
    if (s.contains("delta")) {
      c.star_occupation.delta = get_number(s["delta"], "/star_occupation/delta");
      if (!(c.star_occupation.delta > 0.0)) throw ConfigError("/star_occupation/delta", "must be positive");
    }
    if (s.contains("times")) c.star_occupation.times = detail::get_number_list(s["times"], "/star_occupation/times");
    if (s.contains("oracle_level")) {
      c.star_occupation.oracle_level = static_cast<int>(get_integer(s["oracle_level"], "/star_occupation/oracle_level"));
    }
  }
  check_times(c.star_occupation.times, "/star_occupation/times", false);
  if (j.contains("bmd")) {
    const json& b = j["bmd"];
    if (!b.is_object()) throw ConfigError("/bmd", "expected an object");
    detail::check_keys(b, "/bmd", {"outer_radius", "hitting_paths", "diffusion_paths",
                                   "diffusion_horizon", "diffusion_margin"});
    if (b.contains("outer_radius")) c.bmd.outer_radius = get_number(b["outer_radius"], "/bmd/outer_radius");
    if (b.contains("hitting_paths")) c.bmd.hitting_paths = static_cast<std::uint64_t>(get_integer(b["hitting_paths"], "/bmd/hitting_paths"));
    if (b.contains("diffusion_paths")) c.bmd.diffusion_paths = static_cast<std::uint64_t>(get_integer(b["diffusion_paths"], "/bmd/diffusion_paths"));
    if (b.contains("diffusion_horizon")) c.bmd.diffusion_horizon = get_number(b["diffusion_horizon"], "/bmd/diffusion_horizon");
    if (b.contains("diffusion_margin")) c.bmd.diffusion_margin = get_number(b["diffusion_margin"], "/bmd/diffusion_margin");
  }
  if (!(c.bmd.outer_radius > 0.0)) throw ConfigError("/bmd/outer_radius", "must be positive");
  if (c.bmd.hitting_paths < 1) throw ConfigError("/bmd/hitting_paths", "must be at least 1");
  if (c.bmd.diffusion_paths < 1) throw ConfigError("/bmd/diffusion_paths", "must be at least 1");
  if (!(c.bmd.diffusion_horizon > 0.0)) throw ConfigError("/bmd/diffusion_horizon", "must be positive");
  if (c.bmd.diffusion_margin < 0.0) throw ConfigError("/bmd/diffusion_margin", "must be nonnegative");
  return c;
}

inline json run_config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["dimension"] = c.dimension;
  j["region"] = region_to_json(c.region);
  j["levels"] = c.levels;
  j["window"] = c.window;
  j["x0"] = detail::point_json(c.x0);
  j["T"] = c.horizon;
  j["num_paths"] = c.num_paths;
  j["seed"] = c.seed;
  j["rate_mode"] = to_string(c.rate_mode);
  j["escape_threshold"] = c.escape_threshold;
  j["time_grid"] = c.time_grid;
  j["gate_time"] = c.gate_time;
  j["oracle_max_vertices"] = c.oracle_max_vertices;
  j["experiments"] = c.experiments;
  j["output_dir"] = c.output_dir;
  j["tightness"] = {{"M", c.tightness.sup_levels},
                    {"thetas", c.tightness.thetas},
                    {"delta1", c.tightness.delta1},
                    {"num_paths", c.tightness.num_paths}};
  j["star_occupation"] = {{"delta", c.star_occupation.delta},
                          {"times", c.star_occupation.times},
                          {"oracle_level", c.star_occupation.oracle_level}};
  j["bmd"] = {{"outer_radius", c.bmd.outer_radius},
              {"hitting_paths", c.bmd.hitting_paths},
              {"diffusion_paths", c.bmd.diffusion_paths},
              {"diffusion_horizon", c.bmd.diffusion_horizon},
              {"diffusion_margin", c.bmd.diffusion_margin}};
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON in ") + path + ": " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the normalized configuration (defaults filled in).
inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a(run_config_to_json(c).dump())); }

/// Replaces non-finite numbers by null so reports never carry NaN or Inf.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// CSV (RFC 4180).

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  static std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  static std::string number(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw IoError("csv: row has wrong number of fields");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += quote(fields[i]);
    }
    text_ += "\r\n";
  }

  const std::string& str() const { return text_; }
  void save(const std::string& path) const { write_text_file(path, text_); }

 private:
  std::size_t columns_;
  std::string text_;
};

// ---------------------------------------------------------------------------
// Binary graph dump.
//
// Little-endian layout:
//   char[8]  magic "DARNWALK"
//   u32      format version (1)
//   u32      d
//   u32      j
//   u32      star flag (1 when a* is present)
//   f64      W
//   u64      number of regular vertices
//   u64      number of CSR entries (2 * #edges)
//   u32      length of the region JSON, then that many bytes
//   i32[n*d] regular vertex coordinates, in units of 2^-j
//   u32[V+1] CSR offsets (V = n + star flag)
//   u32[...] CSR neighbour ids

inline constexpr char kGraphMagic[8] = {'D', 'A', 'R', 'N', 'W', 'A', 'L', 'K'};
inline constexpr std::uint32_t kGraphVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("graph file truncated");
  return v;
}

template <class T>
void take_array(std::istream& in, std::vector<T>& v, std::uint64_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw IoError("graph file truncated");
}

}  // namespace detail

inline void save_graph(const DarnedLattice& g, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "graph files are little-endian");
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kGraphMagic, 8);
  detail::put(out, kGraphVersion);
  detail::put(out, static_cast<std::uint32_t>(g.dim()));
  detail::put(out, static_cast<std::uint32_t>(g.level()));
  detail::put(out, static_cast<std::uint32_t>(g.star() ? 1 : 0));
  detail::put(out, g.window());
  detail::put(out, static_cast<std::uint64_t>(g.num_regular()));
  std::uint64_t entries = 0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) entries += g.degree(v);
  detail::put(out, entries);
  const std::string region = region_to_json(g.region()).dump();
  detail::put(out, static_cast<std::uint32_t>(region.size()));
  out.write(region.data(), static_cast<std::streamsize>(region.size()));
  for (VertexId v = 0; v < g.num_regular(); ++v) {
    for (auto c : g.coords(v)) detail::put(out, c);
  }
  std::uint32_t off = 0;
  detail::put(out, off);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    off += g.degree(v);
    detail::put(out, off);
  }
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    for (VertexId y : g.neighbors(v)) detail::put(out, y);
  }
  if (!out) throw IoError("write failed for " + path);
}

inline DarnedLattice load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kGraphMagic, 8) != 0) throw IoError(path + ": not a darnwalk graph file");
  if (detail::take<std::uint32_t>(in) != kGraphVersion) throw IoError(path + ": unsupported graph format version");
  const auto d = detail::take<std::uint32_t>(in);
  const auto level = detail::take<std::uint32_t>(in);
  const auto star = detail::take<std::uint32_t>(in);
  const auto window = detail::take<double>(in);
  const auto n = detail::take<std::uint64_t>(in);
  const auto entries = detail::take<std::uint64_t>(in);
  const auto rlen = detail::take<std::uint32_t>(in);
  if (d < 1 || d > static_cast<std::uint32_t>(kMaxDim) || star > 1 || rlen > (1u << 24)) {
    throw IoError(path + ": corrupt header");
  }
  std::string rtext(rlen, '\0');
  in.read(rtext.data(), rlen);
  if (!in) throw IoError("graph file truncated");
  DarningRegion region = region_from_json(json::parse(rtext));
  std::vector<std::int32_t> coords;
  detail::take_array(in, coords, n * d);
  std::vector<std::uint32_t> offsets;
  detail::take_array(in, offsets, n + star + 1);
  if (offsets.back() != entries) throw IoError(path + ": corrupt adjacency offsets");
  std::vector<VertexId> nbrs;
  detail::take_array(in, nbrs, entries);
  for (VertexId y : nbrs) {
    if (y >= n + star) throw IoError(path + ": neighbour id out of range");
  }
  return DarnedLattice::from_parts(std::move(region), static_cast<int>(level), window, std::move(coords),
                                   std::move(offsets), std::move(nbrs), star == 1);
}

/// {num_vertices, num_edges, star_degree, m_total, m_complement_Sj}.
inline json graph_summary(const DarnedLattice& g) {
  json j;
  j["level"] = g.level();
  j["dimension"] = g.dim();
  j["window"] = g.window();
  j["region"] = region_to_json(g.region());
  j["num_vertices"] = g.num_vertices();
  j["num_edges"] = g.num_edges();
  j["star_degree"] = g.star() ? g.degree(*g.star()) : 0u;
  j["m_total"] = g.total_measure();
  j["m_complement_Sj"] = interior_set(g).complement_measure;
  j["num_region_points"] = g.num_region_points();
  return j;
}

}  // namespace darnwalk

#endif  // DARNWALK_IO_HPP_
