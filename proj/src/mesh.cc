// Copyright 2026 The Geodex Authors
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

#include "geodex/mesh.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "geodex/error.h"

namespace geodex {

namespace {

constexpr double kMinFaceArea = 1e-14;

[[noreturn]] void ThrowParse(int line, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> SplitTokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double ParseDouble(std::string_view token, int line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    ThrowParse(line, "invalid number '" + std::string(token) + "'");
  }
  return value;
}

long ParseInt(std::string_view token, int line) {
  long value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    ThrowParse(line, "invalid integer '" + std::string(token) + "'");
  }
  return value;
}

// Splits text into lines, tracking 1-based line numbers.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    fn(number, line);
    if (end == text.size()) break;
    start = end + 1;
  }
}

void FanTriangulate(const std::vector<int>& polygon, std::vector<Face>& faces) {
  for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
    faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
  }
}

ParsedMesh ParseObj(std::string_view text, std::string name) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  ForEachLine(text, [&](int line_no, std::string_view line) {
    const auto tokens = SplitTokens(line);
    if (tokens.empty() || tokens[0].front() == '#') return;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) ThrowParse(line_no, "vertex needs 3 coordinates");
      vertices.emplace_back(ParseDouble(tokens[1], line_no),
                            ParseDouble(tokens[2], line_no),
                            ParseDouble(tokens[3], line_no));
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) ThrowParse(line_no, "face needs >= 3 vertices");
      std::vector<int> polygon;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        std::string_view ref = tokens[k].substr(0, tokens[k].find('/'));
        const long idx = ParseInt(ref, line_no);
        const long count = static_cast<long>(vertices.size());
        long resolved = 0;
        if (idx > 0) {
          resolved = idx - 1;
        } else if (idx < 0) {
          resolved = count + idx;
        } else {
          ThrowParse(line_no, "face index 0 (OBJ indices are 1-based)");
        }
        if (resolved < 0 || resolved >= count) {
          ThrowParse(line_no, "face index " + std::to_string(idx) + " out of range");
        }
        polygon.push_back(static_cast<int>(resolved));
      }
      FanTriangulate(polygon, faces);
    }
    // vn, vt, o, g, s, usemtl, mtllib and unknown records are ignored.
  });
  ParsedMesh out;
  out.mesh = Mesh::Build(std::move(name), std::move(vertices), faces,
                         &out.dropped_faces);
  return out;
}

ParsedMesh ParseOff(std::string_view text, std::string name) {
  struct Token {
    std::string_view text;
    int line;
  };
  std::vector<Token> tokens;
  ForEachLine(text, [&](int line_no, std::string_view line) {
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    for (auto t : SplitTokens(line)) tokens.push_back({t, line_no});
  });
  std::size_t pos = 0;
  auto next = [&](const char* what) -> const Token& {
    if (pos >= tokens.size()) {
      const int line = tokens.empty() ? 1 : tokens.back().line;
      ThrowParse(line, std::string("unexpected end of file, expected ") + what);
    }
    return tokens[pos++];
  };
  const Token& header = next("OFF header");
  if (header.text != "OFF") ThrowParse(header.line, "missing OFF header");
  const Token& nv_tok = next("vertex count");
  const long nv = ParseInt(nv_tok.text, nv_tok.line);
  const Token& nf_tok = next("face count");
  const long nf = ParseInt(nf_tok.text, nf_tok.line);
  const Token& ne_tok = next("edge count");
  ParseInt(ne_tok.text, ne_tok.line);
  if (nv < 0 || nf < 0) ThrowParse(nv_tok.line, "negative element count");

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    const Token& x = next("vertex coordinate");
    const Token& y = next("vertex coordinate");
    const Token& z = next("vertex coordinate");
    vertices.emplace_back(ParseDouble(x.text, x.line), ParseDouble(y.text, y.line),
                          ParseDouble(z.text, z.line));
    // Optional per-vertex extras (colors) share the line; skip them.
    while (pos < tokens.size() && tokens[pos].line == z.line) ++pos;
  }
  std::vector<Face> faces;
  for (long f = 0; f < nf; ++f) {
    const Token& k_tok = next("polygon size");
    const long k = ParseInt(k_tok.text, k_tok.line);
    if (k < 3) ThrowParse(k_tok.line, "polygon with fewer than 3 vertices");
    std::vector<int> polygon;
    int last_line = k_tok.line;
    for (long j = 0; j < k; ++j) {
      const Token& idx_tok = next("polygon index");
      const long idx = ParseInt(idx_tok.text, idx_tok.line);
      if (idx < 0 || idx >= nv) {
        ThrowParse(idx_tok.line, "vertex index " + std::to_string(idx) + " out of range");
      }
      polygon.push_back(static_cast<int>(idx));
      last_line = idx_tok.line;
    }
    while (pos < tokens.size() && tokens[pos].line == last_line) ++pos;
    FanTriangulate(polygon, faces);
  }
  ParsedMesh out;
  out.mesh = Mesh::Build(std::move(name), std::move(vertices), faces,
                         &out.dropped_faces);
  return out;
}

ParsedMesh ParseStlAscii(std::string_view text, std::string name) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::map<std::array<double, 3>, int> index_of;
  std::vector<int> loop;
  bool seen_solid = false;
  bool in_loop = false;
  ForEachLine(text, [&](int line_no, std::string_view line) {
    const auto tokens = SplitTokens(line);
    if (tokens.empty()) return;
    const auto& key = tokens[0];
    if (key == "solid") {
      seen_solid = true;
    } else if (!seen_solid) {
      ThrowParse(line_no, "expected 'solid'");
    } else if (key == "outer") {
      in_loop = true;
      loop.clear();
    } else if (key == "vertex") {
      if (!in_loop) ThrowParse(line_no, "vertex outside loop");
      if (tokens.size() < 4) ThrowParse(line_no, "vertex needs 3 coordinates");
      const std::array<double, 3> p = {ParseDouble(tokens[1], line_no),
                                       ParseDouble(tokens[2], line_no),
                                       ParseDouble(tokens[3], line_no)};
      auto [it, inserted] = index_of.try_emplace(p, static_cast<int>(vertices.size()));
      if (inserted) vertices.emplace_back(p[0], p[1], p[2]);
      loop.push_back(it->second);
    } else if (key == "endloop") {
      if (loop.size() < 3) ThrowParse(line_no, "facet with fewer than 3 vertices");
      FanTriangulate(loop, faces);
      in_loop = false;
    } else if (key == "facet" || key == "endfacet" || key == "endsolid") {
      // Facet normals in the file are ignored.
    } else {
      ThrowParse(line_no, "unexpected token '" + std::string(key) + "'");
    }
  });
  if (!seen_solid) ThrowParse(1, "expected 'solid'");
  ParsedMesh out;
  out.mesh = Mesh::Build(std::move(name), std::move(vertices), faces,
                         &out.dropped_faces);
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Mesh Mesh::Build(std::string name, std::vector<Vec3> vertices,
                 const std::vector<Face>& faces, int* dropped_faces) {
  Mesh mesh;
  mesh.name_ = std::move(name);
  mesh.vertices_ = std::move(vertices);
  const int nv = static_cast<int>(mesh.vertices_.size());
  int dropped = 0;
  double running = 0.0;
  for (const Face& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= nv) {
        throw Error(ErrorCode::kParseError,
                    "face index " + std::to_string(idx) + " out of range");
      }
    }
    const Vec3& a = mesh.vertices_[f[0]];
    const Vec3 cross = (mesh.vertices_[f[1]] - a).cross(mesh.vertices_[f[2]] - a);
    const double area = 0.5 * cross.norm();
    if (!(area > kMinFaceArea)) {
      ++dropped;
      continue;
    }
    mesh.faces_.push_back(f);
    mesh.face_normals_.push_back(cross.normalized());
    mesh.face_areas_.push_back(area);
    running += area;
    mesh.cumulative_area_.push_back(running);
  }
  if (dropped_faces != nullptr) *dropped_faces = dropped;
  if (mesh.faces_.empty()) {
    throw Error(ErrorCode::kEmptyMesh, "mesh '" + mesh.name_ + "' has no valid faces");
  }
  return mesh;
}

Mesh Mesh::Transformed(double scale, const Vec3& offset) const {
  std::vector<Vec3> moved;
  moved.reserve(vertices_.size());
  for (const Vec3& v : vertices_) moved.push_back(scale * v + offset);
  return Build(name_, std::move(moved), faces_);
}

Mesh Mesh::Renamed(std::string name) const {
  Mesh copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

MeshFormat FormatFromPath(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return MeshFormat::kObj;
  if (ext == ".off") return MeshFormat::kOff;
  if (ext == ".stl") return MeshFormat::kStlAscii;
  throw Error(ErrorCode::kParseError, "unsupported mesh extension '" + ext + "'");
}

ParsedMesh ParseMesh(std::string_view text, MeshFormat format, std::string name) {
  switch (format) {
    case MeshFormat::kObj: return ParseObj(text, std::move(name));
    case MeshFormat::kOff: return ParseOff(text, std::move(name));
    case MeshFormat::kStlAscii: return ParseStlAscii(text, std::move(name));
  }
  throw Error(ErrorCode::kParseError, "unknown mesh format");
}

ParsedMesh LoadMesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseMesh(buffer.str(), FormatFromPath(path), path.stem().string());
}

std::string WriteObj(const Mesh& mesh) {
  std::string out = "# " + mesh.name() + "\n";
  for (const Vec3& v : mesh.vertices()) {
    out += "v " + FormatDouble(v.x()) + " " + FormatDouble(v.y()) + " " +
           FormatDouble(v.z()) + "\n";
  }
  for (const Face& f : mesh.faces()) {
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) +
           " " + std::to_string(f[2] + 1) + "\n";
  }
  return out;
}

void SaveObj(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << WriteObj(mesh);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Aabb ComputeAabb(const Mesh& mesh) {
  Aabb box{mesh.vertices().front(), mesh.vertices().front()};
  for (const Vec3& v : mesh.vertices()) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

Mesh NormalizeScale(const Mesh& mesh, const ScaleLimits& limits) {
  const Aabb box = ComputeAabb(mesh);
  const Vec3 extents = box.Extents();
  if (!(extents.minCoeff() > 1e-9)) {
    throw Error(ErrorCode::kDegenerateExtent,
                "mesh '" + mesh.name() + "' is flat along some axis");
  }
  double scale = limits.target_shortest / extents.minCoeff();
  if (scale * extents.maxCoeff() > limits.longest_cap) {
    scale = limits.longest_cap / extents.maxCoeff();
  }
  return mesh.Transformed(scale, -scale * box.Center());
}

double SignedVolume(const Mesh& mesh) {
  const auto& v = mesh.vertices();
  double six_volume = 0.0;
  for (const Face& f : mesh.faces()) {
    six_volume += v[f[0]].dot(v[f[1]].cross(v[f[2]]));
  }
  return six_volume / 6.0;
}

Mat3 InertiaTensor(const Mesh& mesh, double mass) {
  const Vec3 center = ComputeAabb(mesh).Center();
  double volume = 0.0;
  Mat3 second_moment = Mat3::Zero();  // integral of r r^T over the solid
  for (const Face& f : mesh.faces()) {
    const Vec3 a = mesh.vertices()[f[0]] - center;
    const Vec3 b = mesh.vertices()[f[1]] - center;
    const Vec3 c = mesh.vertices()[f[2]] - center;
    const double det = a.dot(b.cross(c));
    volume += det / 6.0;
    const Vec3 s = a + b + c;
    second_moment += (det / 120.0) *
                     (a * a.transpose() + b * b.transpose() + c * c.transpose() +
                      s * s.transpose());
  }
  if (!(volume > 1e-12)) {
    throw Error(ErrorCode::kNonPositiveVolume,
                "mesh '" + mesh.name() + "' encloses non-positive volume");
  }
  const double density = mass / volume;
  Mat3 inertia = density * (second_moment.trace() * Mat3::Identity() - second_moment);
  return 0.5 * (inertia + inertia.transpose());
}

PointCloud PointCloud::Rotated(const RotMat& rotation) const {
  PointCloud out;
  out.points.reserve(points.size());
  out.normals.reserve(normals.size());
  for (const Vec3& p : points) out.points.push_back(rotation.matrix() * p);
  for (const Vec3& n : normals) out.normals.push_back(rotation.matrix() * n);
  return out;
}

PointCloud SampleSurface(const Mesh& mesh, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::kBadSpec, "sample count must be >= 1");
  const auto& cumulative = mesh.cumulative_area();
  const double total = cumulative.back();
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double target = Uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const std::size_t face = static_cast<std::size_t>(it - cumulative.begin());
    const Face& f = mesh.faces()[face];
    const double r1 = std::sqrt(Uniform01(rng));
    const double r2 = Uniform01(rng);
    const Vec3& a = mesh.vertices()[f[0]];
    const Vec3& b = mesh.vertices()[f[1]];
    const Vec3& c = mesh.vertices()[f[2]];
    cloud.points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    cloud.normals.push_back(mesh.face_normals()[face]);
  }
  return cloud;
}

std::string_view ShapeKindName(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kBox: return "box";
    case ShapeKind::kEllipsoid: return "ellipsoid";
    case ShapeKind::kCylinder: return "cylinder";
    case ShapeKind::kSuperellipsoid: return "superellipsoid";
  }
  return "unknown";
}

ShapeKind ShapeKindFromName(std::string_view name) {
  if (name == "box") return ShapeKind::kBox;
  if (name == "ellipsoid") return ShapeKind::kEllipsoid;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "superellipsoid") return ShapeKind::kSuperellipsoid;
  throw Error(ErrorCode::kBadSpec, "unknown shape '" + std::string(name) + "'");
}

std::string ShapeName(const ShapeSpec& spec) {
  char buf[160];
  if (spec.kind == ShapeKind::kBox) {
    std::snprintf(buf, sizeof(buf), "box_%gx%gx%g", spec.size[0], spec.size[1],
                  spec.size[2]);
  } else if (spec.kind == ShapeKind::kSuperellipsoid) {
    std::snprintf(buf, sizeof(buf), "superellipsoid_%gx%gx%g_e%g_%g_s%d",
                  spec.size[0], spec.size[1], spec.size[2], spec.exponent1,
                  spec.exponent2, spec.subdivision);
  } else {
    std::snprintf(buf, sizeof(buf), "%s_%gx%gx%g_s%d",
                  std::string(ShapeKindName(spec.kind)).c_str(), spec.size[0],
                  spec.size[1], spec.size[2], spec.subdivision);
  }
  return buf;
}

namespace {

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

// Unit icosphere after `levels` rounds of 4-way subdivision.
RawMesh Icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  RawMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const Face& f : m.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  return m;
}

double SignedPow(double base, double exponent) {
  return std::copysign(std::pow(std::abs(base), exponent), base);
}

RawMesh Box(const std::array<double, 3>& size) {
  const double hx = 0.5 * size[0], hy = 0.5 * size[1], hz = 0.5 * size[2];
  RawMesh m;
  m.vertices = {{-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
                {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz}};
  m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
             {2, 3, 7}, {2, 7, 6}, {1, 2, 6}, {1, 6, 5}, {0, 4, 7}, {0, 7, 3}};
  return m;
}

RawMesh Cylinder(const std::array<double, 3>& size, int subdivision) {
  const int segments = 4 << subdivision;
  const double hz = 0.5 * size[2];
  RawMesh m;
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring == 0 ? -hz : hz;
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * std::numbers::pi * s / segments;
      m.vertices.emplace_back(size[0] * std::cos(a), size[1] * std::sin(a), z);
    }
  }
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -hz);
  const int top_center = bottom_center + 1;
  m.vertices.emplace_back(0.0, 0.0, hz);
  for (int s = 0; s < segments; ++s) {
    const int s1 = (s + 1) % segments;
    m.faces.push_back({s, s1, segments + s1});
    m.faces.push_back({s, segments + s1, segments + s});
    m.faces.push_back({bottom_center, s1, s});
    m.faces.push_back({top_center, segments + s, segments + s1});
  }
  return m;
}

}  // namespace

Mesh ProceduralObject(const ShapeSpec& spec) {
  for (double v : spec.size) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kBadSpec, "shape sizes must be positive");
    }
  }
  if (spec.subdivision < 1 || spec.subdivision > 6) {
    throw Error(ErrorCode::kBadSpec, "subdivision must be in [1, 6]");
  }
  RawMesh raw;
  switch (spec.kind) {
    case ShapeKind::kBox:
      raw = Box(spec.size);
      break;
    case ShapeKind::kCylinder:
      raw = Cylinder(spec.size, spec.subdivision);
      break;
    case ShapeKind::kEllipsoid:
      raw = Icosphere(spec.subdivision);
      for (Vec3& v : raw.vertices) {
        v = Vec3(spec.size[0] * v.x(), spec.size[1] * v.y(), spec.size[2] * v.z());
      }
      break;
    case ShapeKind::kSuperellipsoid: {
      if (!(spec.exponent1 > 0.0) || !(spec.exponent2 > 0.0) ||
          spec.exponent1 > 4.0 || spec.exponent2 > 4.0) {
        throw Error(ErrorCode::kBadSpec, "superellipsoid exponents must be in (0, 4]");
      }
      raw = Icosphere(spec.subdivision);
      for (Vec3& v : raw.vertices) {
        const double eta = std::asin(std::clamp(v.z(), -1.0, 1.0));
        const double omega = std::atan2(v.y(), v.x());
        const double ce = SignedPow(std::cos(eta), spec.exponent1);
        v = Vec3(spec.size[0] * ce * SignedPow(std::cos(omega), spec.exponent2),
                 spec.size[1] * ce * SignedPow(std::sin(omega), spec.exponent2),
                 spec.size[2] * SignedPow(std::sin(eta), spec.exponent1));
      }
      break;
    }
  }
  return Mesh::Build(ShapeName(spec), std::move(raw.vertices), raw.faces);
}

}  // namespace geodex
