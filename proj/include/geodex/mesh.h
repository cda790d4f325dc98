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

#ifndef GEODEX_MESH_H_
#define GEODEX_MESH_H_

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geodex/random.h"
#include "geodex/rotmath.h"

namespace geodex {

using Face = std::array<int, 3>;

// Closed-ish triangle mesh in meters. Immutable once built: every face index
// is in range, every face has area > 1e-14 and a unit outward normal.
class Mesh {
 public:
  Mesh() = default;

  // Faces with area <= 1e-14 are dropped; the count is written to
  // `dropped_faces` when provided. Throws kEmptyMesh if nothing survives and
  // kParseError for out-of-range indices.
  static Mesh Build(std::string name, std::vector<Vec3> vertices,
                    const std::vector<Face>& faces,
                    int* dropped_faces = nullptr);

  const std::string& name() const { return name_; }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  const std::vector<double>& face_areas() const { return face_areas_; }
  double surface_area() const {
    return cumulative_area_.empty() ? 0.0 : cumulative_area_.back();
  }
  // Running sum of face areas, used for area-weighted face selection.
  const std::vector<double>& cumulative_area() const { return cumulative_area_; }

  // Affine copy: v -> scale * v + offset.
  Mesh Transformed(double scale, const Vec3& offset) const;
  Mesh Renamed(std::string name) const;

 private:
  std::string name_;
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  std::vector<double> cumulative_area_;
};

enum class MeshFormat { kObj, kOff, kStlAscii };

// Chooses the format from the file extension (.obj, .off, .stl).
MeshFormat FormatFromPath(const std::filesystem::path& path);

struct ParsedMesh {
  Mesh mesh;
  int dropped_faces = 0;
};

// Polygons are fan-triangulated and normals are always recomputed from
// geometry. Throws kParseError (with line number) or kEmptyMesh.
ParsedMesh ParseMesh(std::string_view text, MeshFormat format,
                     std::string name = "mesh");
ParsedMesh LoadMesh(const std::filesystem::path& path);

// OBJ text with shortest round-trip float formatting.
std::string WriteObj(const Mesh& mesh);
void SaveObj(const Mesh& mesh, const std::filesystem::path& path);

struct Aabb {
  Vec3 min;
  Vec3 max;
  Vec3 Extents() const { return max - min; }
  Vec3 Center() const { return 0.5 * (min + max); }
};

Aabb ComputeAabb(const Mesh& mesh);

struct ScaleLimits {
  double target_shortest = 0.057;
  double longest_cap = 0.130;
};

// Recenters at the AABB center and scales uniformly so the shortest extent
// equals `target_shortest`; if that makes the longest extent exceed
// `longest_cap`, the scale is reduced so the longest extent equals the cap.
// Throws kDegenerateExtent when an extent is <= 1e-9.
Mesh NormalizeScale(const Mesh& mesh, const ScaleLimits& limits = {});

// Divergence-theorem volume (positive for outward-facing winding).
double SignedVolume(const Mesh& mesh);

// Inertia tensor (kg m^2) of the uniform-density solid bounded by the mesh,
// about the AABB center. Throws kNonPositiveVolume if the enclosed volume is
// <= 1e-12.
Mat3 InertiaTensor(const Mesh& mesh, double mass);

// Surface samples in the object frame with per-point unit normals.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  std::size_t size() const { return points.size(); }
  // Rotates points and normals.
  PointCloud Rotated(const RotMat& rotation) const;
};

// Faces are chosen with probability proportional to area, points uniformly
// inside the face. Deterministic for a given engine state.
PointCloud SampleSurface(const Mesh& mesh, int n, Rng& rng);

enum class ShapeKind { kBox, kEllipsoid, kCylinder, kSuperellipsoid };

// Procedural solid. `size` holds full extents for boxes, semi-axes for
// ellipsoids and superellipsoids, and (semi-axis x, semi-axis y, height)
// for elliptic cylinders along z.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kBox;
  std::array<double, 3> size = {0.05, 0.05, 0.05};
  // Superellipsoid latitude and longitude exponents.
  double exponent1 = 1.0;
  double exponent2 = 1.0;
  int subdivision = 1;
};

std::string_view ShapeKindName(ShapeKind kind);
ShapeKind ShapeKindFromName(std::string_view name);  // throws kBadSpec
std::string ShapeName(const ShapeSpec& spec);

// Throws kBadSpec for non-positive parameters or subdivision < 1.
Mesh ProceduralObject(const ShapeSpec& spec);

}  // namespace geodex

#endif  // GEODEX_MESH_H_
