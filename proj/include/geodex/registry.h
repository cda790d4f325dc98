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

#ifndef GEODEX_REGISTRY_H_
#define GEODEX_REGISTRY_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "geodex/env.h"
#include "geodex/mesh.h"

namespace geodex {

// One object of a registry file. A mesh path, when present, wins over the
// procedural spec; paths are relative to the registry file.
struct RegistryEntry {
  std::string name;
  std::string mesh;
  std::optional<ShapeSpec> procedural;
  double mass = 0.2;
};

struct Registry {
  std::vector<RegistryEntry> entries;
  std::filesystem::path base_dir;

  const RegistryEntry& Find(std::string_view name) const;  // throws kUnknownObject
};

nlohmann::json ShapeSpecToJson(const ShapeSpec& spec);
ShapeSpec ShapeSpecFromJson(const nlohmann::json& json);  // throws kBadSpec

// Throws kIo, kFormat or kBadSpec.
Registry LoadRegistry(const std::filesystem::path& path);
// Records each object's inertia next to its entry for inspection; loading
// always recomputes it from the mesh.
void SaveRegistry(const Registry& registry, const std::vector<ObjectRecord>& objects,
                  const std::filesystem::path& path);

// Loads or generates the named objects (all when `names` is empty), in the
// order given, rescaled to hand size.
std::vector<ObjectRecord> MaterializeObjects(const Registry& registry,
                                             const std::vector<std::string>& names = {});

struct NamedShape {
  std::string name;
  ShapeSpec spec;
};

// "basic4", "basic8" (pretraining and training pool), "heldout2"
// (a high-aspect spindle and a near-spherical pebble), "all".
std::vector<NamedShape> PresetShapes(std::string_view preset);  // throws kConfig
ObjectRecord MakeProceduralRecord(const NamedShape& shape, double mass = 0.2);

// Writes one OBJ per preset object and registry.json into `out_dir`.
Registry GenerateObjects(std::string_view preset, const std::filesystem::path& out_dir,
                         double mass = 0.2);
// Normalizes user meshes to hand scale and writes them with a registry.
// Input files are only read.
Registry IngestMeshes(const std::vector<std::filesystem::path>& inputs,
                      const std::filesystem::path& out_dir, double mass = 0.2);

}  // namespace geodex

#endif  // GEODEX_REGISTRY_H_
