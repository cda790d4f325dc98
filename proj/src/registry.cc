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

#include "geodex/registry.h"

#include <set>

#include "geodex/checkpoint.h"
#include "geodex/error.h"

namespace geodex {

namespace {

ShapeSpec Spec(ShapeKind kind, double a, double b, double c, double e1 = 1.0, double e2 = 1.0) {
  ShapeSpec spec;
  spec.kind = kind;
  spec.size = {a, b, c};
  spec.exponent1 = e1;
  spec.exponent2 = e2;
  spec.subdivision = kind == ShapeKind::kBox ? 1 : 2;
  return spec;
}

std::vector<NamedShape> Basic8() {
  return {
      {"cube", Spec(ShapeKind::kBox, 0.06, 0.06, 0.06)},
      {"bar", Spec(ShapeKind::kBox, 0.03, 0.03, 0.12)},
      {"sphere", Spec(ShapeKind::kEllipsoid, 0.03, 0.03, 0.03)},
      {"disk", Spec(ShapeKind::kEllipsoid, 0.05, 0.05, 0.012)},
      {"rod", Spec(ShapeKind::kCylinder, 0.02, 0.02, 0.12)},
      {"puck", Spec(ShapeKind::kCylinder, 0.05, 0.05, 0.02)},
      {"pinched", Spec(ShapeKind::kSuperellipsoid, 0.04, 0.04, 0.04, 2.5, 2.5)},
      {"plate", Spec(ShapeKind::kBox, 0.1, 0.06, 0.01)},
  };
}

std::vector<NamedShape> Heldout2() {
  return {
      {"spindle", Spec(ShapeKind::kEllipsoid, 0.015, 0.018, 0.07)},
      {"pebble", Spec(ShapeKind::kSuperellipsoid, 0.035, 0.032, 0.03, 0.8, 0.8)},
  };
}

}  // namespace

const RegistryEntry& Registry::Find(std::string_view name) const {
  for (const RegistryEntry& entry : entries) {
    if (entry.name == name) return entry;
  }
  throw Error(ErrorCode::kUnknownObject, "no object named '" + std::string(name) + "'");
}

nlohmann::json ShapeSpecToJson(const ShapeSpec& spec) {
  return {{"kind", ShapeKindName(spec.kind)},
          {"size", spec.size},
          {"exponent1", spec.exponent1},
          {"exponent2", spec.exponent2},
          {"subdivision", spec.subdivision}};
}

ShapeSpec ShapeSpecFromJson(const nlohmann::json& j) {
  ShapeSpec spec;
  try {
    spec.kind = ShapeKindFromName(j.at("kind").get<std::string>());
    spec.size = j.at("size").get<std::array<double, 3>>();
    spec.exponent1 = j.value("exponent1", 1.0);
    spec.exponent2 = j.value("exponent2", 1.0);
    spec.subdivision = j.value("subdivision", 1);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadSpec, std::string("procedural spec: ") + e.what());
  }
  return spec;
}

Registry LoadRegistry(const std::filesystem::path& path) {
  const std::string text = ReadFileBytes(path);
  Registry registry;
  registry.base_dir = path.parent_path();
  try {
    const auto root = nlohmann::json::parse(text);
    std::set<std::string> seen;
    for (const auto& item : root.at("objects")) {
      RegistryEntry entry;
      entry.name = item.at("name").get<std::string>();
      entry.mesh = item.value("mesh", std::string());
      if (item.contains("procedural")) entry.procedural = ShapeSpecFromJson(item["procedural"]);
      entry.mass = item.value("mass", 0.2);
      if (entry.mesh.empty() && !entry.procedural) {
        throw Error(ErrorCode::kFormat, "object '" + entry.name + "' has neither mesh nor spec");
      }
      if (!(entry.mass > 0)) {
        throw Error(ErrorCode::kFormat, "object '" + entry.name + "' has non-positive mass");
      }
      if (!seen.insert(entry.name).second) {
        throw Error(ErrorCode::kFormat, "duplicate object name '" + entry.name + "'");
      }
      registry.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return registry;
}

void SaveRegistry(const Registry& registry, const std::vector<ObjectRecord>& objects,
                  const std::filesystem::path& path) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < registry.entries.size(); ++i) {
    const RegistryEntry& entry = registry.entries[i];
    nlohmann::json item = {{"name", entry.name}, {"mass", entry.mass}};
    if (!entry.mesh.empty()) item["mesh"] = entry.mesh;
    if (entry.procedural) item["procedural"] = ShapeSpecToJson(*entry.procedural);
    if (i < objects.size()) {
      std::vector<double> inertia(9);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) inertia[3 * r + c] = objects[i].inertia(r, c);
      }
      item["inertia"] = inertia;
    }
    list.push_back(std::move(item));
  }
  WriteFileBytes(path, nlohmann::json{{"objects", list}}.dump(2) + "\n");
}

std::vector<ObjectRecord> MaterializeObjects(const Registry& registry,
                                             const std::vector<std::string>& names) {
  std::vector<const RegistryEntry*> chosen;
  if (names.empty()) {
    for (const RegistryEntry& entry : registry.entries) chosen.push_back(&entry);
  } else {
    for (const std::string& name : names) chosen.push_back(&registry.Find(name));
  }
  std::vector<ObjectRecord> objects;
  for (const RegistryEntry* entry : chosen) {
    Mesh mesh = entry->mesh.empty()
                    ? ProceduralObject(*entry->procedural)
                    : LoadMesh(registry.base_dir / entry->mesh).mesh;
    objects.push_back(MakeObjectRecord(NormalizeScale(mesh).Renamed(entry->name), entry->mass));
  }
  return objects;
}

std::vector<NamedShape> PresetShapes(std::string_view preset) {
  if (preset == "basic8") return Basic8();
  if (preset == "basic4") {
    std::vector<NamedShape> all = Basic8();
    return {all[0], all[1], all[3], all[4]};
  }
  if (preset == "heldout2") return Heldout2();
  if (preset == "all") {
    std::vector<NamedShape> all = Basic8();
    for (NamedShape& shape : Heldout2()) all.push_back(shape);
    return all;
  }
  throw Error(ErrorCode::kConfig, "unknown preset '" + std::string(preset) +
                                      "' (basic4, basic8, heldout2, all)");
}

ObjectRecord MakeProceduralRecord(const NamedShape& shape, double mass) {
  return MakeObjectRecord(NormalizeScale(ProceduralObject(shape.spec)).Renamed(shape.name), mass);
}

Registry GenerateObjects(std::string_view preset, const std::filesystem::path& out_dir,
                         double mass) {
  const std::vector<NamedShape> shapes = PresetShapes(preset);
  std::filesystem::create_directories(out_dir);
  Registry registry;
  registry.base_dir = out_dir;
  std::vector<ObjectRecord> objects;
  for (const NamedShape& shape : shapes) {
    objects.push_back(MakeProceduralRecord(shape, mass));
    SaveObj(objects.back().mesh, out_dir / (shape.name + ".obj"));
    registry.entries.push_back({shape.name, shape.name + ".obj", shape.spec, mass});
  }
  SaveRegistry(registry, objects, out_dir / "registry.json");
  return registry;
}

Registry IngestMeshes(const std::vector<std::filesystem::path>& inputs,
                      const std::filesystem::path& out_dir, double mass) {
  if (inputs.empty()) throw Error(ErrorCode::kConfig, "ingest needs at least one mesh");
  std::vector<Mesh> meshes;
  std::set<std::string> names;
  for (const auto& input : inputs) {
    const std::string name = input.stem().string();
    if (!names.insert(name).second) {
      throw Error(ErrorCode::kConfig, "two inputs share the name '" + name + "'");
    }
    meshes.push_back(NormalizeScale(LoadMesh(input).mesh).Renamed(name));
    const auto target = std::filesystem::weakly_canonical(out_dir / (name + ".obj"));
    if (target == std::filesystem::weakly_canonical(input)) {
      throw Error(ErrorCode::kConfig, "ingest would overwrite its input " + input.string());
    }
  }
  std::filesystem::create_directories(out_dir);
  Registry registry;
  registry.base_dir = out_dir;
  std::vector<ObjectRecord> objects;
  for (const Mesh& mesh : meshes) {
    objects.push_back(MakeObjectRecord(mesh, mass));
    SaveObj(mesh, out_dir / (mesh.name() + ".obj"));
    registry.entries.push_back({mesh.name(), mesh.name() + ".obj", std::nullopt, mass});
  }
  SaveRegistry(registry, objects, out_dir / "registry.json");
  return registry;
}

}  // namespace geodex
