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

#ifndef GEODEX_CHECKPOINT_H_
#define GEODEX_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geodex/nn.h"

namespace geodex {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedNet {
  std::string name;
  Net net;
};

struct NamedArray {
  std::string name;
  std::vector<double> values;
};

// Binary container shared by encoder, policy and replay snapshots.
//
// Layout (all integers and floats little-endian):
//   "GDX1" | u32 version | str component | str meta_json
//   u32 net_count, per net: str name, u32 layer_count,
//                           per layer: u32 in, u32 out, u32 activation
//   u32 array_count, per array: str name, u64 length
//   f64 payload: every net's parameters, then every array, in table order
// where str is a u32 byte length followed by the bytes.
struct Checkpoint {
  std::string component;
  std::string meta_json = "{}";
  std::vector<NamedNet> nets;
  std::vector<NamedArray> arrays;

  const Net& GetNet(std::string_view name) const;
  const std::vector<double>& GetArray(std::string_view name) const;
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Throws kFormat on bad magic, version or truncated payload.
Checkpoint ParseCheckpoint(std::string_view bytes);

void WriteCheckpointFile(const Checkpoint& checkpoint,
                         const std::filesystem::path& path);
Checkpoint ReadCheckpointFile(const std::filesystem::path& path);

// Whole-file helpers shared by the CLI and harness.
std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

// FNV-1a over the raw little-endian bytes of the values; used to detect
// parameter mutation.
std::uint64_t HashParams(std::span<const double> values);

}  // namespace geodex

#endif  // GEODEX_CHECKPOINT_H_
