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

#include "geodex/checkpoint.h"

#include <bit>
#include <fstream>
#include <sstream>

#include "geodex/error.h"

namespace geodex {

namespace {

constexpr char kMagic[4] = {'G', 'D', 'X', '1'};

class Writer {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(std::string_view s) { out_.append(s); }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view Raw(std::size_t n) {
    Need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kFormat, "checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Net& Checkpoint::GetNet(std::string_view name) const {
  for (const auto& n : nets) {
    if (n.name == name) return n.net;
  }
  throw Error(ErrorCode::kFormat, "checkpoint has no net '" + std::string(name) + "'");
}

const std::vector<double>& Checkpoint::GetArray(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a.values;
  }
  throw Error(ErrorCode::kFormat, "checkpoint has no array '" + std::string(name) + "'");
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.Raw(std::string_view(kMagic, 4));
  w.U32(kCheckpointVersion);
  w.Str(checkpoint.component);
  w.Str(checkpoint.meta_json);
  w.U32(static_cast<std::uint32_t>(checkpoint.nets.size()));
  for (const auto& named : checkpoint.nets) {
    w.Str(named.name);
    w.U32(static_cast<std::uint32_t>(named.net.num_layers()));
    for (const LayerSpec& spec : named.net.layers()) {
      w.U32(static_cast<std::uint32_t>(spec.in));
      w.U32(static_cast<std::uint32_t>(spec.out));
      w.U32(static_cast<std::uint32_t>(spec.activation));
    }
  }
  w.U32(static_cast<std::uint32_t>(checkpoint.arrays.size()));
  for (const auto& array : checkpoint.arrays) {
    w.Str(array.name);
    w.U64(array.values.size());
  }
  for (const auto& named : checkpoint.nets) {
    for (double v : named.net.params()) w.F64(v);
  }
  for (const auto& array : checkpoint.arrays) {
    for (double v : array.values) w.F64(v);
  }
  return w.Take();
}

Checkpoint ParseCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.Raw(4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::kFormat, "bad checkpoint magic");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.component = r.Str();
  ckpt.meta_json = r.Str();
  const std::uint32_t net_count = r.U32();
  for (std::uint32_t n = 0; n < net_count; ++n) {
    NamedNet named;
    named.name = r.Str();
    const std::uint32_t layer_count = r.U32();
    std::vector<LayerSpec> layers;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
      LayerSpec spec;
      spec.in = static_cast<int>(r.U32());
      spec.out = static_cast<int>(r.U32());
      const std::uint32_t act = r.U32();
      if (act > 2) throw Error(ErrorCode::kFormat, "unknown activation tag");
      spec.activation = static_cast<Activation>(act);
      layers.push_back(spec);
    }
    try {
      named.net = Net(std::move(layers));
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat, std::string("bad layer table: ") + e.what());
    }
    ckpt.nets.push_back(std::move(named));
  }
  const std::uint32_t array_count = r.U32();
  std::vector<std::uint64_t> lengths;
  for (std::uint32_t a = 0; a < array_count; ++a) {
    NamedArray array;
    array.name = r.Str();
    lengths.push_back(r.U64());
    ckpt.arrays.push_back(std::move(array));
  }
  for (auto& named : ckpt.nets) {
    for (double& v : named.net.params()) v = r.F64();
  }
  for (std::size_t a = 0; a < ckpt.arrays.size(); ++a) {
    if (lengths[a] > bytes.size() / 8) throw Error(ErrorCode::kFormat, "checkpoint truncated");
    ckpt.arrays[a].values.resize(lengths[a]);
    for (double& v : ckpt.arrays[a].values) v = r.F64();
  }
  if (!r.AtEnd()) throw Error(ErrorCode::kFormat, "trailing bytes after checkpoint payload");
  return ckpt;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void WriteCheckpointFile(const Checkpoint& checkpoint,
                         const std::filesystem::path& path) {
  WriteFileBytes(path, SerializeCheckpoint(checkpoint));
}

Checkpoint ReadCheckpointFile(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadFileBytes(path));
}

std::uint64_t HashParams(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace geodex
