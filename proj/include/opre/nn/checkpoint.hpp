// Copyright 2026 The OPRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPRE_NN_CHECKPOINT_HPP_
#define OPRE_NN_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opre/nn/params.hpp"

namespace opre {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

// Checkpoint layout (little-endian):
//   magic "OPRECKP1", format version u32
//   arch hash (u32 length + bytes), parameter version u64
//   tensor count u32, then per tensor: name (u32 + bytes), rank u32,
//   dims i32 each, float32 data
//   optimizer flag u8; if 1: step i64, then per tensor float64 first and
//   second moments in the same order
inline constexpr char kCheckpointMagic[8] = {'O', 'P', 'R', 'E', 'C', 'K', 'P', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct OptimizerSnapshot {
  int64_t step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

namespace ckpt_detail {

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void WriteString(std::ostream& out, const std::string& s) {
  WritePod(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

inline std::string ReadString(std::istream& in) {
  const uint32_t n = ReadPod<uint32_t>(in);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace ckpt_detail

template <typename Real>
void SaveCheckpoint(const std::string& path, const ParameterStore<Real>& params,
                    const OptimizerSnapshot* optimizer = nullptr) {
  using namespace ckpt_detail;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  WritePod(out, kCheckpointVersion);
  WriteString(out, params.ArchHash());
  WritePod(out, static_cast<uint64_t>(params.version()));
  WritePod(out, static_cast<uint32_t>(params.Names().size()));
  for (const std::string& name : params.Names()) {
    const Tensor<Real>& t = params.Get(name);
    WriteString(out, name);
    WritePod(out, static_cast<uint32_t>(t.shape.size()));
    for (int extent : t.shape) WritePod(out, static_cast<int32_t>(extent));
    for (Real v : t.data) WritePod(out, static_cast<float>(v));
  }
  WritePod(out, static_cast<uint8_t>(optimizer != nullptr ? 1 : 0));
  if (optimizer != nullptr) {
    WritePod(out, static_cast<int64_t>(optimizer->step));
    for (const std::string& name : params.Names()) {
      const auto mit = optimizer->m.find(name);
      const auto vit = optimizer->v.find(name);
      const size_t n = params.Get(name).data.size();
      for (size_t i = 0; i < n; ++i) {
        WritePod(out, mit != optimizer->m.end() ? mit->second[i] : 0.0);
      }
      for (size_t i = 0; i < n; ++i) {
        WritePod(out, vit != optimizer->v.end() ? vit->second[i] : 0.0);
      }
    }
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

struct LoadedCheckpoint {
  ParameterStore<float> params;
  std::string arch_hash;
  std::optional<OptimizerSnapshot> optimizer;
};

inline LoadedCheckpoint LoadCheckpoint(const std::string& path) {
  using namespace ckpt_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic: " + path);
  }
  const uint32_t version = ReadPod<uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }
  LoadedCheckpoint loaded;
  loaded.arch_hash = ReadString(in);
  const uint64_t param_version = ReadPod<uint64_t>(in);
  const uint32_t count = ReadPod<uint32_t>(in);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = ReadString(in);
    const uint32_t rank = ReadPod<uint32_t>(in);
    if (rank > 8) throw std::runtime_error("checkpoint: implausible rank");
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = ReadPod<int32_t>(in);
    const int64_t n = Tensor<float>::NumElements(shape);
    if (n < 0 || n > (int64_t(1) << 30)) throw std::runtime_error("checkpoint: implausible size");
    std::vector<float> data(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(data.data()), n * static_cast<int64_t>(sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
    loaded.params.Add(name, Tensor<float>(std::move(shape), std::move(data)));
  }
  loaded.params.set_version(param_version);
  if (loaded.params.ArchHash() != loaded.arch_hash) {
    throw std::runtime_error("checkpoint: architecture hash mismatch");
  }
  const uint8_t has_optimizer = ReadPod<uint8_t>(in);
  if (has_optimizer == 1) {
    OptimizerSnapshot snap;
    snap.step = ReadPod<int64_t>(in);
    for (const std::string& name : loaded.params.Names()) {
      const size_t n = loaded.params.Get(name).data.size();
      std::vector<double> m(n), v(n);
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n * sizeof(double)));
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
      if (!in) throw std::runtime_error("checkpoint: truncated optimizer state");
      snap.m[name] = std::move(m);
      snap.v[name] = std::move(v);
    }
    loaded.optimizer = std::move(snap);
  }
  return loaded;
}

}  // namespace opre

#endif  // OPRE_NN_CHECKPOINT_HPP_
