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

#ifndef OPRE_NN_PARAMS_HPP_
#define OPRE_NN_PARAMS_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "opre/nn/tensor.hpp"
#include "opre/util/hash.hpp"
#include "opre/util/rng.hpp"

namespace opre {

template <typename Real>
using GradientMap = std::map<std::string, Tensor<Real>>;

// Ordered, named parameter arrays. Shapes are immutable after creation;
// versions increase monotonically with every optimizer update. A const
// ParameterStore behind a shared_ptr is the parameter snapshot actors sync.
template <typename Real>
class ParameterStore {
 public:
  void Add(const std::string& name, Tensor<Real> tensor) {
    if (index_.contains(name)) throw std::invalid_argument("ParameterStore: duplicate name " + name);
    index_[name] = static_cast<int>(names_.size());
    names_.push_back(name);
    tensors_.push_back(std::move(tensor));
  }

  bool Has(const std::string& name) const { return index_.contains(name); }

  const Tensor<Real>& Get(const std::string& name) const { return tensors_[IndexOf(name)]; }

  Tensor<Real>& Mutable(const std::string& name) {
    Tensor<Real>& t = tensors_[IndexOf(name)];
    return t;
  }

  const std::vector<std::string>& Names() const { return names_; }
  int64_t NumParameters() const {
    int64_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

  uint64_t version() const { return version_; }
  void set_version(uint64_t v) { version_ = v; }
  void IncrementVersion() { ++version_; }

  // Hash over names and shapes; identifies the architecture, not the values.
  std::string ArchHash() const {
    std::ostringstream out;
    for (size_t i = 0; i < names_.size(); ++i) {
      out << names_[i] << ":";
      for (int extent : tensors_[i].shape) out << extent << ",";
      out << ";";
    }
    return HexHash(out.str());
  }

  template <typename Other>
  ParameterStore<Other> Cast() const {
    ParameterStore<Other> out;
    for (size_t i = 0; i < names_.size(); ++i) {
      out.Add(names_[i], tensors_[i].template Cast<Other>());
    }
    out.set_version(version_);
    return out;
  }

 private:
  int IndexOf(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParameterStore: unknown name " + name);
    return it->second;
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<Tensor<Real>> tensors_;
  uint64_t version_ = 0;
};

// Fan-in scaled uniform init, U(+-sqrt(3/fan_in)), variance 1/fan_in.
template <typename Real>
Tensor<Real> FanInUniform(Rng& rng, int fan_in, int fan_out) {
  const double bound = std::sqrt(3.0 / fan_in);
  Tensor<Real> t = Tensor<Real>::Zeros({fan_in, fan_out});
  for (Real& v : t.data) v = static_cast<Real>(rng.UniformDouble(-bound, bound));
  return t;
}

template <typename Real>
Tensor<Real> FanInUniformShaped(Rng& rng, std::vector<int> shape, int fan_in) {
  const double bound = std::sqrt(3.0 / fan_in);
  Tensor<Real> t = Tensor<Real>::Zeros(std::move(shape));
  for (Real& v : t.data) v = static_cast<Real>(rng.UniformDouble(-bound, bound));
  return t;
}

template <typename Real>
Tensor<Real> ZeroBias(int n) {
  return Tensor<Real>::Zeros({1, n});
}

}  // namespace opre

#endif  // OPRE_NN_PARAMS_HPP_
