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

#ifndef OPRE_UTIL_RNG_HPP_
#define OPRE_UTIL_RNG_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace opre {

// xoshiro256** seeded via splitmix64. Output is identical on every platform,
// unlike the std:: distributions, so replays and presets can rely on it.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) { Seed(seed); }

  void Seed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : state_) {
      // splitmix64
      x += 0x9e3779b97f4a7c15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  uint64_t NextU64() {
    uint64_t* s = state_.data();
    const uint64_t result = Rotl(s[1] * 5, 7) * 9;
    const uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = Rotl(s[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound).
  uint64_t UniformInt(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::UniformInt: bound == 0");
    const uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = NextU64();
      if (r >= threshold) return r % bound;
    }
  }

  int UniformIndex(int bound) { return static_cast<int>(UniformInt(static_cast<uint64_t>(bound))); }

  // Uniform double in [0, 1).
  double UniformDouble() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double UniformDouble(double lo, double hi) { return lo + (hi - lo) * UniformDouble(); }

  // Fisher-Yates over indices 0..n-1.
  std::vector<int> Permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = UniformIndex(i + 1);
      std::swap(p[i], p[j]);
    }
    return p;
  }

  // Draws an index from an (unnormalized is NOT allowed) distribution.
  template <typename Container>
  int SampleCategorical(const Container& probs) {
    double u = UniformDouble();
    double acc = 0.0;
    int last = -1;
    int i = 0;
    for (double p : probs) {
      if (p > 0.0) last = i;
      acc += p;
      if (u < acc) return i;
      ++i;
    }
    if (last < 0) throw std::invalid_argument("Rng::SampleCategorical: empty distribution");
    return last;  // u fell into rounding slack at the top
  }

  std::array<uint64_t, 4> Serialize() const { return state_; }
  void Deserialize(const std::array<uint64_t, 4>& s) { state_ = s; }

  friend bool operator==(const Rng& a, const Rng& b) { return a.state_ == b.state_; }

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> state_;
};

}  // namespace opre

#endif  // OPRE_UTIL_RNG_HPP_
