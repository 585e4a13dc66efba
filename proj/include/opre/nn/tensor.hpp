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

#ifndef OPRE_NN_TENSOR_HPP_
#define OPRE_NN_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace opre {

// Dense row-major array. Everything the shipped architectures need is rank 1
// or 2; rank-2 tensors are [rows, cols].
template <typename Real>
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != NumElements(shape)) {
      throw std::invalid_argument("Tensor: data size does not match shape");
    }
  }

  static int64_t NumElements(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int extent : shape) n *= extent;
    return n;
  }

  static Tensor Zeros(std::vector<int> shape) {
    int64_t n = NumElements(shape);
    return Tensor(std::move(shape), std::vector<Real>(static_cast<size_t>(n), Real(0)));
  }

  static Tensor Full(std::vector<int> shape, Real value) {
    int64_t n = NumElements(shape);
    return Tensor(std::move(shape), std::vector<Real>(static_cast<size_t>(n), value));
  }

  static Tensor Scalar(Real value) { return Tensor({1, 1}, {value}); }

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? static_cast<int>(size()) / rows() : shape[1]; }

  Real& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  Real at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  template <typename Other>
  Tensor<Other> Cast() const {
    Tensor<Other> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (Real v : data) out.data.push_back(static_cast<Other>(v));
    return out;
  }

  bool AllFinite() const {
    for (Real v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// The kernels below are deliberately noinline: the actor path and the tape
// path both call them, and a single compiled body guarantees bit-identical
// floating-point results (inlining can change fused-multiply-add contraction
// per call site).
#if defined(__GNUC__) || defined(__clang__)
#define OPRE_NOINLINE __attribute__((noinline))
#else
#define OPRE_NOINLINE
#endif

// C[m,n] += A[m,p] * B[p,n]
template <typename Real>
OPRE_NOINLINE void GemmNN(const Real* a, const Real* b, Real* c, int m, int p, int n) {
  for (int i = 0; i < m; ++i) {
    const Real* ai = a + static_cast<size_t>(i) * p;
    Real* ci = c + static_cast<size_t>(i) * n;
    for (int k = 0; k < p; ++k) {
      const Real aik = ai[k];
      const Real* bk = b + static_cast<size_t>(k) * n;
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

// C[m,n] += A[m,p] * B[n,p]^T
template <typename Real>
OPRE_NOINLINE void GemmNT(const Real* a, const Real* b, Real* c, int m, int p, int n) {
  for (int i = 0; i < m; ++i) {
    const Real* ai = a + static_cast<size_t>(i) * p;
    Real* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const Real* bj = b + static_cast<size_t>(j) * p;
      Real acc = 0;
      for (int k = 0; k < p; ++k) acc += ai[k] * bj[k];
      ci[j] += acc;
    }
  }
}

// C[m,n] += A[p,m]^T * B[p,n]
template <typename Real>
OPRE_NOINLINE void GemmTN(const Real* a, const Real* b, Real* c, int m, int p, int n) {
  for (int k = 0; k < p; ++k) {
    const Real* ak = a + static_cast<size_t>(k) * m;
    const Real* bk = b + static_cast<size_t>(k) * n;
    for (int i = 0; i < m; ++i) {
      const Real aki = ak[i];
      Real* ci = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += aki * bk[j];
    }
  }
}

template <typename Real>
OPRE_NOINLINE void SoftmaxRowsInPlace(Real* data, int m, int n) {
  for (int i = 0; i < m; ++i) {
    Real* row = data + static_cast<size_t>(i) * n;
    Real mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    Real sum = 0;
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (int j = 0; j < n; ++j) row[j] /= sum;
  }
}

// One batch row of an LSTM cell's elementwise stage. `g` holds the four
// pre-activation gate blocks (input, forget, cell, output) and is replaced by
// the activated gates; c_prev must not alias c_out.
template <typename Real>
OPRE_NOINLINE void LstmActivateRow(Real* g, const Real* c_prev, Real* h_out, Real* c_out,
                                   int hidden) {
  for (int j = 0; j < hidden; ++j) {
    const Real ig = Real(1) / (Real(1) + std::exp(-g[j]));
    const Real fg = Real(1) / (Real(1) + std::exp(-g[hidden + j]));
    const Real gg = std::tanh(g[2 * hidden + j]);
    const Real og = Real(1) / (Real(1) + std::exp(-g[3 * hidden + j]));
    g[j] = ig;
    g[hidden + j] = fg;
    g[2 * hidden + j] = gg;
    g[3 * hidden + j] = og;
    const Real cnew = fg * c_prev[j] + ig * gg;
    c_out[j] = cnew;
    h_out[j] = og * std::tanh(cnew);
  }
}

template <typename Real>
OPRE_NOINLINE void ScaleRowInPlace(Real* row, Real s, int n) {
  for (int j = 0; j < n; ++j) row[j] *= s;
}

template <typename Real>
OPRE_NOINLINE void AddRowInPlace(Real* dst, const Real* src, int64_t n) {
  for (int64_t j = 0; j < n; ++j) dst[j] += src[j];
}

}  // namespace opre

#endif  // OPRE_NN_TENSOR_HPP_
