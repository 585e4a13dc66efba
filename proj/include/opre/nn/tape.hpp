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

#ifndef OPRE_NN_TAPE_HPP_
#define OPRE_NN_TAPE_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opre/nn/params.hpp"
#include "opre/nn/tensor.hpp"

namespace opre {

// Eager reverse-mode tape for one forward pass. Values are computed as ops
// are recorded; Backward replays the recorded closures in exact reverse
// order, accumulating gradients additively for shared inputs.
template <typename Real>
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  explicit Tape(const ParameterStore<Real>* params = nullptr) : params_(params) {}

  const Tensor<Real>& Value(Var v) const { return nodes_[Check(v)].value; }
  const Tensor<Real>& Grad(Var v) const { return nodes_[Check(v)].grad; }

  Var Constant(Tensor<Real> value) {
    return NewNode(std::move(value), nullptr);
  }

  // Parameter leaf; repeated lookups of the same name share one node.
  Var Param(const std::string& name) {
    if (params_ == nullptr) throw std::logic_error("Tape: no parameter store bound");
    auto it = param_vars_.find(name);
    if (it != param_vars_.end()) return it->second;
    Var v = NewNode(params_->Get(name), nullptr);
    nodes_[v.id].param_name = name;
    param_vars_.emplace(name, v);
    return v;
  }

  // y = x * w + b with b broadcast over rows.
  Var Dense(Var x, Var w, Var b) {
    const Tensor<Real>& xv = Value(x);
    const Tensor<Real>& wv = Value(w);
    const Tensor<Real>& bv = Value(b);
    const int m = xv.rows(), p = xv.cols(), n = wv.cols();
    if (wv.rows() != p || bv.size() != n) throw std::invalid_argument("Dense: shape mismatch");
    Tensor<Real> out = Tensor<Real>::Zeros({m, n});
    for (int i = 0; i < m; ++i) {
      std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + static_cast<size_t>(i) * n);
    }
    GemmNN(xv.data.data(), wv.data.data(), out.data.data(), m, p, n);
    return NewNode(std::move(out), [x, w, b, m, p, n](Tape& t, const Tensor<Real>& dy, int) {
      GemmNT(dy.data.data(), t.Raw(w).data.data(), t.GradRaw(x).data.data(), m, n, p);
      GemmTN(t.Raw(x).data.data(), dy.data.data(), t.GradRaw(w).data.data(), p, m, n);
      Tensor<Real>& db = t.GradRaw(b);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) db.data[j] += dy.data[static_cast<size_t>(i) * n + j];
      }
    });
  }

  // Valid (no padding) cross-correlation over a length-L sequence with in_ch
  // channels. x rows are laid out (position, channel); kernel is
  // [width*in_ch, out_ch].
  Var Conv1d(Var x, int length, int in_ch, Var kernel, Var bias) {
    const Tensor<Real>& xv = Value(x);
    const Tensor<Real>& kv = Value(kernel);
    const Tensor<Real>& bv = Value(bias);
    if (xv.cols() != length * in_ch) throw std::invalid_argument("Conv1d: input shape mismatch");
    if (kv.rows() % in_ch != 0) throw std::invalid_argument("Conv1d: kernel shape mismatch");
    const int width = kv.rows() / in_ch;
    if (width > length) throw std::invalid_argument("Conv1d: kernel wider than input");
    const int out_ch = kv.cols();
    if (bv.size() != out_ch) throw std::invalid_argument("Conv1d: bias shape mismatch");
    const int out_len = length - width + 1;
    const int batch = xv.rows();

    Tensor<Real> out = Tensor<Real>::Zeros({batch, out_len * out_ch});
    for (int b = 0; b < batch; ++b) {
      const Real* row = xv.data.data() + static_cast<size_t>(b) * xv.cols();
      Real* orow = out.data.data() + static_cast<size_t>(b) * out.cols();
      for (int l = 0; l < out_len; ++l) {
        for (int co = 0; co < out_ch; ++co) orow[l * out_ch + co] = bv.data[co];
        GemmNN(row + static_cast<size_t>(l) * in_ch, kv.data.data(), orow + static_cast<size_t>(l) * out_ch,
               1, width * in_ch, out_ch);
      }
    }
    return NewNode(std::move(out),
                   [x, kernel, bias, length, in_ch, width, out_ch, out_len, batch](
                       Tape& t, const Tensor<Real>& dy, int) {
                     Tensor<Real>& dx = t.GradRaw(x);
                     Tensor<Real>& dk = t.GradRaw(kernel);
                     Tensor<Real>& db = t.GradRaw(bias);
                     const Tensor<Real>& xv = t.Raw(x);
                     const Tensor<Real>& kv = t.Raw(kernel);
                     for (int b = 0; b < batch; ++b) {
                       const Real* xrow = xv.data.data() + static_cast<size_t>(b) * xv.cols();
                       Real* dxrow = dx.data.data() + static_cast<size_t>(b) * dx.cols();
                       const Real* dyrow = dy.data.data() + static_cast<size_t>(b) * dy.cols();
                       for (int l = 0; l < out_len; ++l) {
                         const Real* dyl = dyrow + static_cast<size_t>(l) * out_ch;
                         for (int co = 0; co < out_ch; ++co) db.data[co] += dyl[co];
                         // dx_patch += dy_l * k^T ; dk += x_patch^T * dy_l
                         GemmNT(dyl, kv.data.data(), dxrow + static_cast<size_t>(l) * in_ch, 1, out_ch,
                                width * in_ch);
                         GemmTN(xrow + static_cast<size_t>(l) * in_ch, dyl, dk.data.data(), width * in_ch,
                                1, out_ch);
                       }
                     }
                   });
  }

  // Standard LSTM cell (sigmoid gates, tanh activations), gate order
  // (input, forget, cell, output). Returns [h' | c'] concatenated; use
  // LstmOutput/LstmCell to slice.
  Var LstmStep(Var x, Var h, Var c, Var wx, Var wh, Var b) {
    const Tensor<Real>& xv = Value(x);
    const Tensor<Real>& hv = Value(h);
    const Tensor<Real>& cv = Value(c);
    const Tensor<Real>& wxv = Value(wx);
    const Tensor<Real>& whv = Value(wh);
    const Tensor<Real>& bv = Value(b);
    const int batch = xv.rows();
    const int in = xv.cols();
    const int hidden = hv.cols();
    if (wxv.rows() != in || wxv.cols() != 4 * hidden || whv.rows() != hidden ||
        whv.cols() != 4 * hidden || bv.size() != 4 * hidden || cv.cols() != hidden ||
        hv.rows() != batch || cv.rows() != batch) {
      throw std::invalid_argument("LstmStep: shape mismatch");
    }
    Tensor<Real> gates = Tensor<Real>::Zeros({batch, 4 * hidden});
    for (int i = 0; i < batch; ++i) {
      std::copy(bv.data.begin(), bv.data.end(), gates.data.begin() + static_cast<size_t>(i) * 4 * hidden);
    }
    GemmNN(xv.data.data(), wxv.data.data(), gates.data.data(), batch, in, 4 * hidden);
    GemmNN(hv.data.data(), whv.data.data(), gates.data.data(), batch, hidden, 4 * hidden);

    Tensor<Real> acts = gates;  // activated gates, cached for backward
    Tensor<Real> out = Tensor<Real>::Zeros({batch, 2 * hidden});
    for (int i = 0; i < batch; ++i) {
      Real* g = acts.data.data() + static_cast<size_t>(i) * 4 * hidden;
      const Real* cprev = cv.data.data() + static_cast<size_t>(i) * hidden;
      Real* orow = out.data.data() + static_cast<size_t>(i) * 2 * hidden;
      LstmActivateRow(g, cprev, orow, orow + hidden, hidden);
    }
    return NewNode(std::move(out), [x, h, c, wx, wh, b, batch, in, hidden, acts = std::move(acts)](
                                       Tape& t, const Tensor<Real>& dy, int self) {
      const Tensor<Real>& outv = t.nodes_[self].value;
      Tensor<Real> dgates = Tensor<Real>::Zeros({batch, 4 * hidden});
      Tensor<Real>& dc_prev = t.GradRaw(c);
      const Tensor<Real>& cv = t.Raw(c);
      for (int i = 0; i < batch; ++i) {
        const Real* g = acts.data.data() + static_cast<size_t>(i) * 4 * hidden;
        const Real* orow = outv.data.data() + static_cast<size_t>(i) * 2 * hidden;
        const Real* dyrow = dy.data.data() + static_cast<size_t>(i) * 2 * hidden;
        Real* dg = dgates.data.data() + static_cast<size_t>(i) * 4 * hidden;
        Real* dcp = dc_prev.data.data() + static_cast<size_t>(i) * hidden;
        const Real* cprev = cv.data.data() + static_cast<size_t>(i) * hidden;
        for (int j = 0; j < hidden; ++j) {
          const Real ig = g[j], fg = g[hidden + j], gg = g[2 * hidden + j], og = g[3 * hidden + j];
          const Real cnew = orow[hidden + j];
          const Real tc = std::tanh(cnew);
          const Real dh = dyrow[j];
          Real dc = dyrow[hidden + j] + dh * og * (Real(1) - tc * tc);
          dg[3 * hidden + j] = dh * tc * og * (Real(1) - og);
          dg[j] = dc * gg * ig * (Real(1) - ig);
          dg[hidden + j] = dc * cprev[j] * fg * (Real(1) - fg);
          dg[2 * hidden + j] = dc * ig * (Real(1) - gg * gg);
          dcp[j] += dc * fg;
        }
      }
      GemmNT(dgates.data.data(), t.Raw(wx).data.data(), t.GradRaw(x).data.data(), batch, 4 * hidden, in);
      GemmNT(dgates.data.data(), t.Raw(wh).data.data(), t.GradRaw(h).data.data(), batch, 4 * hidden,
             hidden);
      GemmTN(t.Raw(x).data.data(), dgates.data.data(), t.GradRaw(wx).data.data(), in, batch, 4 * hidden);
      GemmTN(t.Raw(h).data.data(), dgates.data.data(), t.GradRaw(wh).data.data(), hidden, batch,
             4 * hidden);
      Tensor<Real>& db = t.GradRaw(b);
      for (int i = 0; i < batch; ++i) {
        for (int j = 0; j < 4 * hidden; ++j) db.data[j] += dgates.data[static_cast<size_t>(i) * 4 * hidden + j];
      }
    });
  }

  Var LstmOutput(Var hc) { return SliceCols(hc, 0, Value(hc).cols() / 2); }
  Var LstmCell(Var hc) { return SliceCols(hc, Value(hc).cols() / 2, Value(hc).cols() / 2); }

  Var SliceCols(Var x, int begin, int count) {
    const Tensor<Real>& xv = Value(x);
    const int m = xv.rows(), n = xv.cols();
    if (begin < 0 || begin + count > n) throw std::invalid_argument("SliceCols: out of range");
    Tensor<Real> out = Tensor<Real>::Zeros({m, count});
    for (int i = 0; i < m; ++i) {
      std::copy(xv.data.begin() + static_cast<size_t>(i) * n + begin,
                xv.data.begin() + static_cast<size_t>(i) * n + begin + count,
                out.data.begin() + static_cast<size_t>(i) * count);
    }
    return NewNode(std::move(out), [x, begin, count, m, n](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < count; ++j) {
          dx.data[static_cast<size_t>(i) * n + begin + j] += dy.data[static_cast<size_t>(i) * count + j];
        }
      }
    });
  }

  Var ConcatCols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("ConcatCols: empty");
    const int m = Value(parts[0]).rows();
    int total = 0;
    for (Var p : parts) {
      if (Value(p).rows() != m) throw std::invalid_argument("ConcatCols: row mismatch");
      total += Value(p).cols();
    }
    Tensor<Real> out = Tensor<Real>::Zeros({m, total});
    int offset = 0;
    for (Var p : parts) {
      const Tensor<Real>& pv = Value(p);
      for (int i = 0; i < m; ++i) {
        std::copy(pv.data.begin() + static_cast<size_t>(i) * pv.cols(),
                  pv.data.begin() + static_cast<size_t>(i + 1) * pv.cols(),
                  out.data.begin() + static_cast<size_t>(i) * total + offset);
      }
      offset += pv.cols();
    }
    return NewNode(std::move(out), [parts, m, total](Tape& t, const Tensor<Real>& dy, int) {
      int offset = 0;
      for (Var p : parts) {
        Tensor<Real>& dp = t.GradRaw(p);
        const int n = dp.cols();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            dp.data[static_cast<size_t>(i) * n + j] += dy.data[static_cast<size_t>(i) * total + offset + j];
          }
        }
        offset += n;
      }
    });
  }

  Var Add(Var a, Var b) {
    CheckSameShape(a, b, "Add");
    Tensor<Real> out = Value(a);
    const Tensor<Real>& bv = Value(b);
    AddRowInPlace(out.data.data(), bv.data.data(), out.size());
    return NewNode(std::move(out), [a, b](Tape& t, const Tensor<Real>& dy, int) {
      AccumAll(t.GradRaw(a), dy);
      AccumAll(t.GradRaw(b), dy);
    });
  }

  Var Sub(Var a, Var b) {
    CheckSameShape(a, b, "Sub");
    Tensor<Real> out = Value(a);
    const Tensor<Real>& bv = Value(b);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv.data[i];
    return NewNode(std::move(out), [a, b](Tape& t, const Tensor<Real>& dy, int) {
      AccumAll(t.GradRaw(a), dy);
      Tensor<Real>& db = t.GradRaw(b);
      for (size_t i = 0; i < dy.data.size(); ++i) db.data[i] -= dy.data[i];
    });
  }

  Var Mul(Var a, Var b) {
    CheckSameShape(a, b, "Mul");
    Tensor<Real> out = Value(a);
    const Tensor<Real>& bv = Value(b);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
    return NewNode(std::move(out), [a, b](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& da = t.GradRaw(a);
      Tensor<Real>& db = t.GradRaw(b);
      const Tensor<Real>& av = t.Raw(a);
      const Tensor<Real>& bv = t.Raw(b);
      for (size_t i = 0; i < dy.data.size(); ++i) {
        da.data[i] += dy.data[i] * bv.data[i];
        db.data[i] += dy.data[i] * av.data[i];
      }
    });
  }

  Var Scale(Var x, Real k) {
    Tensor<Real> out = Value(x);
    for (Real& v : out.data) v *= k;
    return NewNode(std::move(out), [x, k](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += k * dy.data[i];
    });
  }

  Var Relu(Var x) {
    Tensor<Real> out = Value(x);
    for (Real& v : out.data) v = std::max(v, Real(0));
    return NewNode(std::move(out), [x](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      const Tensor<Real>& xv = t.Raw(x);
      for (size_t i = 0; i < dy.data.size(); ++i) {
        if (xv.data[i] > Real(0)) dx.data[i] += dy.data[i];
      }
    });
  }

  Var Tanh(Var x) {
    Tensor<Real> out = Value(x);
    for (Real& v : out.data) v = std::tanh(v);
    return NewNode(std::move(out), [x](Tape& t, const Tensor<Real>& dy, int self) {
      Tensor<Real>& dx = t.GradRaw(x);
      const Tensor<Real>& yv = t.nodes_[self].value;
      for (size_t i = 0; i < dy.data.size(); ++i) {
        dx.data[i] += dy.data[i] * (Real(1) - yv.data[i] * yv.data[i]);
      }
    });
  }

  Var Square(Var x) {
    Tensor<Real> out = Value(x);
    for (Real& v : out.data) v *= v;
    return NewNode(std::move(out), [x](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      const Tensor<Real>& xv = t.Raw(x);
      for (size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += Real(2) * dy.data[i] * xv.data[i];
    });
  }

  // log with a floor so that vanishing probabilities cannot produce -inf.
  Var LogEps(Var x, Real eps = Real(1e-30)) {
    Tensor<Real> out = Value(x);
    for (Real& v : out.data) v = std::log(std::max(v, eps));
    return NewNode(std::move(out), [x, eps](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      const Tensor<Real>& xv = t.Raw(x);
      for (size_t i = 0; i < dy.data.size(); ++i) {
        if (xv.data[i] > eps) dx.data[i] += dy.data[i] / xv.data[i];
      }
    });
  }

  Var Softmax(Var x) {
    Tensor<Real> out = RowwiseSoftmax(Value(x));
    return NewNode(std::move(out), [x](Tape& t, const Tensor<Real>& dy, int self) {
      const Tensor<Real>& yv = t.nodes_[self].value;
      Tensor<Real>& dx = t.GradRaw(x);
      const int m = yv.rows(), n = yv.cols();
      for (int i = 0; i < m; ++i) {
        const Real* yi = yv.data.data() + static_cast<size_t>(i) * n;
        const Real* di = dy.data.data() + static_cast<size_t>(i) * n;
        Real dot = 0;
        for (int j = 0; j < n; ++j) dot += yi[j] * di[j];
        Real* dxi = dx.data.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dxi[j] += yi[j] * (di[j] - dot);
      }
    });
  }

  Var LogSoftmax(Var x) {
    const Tensor<Real>& xv = Value(x);
    Tensor<Real> out = xv;
    const int m = xv.rows(), n = xv.cols();
    for (int i = 0; i < m; ++i) {
      Real* row = out.data.data() + static_cast<size_t>(i) * n;
      Real mx = row[0];
      for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
      Real sum = 0;
      for (int j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
      const Real lse = mx + std::log(sum);
      for (int j = 0; j < n; ++j) row[j] -= lse;
    }
    return NewNode(std::move(out), [x](Tape& t, const Tensor<Real>& dy, int self) {
      const Tensor<Real>& yv = t.nodes_[self].value;
      Tensor<Real>& dx = t.GradRaw(x);
      const int m = yv.rows(), n = yv.cols();
      for (int i = 0; i < m; ++i) {
        const Real* yi = yv.data.data() + static_cast<size_t>(i) * n;
        const Real* di = dy.data.data() + static_cast<size_t>(i) * n;
        Real sum = 0;
        for (int j = 0; j < n; ++j) sum += di[j];
        Real* dxi = dx.data.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dxi[j] += di[j] - std::exp(yi[j]) * sum;
      }
    });
  }

  Var Sum(Var x) {
    Real total = 0;
    for (Real v : Value(x).data) total += v;
    return NewNode(Tensor<Real>::Scalar(total), [x](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (Real& v : dx.data) v += dy.data[0];
    });
  }

  Var Mean(Var x) { return Scale(Sum(x), Real(1) / static_cast<Real>(Value(x).size())); }

  Var RowSum(Var x) {
    const Tensor<Real>& xv = Value(x);
    const int m = xv.rows(), n = xv.cols();
    Tensor<Real> out = Tensor<Real>::Zeros({m, 1});
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) out.data[i] += xv.data[static_cast<size_t>(i) * n + j];
    }
    return NewNode(std::move(out), [x, m, n](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) dx.data[static_cast<size_t>(i) * n + j] += dy.data[i];
      }
    });
  }

  Var ColSum(Var x) {
    const Tensor<Real>& xv = Value(x);
    const int m = xv.rows(), n = xv.cols();
    Tensor<Real> out = Tensor<Real>::Zeros({1, n});
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) out.data[j] += xv.data[static_cast<size_t>(i) * n + j];
    }
    return NewNode(std::move(out), [x, m, n](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) dx.data[static_cast<size_t>(i) * n + j] += dy.data[j];
      }
    });
  }

  // [B,K] x [B,K] -> [B,1], per-row inner product.
  Var RowDot(Var a, Var b) { return RowSum(Mul(a, b)); }

  // x[B,N] scaled per row by s[B,1].
  Var ScaleRows(Var x, Var s) {
    const Tensor<Real>& xv = Value(x);
    const Tensor<Real>& sv = Value(s);
    const int m = xv.rows(), n = xv.cols();
    if (sv.rows() != m || sv.cols() != 1) throw std::invalid_argument("ScaleRows: scale must be [B,1]");
    Tensor<Real> out = xv;
    for (int i = 0; i < m; ++i) {
      ScaleRowInPlace(out.data.data() + static_cast<size_t>(i) * n, sv.data[i], n);
    }
    return NewNode(std::move(out), [x, s, m, n](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      Tensor<Real>& ds = t.GradRaw(s);
      const Tensor<Real>& xv = t.Raw(x);
      const Tensor<Real>& sv = t.Raw(s);
      for (int i = 0; i < m; ++i) {
        Real acc = 0;
        for (int j = 0; j < n; ++j) {
          const size_t k = static_cast<size_t>(i) * n + j;
          dx.data[k] += dy.data[k] * sv.data[i];
          acc += dy.data[k] * xv.data[k];
        }
        ds.data[i] += acc;
      }
    });
  }

  Var SelectCol(Var x, int col) { return SliceCols(x, col, 1); }

  // out[i,0] = x[i, idx[i]]
  Var GatherRows(Var x, std::vector<int> idx) {
    const Tensor<Real>& xv = Value(x);
    const int m = xv.rows(), n = xv.cols();
    if (static_cast<int>(idx.size()) != m) throw std::invalid_argument("GatherRows: index size mismatch");
    Tensor<Real> out = Tensor<Real>::Zeros({m, 1});
    for (int i = 0; i < m; ++i) {
      if (idx[i] < 0 || idx[i] >= n) throw std::out_of_range("GatherRows: index out of range");
      out.data[i] = xv.data[static_cast<size_t>(i) * n + idx[i]];
    }
    return NewNode(std::move(out), [x, idx = std::move(idx), n](Tape& t, const Tensor<Real>& dy, int) {
      Tensor<Real>& dx = t.GradRaw(x);
      for (size_t i = 0; i < idx.size(); ++i) dx.data[i * n + idx[i]] += dy.data[i];
    });
  }

  Var StopGradient(Var x) {
    return NewNode(Value(x), nullptr);
  }

  // Exact reverse-mode derivatives of a scalar loss with respect to every
  // parameter touched by the forward pass; untouched parameters of the bound
  // store get zero gradients.
  GradientMap<Real> Backward(Var loss) {
    if (Value(loss).size() != 1) throw std::logic_error("Backward: loss must be scalar");
    nodes_[Check(loss)].grad.data[0] = Real(1);
    for (int i = loss.id; i >= 0; --i) {
      Node& node = nodes_[i];
      if (node.backward) node.backward(*this, node.grad, i);
    }
    GradientMap<Real> grads;
    if (params_ != nullptr) {
      for (const std::string& name : params_->Names()) {
        auto it = param_vars_.find(name);
        if (it != param_vars_.end()) {
          grads[name] = nodes_[it->second.id].grad;
        } else {
          grads[name] = Tensor<Real>::Zeros(params_->Get(name).shape);
        }
      }
    }
    return grads;
  }

  size_t NumNodes() const { return nodes_.size(); }

 private:
  using BackwardFn = std::function<void(Tape&, const Tensor<Real>&, int)>;

  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;
    BackwardFn backward;
    std::string param_name;
  };

  friend struct NodeAccess;

  static Real Sigmoid(Real v) { return Real(1) / (Real(1) + std::exp(-v)); }

  static void AccumAll(Tensor<Real>& dst, const Tensor<Real>& src) {
    for (size_t i = 0; i < src.data.size(); ++i) dst.data[i] += src.data[i];
  }

  static Tensor<Real> RowwiseSoftmax(const Tensor<Real>& x) {
    Tensor<Real> out = x;
    SoftmaxRowsInPlace(out.data.data(), x.rows(), x.cols());
    return out;
  }

  int Check(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
      throw std::out_of_range("Tape: invalid var");
    }
    return v.id;
  }

  void CheckSameShape(Var a, Var b, const char* op) const {
    if (Value(a).shape != Value(b).shape) {
      throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
  }

  const Tensor<Real>& Raw(Var v) { return nodes_[v.id].value; }
  Tensor<Real>& GradRaw(Var v) { return nodes_[v.id].grad; }

  Var NewNode(Tensor<Real> value, BackwardFn backward) {
    Node node;
    node.grad = Tensor<Real>::Zeros(value.shape);
    node.value = std::move(value);
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const ParameterStore<Real>* params_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, Var> param_vars_;
};

}  // namespace opre

#endif  // OPRE_NN_TAPE_HPP_
