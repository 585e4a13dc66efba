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

#ifndef OPRE_NN_GRADCHECK_HPP_
#define OPRE_NN_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "opre/nn/params.hpp"
#include "opre/util/rng.hpp"

namespace opre {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  int checked_elements = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool Pass(double tolerance) const { return max_rel_error < tolerance; }
};

// Central finite differences against analytic gradients, element by element.
// `forward` must be deterministic given the parameters. Parameters with more
// than `max_elements` entries are spot-checked on a random subsample.
inline GradCheckReport GradCheck(
    const std::function<double(const ParameterStore<double>&)>& forward,
    ParameterStore<double>& params, const GradientMap<double>& analytic, double h = 1e-5,
    int max_elements = 10000, uint64_t subsample_seed = 0) {
  GradCheckReport report;
  Rng rng(subsample_seed);
  for (const std::string& name : params.Names()) {
    const auto it = analytic.find(name);
    if (it == analytic.end()) continue;
    Tensor<double>& tensor = params.Mutable(name);
    const Tensor<double>& grad = it->second;

    std::vector<int64_t> elements;
    if (tensor.size() <= max_elements) {
      elements.resize(static_cast<size_t>(tensor.size()));
      for (int64_t i = 0; i < tensor.size(); ++i) elements[static_cast<size_t>(i)] = i;
    } else {
      for (int i = 0; i < max_elements; ++i) {
        elements.push_back(static_cast<int64_t>(rng.UniformInt(static_cast<uint64_t>(tensor.size()))));
      }
    }

    GradCheckEntry entry{name, 0.0, static_cast<int>(elements.size())};
    for (int64_t i : elements) {
      const double original = tensor.data[static_cast<size_t>(i)];
      tensor.data[static_cast<size_t>(i)] = original + h;
      const double plus = forward(params);
      tensor.data[static_cast<size_t>(i)] = original - h;
      const double minus = forward(params);
      tensor.data[static_cast<size_t>(i)] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      const double exact = grad.data[static_cast<size_t>(i)];
      const double scale = std::max({1.0, std::abs(numeric), std::abs(exact)});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(numeric - exact) / scale);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace opre

#endif  // OPRE_NN_GRADCHECK_HPP_
