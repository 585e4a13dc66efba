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

#ifndef OPRE_AGENT_VARIANT_HPP_
#define OPRE_AGENT_VARIANT_HPP_

#include <stdexcept>
#include <string>

namespace opre {

enum class AgentVariant {
  kOpre,            // mixture policy/value, policy gradient stopped at q
  kOpreMixPg,       // + a second policy-gradient term through the behavior policy
  kOpreQGrad,       // policy gradient allowed to flow into q
  kPureMix,         // mixture policy trained by plain policy gradient, no q, no KL
  kBaseline,        // conv/LSTM torso, linear policy and value heads
  kBaselineCc,      // value head additionally sees the concealed embedding
  kBaselineAux,     // + auxiliary head predicting opponents' inventories
  kBaselineCcFact,  // factorized critic (q-weighted value mixture) + KL regularizer
};

inline bool IsOpreFamily(AgentVariant v) {
  return v == AgentVariant::kOpre || v == AgentVariant::kOpreMixPg ||
         v == AgentVariant::kOpreQGrad || v == AgentVariant::kPureMix;
}

inline bool UsesConcealedInfo(AgentVariant v) {
  switch (v) {
    case AgentVariant::kOpre:
    case AgentVariant::kOpreMixPg:
    case AgentVariant::kOpreQGrad:
    case AgentVariant::kBaselineCc:
    case AgentVariant::kBaselineAux:  // as prediction target
    case AgentVariant::kBaselineCcFact:
      return true;
    case AgentVariant::kPureMix:
    case AgentVariant::kBaseline:
      return false;
  }
  return false;
}

inline std::string VariantName(AgentVariant v) {
  switch (v) {
    case AgentVariant::kOpre: return "opre";
    case AgentVariant::kOpreMixPg: return "opre_mix_pg";
    case AgentVariant::kOpreQGrad: return "opre_q_grad";
    case AgentVariant::kPureMix: return "pure_mix";
    case AgentVariant::kBaseline: return "baseline";
    case AgentVariant::kBaselineCc: return "baseline_cc";
    case AgentVariant::kBaselineAux: return "baseline_aux";
    case AgentVariant::kBaselineCcFact: return "baseline_cc_fact";
  }
  return "?";
}

inline AgentVariant VariantFromName(const std::string& name) {
  for (AgentVariant v :
       {AgentVariant::kOpre, AgentVariant::kOpreMixPg, AgentVariant::kOpreQGrad,
        AgentVariant::kPureMix, AgentVariant::kBaseline, AgentVariant::kBaselineCc,
        AgentVariant::kBaselineAux, AgentVariant::kBaselineCcFact}) {
    if (VariantName(v) == name) return v;
  }
  throw std::invalid_argument("unknown agent variant: " + name);
}

}  // namespace opre

#endif  // OPRE_AGENT_VARIANT_HPP_
