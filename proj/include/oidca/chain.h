// Copyright 2026 The OIDC-A Reference Authors.
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

#ifndef OIDCA_CHAIN_H_
#define OIDCA_CHAIN_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oidca/clock.h"
#include "oidca/constraints.h"
#include "oidca/jose.h"

namespace oidca {

// One delegation event: `sub` hands `scope` to `aud`, vouched for by `iss`.
struct DelegationStep {
  std::string iss;
  std::string sub;
  std::string aud;
  NumericDate delegated_at = 0;
  std::string scope;
  std::optional<std::string> purpose;
  std::optional<ConstraintSet> constraints;
  std::optional<std::string> jti;
  // Detached compact JWS over the step (all members except this one).
  // Wire key: "step_signature".
  std::optional<std::string> signature;

  bool operator==(const DelegationStep&) const = default;
};

// Ordered from the original user to the current agent.
using DelegationChain = std::vector<DelegationStep>;

inline constexpr std::string_view kStepSignatureKey = "step_signature";

// Splits a space-separated scope string. Throws Error(kMalformedScope) on
// an empty string, empty tokens (repeated or edge whitespace), tab/newline
// separators, or duplicate tokens.
std::vector<std::string> parse_scope(std::string_view scope);

// Throws Error(kMalformedClaim) when the step is structurally invalid:
// empty iss/sub/aud, sub == aud, negative delegated_at, malformed scope.
void check_step_structure(const DelegationStep& step);

DelegationStep parse_delegation_step(const nlohmann::json& value);
DelegationChain parse_delegation_chain(const nlohmann::json& value);
nlohmann::json to_json(const DelegationStep& step);
nlohmann::json to_json(const DelegationChain& chain);

// Returns a copy of `step` carrying a detached signature by `key`.
DelegationStep sign_step(DelegationStep step, const jose::PrivateKey& key);
// True when the step's signature verifies under `keys` and its payload is
// exactly the step's other members.
bool verify_step_signature(const DelegationStep& step, const jose::KeySet& keys);

}  // namespace oidca

#endif  // OIDCA_CHAIN_H_
