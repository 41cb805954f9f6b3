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

#ifndef OIDCA_CLAIMS_H_
#define OIDCA_CLAIMS_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oidca/chain.h"
#include "oidca/clock.h"
#include "oidca/constraints.h"

namespace oidca {

inline constexpr std::string_view kEatFormat = "urn:ietf:params:oauth:token-type:eat";

inline constexpr std::array<std::string_view, 6> kStandardAgentTypes = {
    "assistant", "retrieval", "coding", "domain_specific", "autonomous", "supervised",
};

// Every agent claim name, spelled exactly as on the wire.
inline constexpr std::array<std::string_view, 13> kAgentClaimNames = {
    // identity
    "agent_type", "agent_model", "agent_version", "agent_provider",
    "agent_instance_id",
    // delegation and authority
    "delegator_sub", "delegation_chain", "delegation_purpose",
    "delegation_constraints",
    // capability, trust, attestation
    "agent_capabilities", "agent_trust_level", "agent_attestation",
    "agent_context_id",
};

inline constexpr std::array<std::string_view, 4> kRequiredAgentClaims = {
    "agent_type", "agent_model", "agent_provider", "agent_instance_id",
};

// Value of the `agent_attestation` claim.
struct AttestationEvidence {
  std::string format;
  std::optional<std::string> token;
  std::optional<NumericDate> timestamp;

  bool operator==(const AttestationEvidence&) const = default;
};

struct AgentClaims {
  std::string agent_type;
  std::string agent_model;
  std::optional<std::string> agent_version;
  std::string agent_provider;
  std::string agent_instance_id;
  std::optional<std::string> delegator_sub;
  std::optional<DelegationChain> delegation_chain;
  std::optional<std::string> delegation_purpose;
  std::optional<ConstraintSet> delegation_constraints;
  std::optional<std::vector<std::string>> agent_capabilities;
  // Opaque: no value set is defined for trust levels.
  std::optional<std::string> agent_trust_level;
  std::optional<AttestationEvidence> agent_attestation;
  std::optional<std::string> agent_context_id;

  bool operator==(const AgentClaims&) const = default;
};

// Outcome of a grammar check; `reason` is empty on success.
struct Validation {
  bool ok = true;
  std::string reason;

  explicit operator bool() const { return ok; }
  static Validation accept() { return {}; }
  static Validation reject(std::string why) { return {false, std::move(why)}; }
};

// One of the six standard types, or `vendor:type` with both parts drawn
// from [a-z0-9_.-].
Validation validate_agent_type(std::string_view type);
// `segment(:segment)*`, segments from [a-z0-9_.-].
Validation validate_capability_identifier(std::string_view capability);

AttestationEvidence parse_attestation_evidence(const nlohmann::json& value);
nlohmann::json to_json(const AttestationEvidence& evidence);

// Extracts the agent claims from a JWT claims object. Standard OIDC claims
// and unknown claims are ignored. Returns nullopt when none of the four
// required agent claims is present (not an agent token). Throws Error with
// kMalformedClaim, kInvalidAgentType, kInvalidCapability or
// kMissingRequiredClaim.
std::optional<AgentClaims> parse_agent_claims(const nlohmann::json& claims);

// Emits only present claims. Requires `claims` to satisfy its invariants.
nlohmann::json serialize_agent_claims(const AgentClaims& claims);

// Checks the AgentClaims invariants on a value built in code; throws the
// same errors parse_agent_claims would.
void check_agent_claims(const AgentClaims& claims);

}  // namespace oidca

#endif  // OIDCA_CLAIMS_H_
