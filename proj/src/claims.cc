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

#include "oidca/claims.h"

#include <algorithm>

#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

bool is_identifier_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '.' || c == '-';
}

// Number of ':'-separated segments, or 0 if any segment is empty or holds
// a character outside the identifier alphabet.
std::size_t count_segments(std::string_view text) {
  std::size_t segments = 1;
  std::size_t segment_len = 0;
  for (char c : text) {
    if (c == ':') {
      if (segment_len == 0) return 0;
      ++segments;
      segment_len = 0;
    } else if (is_identifier_char(c)) {
      ++segment_len;
    } else {
      return 0;
    }
  }
  return segment_len == 0 ? 0 : segments;
}

std::string get_string(const Json& claims, std::string_view name) {
  const Json& v = claims.at(std::string(name));
  if (!v.is_string()) {
    throw Error(ErrorCode::kMalformedClaim,
                "claim '" + std::string(name) + "' must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& claims, std::string_view name) {
  if (!claims.contains(name)) return std::nullopt;
  return get_string(claims, name);
}

}  // namespace

Validation validate_agent_type(std::string_view type) {
  if (std::find(kStandardAgentTypes.begin(), kStandardAgentTypes.end(), type) !=
      kStandardAgentTypes.end()) {
    return Validation::accept();
  }
  if (type.find(':') == std::string_view::npos) {
    return Validation::reject("'" + std::string(type) +
                              "' is not a standard agent type and has no "
                              "vendor namespace");
  }
  if (count_segments(type) != 2) {
    return Validation::reject("'" + std::string(type) +
                              "' is not a well-formed vendor:type identifier");
  }
  return Validation::accept();
}

Validation validate_capability_identifier(std::string_view capability) {
  if (count_segments(capability) == 0) {
    return Validation::reject("'" + std::string(capability) +
                              "' is not a well-formed capability identifier");
  }
  return Validation::accept();
}

AttestationEvidence parse_attestation_evidence(const Json& value) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kMalformedClaim, "agent_attestation must be an object");
  }
  AttestationEvidence ev;
  auto format = value.find("format");
  if (format == value.end() || !format->is_string() ||
      format->get<std::string>().empty()) {
    throw Error(ErrorCode::kMalformedClaim,
                "agent_attestation.format must be a non-empty string");
  }
  ev.format = format->get<std::string>();
  if (auto t = value.find("token"); t != value.end()) {
    if (!t->is_string()) {
      throw Error(ErrorCode::kMalformedClaim, "agent_attestation.token must be a string");
    }
    ev.token = t->get<std::string>();
  }
  if (auto ts = value.find("timestamp"); ts != value.end()) {
    if (!ts->is_number_integer()) {
      throw Error(ErrorCode::kMalformedClaim,
                  "agent_attestation.timestamp must be a NumericDate");
    }
    ev.timestamp = ts->get<NumericDate>();
  }
  if (ev.format == kEatFormat) {
    bool three_segments = false;
    if (ev.token) {
      const std::string& tok = *ev.token;
      three_segments = std::count(tok.begin(), tok.end(), '.') == 2 &&
                       std::all_of(tok.begin(), tok.end(), [](char c) {
                         return c == '.' || c == '-' || c == '_' ||
                                (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                                (c >= '0' && c <= '9');
                       });
    }
    if (!three_segments) {
      throw Error(ErrorCode::kMalformedClaim,
                  "EAT attestation requires a compact token with three "
                  "base64url segments");
    }
  }
  return ev;
}

Json to_json(const AttestationEvidence& ev) {
  Json out{{"format", ev.format}};
  if (ev.token) out["token"] = *ev.token;
  if (ev.timestamp) out["timestamp"] = *ev.timestamp;
  return out;
}

void check_agent_claims(const AgentClaims& c) {
  std::vector<std::string> missing;
  if (c.agent_type.empty()) missing.emplace_back("agent_type");
  if (c.agent_model.empty()) missing.emplace_back("agent_model");
  if (c.agent_provider.empty()) missing.emplace_back("agent_provider");
  if (c.agent_instance_id.empty()) missing.emplace_back("agent_instance_id");
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kMissingRequiredClaim,
                "missing required agent claims: " + names, missing);
  }
  if (auto v = validate_agent_type(c.agent_type); !v) {
    throw Error(ErrorCode::kInvalidAgentType, v.reason);
  }
  if (c.agent_capabilities) {
    for (const auto& cap : *c.agent_capabilities) {
      if (auto v = validate_capability_identifier(cap); !v) {
        throw Error(ErrorCode::kInvalidCapability, v.reason, {cap});
      }
    }
  }
  if (c.delegation_chain && !c.delegation_chain->empty()) {
    for (const auto& step : *c.delegation_chain) check_step_structure(step);
    const std::string& last_sub = c.delegation_chain->back().sub;
    if (c.delegator_sub != last_sub) {
      throw Error(ErrorCode::kMalformedClaim,
                  "delegator_sub must equal the sub of the final delegation "
                  "step ('" + last_sub + "')");
    }
  }
  if (c.agent_attestation && c.agent_attestation->format.empty()) {
    throw Error(ErrorCode::kMalformedClaim, "agent_attestation.format is empty");
  }
}

std::optional<AgentClaims> parse_agent_claims(const Json& claims) {
  if (!claims.is_object()) {
    throw Error(ErrorCode::kMalformedClaim, "claims document must be a JSON object");
  }
  std::size_t required_present = 0;
  for (auto name : kRequiredAgentClaims) {
    if (claims.contains(name)) ++required_present;
  }
  if (required_present == 0) return std::nullopt;

  AgentClaims c;
  auto required = [&](std::string_view name) {
    return claims.contains(name) ? get_string(claims, name) : std::string{};
  };
  c.agent_type = required("agent_type");
  c.agent_model = required("agent_model");
  c.agent_provider = required("agent_provider");
  c.agent_instance_id = required("agent_instance_id");
  for (auto name : kRequiredAgentClaims) {
    if (claims.contains(name) && claims.at(std::string(name)).get<std::string>().empty()) {
      throw Error(ErrorCode::kMalformedClaim,
                  "claim '" + std::string(name) + "' must be non-empty");
    }
  }
  c.agent_version = optional_string(claims, "agent_version");
  c.delegator_sub = optional_string(claims, "delegator_sub");
  c.delegation_purpose = optional_string(claims, "delegation_purpose");
  c.agent_trust_level = optional_string(claims, "agent_trust_level");
  c.agent_context_id = optional_string(claims, "agent_context_id");

  if (auto it = claims.find("delegation_chain"); it != claims.end()) {
    c.delegation_chain = parse_delegation_chain(*it);
  }
  if (auto it = claims.find("delegation_constraints"); it != claims.end()) {
    c.delegation_constraints = parse_constraints(*it, "delegation_constraints");
  }
  if (auto it = claims.find("agent_capabilities"); it != claims.end()) {
    if (!it->is_array()) {
      throw Error(ErrorCode::kMalformedClaim, "agent_capabilities must be an array");
    }
    std::vector<std::string> caps;
    for (const auto& cap : *it) {
      if (!cap.is_string()) {
        throw Error(ErrorCode::kMalformedClaim,
                    "agent_capabilities entries must be strings");
      }
      caps.push_back(cap.get<std::string>());
    }
    c.agent_capabilities = std::move(caps);
  }
  if (auto it = claims.find("agent_attestation"); it != claims.end()) {
    c.agent_attestation = parse_attestation_evidence(*it);
  }
  check_agent_claims(c);
  return c;
}

Json serialize_agent_claims(const AgentClaims& c) {
  Json out{
      {"agent_type", c.agent_type},
      {"agent_model", c.agent_model},
      {"agent_provider", c.agent_provider},
      {"agent_instance_id", c.agent_instance_id},
  };
  if (c.agent_version) out["agent_version"] = *c.agent_version;
  if (c.delegator_sub) out["delegator_sub"] = *c.delegator_sub;
  if (c.delegation_chain) out["delegation_chain"] = to_json(*c.delegation_chain);
  if (c.delegation_purpose) out["delegation_purpose"] = *c.delegation_purpose;
  if (c.delegation_constraints) {
    out["delegation_constraints"] = to_json(*c.delegation_constraints);
  }
  if (c.agent_capabilities) out["agent_capabilities"] = *c.agent_capabilities;
  if (c.agent_trust_level) out["agent_trust_level"] = *c.agent_trust_level;
  if (c.agent_attestation) out["agent_attestation"] = to_json(*c.agent_attestation);
  if (c.agent_context_id) out["agent_context_id"] = *c.agent_context_id;
  return out;
}

}  // namespace oidca
