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

#include "oidca/token_service.h"

#include <algorithm>

#include "oidca/encoding.h"
#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kIdTokenType = "JWT";

std::string required_string(const Json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorCode::kMalformedToken,
                std::string("claim '") + key + "' must be a non-empty string");
  }
  return it->get<std::string>();
}

NumericDate required_date(const Json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::kMalformedToken,
                std::string("claim '") + key + "' must be a NumericDate");
  }
  return it->get<NumericDate>();
}

void check_standard(const StandardClaims& s) {
  if (s.iss.empty() || s.sub.empty() || s.aud.empty()) {
    throw Error(ErrorCode::kInvalidClaims, "iss, sub and aud must be non-empty");
  }
  if (s.exp <= s.iat) throw Error(ErrorCode::kInvalidClaims, "exp must be after iat");
}

std::string mint(const StandardClaims& standard, const AgentClaims* agent,
                 const jose::PrivateKey& key) {
  check_standard(standard);
  Json payload = to_json(standard);
  if (agent != nullptr) {
    try {
      check_agent_claims(*agent);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidClaims, e.what(), e.details());
    }
    payload.update(serialize_agent_claims(*agent));
  }
  return jose::sign(Json{{"typ", kIdTokenType}}, payload, key);
}

}  // namespace

Json to_json(const StandardClaims& s) {
  Json out{{"iss", s.iss}, {"sub", s.sub}, {"aud", s.aud}, {"exp", s.exp}, {"iat", s.iat}};
  if (s.auth_time) out["auth_time"] = *s.auth_time;
  if (s.nonce) out["nonce"] = *s.nonce;
  if (s.scope) out["scope"] = *s.scope;
  if (s.jti) out["jti"] = *s.jti;
  return out;
}

StandardClaims parse_standard_claims(const Json& payload) {
  StandardClaims s;
  s.iss = required_string(payload, "iss");
  s.sub = required_string(payload, "sub");
  s.aud = required_string(payload, "aud");
  s.exp = required_date(payload, "exp");
  s.iat = required_date(payload, "iat");
  if (payload.contains("auth_time")) s.auth_time = required_date(payload, "auth_time");
  if (payload.contains("nonce")) s.nonce = required_string(payload, "nonce");
  if (payload.contains("scope")) s.scope = required_string(payload, "scope");
  if (payload.contains("jti")) s.jti = required_string(payload, "jti");
  if (s.exp <= s.iat) throw Error(ErrorCode::kMalformedToken, "exp must be after iat");
  return s;
}

std::optional<std::string> IdToken::effective_scope() const {
  if (standard.scope) return standard.scope;
  if (agent && agent->delegation_chain && !agent->delegation_chain->empty()) {
    return agent->delegation_chain->back().scope;
  }
  return std::nullopt;
}

std::string mint_agent_id_token(const StandardClaims& standard, const AgentClaims& agent,
                                const jose::PrivateKey& key) {
  return mint(standard, &agent, key);
}

std::string mint_id_token(const StandardClaims& standard, const jose::PrivateKey& key) {
  return mint(standard, nullptr, key);
}

IdToken validate_agent_id_token(std::string_view token, const TokenExpectations& expect,
                                const jose::KeySet& issuer_keys, NumericDate now) {
  jose::CompactJws jws = jose::decode(token);
  if (!jose::verify(jws, issuer_keys)) {
    throw Error(ErrorCode::kBadSignature, "token signature does not verify");
  }
  IdToken out;
  out.standard = parse_standard_claims(jws.payload);
  const StandardClaims& s = out.standard;
  if (s.iss != expect.issuer) {
    throw Error(ErrorCode::kWrongIssuer, "unexpected issuer '" + s.iss + "'");
  }
  if (expect.audience && s.aud != *expect.audience) {
    throw Error(ErrorCode::kWrongAudience, "token audience '" + s.aud + "' is not '" +
                                               *expect.audience + "'");
  }
  if (s.iat > now + expect.clock_skew_seconds) {
    throw Error(ErrorCode::kNotYetValid, "token issued in the future");
  }
  if (now >= s.exp) throw Error(ErrorCode::kExpired, "token expired");
  out.agent = parse_agent_claims(jws.payload);
  return out;
}

Delegatee resolve_delegatee(const ClientRegistry& registry, std::string_view client_id,
                            std::string_view instance_id,
                            std::optional<std::string> agent_type,
                            std::optional<std::string> agent_model) {
  auto client = registry.find(client_id);
  if (!client) {
    throw Error(ErrorCode::kDelegateeUnknown,
                "client '" + std::string(client_id) + "' is not registered");
  }
  if (instance_id.empty()) {
    throw Error(ErrorCode::kDelegateeUnknown, "agent_instance_id is required");
  }
  if (auto bound = registry.client_for_instance(instance_id); bound && *bound != client_id) {
    throw Error(ErrorCode::kDelegateeUnknown,
                "agent instance belongs to a different client");
  }
  std::string model = agent_model.value_or(client->agent_models_supported.front());
  if (std::find(client->agent_models_supported.begin(), client->agent_models_supported.end(),
                model) == client->agent_models_supported.end()) {
    throw Error(ErrorCode::kDelegateeUnknown,
                "model '" + model + "' is not registered for client '" +
                    std::string(client_id) + "'");
  }
  Delegatee d;
  d.client_id = client->client_id;
  d.identity.agent_type = agent_type.value_or("assistant");
  d.identity.agent_model = model;
  d.identity.agent_provider = client->agent_provider;
  d.identity.agent_instance_id = std::string(instance_id);
  if (!client->agent_capabilities.empty()) {
    d.identity.agent_capabilities = client->agent_capabilities;
  }
  return d;
}

DelegatedToken mint_delegated_token(const IdToken& parent, const Delegatee& delegatee,
                                    const DelegationGrant& grant, const Issuer& issuer,
                                    NumericDate now) {
  auto parent_scope = parent.effective_scope();
  if (!parent_scope) {
    auto requested = parse_scope(grant.scope);
    throw Error(ErrorCode::kScopeEscalation, "parent token grants no scope", requested);
  }
  DelegationChain chain;
  if (parent.agent && parent.agent->delegation_chain) chain = *parent.agent->delegation_chain;

  // Inherited windows: the tightest duration deadline and depth allowance
  // left for the new step's own constraints.
  std::optional<NumericDate> inherited_deadline;
  std::optional<std::int64_t> depth_left;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain[i].constraints) continue;
    const ConstraintSet& c = *chain[i].constraints;
    if (c.max_duration_seconds) {
      NumericDate d = chain[i].delegated_at + *c.max_duration_seconds;
      inherited_deadline = inherited_deadline ? std::min(*inherited_deadline, d) : d;
    }
    if (c.max_delegation_depth) {
      // Steps after i once the new step is appended.
      std::int64_t left = *c.max_delegation_depth - static_cast<std::int64_t>(chain.size() - i);
      depth_left = depth_left ? std::min(*depth_left, left) : left;
    }
  }
  if (inherited_deadline && *inherited_deadline <= now) {
    throw Error(ErrorCode::kConstraintConflict, "inherited max_duration_seconds has elapsed");
  }
  NumericDate not_after = std::min(now + issuer.token_lifetime_seconds, parent.standard.exp);
  if (inherited_deadline) not_after = std::min(not_after, *inherited_deadline);
  if (grant.constraints) {
    const ConstraintSet& c = *grant.constraints;
    if (c.max_duration_seconds) {
      if (inherited_deadline && now + *c.max_duration_seconds > *inherited_deadline) {
        throw Error(ErrorCode::kConstraintConflict,
                    "max_duration_seconds exceeds the inherited delegation window");
      }
      not_after = std::min(not_after, now + *c.max_duration_seconds);
    }
    if (c.max_delegation_depth && depth_left && *c.max_delegation_depth > *depth_left) {
      throw Error(ErrorCode::kConstraintConflict,
                  "max_delegation_depth exceeds the inherited allowance");
    }
  }
  if (not_after <= now) {
    throw Error(ErrorCode::kConstraintConflict, "no delegation time remains");
  }

  DelegationStep step;
  step.iss = issuer.issuer;
  step.sub = parent.standard.sub;
  step.aud = delegatee.identity.agent_instance_id;
  step.delegated_at = now;
  step.scope = grant.scope;
  step.purpose = grant.purpose;
  step.constraints = grant.constraints;
  chain = append_delegation_step(std::move(chain), std::move(step), *parent_scope);

  DelegatedToken out;
  out.step = chain.back();
  StandardClaims& s = out.claims.standard;
  s.iss = issuer.issuer;
  s.sub = delegatee.identity.agent_instance_id;
  s.aud = delegatee.client_id;
  s.iat = now;
  s.exp = not_after;
  s.scope = grant.scope;
  s.jti = random_id();

  AgentClaims agent = delegatee.identity;
  agent.delegator_sub = parent.standard.sub;
  agent.delegation_chain = std::move(chain);
  agent.delegation_purpose = grant.purpose;
  agent.delegation_constraints = grant.constraints;
  out.claims.agent = agent;
  out.token = mint_agent_id_token(s, agent, issuer.key);
  return out;
}

}  // namespace oidca
