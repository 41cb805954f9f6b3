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

#ifndef OIDCA_TOKEN_SERVICE_H_
#define OIDCA_TOKEN_SERVICE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "oidca/claims.h"
#include "oidca/clock.h"
#include "oidca/delegation.h"
#include "oidca/jose.h"
#include "oidca/registration.h"

namespace oidca {

inline constexpr std::int64_t kDefaultTokenLifetimeSeconds = 3600;
inline constexpr std::int64_t kDefaultClockSkewSeconds = 60;

struct StandardClaims {
  std::string iss;
  std::string sub;
  std::string aud;
  NumericDate exp = 0;
  NumericDate iat = 0;
  std::optional<NumericDate> auth_time;
  std::optional<std::string> nonce;
  // Granted scope; set on delegated tokens and user grants.
  std::optional<std::string> scope;
  std::optional<std::string> jti;

  bool operator==(const StandardClaims&) const = default;
};

nlohmann::json to_json(const StandardClaims& claims);
// Throws Error(kMalformedToken) on missing or mistyped standard claims.
StandardClaims parse_standard_claims(const nlohmann::json& payload);

struct IdToken {
  StandardClaims standard;
  std::optional<AgentClaims> agent;  // nullopt: not an agent token

  // The scope the subject can delegate: the `scope` claim, else the scope
  // of the last delegation step.
  std::optional<std::string> effective_scope() const;
};

// Signs std ∪ agent claims. Throws Error(kInvalidClaims) when either set
// breaks its invariants (exp must exceed iat), Error(kSigningFailure) on
// crypto failure.
std::string mint_agent_id_token(const StandardClaims& standard, const AgentClaims& agent,
                                const jose::PrivateKey& key);
// Same, for tokens about a non-agent subject (e.g. the human user).
std::string mint_id_token(const StandardClaims& standard, const jose::PrivateKey& key);

struct TokenExpectations {
  std::string issuer;
  // nullopt skips the audience check (a subject presenting its own token).
  std::optional<std::string> audience;
  // Tolerance for iat in the future. exp is always exclusive and exact.
  std::int64_t clock_skew_seconds = kDefaultClockSkewSeconds;
};

// Checks signature, iss, aud, iat <= now + skew and now < exp, then parses
// the agent claims. Does not validate the delegation chain. Throws Error
// with kMalformedToken, kBadSignature, kWrongIssuer, kWrongAudience,
// kNotYetValid, kExpired, or a claims error.
IdToken validate_agent_id_token(std::string_view token, const TokenExpectations& expect,
                                const jose::KeySet& issuer_keys, NumericDate now);

// The agent receiving a delegation.
struct Delegatee {
  std::string client_id;
  AgentClaims identity;  // type, model, version, provider, instance id, capabilities
};

// Throws Error(kDelegateeUnknown) for an unregistered client, an instance
// bound to another client, or a model the client did not register.
Delegatee resolve_delegatee(const ClientRegistry& registry, std::string_view client_id,
                            std::string_view instance_id,
                            std::optional<std::string> agent_type = std::nullopt,
                            std::optional<std::string> agent_model = std::nullopt);

struct DelegationGrant {
  std::string scope;
  std::optional<std::string> purpose;
  std::optional<ConstraintSet> constraints;
};

struct Issuer {
  std::string issuer;
  jose::PrivateKey key;
  std::int64_t token_lifetime_seconds = kDefaultTokenLifetimeSeconds;
};

struct DelegatedToken {
  std::string token;
  IdToken claims;
  DelegationStep step;  // the appended step, with its jti
};

// Appends {sub: parent subject, aud: delegatee instance, scope, purpose,
// constraints} to the parent's chain and mints the delegatee's token. The
// lifetime is min(token lifetime, parent exp, every inherited duration
// window). Throws Error(kScopeEscalation) with the offending tokens,
// Error(kConstraintConflict) when the grant asks for more time or depth
// than inherited constraints leave, or append errors.
DelegatedToken mint_delegated_token(const IdToken& parent, const Delegatee& delegatee,
                                    const DelegationGrant& grant, const Issuer& issuer,
                                    NumericDate now);

}  // namespace oidca

#endif  // OIDCA_TOKEN_SERVICE_H_
