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

#ifndef OIDCA_ATTESTATION_H_
#define OIDCA_ATTESTATION_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "oidca/claims.h"
#include "oidca/clock.h"
#include "oidca/jose.h"
#include "oidca/store.h"

namespace oidca {

inline constexpr std::int64_t kDefaultFreshnessWindowSeconds = 300;
inline constexpr std::int64_t kDefaultNonceTtlSeconds = 300;

struct MeasurementKey {
  std::string provider;
  std::string model;
  std::string version;

  auto operator<=>(const MeasurementKey&) const = default;
};

struct AttestationPolicy {
  jose::KeySet trusted_attestation_keys;
  std::int64_t freshness_window_seconds = kDefaultFreshnessWindowSeconds;
  std::int64_t nonce_ttl_seconds = kDefaultNonceTtlSeconds;
  // Lowercase hex SHA-256 per (provider, model, version).
  std::map<MeasurementKey, std::string> reference_measurements;

  // Throws Error(kInvalidConfig) for non-positive windows, and
  // Error(kInvalidDigest) for a malformed reference digest.
  void check() const;
};

enum class AttestationStatus { kVerified, kFailed, kUnsupportedFormat };
enum class CheckOutcome { kPass, kFail, kNotEvaluated };

std::string_view status_name(AttestationStatus status);
std::string_view check_name(CheckOutcome outcome);

struct AttestationChecks {
  CheckOutcome signature = CheckOutcome::kNotEvaluated;
  CheckOutcome nonce = CheckOutcome::kNotEvaluated;
  CheckOutcome freshness = CheckOutcome::kNotEvaluated;
  CheckOutcome measurement = CheckOutcome::kNotEvaluated;

  bool all_pass() const {
    return signature == CheckOutcome::kPass && nonce == CheckOutcome::kPass &&
           freshness == CheckOutcome::kPass && measurement == CheckOutcome::kPass;
  }
  bool operator==(const AttestationChecks&) const = default;
};

struct AgentBinding {
  std::string provider;
  std::string model;
  std::string version;
};

struct AttestationResult {
  AttestationStatus status = AttestationStatus::kFailed;
  AttestationChecks checks;
  AgentBinding agent_binding;
  NumericDate verified_at = 0;

  nlohmann::json to_json() const;
};

struct Nonce {
  std::string value;
  NumericDate issued_at = 0;
  std::string audience;
  bool consumed = false;
};

// Payload profile of EAT evidence tokens.
struct EatClaims {
  std::string iss;
  NumericDate iat = 0;
  std::string nonce;
  std::string agent_provider;
  std::string agent_model;
  std::string agent_version;
  std::string measurement;  // lowercase hex SHA-256

  nlohmann::json to_json() const;
};

// Signs an EAT evidence token (header typ "eat+jwt"). Used by agents and to
// generate fixtures.
std::string make_eat_token(const EatClaims& claims, const jose::PrivateKey& key);

// Wraps an EAT token as an `agent_attestation` claim value.
AttestationEvidence make_eat_evidence(std::string token,
                                      std::optional<NumericDate> timestamp = std::nullopt);

// Verifies JWT/EAT attestation evidence against a policy. Nonces and
// reference measurements live in the store (nonces and measurements
// namespaces), so several verifiers over one store share replay state.
class AttestationVerifier {
 public:
  AttestationVerifier(AttestationPolicy policy, Store& store);

  const AttestationPolicy& policy() const { return policy_; }

  // Fresh unconsumed nonce bound to `agent_id`, kept for nonce_ttl_seconds.
  // Throws Error(kMalformedClaim) on an empty agent_id.
  Nonce issue_nonce(std::string_view agent_id, NumericDate now);
  // Registers a challenge minted elsewhere (e.g. by a relying party) as if
  // it had been issued here. Throws Error(kMalformedClaim) on empty input or
  // a value already known.
  Nonce accept_nonce(std::string value, std::string_view agent_id, NumericDate now);
  std::optional<Nonce> find_nonce(std::string_view value) const;

  // Runs the signature, nonce, freshness and measurement checks. Each
  // check is evaluated independently so a failed result names exactly the
  // failing checks. `expected_nonce` is burned on every call, whatever the
  // outcome. Throws Error(kMalformedEvidence) when an EAT token cannot be
  // decoded.
  AttestationResult verify(const AttestationEvidence& evidence,
                           std::string_view expected_nonce,
                           std::string_view agent_id, NumericDate now);

  // Overwrites any previous digest for the triple. Throws
  // Error(kInvalidDigest) unless `digest` is 64 lowercase hex chars.
  void register_reference_measurement(std::string_view provider,
                                      std::string_view model,
                                      std::string_view version,
                                      std::string_view digest);
  std::optional<std::string> reference_measurement(const MeasurementKey& key) const;

 private:
  AttestationPolicy policy_;
  Store& store_;
};

// Signed verdict returned by the attestation endpoint. Payload: agent_id,
// status, provider, model, version, verified_at, checks (and iss when
// given). Throws Error(kSigningFailure).
std::string build_attestation_response(std::string_view agent_id,
                                       const AttestationResult& result,
                                       const jose::PrivateKey& signing_key,
                                       std::string_view issuer = {});

}  // namespace oidca

#endif  // OIDCA_ATTESTATION_H_
