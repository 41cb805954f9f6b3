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

#include "oidca/attestation.h"

#include <cstdlib>

#include "oidca/encoding.h"
#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

std::string measurement_store_key(std::string_view provider, std::string_view model,
                                  std::string_view version) {
  return Json::array({provider, model, version}).dump();
}

std::string payload_string(const Json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedEvidence,
                std::string("EAT claim '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

CheckOutcome outcome(bool pass) { return pass ? CheckOutcome::kPass : CheckOutcome::kFail; }

}  // namespace

std::string_view status_name(AttestationStatus status) {
  switch (status) {
    case AttestationStatus::kVerified: return "verified";
    case AttestationStatus::kFailed: return "failed";
    case AttestationStatus::kUnsupportedFormat: return "unsupported_format";
  }
  return "failed";
}

std::string_view check_name(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::kPass: return "pass";
    case CheckOutcome::kFail: return "fail";
    case CheckOutcome::kNotEvaluated: return "not_evaluated";
  }
  return "not_evaluated";
}

void AttestationPolicy::check() const {
  if (freshness_window_seconds <= 0 || nonce_ttl_seconds <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "freshness_window_seconds and nonce_ttl_seconds must be positive");
  }
  for (const auto& [key, digest] : reference_measurements) {
    if (!is_sha256_hex(digest)) {
      throw Error(ErrorCode::kInvalidDigest,
                  "reference digest for " + key.provider + "/" + key.model + "/" +
                      key.version + " is not 64 lowercase hex chars");
    }
  }
}

Json AttestationResult::to_json() const {
  return Json{
      {"status", status_name(status)},
      {"checks",
       {{"signature", check_name(checks.signature)},
        {"nonce", check_name(checks.nonce)},
        {"freshness", check_name(checks.freshness)},
        {"measurement", check_name(checks.measurement)}}},
      {"agent_binding",
       {{"provider", agent_binding.provider},
        {"model", agent_binding.model},
        {"version", agent_binding.version}}},
      {"verified_at", verified_at},
  };
}

Json EatClaims::to_json() const {
  return Json{{"iss", iss},
              {"iat", iat},
              {"nonce", nonce},
              {"agent_provider", agent_provider},
              {"agent_model", agent_model},
              {"agent_version", agent_version},
              {"measurement", measurement}};
}

std::string make_eat_token(const EatClaims& claims, const jose::PrivateKey& key) {
  return jose::sign(Json{{"typ", "eat+jwt"}}, claims.to_json(), key);
}

AttestationEvidence make_eat_evidence(std::string token,
                                      std::optional<NumericDate> timestamp) {
  return AttestationEvidence{std::string(kEatFormat), std::move(token), timestamp};
}

AttestationVerifier::AttestationVerifier(AttestationPolicy policy, Store& store)
    : policy_(std::move(policy)), store_(store) {
  policy_.check();
  for (const auto& [key, digest] : policy_.reference_measurements) {
    register_reference_measurement(key.provider, key.model, key.version, digest);
  }
}

Nonce AttestationVerifier::issue_nonce(std::string_view agent_id, NumericDate now) {
  return accept_nonce(random_id(), agent_id, now);
}

Nonce AttestationVerifier::accept_nonce(std::string value, std::string_view agent_id,
                                        NumericDate now) {
  if (agent_id.empty() || value.empty()) {
    throw Error(ErrorCode::kMalformedClaim, "nonce and agent_id must be non-empty");
  }
  if (find_nonce(value)) throw Error(ErrorCode::kMalformedClaim, "nonce already known");
  Nonce nonce{std::move(value), now, std::string(agent_id), false};
  store_.put(Namespace::kNonces, nonce.value,
             Json{{"audience", nonce.audience}, {"issued_at", now}, {"consumed", false}},
             now + policy_.nonce_ttl_seconds);
  return nonce;
}

std::optional<Nonce> AttestationVerifier::find_nonce(std::string_view value) const {
  auto record = store_.get(Namespace::kNonces, value);
  if (!record) return std::nullopt;
  return Nonce{std::string(value), record->value("issued_at", NumericDate{0}),
               record->value("audience", ""), record->value("consumed", false)};
}

AttestationResult AttestationVerifier::verify(const AttestationEvidence& evidence,
                                              std::string_view expected_nonce,
                                              std::string_view agent_id,
                                              NumericDate now) {
  // Burn the nonce before anything else can fail.
  auto record = find_nonce(expected_nonce);
  bool won_nonce = !expected_nonce.empty() && store_.consume_once(expected_nonce);

  AttestationResult result;
  result.verified_at = now;
  if (evidence.format != kEatFormat) {
    result.status = AttestationStatus::kUnsupportedFormat;
    return result;
  }
  if (!evidence.token) {
    throw Error(ErrorCode::kMalformedEvidence, "EAT evidence carries no token");
  }
  jose::CompactJws jws;
  try {
    jws = jose::decode(*evidence.token);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedEvidence,
                std::string("undecodable EAT token: ") + e.what());
  }
  const Json& payload = jws.payload;
  std::string token_nonce = payload_string(payload, "nonce");
  result.agent_binding = {payload_string(payload, "agent_provider"),
                          payload_string(payload, "agent_model"),
                          payload_string(payload, "agent_version")};
  std::string measurement = payload_string(payload, "measurement");
  std::optional<NumericDate> issued_at;
  if (auto it = payload.find("iat"); it != payload.end()) {
    if (!it->is_number_integer()) {
      throw Error(ErrorCode::kMalformedEvidence, "EAT claim 'iat' must be a NumericDate");
    }
    issued_at = it->get<NumericDate>();
  }

  result.checks.signature = outcome(jose::verify(jws, policy_.trusted_attestation_keys));

  result.checks.nonce = outcome(
      won_nonce && record && token_nonce == expected_nonce &&
      record->audience == agent_id &&
      now - record->issued_at <= policy_.nonce_ttl_seconds);

  bool fresh = issued_at.has_value() &&
               std::llabs(now - *issued_at) <= policy_.freshness_window_seconds &&
               (!evidence.timestamp || *evidence.timestamp == *issued_at);
  result.checks.freshness = outcome(fresh);

  auto reference = reference_measurement(
      {result.agent_binding.provider, result.agent_binding.model,
       result.agent_binding.version});
  result.checks.measurement = outcome(reference && !measurement.empty() &&
                                      *reference == measurement);

  result.status = result.checks.all_pass() ? AttestationStatus::kVerified
                                           : AttestationStatus::kFailed;
  return result;
}

void AttestationVerifier::register_reference_measurement(std::string_view provider,
                                                         std::string_view model,
                                                         std::string_view version,
                                                         std::string_view digest) {
  if (!is_sha256_hex(digest)) {
    throw Error(ErrorCode::kInvalidDigest,
                "reference digest must be 64 lowercase hex characters");
  }
  store_.put(Namespace::kMeasurements, measurement_store_key(provider, model, version),
             Json{{"provider", provider},
                  {"model", model},
                  {"version", version},
                  {"digest", digest}});
}

std::optional<std::string> AttestationVerifier::reference_measurement(
    const MeasurementKey& key) const {
  auto record = store_.get(Namespace::kMeasurements,
                           measurement_store_key(key.provider, key.model, key.version));
  if (!record) return std::nullopt;
  return record->value("digest", "");
}

std::string build_attestation_response(std::string_view agent_id,
                                       const AttestationResult& result,
                                       const jose::PrivateKey& signing_key,
                                       std::string_view issuer) {
  Json body = result.to_json();
  Json payload{
      {"agent_id", agent_id},
      {"status", body["status"]},
      {"provider", result.agent_binding.provider},
      {"model", result.agent_binding.model},
      {"version", result.agent_binding.version},
      {"verified_at", result.verified_at},
      {"iat", result.verified_at},
      {"checks", body["checks"]},
  };
  if (!issuer.empty()) payload["iss"] = issuer;
  return jose::sign(Json{{"typ", "attestation-result+jwt"}}, payload, signing_key);
}

}  // namespace oidca
