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

#ifndef OIDCA_REGISTRATION_H_
#define OIDCA_REGISTRATION_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oidca/jose.h"
#include "oidca/store.h"

namespace oidca {

// Agent discovery metadata names.
inline constexpr std::array<std::string_view, 7> kAgentDiscoveryFields = {
    "agent_attestation_endpoint",
    "agent_capabilities_endpoint",
    "agent_claims_supported",
    "agent_types_supported",
    "delegation_methods_supported",
    "attestation_formats_supported",
    "attestation_verification_keys_endpoint",
};

// Agent client registration parameter names.
inline constexpr std::array<std::string_view, 5> kAgentRegistrationFields = {
    "agent_provider",
    "agent_models_supported",
    "agent_capabilities",
    "attestation_formats_supported",
    "delegation_methods_supported",
};

inline constexpr std::string_view kDelegationMethodChain = "chain";

// Endpoint paths served by the reference authorization server.
namespace paths {
inline constexpr std::string_view kDiscovery = "/.well-known/openid-configuration";
inline constexpr std::string_view kRegister = "/register";
inline constexpr std::string_view kDelegate = "/delegate";
inline constexpr std::string_view kAttest = "/agent/attest";
inline constexpr std::string_view kCapabilities = "/agent/capabilities";
inline constexpr std::string_view kAttestationKeys = "/keys/attestation";
inline constexpr std::string_view kRevoke = "/revoke";
}  // namespace paths

struct DiscoveryConfig {
  std::string issuer;  // absolute http(s) origin, optional path, no query
  bool attestation_enabled = true;
  bool capabilities_enabled = true;
  std::vector<std::string> agent_types_supported;  // empty = six standard
  std::vector<std::string> extra_attestation_formats;
};

struct DiscoveryDocument {
  std::string issuer;
  std::string jwks_uri;
  std::string registration_endpoint;
  std::string delegation_endpoint;
  std::string revocation_endpoint;
  std::optional<std::string> agent_attestation_endpoint;
  std::optional<std::string> agent_capabilities_endpoint;
  std::optional<std::string> attestation_verification_keys_endpoint;
  std::vector<std::string> agent_claims_supported;
  std::vector<std::string> agent_types_supported;
  std::vector<std::string> delegation_methods_supported;
  std::vector<std::string> attestation_formats_supported;

  nlohmann::json to_json() const;
  // Throws Error(kInvalidMetadata) on missing or mistyped members.
  static DiscoveryDocument from_json(const nlohmann::json& doc);
  // Every advertised URL, in document order.
  std::vector<std::string> endpoint_urls() const;

  bool operator==(const DiscoveryDocument&) const = default;
};

// Throws Error(kInvalidConfig) when the issuer is not an absolute
// http(s) URL without query or fragment.
DiscoveryDocument build_discovery_document(const DiscoveryConfig& config);

struct ClientRegistration {
  std::string client_id;
  std::string agent_provider;
  std::vector<std::string> agent_models_supported;
  std::vector<std::string> agent_capabilities;
  std::vector<std::string> attestation_formats_supported;
  std::vector<std::string> delegation_methods_supported;
  std::string token_endpoint_auth_method;  // private_key_jwt
  // The client's public keys (jwks) or where to fetch them (jwks_uri).
  nlohmann::json jwks;
  std::optional<std::string> jwks_uri;
  std::optional<std::string> client_name;

  nlohmann::json to_json() const;
  static ClientRegistration from_json(const nlohmann::json& doc);
};

struct CapabilityDescriptor {
  std::string id;
  std::string description;
  std::vector<std::string> supported_constraints;

  nlohmann::json to_json() const;
};

// The constraint keys this server enforces.
std::vector<std::string> supported_constraint_keys();

// Agent client records in the store's clients namespace.
class ClientRegistry {
 public:
  explicit ClientRegistry(Store& store) : store_(store) {}

  // Validates agent registration metadata, assigns a client_id and
  // persists the record. Shared-secret authentication methods are
  // rejected with Error(kUnsupportedAuthMethod); field problems raise
  // Error(kInvalidMetadata) with one detail string per field.
  ClientRegistration process_registration_request(const nlohmann::json& metadata);

  std::optional<ClientRegistration> find(std::string_view client_id) const;
  std::vector<ClientRegistration> all() const;

  // Agent instances known to the server, mapped to their client.
  void bind_instance(std::string_view instance_id, std::string_view client_id);
  std::optional<std::string> client_for_instance(std::string_view instance_id) const;

 private:
  Store& store_;
};

// JWKS document for the verification-keys endpoint: every key in the ring,
// public members only. Throws Error(kNoActiveKeys) when no key is active.
nlohmann::json publish_verification_keys(const jose::KeyRing& ring);

}  // namespace oidca

#endif  // OIDCA_REGISTRATION_H_
