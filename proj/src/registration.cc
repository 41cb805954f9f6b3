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

#include "oidca/registration.h"

#include <algorithm>

#include "oidca/claims.h"
#include "oidca/constraints.h"
#include "oidca/encoding.h"
#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kClientKeyPrefix = "client/";
constexpr std::string_view kInstanceKeyPrefix = "instance/";

// Private JWK members that must never be published.
constexpr std::array<std::string_view, 8> kPrivateJwkMembers = {
    "d", "p", "q", "dp", "dq", "qi", "oth", "k"};

bool is_http_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return false;
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return false;
  auto rest = url.substr(scheme_end + 3);
  return !rest.empty() && rest.front() != '/';
}

std::string strip_trailing_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

std::vector<std::string> string_array(const Json& doc, const char* key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  for (const auto& v : doc.at(key)) out.push_back(v.get<std::string>());
  return out;
}

std::string client_key(std::string_view client_id) {
  return std::string(kClientKeyPrefix) + std::string(client_id);
}

}  // namespace

std::vector<std::string> supported_constraint_keys() {
  return {std::string(kMaxDurationSeconds), std::string(kAllowedResources),
          std::string(kMaxDelegationDepth)};
}

// --- discovery ---

Json DiscoveryDocument::to_json() const {
  Json out{
      {"issuer", issuer},
      {"jwks_uri", jwks_uri},
      {"registration_endpoint", registration_endpoint},
      {"delegation_endpoint", delegation_endpoint},
      {"revocation_endpoint", revocation_endpoint},
      {"agent_claims_supported", agent_claims_supported},
      {"agent_types_supported", agent_types_supported},
      {"delegation_methods_supported", delegation_methods_supported},
      {"attestation_formats_supported", attestation_formats_supported},
  };
  if (agent_attestation_endpoint) out["agent_attestation_endpoint"] = *agent_attestation_endpoint;
  if (agent_capabilities_endpoint) out["agent_capabilities_endpoint"] = *agent_capabilities_endpoint;
  if (attestation_verification_keys_endpoint) {
    out["attestation_verification_keys_endpoint"] = *attestation_verification_keys_endpoint;
  }
  return out;
}

DiscoveryDocument DiscoveryDocument::from_json(const Json& doc) {
  DiscoveryDocument d;
  try {
    d.issuer = doc.at("issuer").get<std::string>();
    d.jwks_uri = doc.at("jwks_uri").get<std::string>();
    d.registration_endpoint = doc.at("registration_endpoint").get<std::string>();
    d.delegation_endpoint = doc.at("delegation_endpoint").get<std::string>();
    d.revocation_endpoint = doc.at("revocation_endpoint").get<std::string>();
    auto opt = [&](const char* key) -> std::optional<std::string> {
      if (!doc.contains(key)) return std::nullopt;
      return doc.at(key).get<std::string>();
    };
    d.agent_attestation_endpoint = opt("agent_attestation_endpoint");
    d.agent_capabilities_endpoint = opt("agent_capabilities_endpoint");
    d.attestation_verification_keys_endpoint = opt("attestation_verification_keys_endpoint");
    d.agent_claims_supported = string_array(doc, "agent_claims_supported");
    d.agent_types_supported = string_array(doc, "agent_types_supported");
    d.delegation_methods_supported = string_array(doc, "delegation_methods_supported");
    d.attestation_formats_supported = string_array(doc, "attestation_formats_supported");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidMetadata,
                std::string("discovery document: ") + e.what());
  }
  return d;
}

std::vector<std::string> DiscoveryDocument::endpoint_urls() const {
  std::vector<std::string> urls = {jwks_uri, registration_endpoint, delegation_endpoint,
                                   revocation_endpoint};
  for (const auto* opt : {&agent_attestation_endpoint, &agent_capabilities_endpoint,
                          &attestation_verification_keys_endpoint}) {
    if (*opt) urls.push_back(**opt);
  }
  return urls;
}

DiscoveryDocument build_discovery_document(const DiscoveryConfig& config) {
  if (!is_http_url(config.issuer) ||
      config.issuer.find_first_of("?#") != std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                "issuer must be an absolute http(s) URL without query or fragment");
  }
  std::string base = strip_trailing_slash(config.issuer);
  auto url = [&](std::string_view path) { return base + std::string(path); };

  DiscoveryDocument d;
  d.issuer = base;
  d.jwks_uri = url(paths::kAttestationKeys);
  d.registration_endpoint = url(paths::kRegister);
  d.delegation_endpoint = url(paths::kDelegate);
  d.revocation_endpoint = url(paths::kRevoke);
  if (config.attestation_enabled) {
    d.agent_attestation_endpoint = url(paths::kAttest);
    d.attestation_verification_keys_endpoint = url(paths::kAttestationKeys);
  }
  if (config.capabilities_enabled) d.agent_capabilities_endpoint = url(paths::kCapabilities);

  for (auto name : kAgentClaimNames) d.agent_claims_supported.emplace_back(name);
  if (config.agent_types_supported.empty()) {
    for (auto t : kStandardAgentTypes) d.agent_types_supported.emplace_back(t);
  } else {
    for (const auto& t : config.agent_types_supported) {
      if (auto v = validate_agent_type(t); !v) throw Error(ErrorCode::kInvalidConfig, v.reason);
      d.agent_types_supported.push_back(t);
    }
  }
  d.delegation_methods_supported = {std::string(kDelegationMethodChain)};
  d.attestation_formats_supported = {std::string(kEatFormat)};
  for (const auto& f : config.extra_attestation_formats) {
    if (f != kEatFormat) d.attestation_formats_supported.push_back(f);
  }
  return d;
}

// --- registration ---

Json ClientRegistration::to_json() const {
  Json out{
      {"client_id", client_id},
      {"agent_provider", agent_provider},
      {"agent_models_supported", agent_models_supported},
      {"agent_capabilities", agent_capabilities},
      {"attestation_formats_supported", attestation_formats_supported},
      {"delegation_methods_supported", delegation_methods_supported},
      {"token_endpoint_auth_method", token_endpoint_auth_method},
  };
  if (!jwks.is_null()) out["jwks"] = jwks;
  if (jwks_uri) out["jwks_uri"] = *jwks_uri;
  if (client_name) out["client_name"] = *client_name;
  return out;
}

ClientRegistration ClientRegistration::from_json(const Json& doc) {
  ClientRegistration r;
  r.client_id = doc.at("client_id").get<std::string>();
  r.agent_provider = doc.at("agent_provider").get<std::string>();
  r.agent_models_supported = string_array(doc, "agent_models_supported");
  r.agent_capabilities = string_array(doc, "agent_capabilities");
  r.attestation_formats_supported = string_array(doc, "attestation_formats_supported");
  r.delegation_methods_supported = string_array(doc, "delegation_methods_supported");
  r.token_endpoint_auth_method = doc.value("token_endpoint_auth_method", "private_key_jwt");
  if (doc.contains("jwks")) r.jwks = doc["jwks"];
  if (doc.contains("jwks_uri")) r.jwks_uri = doc["jwks_uri"].get<std::string>();
  if (doc.contains("client_name")) r.client_name = doc["client_name"].get<std::string>();
  return r;
}

Json CapabilityDescriptor::to_json() const {
  return Json{{"id", id},
              {"description", description},
              {"supported_constraints", supported_constraints}};
}

ClientRegistration ClientRegistry::process_registration_request(const Json& metadata) {
  if (!metadata.is_object()) {
    throw Error(ErrorCode::kInvalidMetadata, "registration metadata must be a JSON object");
  }

  std::string method = "private_key_jwt";
  if (auto it = metadata.find("token_endpoint_auth_method"); it != metadata.end()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kInvalidMetadata, "token_endpoint_auth_method must be a string",
                  {"token_endpoint_auth_method"});
    }
    method = it->get<std::string>();
  }
  if (method.rfind("client_secret", 0) == 0 || metadata.contains("client_secret")) {
    throw Error(ErrorCode::kUnsupportedAuthMethod,
                "shared-secret client authentication is not accepted for agents; "
                "use private_key_jwt");
  }
  if (method != "private_key_jwt") {
    throw Error(ErrorCode::kUnsupportedAuthMethod,
                "unsupported token_endpoint_auth_method '" + method + "'");
  }

  std::vector<std::string> problems;
  auto string_list = [&](const char* key, bool required,
                         bool non_empty) -> std::vector<std::string> {
    std::vector<std::string> out;
    auto it = metadata.find(key);
    if (it == metadata.end()) {
      if (required) problems.push_back(std::string(key) + ": required");
      return out;
    }
    if (!it->is_array()) {
      problems.push_back(std::string(key) + ": must be an array of strings");
      return out;
    }
    for (const auto& v : *it) {
      if (!v.is_string() || v.get<std::string>().empty()) {
        problems.push_back(std::string(key) + ": entries must be non-empty strings");
        return {};
      }
      out.push_back(v.get<std::string>());
    }
    if (non_empty && out.empty()) problems.push_back(std::string(key) + ": must not be empty");
    return out;
  };

  ClientRegistration reg;
  reg.token_endpoint_auth_method = method;
  if (auto it = metadata.find("agent_provider");
      it == metadata.end() || !it->is_string() || it->get<std::string>().empty()) {
    problems.emplace_back("agent_provider: required non-empty string");
  } else {
    reg.agent_provider = it->get<std::string>();
  }
  reg.agent_models_supported = string_list("agent_models_supported", true, true);
  reg.agent_capabilities = string_list("agent_capabilities", false, false);
  for (const auto& cap : reg.agent_capabilities) {
    if (auto v = validate_capability_identifier(cap); !v) {
      problems.push_back("agent_capabilities: " + v.reason);
    }
  }
  bool claims_attestation = metadata.contains("attestation_formats_supported");
  reg.attestation_formats_supported =
      string_list("attestation_formats_supported", false, claims_attestation);
  reg.delegation_methods_supported = string_list("delegation_methods_supported", false, false);
  for (const auto& m : reg.delegation_methods_supported) {
    if (m != kDelegationMethodChain) {
      problems.push_back("delegation_methods_supported: unsupported method '" + m + "'");
    }
  }

  if (auto it = metadata.find("jwks"); it != metadata.end()) {
    try {
      auto keys = jose::KeySet::from_jwks(*it);
      if (keys.empty()) problems.emplace_back("jwks: must contain at least one key");
      else reg.jwks = keys.to_jwks();
    } catch (const Error& e) {
      problems.push_back(std::string("jwks: ") + e.what());
    }
  }
  if (auto it = metadata.find("jwks_uri"); it != metadata.end()) {
    if (!it->is_string() || !is_http_url(it->get<std::string>())) {
      problems.emplace_back("jwks_uri: must be an absolute http(s) URL");
    } else {
      reg.jwks_uri = it->get<std::string>();
    }
  }
  if (reg.jwks.is_null() && !reg.jwks_uri && !metadata.contains("jwks") &&
      !metadata.contains("jwks_uri")) {
    problems.emplace_back("jwks: private_key_jwt requires jwks or jwks_uri");
  }
  if (auto it = metadata.find("client_name"); it != metadata.end()) {
    if (it->is_string()) reg.client_name = it->get<std::string>();
    else problems.emplace_back("client_name: must be a string");
  }

  if (!problems.empty()) {
    std::string msg = "invalid registration metadata: " + problems.front();
    if (problems.size() > 1) msg += " (+" + std::to_string(problems.size() - 1) + " more)";
    throw Error(ErrorCode::kInvalidMetadata, msg, problems);
  }

  reg.client_id = "agent-client-" + random_id();
  store_.put(Namespace::kClients, client_key(reg.client_id), reg.to_json());
  return reg;
}

std::optional<ClientRegistration> ClientRegistry::find(std::string_view client_id) const {
  auto doc = store_.get(Namespace::kClients, client_key(client_id));
  if (!doc) return std::nullopt;
  return ClientRegistration::from_json(*doc);
}

std::vector<ClientRegistration> ClientRegistry::all() const {
  std::vector<ClientRegistration> out;
  for (const auto& rec : store_.scan(Namespace::kClients)) {
    if (rec.key.rfind(kClientKeyPrefix, 0) == 0) {
      out.push_back(ClientRegistration::from_json(rec.value));
    }
  }
  return out;
}

void ClientRegistry::bind_instance(std::string_view instance_id,
                                   std::string_view client_id) {
  store_.put(Namespace::kClients, std::string(kInstanceKeyPrefix) + std::string(instance_id),
             Json{{"agent_instance_id", instance_id}, {"client_id", client_id}});
}

std::optional<std::string> ClientRegistry::client_for_instance(
    std::string_view instance_id) const {
  auto doc = store_.get(Namespace::kClients,
                        std::string(kInstanceKeyPrefix) + std::string(instance_id));
  if (!doc) return std::nullopt;
  return doc->value("client_id", "");
}

Json publish_verification_keys(const jose::KeyRing& ring) {
  auto records = ring.records();
  if (std::none_of(records.begin(), records.end(),
                   [](const jose::KeyRing::Record& r) { return r.active; })) {
    throw Error(ErrorCode::kNoActiveKeys, "no active signing key to publish");
  }
  Json jwks = ring.verification_keys().to_jwks();
  for (auto& jwk : jwks["keys"]) {
    for (auto member : kPrivateJwkMembers) jwk.erase(std::string(member));
  }
  return jwks;
}

}  // namespace oidca
