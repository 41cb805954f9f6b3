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

#include "oidca/server_config.h"

#include <cstdlib>
#include <fstream>

#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

Json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot read " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, file.string() + ": " + e.what());
  }
}

// An inline object, or a string naming a JSON file.
Json inline_or_file(const Json& value, const fs::path& base) {
  return value.is_string() ? read_json_file(resolve(base, value.get<std::string>())) : value;
}

}  // namespace

ServerConfig ServerConfig::from_json(const Json& doc, const fs::path& base) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be an object");
  ServerConfig c;
  try {
    c.issuer = doc.value("issuer", c.issuer);
    c.host = doc.value("host", c.host);
    c.port = doc.value("port", c.port);
    if (doc.contains("data_dir")) c.data_dir = resolve(base, doc["data_dir"]);
    if (doc.contains("signing_key")) c.signing_key_path = resolve(base, doc["signing_key"]);
    if (doc.contains("admin_token")) c.admin_token = doc["admin_token"].get<std::string>();
    if (doc.contains("registration_token")) {
      c.registration_token = doc["registration_token"].get<std::string>();
    }
    if (doc.contains("audit_log")) c.audit_log_path = resolve(base, doc["audit_log"]);
    c.token_lifetime_seconds = doc.value("token_lifetime_seconds", c.token_lifetime_seconds);
    c.clock_skew_seconds = doc.value("clock_skew_seconds", c.clock_skew_seconds);
    if (doc.contains("rate_limit")) c.attest_rate_limit = RateLimit::from_json(doc["rate_limit"]);
    if (doc.contains("trust_policy")) {
      c.trust_policy = TrustPolicy::from_json(inline_or_file(doc["trust_policy"], base));
    }
    if (doc.contains("attestation")) {
      const Json& a = doc["attestation"];
      c.attestation_enabled = a.value("enabled", c.attestation_enabled);
      if (a.contains("trusted_keys")) {
        c.trusted_attestation_keys =
            jose::KeySet::from_jwks(inline_or_file(a["trusted_keys"], base));
      }
      c.freshness_window_seconds = a.value("freshness_window_seconds", c.freshness_window_seconds);
      c.nonce_ttl_seconds = a.value("nonce_ttl_seconds", c.nonce_ttl_seconds);
      for (const auto& m : a.value("reference_measurements", Json::array())) {
        c.reference_measurements.push_back(
            {{m.at("provider"), m.at("model"), m.at("version")}, m.at("digest")});
      }
      c.extra_attestation_formats =
          a.value("extra_formats", std::vector<std::string>{});
    }
    if (doc.contains("capabilities")) {
      const Json& cap = doc["capabilities"];
      c.capabilities_enabled = cap.value("enabled", c.capabilities_enabled);
      c.capability_catalog =
          cap.value("catalog", std::map<std::string, std::string>{});
    }
    c.agent_types_supported = doc.value("agent_types_supported", std::vector<std::string>{});
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
  return c;
}

ServerConfig ServerConfig::load(const fs::path& file) {
  return from_json(read_json_file(file), file.parent_path());
}

void ServerConfig::apply_env(const std::function<const char*(const char*)>& lookup) {
  auto str = [&](const char* name, auto&& assign) {
    if (const char* v = lookup(name); v != nullptr && *v != '\0') assign(std::string(v));
  };
  str("OIDCA_ISSUER", [&](std::string v) { issuer = std::move(v); });
  str("OIDCA_HOST", [&](std::string v) { host = std::move(v); });
  str("OIDCA_PORT", [&](std::string v) {
    try {
      std::size_t used = 0;
      port = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "OIDCA_PORT is not a number: " + v);
    }
  });
  str("OIDCA_DATA_DIR", [&](std::string v) { data_dir = fs::path(v); });
  str("OIDCA_SIGNING_KEY", [&](std::string v) { signing_key_path = fs::path(v); });
  str("OIDCA_ADMIN_TOKEN", [&](std::string v) { admin_token = std::move(v); });
  str("OIDCA_REGISTRATION_TOKEN", [&](std::string v) { registration_token = std::move(v); });
  str("OIDCA_AUDIT_LOG", [&](std::string v) { audit_log_path = fs::path(v); });
}

void ServerConfig::apply_env() {
  apply_env([](const char* name) { return std::getenv(name); });
}

void ServerConfig::finalize() {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidConfig, "port out of range");
  if (token_lifetime_seconds <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "token_lifetime_seconds must be positive");
  }
  if (clock_skew_seconds < 0) {
    throw Error(ErrorCode::kInvalidConfig, "clock_skew_seconds must not be negative");
  }
  if (admin_token && admin_token->empty()) admin_token.reset();
  if (registration_token && registration_token->empty()) registration_token.reset();
  if (trust_policy.trusted_issuers.empty()) trust_policy.trusted_issuers.insert(issuer);
  attest_rate_limit.check();
  trust_policy.check();
  build_discovery_document(discovery());  // validates the issuer
  attestation_policy().check();
}

DiscoveryConfig ServerConfig::discovery() const {
  DiscoveryConfig d;
  d.issuer = issuer;
  d.attestation_enabled = attestation_enabled;
  d.capabilities_enabled = capabilities_enabled;
  d.agent_types_supported = agent_types_supported;
  d.extra_attestation_formats = extra_attestation_formats;
  return d;
}

AttestationPolicy ServerConfig::attestation_policy() const {
  AttestationPolicy p;
  p.trusted_attestation_keys = trusted_attestation_keys;
  p.freshness_window_seconds = freshness_window_seconds;
  p.nonce_ttl_seconds = nonce_ttl_seconds;
  for (const auto& m : reference_measurements) p.reference_measurements[m.key] = m.digest;
  return p;
}

}  // namespace oidca
