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

#ifndef OIDCA_SERVER_CONFIG_H_
#define OIDCA_SERVER_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oidca/attestation.h"
#include "oidca/delegation.h"
#include "oidca/rate_limiter.h"
#include "oidca/token_service.h"

namespace oidca {

struct ReferenceMeasurement {
  MeasurementKey key;
  std::string digest;
};

// Server settings. Loaded from one JSON file; relative paths in the file
// resolve against the file's directory. Environment variables override
// the file (see apply_env).
struct ServerConfig {
  std::string issuer = "http://127.0.0.1:8080";
  std::string host = "127.0.0.1";
  int port = 8080;
  // Unset: everything lives in memory.
  std::optional<std::filesystem::path> data_dir;
  // PEM private key. Unset: a key is loaded from, or generated into, the store.
  std::optional<std::filesystem::path> signing_key_path;
  // Bearer credential accepted on /revoke for any step.
  std::optional<std::string> admin_token;
  // Initial access token required on /register. Unset: open registration.
  std::optional<std::string> registration_token;
  std::optional<std::filesystem::path> audit_log_path;

  std::int64_t token_lifetime_seconds = kDefaultTokenLifetimeSeconds;
  std::int64_t clock_skew_seconds = kDefaultClockSkewSeconds;
  RateLimit attest_rate_limit;
  // trusted_issuers defaults to {issuer} when left empty.
  TrustPolicy trust_policy;

  bool attestation_enabled = true;
  jose::KeySet trusted_attestation_keys;
  std::int64_t freshness_window_seconds = kDefaultFreshnessWindowSeconds;
  std::int64_t nonce_ttl_seconds = kDefaultNonceTtlSeconds;
  std::vector<ReferenceMeasurement> reference_measurements;
  std::vector<std::string> extra_attestation_formats;

  bool capabilities_enabled = true;
  // Capability id -> human description, served when no client is named.
  std::map<std::string, std::string> capability_catalog;
  std::vector<std::string> agent_types_supported;

  // Throws Error(kInvalidConfig) on bad values.
  static ServerConfig from_json(const nlohmann::json& doc,
                                const std::filesystem::path& base_dir = {});
  // Reads and parses a config file. Throws Error(kInvalidConfig).
  static ServerConfig load(const std::filesystem::path& file);

  // Applies OIDCA_ISSUER, OIDCA_HOST, OIDCA_PORT, OIDCA_DATA_DIR,
  // OIDCA_SIGNING_KEY, OIDCA_ADMIN_TOKEN, OIDCA_REGISTRATION_TOKEN and
  // OIDCA_AUDIT_LOG.
  void apply_env(const std::function<const char*(const char*)>& lookup);
  void apply_env();

  // Fills defaults that depend on other fields and validates the whole.
  void finalize();
  DiscoveryConfig discovery() const;
  AttestationPolicy attestation_policy() const;
};

}  // namespace oidca

#endif  // OIDCA_SERVER_CONFIG_H_
