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

#include "oidca/encoding.h"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>

#include "oidca/error.h"

namespace oidca {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedClaim: return "malformed_claim";
    case ErrorCode::kInvalidAgentType: return "invalid_agent_type";
    case ErrorCode::kInvalidCapability: return "invalid_capability";
    case ErrorCode::kMissingRequiredClaim: return "missing_required_claim";
    case ErrorCode::kMalformedScope: return "malformed_scope";
    case ErrorCode::kScopeEscalation: return "scope_escalation";
    case ErrorCode::kLinkageError: return "linkage_error";
    case ErrorCode::kChronologyError: return "chronology_error";
    case ErrorCode::kConstraintConflict: return "constraint_conflict";
    case ErrorCode::kMalformedEvidence: return "malformed_evidence";
    case ErrorCode::kInvalidDigest: return "invalid_digest";
    case ErrorCode::kSigningFailure: return "signing_failure";
    case ErrorCode::kBadSignature: return "bad_signature";
    case ErrorCode::kExpired: return "expired";
    case ErrorCode::kWrongAudience: return "wrong_audience";
    case ErrorCode::kWrongIssuer: return "wrong_issuer";
    case ErrorCode::kNotYetValid: return "not_yet_valid";
    case ErrorCode::kMalformedToken: return "malformed_token";
    case ErrorCode::kInvalidClaims: return "invalid_claims";
    case ErrorCode::kDelegateeUnknown: return "delegatee_unknown";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kInvalidMetadata: return "invalid_metadata";
    case ErrorCode::kUnsupportedAuthMethod: return "unsupported_auth_method";
    case ErrorCode::kNoActiveKeys: return "no_active_keys";
    case ErrorCode::kStorageIo: return "storage_io";
    case ErrorCode::kInvalidKey: return "invalid_key";
  }
  return "unknown_error";
}

std::string base64url_encode(std::string_view bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(bytes.data()),
                          static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  while (!out.empty() && out.back() == '=') out.pop_back();
  for (char& c : out) {
    if (c == '+') c = '-';
    else if (c == '/') c = '_';
  }
  return out;
}

std::optional<std::string> base64url_decode(std::string_view text) {
  if (text.size() % 4 == 1) return std::nullopt;
  std::string std_b64;
  std_b64.reserve(text.size() + 3);
  for (char c : text) {
    if (c == '-') std_b64.push_back('+');
    else if (c == '_') std_b64.push_back('/');
    else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
             (c >= '0' && c <= '9'))
      std_b64.push_back(c);
    else
      return std::nullopt;
  }
  std::size_t padding = (4 - std_b64.size() % 4) % 4;
  std_b64.append(padding, '=');
  if (std_b64.empty()) return std::string{};

  std::string out(std_b64.size() / 4 * 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(std_b64.data()),
                          static_cast<int>(std_b64.size()));
  if (n < 0) return std::nullopt;
  // EVP_DecodeBlock counts the zero bytes produced by '=' padding.
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string hex_encode(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::string sha256(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kSigningFailure, "SHA-256 digest failed");
  }
  return std::string(reinterpret_cast<const char*>(md.data()), len);
}

std::string sha256_hex(std::string_view data) { return hex_encode(sha256(data)); }

std::string random_bytes(std::size_t n) {
  std::string out(n, '\0');
  if (n > 0 && RAND_bytes(reinterpret_cast<unsigned char*>(out.data()),
                          static_cast<int>(n)) != 1) {
    throw Error(ErrorCode::kSigningFailure, "random generator failure");
  }
  return out;
}

std::string random_id() { return base64url_encode(random_bytes(16)); }

bool is_sha256_hex(std::string_view text) {
  if (text.size() != 64) return false;
  for (char c : text) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace oidca
