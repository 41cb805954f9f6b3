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

#ifndef OIDCA_JOSE_H_
#define OIDCA_JOSE_H_

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace oidca::jose {

enum class Algorithm { kES256, kRS256 };

std::string_view algorithm_name(Algorithm alg);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Public verification key. Immutable and cheap to copy; the underlying
// EVP_PKEY is shared.
class PublicKey {
 public:
  static PublicKey from_pem(std::string_view pem, std::string kid = {});
  static PublicKey from_jwk(const nlohmann::json& jwk);

  const std::string& kid() const { return kid_; }
  Algorithm algorithm() const { return alg_; }

  // Public parameters only: kty, crv/x/y or n/e, plus kid, alg, use.
  nlohmann::json to_jwk() const;
  std::string to_pem() const;
  // RFC 7638 JWK thumbprint (SHA-256, base64url).
  std::string thumbprint() const;

  // `signature` is in JWS form: raw r||s for ES256, PKCS#1 v1.5 for RS256.
  bool verify(std::string_view signing_input, std::string_view signature) const;

 private:
  friend class PrivateKey;
  PublicKey(std::shared_ptr<EVP_PKEY> key, Algorithm alg, std::string kid);

  std::shared_ptr<EVP_PKEY> key_;
  Algorithm alg_;
  std::string kid_;
};

class PrivateKey {
 public:
  // An empty kid is replaced by the key's thumbprint.
  static PrivateKey generate(Algorithm alg, std::string kid = {});
  static PrivateKey from_pem(std::string_view pem, std::string kid = {});

  const std::string& kid() const { return kid_; }
  Algorithm algorithm() const { return alg_; }

  std::string to_pem() const;
  PublicKey public_key() const;
  std::string sign(std::string_view signing_input) const;

 private:
  PrivateKey(std::shared_ptr<EVP_PKEY> key, Algorithm alg, std::string kid);

  std::shared_ptr<EVP_PKEY> key_;
  Algorithm alg_;
  std::string kid_;
};

class KeySet {
 public:
  KeySet() = default;
  static KeySet from_jwks(const nlohmann::json& jwks);

  // Replaces any key with the same kid.
  void add(PublicKey key);
  const PublicKey* find(std::string_view kid) const;
  bool empty() const { return keys_.empty(); }
  std::size_t size() const { return keys_.size(); }
  const std::vector<PublicKey>& keys() const { return keys_; }

  nlohmann::json to_jwks() const;

 private:
  std::vector<PublicKey> keys_;
};

struct CompactJws {
  nlohmann::json header;
  nlohmann::json payload;
  std::string signing_input;  // "<b64 header>.<b64 payload>"
  std::string signature;      // decoded signature bytes
};

// Splits and decodes a compact JWS. Throws Error(kMalformedToken) when the
// token does not have three base64url segments with JSON object header and
// payload.
CompactJws decode(std::string_view token);

// Adds alg and kid to `header` and signs the compact serialization.
std::string sign(nlohmann::json header, const nlohmann::json& payload,
                 const PrivateKey& key);

// Looks up the key by the header kid and requires the header alg to match
// the key's algorithm. "none" and unknown algorithms never verify.
bool verify(const CompactJws& jws, const KeySet& keys);

// Server signing keys. Exactly one record is active; retired records keep
// verifying tokens minted before rotation.
class KeyRing {
 public:
  struct Record {
    PrivateKey key;
    bool active;
  };

  KeyRing() = default;
  explicit KeyRing(PrivateKey initial);

  // Makes `key` the active signing key; the previous one is retired.
  void rotate(PrivateKey key);
  // Throws Error(kNoActiveKeys) when the ring is empty.
  PrivateKey active() const;
  std::vector<Record> records() const;
  KeySet verification_keys() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<Record> records_;
};

}  // namespace oidca::jose

#endif  // OIDCA_JOSE_H_
