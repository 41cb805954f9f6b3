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

#include "oidca/jose.h"

#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/pem.h>

#include <array>
#include <mutex>

#include "oidca/encoding.h"
#include "oidca/error.h"

namespace oidca::jose {
namespace {

using Json = nlohmann::json;

constexpr std::size_t kP256CoordinateSize = 32;

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct BioDeleter {
  void operator()(BIO* b) const { BIO_free(b); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
struct EcdsaSigDeleter {
  void operator()(ECDSA_SIG* s) const { ECDSA_SIG_free(s); }
};
struct ParamBldDeleter {
  void operator()(OSSL_PARAM_BLD* b) const { OSSL_PARAM_BLD_free(b); }
};
struct ParamDeleter {
  void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

std::shared_ptr<EVP_PKEY> adopt(EVP_PKEY* raw) {
  return std::shared_ptr<EVP_PKEY>(raw, PkeyDeleter{});
}

[[noreturn]] void key_error(const std::string& what) {
  throw Error(ErrorCode::kInvalidKey, what);
}

// Supported keys: EC on P-256 (ES256) and RSA >= 2048 bits (RS256).
Algorithm detect_algorithm(EVP_PKEY* key) {
  if (EVP_PKEY_is_a(key, "EC")) {
    std::array<char, 64> group{};
    std::size_t len = 0;
    if (EVP_PKEY_get_utf8_string_param(key, OSSL_PKEY_PARAM_GROUP_NAME,
                                       group.data(), group.size(), &len) != 1 ||
        std::string_view(group.data(), len) != "prime256v1") {
      key_error("EC keys must use the P-256 curve");
    }
    return Algorithm::kES256;
  }
  if (EVP_PKEY_is_a(key, "RSA")) {
    if (EVP_PKEY_get_bits(key) < 2048) key_error("RSA keys must be >= 2048 bits");
    return Algorithm::kRS256;
  }
  key_error("unsupported key type (need EC P-256 or RSA)");
}

std::string bn_bytes(const EVP_PKEY* key, const char* param, int pad_to) {
  BIGNUM* raw = nullptr;
  if (EVP_PKEY_get_bn_param(key, param, &raw) != 1) {
    key_error(std::string("cannot read key parameter ") + param);
  }
  BnPtr bn(raw);
  int size = pad_to > 0 ? pad_to : BN_num_bytes(bn.get());
  std::string out(static_cast<std::size_t>(size), '\0');
  if (BN_bn2binpad(bn.get(), reinterpret_cast<unsigned char*>(out.data()),
                   size) < 0) {
    key_error("key parameter does not fit");
  }
  return out;
}

Json public_jwk_members(const EVP_PKEY* key, Algorithm alg) {
  if (alg == Algorithm::kES256) {
    return Json{
        {"kty", "EC"},
        {"crv", "P-256"},
        {"x", base64url_encode(bn_bytes(key, OSSL_PKEY_PARAM_EC_PUB_X,
                                        kP256CoordinateSize))},
        {"y", base64url_encode(bn_bytes(key, OSSL_PKEY_PARAM_EC_PUB_Y,
                                        kP256CoordinateSize))},
    };
  }
  return Json{
      {"kty", "RSA"},
      {"n", base64url_encode(bn_bytes(key, OSSL_PKEY_PARAM_RSA_N, 0))},
      {"e", base64url_encode(bn_bytes(key, OSSL_PKEY_PARAM_RSA_E, 0))},
  };
}

std::string thumbprint_of(const EVP_PKEY* key, Algorithm alg) {
  // nlohmann::json objects serialize with sorted keys and no whitespace,
  // which is the canonical form RFC 7638 requires.
  return base64url_encode(sha256(public_jwk_members(key, alg).dump()));
}

std::string required_b64_member(const Json& jwk, const char* name) {
  auto it = jwk.find(name);
  if (it == jwk.end() || !it->is_string()) {
    key_error(std::string("JWK member missing: ") + name);
  }
  auto decoded = base64url_decode(it->get<std::string>());
  if (!decoded || decoded->empty()) {
    key_error(std::string("JWK member is not base64url: ") + name);
  }
  return *decoded;
}

std::shared_ptr<EVP_PKEY> key_from_params(const char* type,
                                          OSSL_PARAM_BLD* bld) {
  std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld));
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(
      EVP_PKEY_CTX_new_from_name(nullptr, type, nullptr));
  EVP_PKEY* raw = nullptr;
  if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
      EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) !=
          1) {
    key_error("JWK does not describe a valid public key");
  }
  return adopt(raw);
}

std::string der_to_jws_signature(std::string_view der) {
  const auto* p = reinterpret_cast<const unsigned char*>(der.data());
  std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter> sig(
      d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
  if (!sig) throw Error(ErrorCode::kSigningFailure, "bad ECDSA signature");
  const BIGNUM* r = nullptr;
  const BIGNUM* s = nullptr;
  ECDSA_SIG_get0(sig.get(), &r, &s);
  std::string out(2 * kP256CoordinateSize, '\0');
  auto* buf = reinterpret_cast<unsigned char*>(out.data());
  BN_bn2binpad(r, buf, kP256CoordinateSize);
  BN_bn2binpad(s, buf + kP256CoordinateSize, kP256CoordinateSize);
  return out;
}

std::optional<std::string> jws_to_der_signature(std::string_view raw) {
  if (raw.size() != 2 * kP256CoordinateSize) return std::nullopt;
  const auto* buf = reinterpret_cast<const unsigned char*>(raw.data());
  BnPtr r(BN_bin2bn(buf, kP256CoordinateSize, nullptr));
  BnPtr s(BN_bin2bn(buf + kP256CoordinateSize, kP256CoordinateSize, nullptr));
  std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter> sig(ECDSA_SIG_new());
  if (!r || !s || !sig || ECDSA_SIG_set0(sig.get(), r.get(), s.get()) != 1) {
    return std::nullopt;
  }
  r.release();
  s.release();
  unsigned char* der = nullptr;
  int len = i2d_ECDSA_SIG(sig.get(), &der);
  if (len <= 0) return std::nullopt;
  std::string out(reinterpret_cast<const char*>(der), static_cast<std::size_t>(len));
  OPENSSL_free(der);
  return out;
}

std::string bio_contents(BIO* bio) {
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  return std::string(data, static_cast<std::size_t>(len));
}

}  // namespace

std::string_view algorithm_name(Algorithm alg) {
  return alg == Algorithm::kES256 ? "ES256" : "RS256";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "ES256") return Algorithm::kES256;
  if (name == "RS256") return Algorithm::kRS256;
  return std::nullopt;
}

// --- PublicKey ---

PublicKey::PublicKey(std::shared_ptr<EVP_PKEY> key, Algorithm alg,
                     std::string kid)
    : key_(std::move(key)), alg_(alg), kid_(std::move(kid)) {
  if (kid_.empty()) kid_ = thumbprint_of(key_.get(), alg_);
}

PublicKey PublicKey::from_pem(std::string_view pem, std::string kid) {
  std::unique_ptr<BIO, BioDeleter> bio(
      BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  EVP_PKEY* raw = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
  if (raw == nullptr) key_error("not a PEM public key");
  auto key = adopt(raw);
  Algorithm alg = detect_algorithm(key.get());
  return PublicKey(std::move(key), alg, std::move(kid));
}

PublicKey PublicKey::from_jwk(const Json& jwk) {
  if (!jwk.is_object()) key_error("JWK must be an object");
  std::string kty = jwk.value("kty", "");
  std::string kid = jwk.value("kid", "");

  std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
  std::shared_ptr<EVP_PKEY> key;
  Algorithm alg;
  if (kty == "EC") {
    if (jwk.value("crv", "") != "P-256") key_error("only P-256 EC keys supported");
    std::string x = required_b64_member(jwk, "x");
    std::string y = required_b64_member(jwk, "y");
    if (x.size() != kP256CoordinateSize || y.size() != kP256CoordinateSize) {
      key_error("P-256 coordinates must be 32 bytes");
    }
    std::string point = "\x04" + x + y;
    OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME,
                                    "prime256v1", 0);
    OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY,
                                     point.data(), point.size());
    key = key_from_params("EC", bld.get());
    alg = Algorithm::kES256;
  } else if (kty == "RSA") {
    std::string n = required_b64_member(jwk, "n");
    std::string e = required_b64_member(jwk, "e");
    BnPtr bn_n(BN_bin2bn(reinterpret_cast<const unsigned char*>(n.data()),
                         static_cast<int>(n.size()), nullptr));
    BnPtr bn_e(BN_bin2bn(reinterpret_cast<const unsigned char*>(e.data()),
                         static_cast<int>(e.size()), nullptr));
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, bn_n.get());
    OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, bn_e.get());
    key = key_from_params("RSA", bld.get());
    alg = detect_algorithm(key.get());
  } else {
    key_error("unsupported JWK kty '" + kty + "'");
  }
  if (auto it = jwk.find("alg"); it != jwk.end()) {
    if (!it->is_string() || parse_algorithm(it->get<std::string>()) != alg) {
      key_error("JWK alg does not match key type");
    }
  }
  return PublicKey(std::move(key), alg, std::move(kid));
}

Json PublicKey::to_jwk() const {
  Json jwk = public_jwk_members(key_.get(), alg_);
  jwk["kid"] = kid_;
  jwk["alg"] = algorithm_name(alg_);
  jwk["use"] = "sig";
  return jwk;
}

std::string PublicKey::to_pem() const {
  std::unique_ptr<BIO, BioDeleter> bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_PUBKEY(bio.get(), key_.get()) != 1) {
    key_error("cannot serialize public key");
  }
  return bio_contents(bio.get());
}

std::string PublicKey::thumbprint() const {
  return thumbprint_of(key_.get(), alg_);
}

bool PublicKey::verify(std::string_view signing_input,
                       std::string_view signature) const {
  std::string der;
  if (alg_ == Algorithm::kES256) {
    auto converted = jws_to_der_signature(signature);
    if (!converted) return false;
    der = std::move(*converted);
    signature = der;
  }
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr,
                                   key_.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(
             ctx.get(), reinterpret_cast<const unsigned char*>(signature.data()),
             signature.size(),
             reinterpret_cast<const unsigned char*>(signing_input.data()),
             signing_input.size()) == 1;
}

// --- PrivateKey ---

PrivateKey::PrivateKey(std::shared_ptr<EVP_PKEY> key, Algorithm alg,
                       std::string kid)
    : key_(std::move(key)), alg_(alg), kid_(std::move(kid)) {
  if (kid_.empty()) kid_ = thumbprint_of(key_.get(), alg_);
}

PrivateKey PrivateKey::generate(Algorithm alg, std::string kid) {
  EVP_PKEY* raw = alg == Algorithm::kES256
                      ? EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256")
                      : EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA",
                                          static_cast<std::size_t>(2048));
  if (raw == nullptr) throw Error(ErrorCode::kSigningFailure, "key generation failed");
  return PrivateKey(adopt(raw), alg, std::move(kid));
}

PrivateKey PrivateKey::from_pem(std::string_view pem, std::string kid) {
  std::unique_ptr<BIO, BioDeleter> bio(
      BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  EVP_PKEY* raw = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
  if (raw == nullptr) key_error("not a PEM private key");
  auto key = adopt(raw);
  Algorithm alg = detect_algorithm(key.get());
  return PrivateKey(std::move(key), alg, std::move(kid));
}

std::string PrivateKey::to_pem() const {
  std::unique_ptr<BIO, BioDeleter> bio(BIO_new(BIO_s_mem()));
  if (PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0,
                               nullptr, nullptr) != 1) {
    key_error("cannot serialize private key");
  }
  return bio_contents(bio.get());
}

PublicKey PrivateKey::public_key() const {
  // EVP_PKEY_dup would keep the private half; round-trip through the
  // public encoding instead so a PublicKey never holds secret material.
  unsigned char* der = nullptr;
  int len = i2d_PUBKEY(key_.get(), &der);
  if (len <= 0) key_error("cannot extract public key");
  const unsigned char* p = der;
  EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, len);
  OPENSSL_free(der);
  if (raw == nullptr) key_error("cannot extract public key");
  return PublicKey(adopt(raw), alg_, kid_);
}

std::string PrivateKey::sign(std::string_view signing_input) const {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  std::size_t len = 0;
  const auto* msg = reinterpret_cast<const unsigned char*>(signing_input.data());
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key_.get()) != 1 ||
      EVP_DigestSign(ctx.get(), nullptr, &len, msg, signing_input.size()) != 1) {
    throw Error(ErrorCode::kSigningFailure, "cannot initialize signer");
  }
  std::string sig(len, '\0');
  if (EVP_DigestSign(ctx.get(), reinterpret_cast<unsigned char*>(sig.data()),
                     &len, msg, signing_input.size()) != 1) {
    throw Error(ErrorCode::kSigningFailure, "signing failed");
  }
  sig.resize(len);
  return alg_ == Algorithm::kES256 ? der_to_jws_signature(sig) : sig;
}

// --- KeySet ---

KeySet KeySet::from_jwks(const Json& jwks) {
  if (!jwks.is_object() || !jwks.contains("keys") || !jwks["keys"].is_array()) {
    key_error("JWKS must be an object with a 'keys' array");
  }
  KeySet set;
  for (const auto& jwk : jwks["keys"]) set.add(PublicKey::from_jwk(jwk));
  return set;
}

void KeySet::add(PublicKey key) {
  for (auto& existing : keys_) {
    if (existing.kid() == key.kid()) {
      existing = std::move(key);
      return;
    }
  }
  keys_.push_back(std::move(key));
}

const PublicKey* KeySet::find(std::string_view kid) const {
  for (const auto& key : keys_) {
    if (key.kid() == kid) return &key;
  }
  return nullptr;
}

Json KeySet::to_jwks() const {
  Json keys = Json::array();
  for (const auto& key : keys_) keys.push_back(key.to_jwk());
  return Json{{"keys", std::move(keys)}};
}

// --- compact JWS ---

CompactJws decode(std::string_view token) {
  auto first = token.find('.');
  auto second = first == std::string_view::npos ? first : token.find('.', first + 1);
  if (second == std::string_view::npos ||
      token.find('.', second + 1) != std::string_view::npos) {
    throw Error(ErrorCode::kMalformedToken, "token must have three segments");
  }
  auto header_b64 = token.substr(0, first);
  auto payload_b64 = token.substr(first + 1, second - first - 1);
  auto sig_b64 = token.substr(second + 1);

  auto header_raw = base64url_decode(header_b64);
  auto payload_raw = base64url_decode(payload_b64);
  auto sig = base64url_decode(sig_b64);
  if (!header_raw || !payload_raw || !sig || header_b64.empty() ||
      payload_b64.empty()) {
    throw Error(ErrorCode::kMalformedToken, "token segment is not base64url");
  }
  CompactJws jws;
  jws.header = Json::parse(*header_raw, nullptr, false);
  jws.payload = Json::parse(*payload_raw, nullptr, false);
  if (!jws.header.is_object() || !jws.payload.is_object()) {
    throw Error(ErrorCode::kMalformedToken,
                "token header and payload must be JSON objects");
  }
  jws.signing_input = std::string(token.substr(0, second));
  jws.signature = std::move(*sig);
  return jws;
}

std::string sign(Json header, const Json& payload, const PrivateKey& key) {
  header["alg"] = algorithm_name(key.algorithm());
  header["kid"] = key.kid();
  std::string input =
      base64url_encode(header.dump()) + "." + base64url_encode(payload.dump());
  std::string sig = key.sign(input);
  return input + "." + base64url_encode(sig);
}

bool verify(const CompactJws& jws, const KeySet& keys) {
  auto kid = jws.header.find("kid");
  auto alg = jws.header.find("alg");
  if (kid == jws.header.end() || !kid->is_string() || alg == jws.header.end() ||
      !alg->is_string()) {
    return false;
  }
  const PublicKey* key = keys.find(kid->get<std::string>());
  if (key == nullptr) return false;
  if (parse_algorithm(alg->get<std::string>()) != key->algorithm()) return false;
  return key->verify(jws.signing_input, jws.signature);
}

// --- KeyRing ---

KeyRing::KeyRing(PrivateKey initial) {
  records_.push_back({std::move(initial), true});
}

void KeyRing::rotate(PrivateKey key) {
  std::unique_lock lock(mu_);
  for (auto& r : records_) r.active = false;
  records_.push_back({std::move(key), true});
}

PrivateKey KeyRing::active() const {
  std::shared_lock lock(mu_);
  for (const auto& r : records_) {
    if (r.active) return r.key;
  }
  throw Error(ErrorCode::kNoActiveKeys, "no active signing key");
}

std::vector<KeyRing::Record> KeyRing::records() const {
  std::shared_lock lock(mu_);
  return records_;
}

KeySet KeyRing::verification_keys() const {
  std::shared_lock lock(mu_);
  KeySet set;
  for (const auto& r : records_) set.add(r.key.public_key());
  return set;
}

}  // namespace oidca::jose
