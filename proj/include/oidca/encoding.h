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

#ifndef OIDCA_ENCODING_H_
#define OIDCA_ENCODING_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace oidca {

// Unpadded base64url (RFC 4648 section 5).
std::string base64url_encode(std::string_view bytes);
// Returns nullopt on any character outside the base64url alphabet or on
// an impossible length. Padding is not accepted.
std::optional<std::string> base64url_decode(std::string_view text);

std::string hex_encode(std::string_view bytes);

// Raw 32-byte SHA-256 digest.
std::string sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

// Cryptographically secure random bytes from the OpenSSL DRBG.
std::string random_bytes(std::size_t n);

// 128-bit random identifier, base64url (22 chars). Used for jti values,
// nonces, client ids and request ids.
std::string random_id();

// True for exactly 64 lowercase hex characters.
bool is_sha256_hex(std::string_view text);

}  // namespace oidca

#endif  // OIDCA_ENCODING_H_
