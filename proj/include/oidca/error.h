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

#ifndef OIDCA_ERROR_H_
#define OIDCA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oidca {

enum class ErrorCode {
  // claims
  kMalformedClaim,
  kInvalidAgentType,
  kInvalidCapability,
  kMissingRequiredClaim,
  // delegation
  kMalformedScope,
  kScopeEscalation,
  kLinkageError,
  kChronologyError,
  kConstraintConflict,
  // attestation
  kMalformedEvidence,
  kInvalidDigest,
  // tokens
  kSigningFailure,
  kBadSignature,
  kExpired,
  kWrongAudience,
  kWrongIssuer,
  kNotYetValid,
  kMalformedToken,
  kInvalidClaims,
  kDelegateeUnknown,
  // discovery / registration
  kInvalidConfig,
  kInvalidMetadata,
  kUnsupportedAuthMethod,
  kNoActiveKeys,
  // store
  kStorageIo,
  kInvalidKey,
};

// Wire name of an error code, e.g. "scope_escalation".
std::string_view error_code_name(ErrorCode code);

// Every contract failure in the library is reported as an Error. `details`
// carries structured extras such as the offending scope tokens or the
// names of missing claims.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message),
        code_(code),
        details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace oidca

#endif  // OIDCA_ERROR_H_
