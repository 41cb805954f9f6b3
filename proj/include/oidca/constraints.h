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

#ifndef OIDCA_CONSTRAINTS_H_
#define OIDCA_CONSTRAINTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace oidca {

inline constexpr std::string_view kMaxDurationSeconds = "max_duration_seconds";
inline constexpr std::string_view kAllowedResources = "allowed_resources";
inline constexpr std::string_view kMaxDelegationDepth = "max_delegation_depth";

// Constraint object carried by `delegation_constraints` and by the
// `constraints` member of a delegation step. Keys other than the three
// recognized ones are kept verbatim in `other` so downstream policy can
// fail closed on them.
struct ConstraintSet {
  std::optional<std::int64_t> max_duration_seconds;
  std::optional<std::vector<std::string>> allowed_resources;
  std::optional<std::int64_t> max_delegation_depth;
  nlohmann::json other = nlohmann::json::object();

  bool empty() const {
    return !max_duration_seconds && !allowed_resources &&
           !max_delegation_depth && other.empty();
  }
  bool operator==(const ConstraintSet&) const = default;
};

// Throws Error(kMalformedClaim) when `value` is not an object or a
// recognized key has the wrong type. `where` names the claim for messages.
ConstraintSet parse_constraints(const nlohmann::json& value,
                                std::string_view where = "constraints");
nlohmann::json to_json(const ConstraintSet& constraints);

}  // namespace oidca

#endif  // OIDCA_CONSTRAINTS_H_
