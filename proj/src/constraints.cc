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

#include "oidca/constraints.h"

#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

std::int64_t non_negative_int(const Json& v, std::string_view where,
                              std::string_view key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kMalformedClaim,
                std::string(where) + "." + std::string(key) +
                    " must be a non-negative integer");
  }
  return v.get<std::int64_t>();
}

}  // namespace

ConstraintSet parse_constraints(const Json& value, std::string_view where) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kMalformedClaim,
                std::string(where) + " must be a JSON object");
  }
  ConstraintSet out;
  for (const auto& [key, v] : value.items()) {
    if (key == kMaxDurationSeconds) {
      out.max_duration_seconds = non_negative_int(v, where, key);
    } else if (key == kMaxDelegationDepth) {
      out.max_delegation_depth = non_negative_int(v, where, key);
    } else if (key == kAllowedResources) {
      if (!v.is_array()) {
        throw Error(ErrorCode::kMalformedClaim,
                    std::string(where) + ".allowed_resources must be an array");
      }
      std::vector<std::string> resources;
      for (const auto& r : v) {
        if (!r.is_string() || r.get<std::string>().empty()) {
          throw Error(ErrorCode::kMalformedClaim,
                      std::string(where) +
                          ".allowed_resources entries must be non-empty strings");
        }
        resources.push_back(r.get<std::string>());
      }
      out.allowed_resources = std::move(resources);
    } else {
      out.other[key] = v;
    }
  }
  return out;
}

Json to_json(const ConstraintSet& c) {
  Json out = c.other;
  if (c.max_duration_seconds) out[std::string(kMaxDurationSeconds)] = *c.max_duration_seconds;
  if (c.allowed_resources) out[std::string(kAllowedResources)] = *c.allowed_resources;
  if (c.max_delegation_depth) out[std::string(kMaxDelegationDepth)] = *c.max_delegation_depth;
  return out;
}

}  // namespace oidca
