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

#include "oidca/chain.h"

#include <set>

#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

std::string required_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedClaim,
                std::string("delegation step member '") + key +
                    "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedClaim,
                "delegation step member '" + std::string(key) +
                    "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<std::string> parse_scope(std::string_view scope) {
  if (scope.empty()) throw Error(ErrorCode::kMalformedScope, "scope is empty");
  std::vector<std::string> tokens;
  std::set<std::string_view> seen;
  std::size_t start = 0;
  while (true) {
    std::size_t end = scope.find(' ', start);
    std::string_view token = scope.substr(start, end == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : end - start);
    if (token.empty()) {
      throw Error(ErrorCode::kMalformedScope,
                  "scope has an empty token: '" + std::string(scope) + "'");
    }
    for (char c : token) {
      if (static_cast<unsigned char>(c) <= 0x20 || c == 0x7f || c == '"' ||
          c == '\\') {
        throw Error(ErrorCode::kMalformedScope,
                    "scope token has an invalid character: '" +
                        std::string(token) + "'");
      }
    }
    if (!seen.insert(token).second) {
      throw Error(ErrorCode::kMalformedScope,
                  "duplicate scope token '" + std::string(token) + "'",
                  {std::string(token)});
    }
    tokens.emplace_back(token);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return tokens;
}

void check_step_structure(const DelegationStep& step) {
  if (step.iss.empty() || step.sub.empty() || step.aud.empty()) {
    throw Error(ErrorCode::kMalformedClaim,
                "delegation step iss, sub and aud must be non-empty");
  }
  if (step.sub == step.aud) {
    throw Error(ErrorCode::kMalformedClaim,
                "self-delegation: sub equals aud ('" + step.sub + "')");
  }
  if (step.delegated_at < 0) {
    throw Error(ErrorCode::kMalformedClaim, "delegated_at must be >= 0");
  }
  try {
    parse_scope(step.scope);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedClaim,
                std::string("delegation step scope: ") + e.what());
  }
}

DelegationStep parse_delegation_step(const Json& value) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kMalformedClaim, "delegation step must be an object");
  }
  DelegationStep step;
  step.iss = required_string(value, "iss");
  step.sub = required_string(value, "sub");
  step.aud = required_string(value, "aud");
  auto at = value.find("delegated_at");
  if (at == value.end() || !at->is_number_integer()) {
    throw Error(ErrorCode::kMalformedClaim,
                "delegation step member 'delegated_at' must be a NumericDate");
  }
  step.delegated_at = at->get<NumericDate>();
  step.scope = required_string(value, "scope");
  step.purpose = optional_string(value, "purpose");
  if (auto c = value.find("constraints"); c != value.end()) {
    step.constraints = parse_constraints(*c, "delegation step constraints");
  }
  step.jti = optional_string(value, "jti");
  if (step.jti && step.jti->empty()) {
    throw Error(ErrorCode::kMalformedClaim, "delegation step jti is empty");
  }
  step.signature = optional_string(value, kStepSignatureKey);
  check_step_structure(step);
  return step;
}

DelegationChain parse_delegation_chain(const Json& value) {
  if (!value.is_array()) {
    throw Error(ErrorCode::kMalformedClaim, "delegation_chain must be an array");
  }
  DelegationChain chain;
  chain.reserve(value.size());
  for (const auto& step : value) chain.push_back(parse_delegation_step(step));
  return chain;
}

Json to_json(const DelegationStep& step) {
  Json out{
      {"iss", step.iss},
      {"sub", step.sub},
      {"aud", step.aud},
      {"delegated_at", step.delegated_at},
      {"scope", step.scope},
  };
  if (step.purpose) out["purpose"] = *step.purpose;
  if (step.constraints) out["constraints"] = to_json(*step.constraints);
  if (step.jti) out["jti"] = *step.jti;
  if (step.signature) out[std::string(kStepSignatureKey)] = *step.signature;
  return out;
}

Json to_json(const DelegationChain& chain) {
  Json out = Json::array();
  for (const auto& step : chain) out.push_back(to_json(step));
  return out;
}

DelegationStep sign_step(DelegationStep step, const jose::PrivateKey& key) {
  step.signature.reset();
  step.signature = jose::sign(Json{{"typ", "delegation-step+jwt"}}, to_json(step), key);
  return step;
}

bool verify_step_signature(const DelegationStep& step, const jose::KeySet& keys) {
  if (!step.signature) return false;
  try {
    auto jws = jose::decode(*step.signature);
    if (!jose::verify(jws, keys)) return false;
    DelegationStep unsigned_step = step;
    unsigned_step.signature.reset();
    return jws.payload == to_json(unsigned_step);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace oidca
