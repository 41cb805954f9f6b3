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

#include "oidca/delegation.h"

#include <algorithm>

#include "oidca/encoding.h"
#include "oidca/error.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

void add(ChainValidationReport& report, Rule rule, std::size_t index,
         std::string detail) {
  report.violations.push_back({rule, index, std::move(detail)});
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

bool scope_covers(const ScopeSet& granted, std::string_view requested) {
  if (granted.contains(requested)) return true;
  // Any covering token is a proper prefix ending right before a ':'.
  for (std::size_t pos = requested.find(':'); pos != std::string_view::npos;
       pos = requested.find(':', pos + 1)) {
    if (granted.contains(requested.substr(0, pos))) return true;
  }
  return false;
}

std::vector<std::string> check_scope_reduction(std::string_view parent_scope,
                                               std::string_view child_scope) {
  auto parent_tokens = parse_scope(parent_scope);
  ScopeSet granted(parent_tokens.begin(), parent_tokens.end());
  std::vector<std::string> violating;
  for (auto& token : parse_scope(child_scope)) {
    if (!scope_covers(granted, token)) violating.push_back(std::move(token));
  }
  return violating;
}

std::string_view rule_label(Rule rule) {
  static constexpr std::array<std::string_view, kRuleCount> kLabels = {
      "R1", "R2", "R3", "R4", "R5", "R6", "R7"};
  return kLabels[static_cast<std::size_t>(rule) - 1];
}

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::kChronology: return "chronology";
    case Rule::kIssuerTrust: return "issuer_trust";
    case Rule::kLinkage: return "linkage";
    case Rule::kScopeReduction: return "scope_reduction";
    case Rule::kConstraints: return "constraints";
    case Rule::kSignatures: return "signatures";
    case Rule::kPolicy: return "policy";
  }
  return "unknown";
}

std::string_view outcome_name(RuleOutcome outcome) {
  switch (outcome) {
    case RuleOutcome::kPass: return "pass";
    case RuleOutcome::kFail: return "fail";
    case RuleOutcome::kNotApplicable: return "not_applicable";
  }
  return "unknown";
}

// --- TrustPolicy ---

void TrustPolicy::check() const {
  if (max_chain_length < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_chain_length must be >= 1");
  }
  if (clock_skew_seconds < 0) {
    throw Error(ErrorCode::kInvalidConfig, "clock_skew_seconds must be >= 0");
  }
}

TrustPolicy TrustPolicy::from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "policy must be an object");
  TrustPolicy p;
  try {
    if (doc.contains("trusted_issuers")) {
      for (const auto& iss : doc.at("trusted_issuers")) {
        p.trusted_issuers.insert(iss.get<std::string>());
      }
    }
    p.max_chain_length = doc.value("max_chain_length", p.max_chain_length);
    if (doc.contains("root_grant_scopes") && !doc["root_grant_scopes"].is_null()) {
      p.root_grant_scopes = doc["root_grant_scopes"].get<std::string>();
    }
    p.clock_skew_seconds = doc.value("clock_skew_seconds", p.clock_skew_seconds);
    std::string mode = doc.value("unknown_constraint_mode", "reject");
    if (mode == "reject") {
      p.unknown_constraint_mode = UnknownConstraintMode::kReject;
    } else if (mode == "ignore") {
      p.unknown_constraint_mode = UnknownConstraintMode::kIgnore;
    } else {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown_constraint_mode must be 'reject' or 'ignore'");
    }
    if (doc.contains("step_signing_keys")) {
      p.step_signing_keys = jose::KeySet::from_jwks(doc["step_signing_keys"]);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("policy: ") + e.what());
  }
  p.check();
  return p;
}

Json TrustPolicy::to_json() const {
  Json out{
      {"trusted_issuers", Json(std::vector<std::string>(trusted_issuers.begin(),
                                                         trusted_issuers.end()))},
      {"max_chain_length", max_chain_length},
      {"clock_skew_seconds", clock_skew_seconds},
      {"unknown_constraint_mode",
       unknown_constraint_mode == UnknownConstraintMode::kReject ? "reject" : "ignore"},
  };
  if (root_grant_scopes) out["root_grant_scopes"] = *root_grant_scopes;
  if (!step_signing_keys.empty()) out["step_signing_keys"] = step_signing_keys.to_jwks();
  return out;
}

// --- reports ---

bool EffectiveConstraints::resource_allowed(std::string_view resource) const {
  return std::all_of(
      allowed_resource_sets.begin(), allowed_resource_sets.end(),
      [&](const std::vector<std::string>& prefixes) {
        return std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) {
          return resource.substr(0, p.size()) == p;
        });
      });
}

Json EffectiveConstraints::to_json() const {
  Json out = Json::object();
  out["not_after"] = not_after ? Json(*not_after) : Json(nullptr);
  out["allowed_resource_sets"] = allowed_resource_sets;
  out["remaining_depth"] = remaining_depth ? Json(*remaining_depth) : Json(nullptr);
  out["ignored"] = ignored;
  return out;
}

std::vector<Rule> ChainValidationReport::failed_rules() const {
  std::vector<Rule> rules;
  for (const auto& v : violations) {
    if (std::find(rules.begin(), rules.end(), v.rule) == rules.end()) {
      rules.push_back(v.rule);
    }
  }
  std::sort(rules.begin(), rules.end());
  return rules;
}

Json ChainValidationReport::to_json() const {
  Json rules = Json::object();
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    Rule rule = static_cast<Rule>(i + 1);
    rules[std::string(rule_label(rule))] = {
        {"name", rule_name(rule)},
        {"result", outcome_name(rule_results[i])},
    };
  }
  Json vs = Json::array();
  for (const auto& v : violations) {
    vs.push_back({{"rule", rule_label(v.rule)},
                  {"step_index", v.step_index},
                  {"detail", v.detail}});
  }
  return Json{{"verdict", valid() ? "valid" : "invalid"},
              {"rule_results", std::move(rules)},
              {"violations", std::move(vs)},
              {"effective_constraints", effective.to_json()}};
}

// --- revocation ---

void RevocationList::revoke_step(std::string_view jti) {
  if (jti.empty()) throw Error(ErrorCode::kMalformedClaim, "jti must be non-empty");
  if (store_.get(Namespace::kRevocations, jti)) return;
  store_.put(Namespace::kRevocations, std::string(jti),
             Json{{"revoked_at", clock_->now()}});
}

bool RevocationList::is_revoked(std::string_view jti) const {
  return store_.get(Namespace::kRevocations, jti).has_value();
}

// --- validation ---

std::vector<Violation> enforce_constraints(const DelegationStep& step,
                                           std::size_t step_index,
                                           const DelegationChain& chain,
                                           NumericDate now,
                                           UnknownConstraintMode mode) {
  std::vector<Violation> out;
  if (!step.constraints) return out;
  const ConstraintSet& c = *step.constraints;

  if (c.max_duration_seconds) {
    NumericDate deadline = step.delegated_at + *c.max_duration_seconds;
    for (std::size_t j = step_index + 1; j < chain.size(); ++j) {
      if (chain[j].delegated_at > deadline) {
        out.push_back({Rule::kConstraints, j,
                       "delegated at " + std::to_string(chain[j].delegated_at) +
                           ", after step " + std::to_string(step_index) +
                           "'s max_duration_seconds window ended at " +
                           std::to_string(deadline)});
      }
    }
    if (now > deadline) {
      out.push_back({Rule::kConstraints, step_index,
                     "max_duration_seconds=" + std::to_string(*c.max_duration_seconds) +
                         " expired at " + std::to_string(deadline) + " (now " +
                         std::to_string(now) + ")"});
    }
  }
  if (c.max_delegation_depth) {
    auto after = static_cast<std::int64_t>(chain.size() - step_index - 1);
    if (after > *c.max_delegation_depth) {
      out.push_back({Rule::kConstraints, step_index,
                     "max_delegation_depth=" + std::to_string(*c.max_delegation_depth) +
                         " but " + std::to_string(after) + " further steps follow"});
    }
  }
  if (mode == UnknownConstraintMode::kReject) {
    for (const auto& [key, value] : c.other.items()) {
      out.push_back({Rule::kConstraints, step_index,
                     "unrecognized constraint '" + key + "'"});
    }
  }
  return out;
}

ChainValidationReport validate_delegation_chain(const DelegationChain& chain,
                                                const TrustPolicy& policy,
                                                NumericDate now,
                                                const RevocationView& revocations) {
  ChainValidationReport report;
  report.rule_results.fill(RuleOutcome::kPass);
  const std::size_t n = chain.size();

  // R1
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && chain[i].delegated_at + policy.clock_skew_seconds <
                     chain[i - 1].delegated_at) {
      add(report, Rule::kChronology, i,
          "delegated_at " + std::to_string(chain[i].delegated_at) +
              " precedes previous step's " + std::to_string(chain[i - 1].delegated_at));
    }
    if (chain[i].delegated_at > now + policy.clock_skew_seconds) {
      add(report, Rule::kChronology, i,
          "delegated_at " + std::to_string(chain[i].delegated_at) + " is in the future");
    }
  }

  // R2
  for (std::size_t i = 0; i < n; ++i) {
    if (!policy.trusted_issuers.contains(chain[i].iss)) {
      add(report, Rule::kIssuerTrust, i, "issuer '" + chain[i].iss + "' is not trusted");
    }
  }

  // R3
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (chain[i].aud != chain[i + 1].sub) {
      add(report, Rule::kLinkage, i + 1,
          "sub '" + chain[i + 1].sub + "' does not match previous aud '" +
              chain[i].aud + "'");
    }
  }

  // R4
  auto reduction = [&](std::string_view parent, std::size_t i) {
    try {
      auto bad = check_scope_reduction(parent, chain[i].scope);
      if (!bad.empty()) {
        add(report, Rule::kScopeReduction, i,
            "scope tokens not held by delegator: " + join(bad, " "));
      }
    } catch (const Error& e) {
      add(report, Rule::kScopeReduction, i, e.what());
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      if (policy.root_grant_scopes) reduction(*policy.root_grant_scopes, 0);
    } else {
      reduction(chain[i - 1].scope, i);
    }
  }

  // R5
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : enforce_constraints(chain[i], i, chain, now,
                                       policy.unknown_constraint_mode)) {
      report.violations.push_back(std::move(v));
    }
    if (!chain[i].constraints) continue;
    const ConstraintSet& c = *chain[i].constraints;
    EffectiveConstraints& eff = report.effective;
    if (c.max_duration_seconds) {
      NumericDate deadline = chain[i].delegated_at + *c.max_duration_seconds;
      eff.not_after = eff.not_after ? std::min(*eff.not_after, deadline) : deadline;
    }
    if (c.allowed_resources) eff.allowed_resource_sets.push_back(*c.allowed_resources);
    if (c.max_delegation_depth) {
      auto remaining =
          *c.max_delegation_depth - static_cast<std::int64_t>(n - i - 1);
      eff.remaining_depth =
          eff.remaining_depth ? std::min(*eff.remaining_depth, remaining) : remaining;
    }
    if (policy.unknown_constraint_mode == UnknownConstraintMode::kIgnore) {
      for (const auto& [key, value] : c.other.items()) {
        eff.ignored.push_back(std::to_string(i) + ":" + key);
      }
    }
  }

  // R6
  bool any_signed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!chain[i].signature) continue;
    any_signed = true;
    if (policy.step_signing_keys.empty()) {
      add(report, Rule::kSignatures, i, "step is signed but no step keys are trusted");
    } else if (!verify_step_signature(chain[i], policy.step_signing_keys)) {
      add(report, Rule::kSignatures, i, "step signature does not verify");
    }
  }
  if (!any_signed) {
    report.rule_results[static_cast<std::size_t>(Rule::kSignatures) - 1] =
        RuleOutcome::kNotApplicable;
  }

  // R7
  if (static_cast<std::int64_t>(n) > policy.max_chain_length) {
    add(report, Rule::kPolicy, static_cast<std::size_t>(policy.max_chain_length),
        "chain length " + std::to_string(n) + " exceeds max_chain_length " +
            std::to_string(policy.max_chain_length));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (chain[i].jti && revocations.is_revoked(*chain[i].jti)) {
      add(report, Rule::kPolicy, i, "step jti '" + *chain[i].jti + "' is revoked");
    }
  }

  for (const auto& v : report.violations) {
    report.rule_results[static_cast<std::size_t>(v.rule) - 1] = RuleOutcome::kFail;
  }
  return report;
}

DelegationChain append_delegation_step(DelegationChain chain,
                                       DelegationStep new_step,
                                       std::string_view delegator_scope) {
  check_step_structure(new_step);
  if (!chain.empty()) {
    const DelegationStep& last = chain.back();
    if (new_step.sub != last.aud) {
      throw Error(ErrorCode::kLinkageError,
                  "new step sub '" + new_step.sub + "' is not the chain's current "
                  "delegatee '" + last.aud + "'");
    }
    if (new_step.delegated_at < last.delegated_at) {
      throw Error(ErrorCode::kChronologyError,
                  "new step delegated_at precedes the last step");
    }
  }

  auto escalated = check_scope_reduction(delegator_scope, new_step.scope);
  if (!chain.empty()) {
    for (auto& token : check_scope_reduction(chain.back().scope, new_step.scope)) {
      if (std::find(escalated.begin(), escalated.end(), token) == escalated.end()) {
        escalated.push_back(std::move(token));
      }
    }
  }
  if (!escalated.empty()) {
    throw Error(ErrorCode::kScopeEscalation,
                "requested scope exceeds the delegator's: " + join(escalated, " "),
                escalated);
  }

  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain[i].constraints) continue;
    const ConstraintSet& c = *chain[i].constraints;
    if (c.max_duration_seconds &&
        new_step.delegated_at > chain[i].delegated_at + *c.max_duration_seconds) {
      throw Error(ErrorCode::kConstraintConflict,
                  "step " + std::to_string(i) + "'s max_duration_seconds window has ended");
    }
    if (c.max_delegation_depth &&
        static_cast<std::int64_t>(chain.size() - i) > *c.max_delegation_depth) {
      throw Error(ErrorCode::kConstraintConflict,
                  "step " + std::to_string(i) + " allows at most " +
                      std::to_string(*c.max_delegation_depth) + " further delegations");
    }
  }

  if (!new_step.jti) new_step.jti = random_id();
  chain.push_back(std::move(new_step));
  return chain;
}

}  // namespace oidca
