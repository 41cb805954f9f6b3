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

#ifndef OIDCA_DELEGATION_H_
#define OIDCA_DELEGATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oidca/chain.h"
#include "oidca/clock.h"
#include "oidca/jose.h"
#include "oidca/store.h"

namespace oidca {

using ScopeSet = std::set<std::string, std::less<>>;

// True iff `requested` is in `granted`, or some granted token g is a
// ':'-prefix of it ("calendar" covers "calendar:view", not the reverse).
bool scope_covers(const ScopeSet& granted, std::string_view requested);

// Tokens of `child_scope` not covered by `parent_scope`, in child order.
// Empty means the reduction rule holds. Throws Error(kMalformedScope) if
// either string is malformed.
std::vector<std::string> check_scope_reduction(std::string_view parent_scope,
                                               std::string_view child_scope);

// The seven chain validation rules, in evaluation order.
enum class Rule {
  kChronology = 1,
  kIssuerTrust = 2,
  kLinkage = 3,
  kScopeReduction = 4,
  kConstraints = 5,
  kSignatures = 6,
  kPolicy = 7,
};
inline constexpr std::size_t kRuleCount = 7;

std::string_view rule_label(Rule rule);  // "R1".."R7"
std::string_view rule_name(Rule rule);   // "chronology", ...

enum class RuleOutcome { kPass, kFail, kNotApplicable };
std::string_view outcome_name(RuleOutcome outcome);

struct Violation {
  Rule rule;
  std::size_t step_index;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

enum class UnknownConstraintMode { kReject, kIgnore };

struct TrustPolicy {
  ScopeSet trusted_issuers;
  std::int64_t max_chain_length = 5;
  // Scope the first delegator is known to hold. Step 0 is only checked
  // for reduction when this is set.
  std::optional<std::string> root_grant_scopes;
  std::int64_t clock_skew_seconds = 0;
  UnknownConstraintMode unknown_constraint_mode = UnknownConstraintMode::kReject;
  // Keys for individually signed steps.
  jose::KeySet step_signing_keys;

  // Throws Error(kInvalidConfig) on max_chain_length < 1 or negative skew.
  void check() const;
  static TrustPolicy from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// Constraints in force for whoever holds the end of the chain. Resource
// restrictions are conjunctive: a resource must match a prefix from every
// list.
struct EffectiveConstraints {
  std::optional<NumericDate> not_after;
  std::vector<std::vector<std::string>> allowed_resource_sets;
  std::optional<std::int64_t> remaining_depth;
  // Unrecognized constraint keys seen under UnknownConstraintMode::kIgnore,
  // as "<step>:<key>".
  std::vector<std::string> ignored;

  bool resource_allowed(std::string_view resource) const;
  nlohmann::json to_json() const;
};

struct ChainValidationReport {
  std::array<RuleOutcome, kRuleCount> rule_results{};
  std::vector<Violation> violations;
  EffectiveConstraints effective;

  bool valid() const { return violations.empty(); }
  RuleOutcome result(Rule rule) const {
    return rule_results[static_cast<std::size_t>(rule) - 1];
  }
  // Distinct rules with at least one violation, ascending.
  std::vector<Rule> failed_rules() const;
  nlohmann::json to_json() const;
};

class RevocationView {
 public:
  virtual ~RevocationView() = default;
  virtual bool is_revoked(std::string_view jti) const = 0;
};

// Revoked step identifiers kept in the store's revocations namespace.
// Entries never expire.
class RevocationList final : public RevocationView {
 public:
  explicit RevocationList(Store& store, std::shared_ptr<const Clock> clock)
      : store_(store), clock_(std::move(clock)) {}

  // Idempotent. Throws Error(kMalformedClaim) on an empty jti.
  void revoke_step(std::string_view jti);
  bool is_revoked(std::string_view jti) const override;

 private:
  Store& store_;
  std::shared_ptr<const Clock> clock_;
};

// Fixed set of revoked identifiers, for offline validation.
class StaticRevocations final : public RevocationView {
 public:
  StaticRevocations() = default;
  explicit StaticRevocations(ScopeSet jtis) : jtis_(std::move(jtis)) {}
  bool is_revoked(std::string_view jti) const override { return jtis_.contains(jti); }

 private:
  ScopeSet jtis_;
};

// Constraint checks contributed by `chain[step_index]`: its duration window
// must contain every later delegation and `now`, and at most
// max_delegation_depth steps may follow it. Unrecognized keys are
// violations under kReject and are skipped under kIgnore.
std::vector<Violation> enforce_constraints(const DelegationStep& step,
                                           std::size_t step_index,
                                           const DelegationChain& chain,
                                           NumericDate now,
                                           UnknownConstraintMode mode);

// Runs R1-R7 and collects every violation.
ChainValidationReport validate_delegation_chain(const DelegationChain& chain,
                                                const TrustPolicy& policy,
                                                NumericDate now,
                                                const RevocationView& revocations);

// Extends `chain` with `new_step` after checking linkage, chronology,
// scope reduction against both `delegator_scope` and the previous step, and
// the duration/depth constraints inherited from earlier steps. Assigns a
// fresh jti when the step has none. Throws Error with kLinkageError,
// kChronologyError, kScopeEscalation (details = offending tokens),
// kConstraintConflict or kMalformedClaim.
DelegationChain append_delegation_step(DelegationChain chain,
                                       DelegationStep new_step,
                                       std::string_view delegator_scope);

}  // namespace oidca

#endif  // OIDCA_DELEGATION_H_
