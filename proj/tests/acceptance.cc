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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "oidca/attestation.h"
#include "oidca/claims.h"
#include "oidca/delegation.h"
#include "oidca/encoding.h"
#include "oidca/error.h"
#include "oidca/server.h"
#include "oidca/token_service.h"
#include "server_harness.h"
#include "support.h"

namespace oidca {
namespace {

using testing::Json;

constexpr NumericDate kSampleNow = 1714350000;
const std::string kIssuer = "https://auth.example.com";

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << what;
    pass = pass && ok;
  }
};

TrustPolicy fixture_policy() {
  TrustPolicy p;
  p.trusted_issuers = {kIssuer};
  p.max_chain_length = 5;
  return p;
}

DelegationChain sample_chain() {
  return parse_delegation_chain(testing::read_fixture("sample_chain.json")["delegation_chain"]);
}

std::string failed_rules_text(const ChainValidationReport& report) {
  std::string out;
  for (Rule r : report.failed_rules()) out += (out.empty() ? "" : ",") + std::string(rule_label(r));
  return out.empty() ? "none" : out;
}

// AC1: the sample agent token, minted locally, validates end to end.
Verdict ac1() {
  Verdict v;
  auto issuer_key = jose::PrivateKey::generate(jose::Algorithm::kES256);
  auto attester = jose::PrivateKey::generate(jose::Algorithm::kES256);
  Json body = testing::sample_token_with_evidence(attester);
  StandardClaims standard = parse_standard_claims(body);
  auto agent = parse_agent_claims(body);
  v.require(agent.has_value(), "agent claims did not parse; ");
  if (!agent) return v;
  std::string token = mint_agent_id_token(standard, *agent, issuer_key);
  jose::KeySet keys;
  keys.add(issuer_key.public_key());
  IdToken parsed = validate_agent_id_token(token, {kIssuer, "client_123", 0}, keys, kSampleNow);
  v.require(parsed.agent && *parsed.agent == *agent, "agent claims changed; ");
  v.require(jose::decode(token).payload.dump() == body.dump(), "payload is not byte-identical; ");
  Json rebuilt = to_json(parsed.standard);
  rebuilt.update(serialize_agent_claims(*parsed.agent));
  v.require(rebuilt.dump() == body.dump(), "re-serialized claims differ; ");
  auto report = validate_delegation_chain(*parsed.agent->delegation_chain, fixture_policy(),
                                          kSampleNow, StaticRevocations{});
  v.require(parsed.agent->delegation_chain->size() == 1 && report.valid(),
            "single-step chain invalid: " + failed_rules_text(report));
  v.detail << "signature, standard claims, agent claims and chain valid; round-trip identical";
  return v;
}

// AC2: the sample chain validates and each of its properties maps to a pass.
Verdict ac2() {
  Verdict v;
  auto report = validate_delegation_chain(sample_chain(), fixture_policy(), kSampleNow,
                                          StaticRevocations{});
  v.require(report.valid(), "chain invalid: " + failed_rules_text(report) + "; ");
  for (Rule r : {Rule::kChronology, Rule::kIssuerTrust, Rule::kLinkage, Rule::kScopeReduction}) {
    v.require(report.result(r) == RuleOutcome::kPass,
              std::string(rule_label(r)) + " is " + std::string(outcome_name(report.result(r))) + "; ");
  }
  v.require(check_scope_reduction("email calendar", "calendar:view").empty(),
            "calendar:view not covered; ");
  v.detail << "chronology, issuer trust, linkage and scope reduction pass";
  return v;
}

// AC3: one single-fault mutation per rule fails exactly that rule.
Verdict ac3() {
  Verdict v;
  auto signer = jose::PrivateKey::generate(jose::Algorithm::kES256);
  struct Mutation {
    Rule rule;
    std::function<void(DelegationChain&, TrustPolicy&, NumericDate&, ScopeSet&)> apply;
  };
  std::vector<Mutation> mutations{
      {Rule::kChronology,
       [](DelegationChain& c, TrustPolicy&, NumericDate&, ScopeSet&) {
         std::swap(c[0].delegated_at, c[1].delegated_at);
       }},
      {Rule::kIssuerTrust,
       [](DelegationChain& c, TrustPolicy&, NumericDate&, ScopeSet&) {
         c[1].iss = "https://untrusted.example.com";
       }},
      {Rule::kLinkage,
       [](DelegationChain& c, TrustPolicy&, NumericDate&, ScopeSet&) { c[1].sub = "agent_instance_999"; }},
      {Rule::kScopeReduction,
       [](DelegationChain& c, TrustPolicy&, NumericDate&, ScopeSet&) { c[1].scope = "calendar:view admin"; }},
      {Rule::kConstraints,
       [](DelegationChain& c, TrustPolicy&, NumericDate& now, ScopeSet&) {
         ConstraintSet cs;
         cs.max_duration_seconds = 60;
         c[0].constraints = cs;
         now = 1714349000;
       }},
      {Rule::kSignatures,
       [&](DelegationChain& c, TrustPolicy& p, NumericDate&, ScopeSet&) {
         p.step_signing_keys.add(signer.public_key());
         DelegationStep other = c[1];
         other.scope = "calendar";
         c[1].signature = sign_step(other, signer).signature;
       }},
      {Rule::kPolicy,
       [](DelegationChain& c, TrustPolicy&, NumericDate&, ScopeSet& revoked) {
         c[1].jti = "step-jti-1";
         revoked.insert("step-jti-1");
       }},
  };
  int exact = 0;
  for (const auto& m : mutations) {
    DelegationChain chain = sample_chain();
    TrustPolicy policy = fixture_policy();
    NumericDate now = kSampleNow;
    ScopeSet revoked;
    m.apply(chain, policy, now, revoked);
    auto report = validate_delegation_chain(chain, policy, now, StaticRevocations(revoked));
    bool ok = report.failed_rules() == std::vector<Rule>{m.rule};
    v.require(ok, std::string(rule_label(m.rule)) + " mutation failed " + failed_rules_text(report) + "; ");
    exact += ok ? 1 : 0;
  }
  v.detail << exact << "/7 mutations fail exactly their rule";
  return v;
}

// AC4: exhaustive agreement with a table-driven coverage oracle.
Verdict ac4() {
  Verdict v;
  const std::vector<std::string> universe{"email",    "email:read", "calendar",
                                          "calendar:view", "files", "files:write"};
  // Which universe tokens each token grants, written out by hand.
  const std::map<std::string, std::set<std::string>> grants{
      {"email", {"email", "email:read"}},
      {"email:read", {"email:read"}},
      {"calendar", {"calendar", "calendar:view"}},
      {"calendar:view", {"calendar:view"}},
      {"files", {"files", "files:write"}},
      {"files:write", {"files:write"}},
  };
  auto subset = [&](unsigned mask) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (mask & (1u << i)) out.push_back(universe[i]);
    }
    return out;
  };
  const unsigned n = 1u << universe.size();
  std::size_t cases = 0;
  std::size_t disagreements = 0;
  for (unsigned pm = 1; pm < n; ++pm) {
    auto parent = subset(pm);
    std::set<std::string> granted;
    for (const auto& t : parent) granted.insert(grants.at(t).begin(), grants.at(t).end());
    for (unsigned cm = 1; cm < n; ++cm) {
      auto child = subset(cm);
      std::vector<std::string> expected;
      for (const auto& t : child) {
        if (!granted.contains(t)) expected.push_back(t);
      }
      auto actual = check_scope_reduction(testing::join_scope(parent), testing::join_scope(child));
      ++cases;
      if (actual != expected) {
        if (disagreements == 0) {
          v.detail << "first disagreement: parent '" << testing::join_scope(parent) << "' child '"
                   << testing::join_scope(child) << "'; ";
        }
        ++disagreements;
      }
    }
  }
  v.require(disagreements == 0, "");
  v.detail << cases << " cases, " << disagreements << " disagreements";
  return v;
}

// AC5: the 16-cell attestation matrix.
Verdict ac5() {
  Verdict v;
  constexpr NumericDate now = 1714348800;
  auto trusted = jose::PrivateKey::generate(jose::Algorithm::kES256);
  auto rogue = jose::PrivateKey::generate(jose::Algorithm::kES256);
  auto store = make_memory_store(std::make_shared<ManualClock>(now));
  AttestationPolicy policy;
  policy.trusted_attestation_keys.add(trusted.public_key());
  policy.reference_measurements[{"openai.com", "gpt-4", "2025-03"}] = sha256_hex("gpt-4@2025-03");
  AttestationVerifier verifier(policy, *store);
  int verified_cells = 0;
  int correct = 0;
  for (int cell = 0; cell < 16; ++cell) {
    bool bad_key = cell & 1;
    bool bad_nonce = cell & 2;
    bool stale = cell & 4;
    bool bad_measurement = cell & 8;
    Nonce nonce = verifier.issue_nonce("agent_instance_789", now);
    EatClaims eat{"https://attester.example.com",
                  stale ? now - policy.freshness_window_seconds - 1 : now,
                  bad_nonce ? "not-" + nonce.value : nonce.value,
                  "openai.com",
                  "gpt-4",
                  "2025-03",
                  sha256_hex(bad_measurement ? "tampered weights" : "gpt-4@2025-03")};
    auto evidence = make_eat_evidence(make_eat_token(eat, bad_key ? rogue : trusted), eat.iat);
    auto result = verifier.verify(evidence, nonce.value, "agent_instance_789", now);
    auto expect = [](bool bad) { return bad ? CheckOutcome::kFail : CheckOutcome::kPass; };
    AttestationChecks want{expect(bad_key), expect(bad_nonce), expect(stale), expect(bad_measurement)};
    bool all_good = cell == 0;
    bool ok = result.checks == want &&
              (result.status == AttestationStatus::kVerified) == all_good;
    if (result.status == AttestationStatus::kVerified) ++verified_cells;
    v.require(ok, "cell " + std::to_string(cell) + " mismatched; ");
    correct += ok ? 1 : 0;
  }
  v.require(verified_cells == 1, "verified in " + std::to_string(verified_cells) + " cells; ");
  v.detail << correct << "/16 cells flag exactly the injected checks";
  return v;
}

// AC6: one nonce presented concurrently by many workers.
Verdict ac6() {
  Verdict v;
  constexpr int kWorkers = 64;
  constexpr NumericDate now = 1714348800;
  testing::TempDir dir;
  auto attester = jose::PrivateKey::generate(jose::Algorithm::kES256);
  AttestationPolicy policy;
  policy.trusted_attestation_keys.add(attester.public_key());
  policy.reference_measurements[{"openai.com", "gpt-4", "2025-03"}] = sha256_hex("gpt-4@2025-03");
  auto clock = std::make_shared<ManualClock>(now);
  std::vector<std::pair<std::string, std::unique_ptr<Store>>> stores;
  stores.emplace_back("memory", make_memory_store(clock));
  stores.emplace_back("file", make_file_store(dir.path(), clock));
  for (auto& [name, store] : stores) {
    AttestationVerifier verifier(policy, *store);
    Nonce nonce = verifier.issue_nonce("a1", now);
    EatClaims eat{"agent", now, nonce.value, "openai.com", "gpt-4", "2025-03", sha256_hex("gpt-4@2025-03")};
    auto evidence = make_eat_evidence(make_eat_token(eat, attester), now);
    std::atomic<int> wins{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> workers;
    for (int i = 0; i < kWorkers; ++i) {
      workers.emplace_back([&] {
        while (!go.load()) std::this_thread::yield();
        if (verifier.verify(evidence, nonce.value, "a1", now).checks.nonce == CheckOutcome::kPass) ++wins;
      });
    }
    go = true;
    for (auto& w : workers) w.join();
    v.require(wins.load() == 1, name + " store: " + std::to_string(wins.load()) + " successes; ");
    v.detail << name << " store " << wins.load() << "/" << kWorkers << " successes; ";
  }
  return v;
}

// AC7: randomized issuance through HTTP /delegate.
Verdict ac7() {
  Verdict v;
  testing::Rng rng(7);
  testing::ServerHarness h(1714348800);
  h.server->start();
  std::string base = h.server->local_url();
  std::vector<std::string> clients{h.register_agent(), h.register_agent()};
  const TrustPolicy& policy = h.server->config().trust_policy;

  struct Holder {
    std::string token;
    std::vector<std::string> scope;
    std::size_t depth;
  };
  std::vector<Holder> holders;
  int issued = 0, refused = 0, violations = 0, escalations_attempted = 0;
  for (int i = 0; i < 500; ++i) {
    h.clock->advance(rng.between(0, 3));
    Holder parent;
    if (holders.empty() || rng.coin(0.3)) {
      auto scope = testing::random_root_scope(rng);
      parent = {h.server->issue_subject_token("user_" + rng.ident(6), testing::join_scope(scope)), scope, 0};
    } else {
      parent = rng.pick(holders);
    }
    std::vector<std::string> requested = testing::narrow_scope(rng, parent.scope);
    bool escalate = rng.coin(0.15);
    if (escalate) {
      ++escalations_attempted;
      requested.push_back("admin:" + rng.ident(4));
    }
    auto reply = testing::http_call(base, "POST", "/delegate",
                                    Json{{"scope", testing::join_scope(requested)},
                                         {"delegatee_client_id", rng.pick(clients)},
                                         {"agent_instance_id", "inst-" + std::to_string(i)}},
                                    parent.token);
    if (reply.status != 200) {
      ++refused;
      bool expected_refusal = escalate ? reply.status == 403
                                       : parent.depth >= static_cast<std::size_t>(policy.max_chain_length);
      if (!expected_refusal) {
        ++violations;
        v.require(false, "unexpected " + std::to_string(reply.status) + ": " + reply.body.dump() + "; ");
      }
      continue;
    }
    ++issued;
    try {
      if (escalate) throw std::runtime_error("escalating request was granted");
      IdToken t = h.parse(reply.body["id_token"]);
      auto report = validate_delegation_chain(*t.agent->delegation_chain, policy, h.clock->now(),
                                              h.server->revocations());
      if (!report.valid()) throw std::runtime_error("chain invalid: " + failed_rules_text(report));
      ScopeSet parent_set(parent.scope.begin(), parent.scope.end());
      for (const auto& tok : parse_scope(*t.standard.scope)) {
        if (!scope_covers(parent_set, tok)) throw std::runtime_error("uncovered scope " + tok);
      }
      const auto& chain = *t.agent->delegation_chain;
      for (std::size_t s = 1; s < chain.size(); ++s) {
        if (!check_scope_reduction(chain[s - 1].scope, chain[s].scope).empty()) {
          throw std::runtime_error("chain widens at step " + std::to_string(s));
        }
      }
      holders.push_back({reply.body["id_token"], parse_scope(*t.standard.scope), chain.size()});
    } catch (const std::exception& e) {
      ++violations;
      v.require(false, std::string(e.what()) + "; ");
    }
  }
  h.server->stop();
  v.require(issued > 300, "too few tokens issued; ");
  v.detail << "500 requests, " << issued << " issued, " << refused << " refused ("
           << escalations_attempted << " escalation attempts), " << violations << " violations";
  return v;
}

// AC8: a step revoked over HTTP fails R7 at once.
Verdict ac8() {
  Verdict v;
  testing::ServerHarness h(1714348800);
  h.server->start();
  std::string base = h.server->local_url();
  std::string client = h.register_agent();
  std::string user = h.server->issue_subject_token("user_456", "email calendar");
  auto first = testing::http_call(base, "POST", "/delegate",
                                  Json{{"scope", "email calendar"}, {"delegatee_client_id", client},
                                       {"agent_instance_id", "agent_instance_789"}},
                                  user);
  auto second = testing::http_call(base, "POST", "/delegate",
                                   Json{{"scope", "calendar:view"}, {"delegatee_client_id", client},
                                        {"agent_instance_id", "agent_instance_101"}},
                                   first.body["id_token"]);
  v.require(first.status == 200 && second.status == 200, "delegation failed; ");
  if (!v.pass) return v;
  IdToken t = h.parse(second.body["id_token"]);
  const auto& chain = *t.agent->delegation_chain;
  const TrustPolicy& policy = h.server->config().trust_policy;
  NumericDate now = h.clock->now();
  v.require(validate_delegation_chain(chain, policy, now, h.server->revocations()).valid(),
            "chain invalid before revocation; ");
  auto revoke = testing::http_call(base, "POST", "/revoke", Json{{"jti", first.body["jti"]}}, user);
  v.require(revoke.status == 200, "revoke returned " + std::to_string(revoke.status) + "; ");
  auto report = validate_delegation_chain(chain, policy, now, h.server->revocations());
  v.require(report.failed_rules() == std::vector<Rule>{Rule::kPolicy},
            "after revocation failed " + failed_rules_text(report) + "; ");
  v.require(h.clock->now() == now, "clock moved; ");
  h.server->stop();
  v.detail << "revoked step " << first.body["jti"].get<std::string>() << " fails R7 at the same second";
  return v;
}

// AC9: capacity + 1 attestation requests in one window.
Verdict ac9() {
  Verdict v;
  testing::ServerHarness h(1714348800);
  h.server->start();
  std::string base = h.server->local_url();
  std::string client = h.register_agent();
  std::string bearer = h.server->issue_subject_token("u", "email");
  int capacity = static_cast<int>(h.server->config().attest_rate_limit.capacity);
  int limited = 0;
  for (int i = 0; i < capacity + 1; ++i) {
    auto r = testing::http_call(base, "POST", "/agent/attest", Json{{"agent_id", client}}, bearer);
    if (r.status == 429) ++limited;
    else v.require(r.status == 200, "unexpected status " + std::to_string(r.status) + "; ");
  }
  h.server->stop();
  v.require(limited == 1, "");
  v.detail << capacity + 1 << " requests, " << limited << " rejected with 429";
  return v;
}

// AC10: every agent discovery field is present and every URL answers.
Verdict ac10() {
  Verdict v;
  // The issuer must be the listener's own origin, so find a free port first.
  int port = 0;
  {
    testing::ServerHarness probe;
    port = probe.server->start();
    probe.server->stop();
  }
  std::string origin = "http://127.0.0.1:" + std::to_string(port);
  testing::ServerHarness h(1714348800, [&](ServerConfig& c) {
    c.issuer = origin;
    c.port = port;
  });
  h.server->start();
  auto doc = testing::http_call(origin, "GET", "/.well-known/openid-configuration");
  v.require(doc.status == 200, "discovery returned " + std::to_string(doc.status) + "; ");
  for (auto field : kAgentDiscoveryFields) {
    v.require(doc.body.contains(field), "missing " + std::string(field) + "; ");
  }
  auto parsed = DiscoveryDocument::from_json(doc.body);
  int answered = 0;
  auto urls = parsed.endpoint_urls();
  for (const auto& url : urls) {
    v.require(url.rfind(origin, 0) == 0, url + " is not under the issuer; ");
    std::string path = url.substr(origin.size());
    bool is_get = path == paths::kAttestationKeys || path == paths::kCapabilities;
    auto r = testing::http_call(origin, is_get ? "GET" : "POST", path, Json::object());
    bool ok = r.status != 0 && r.status != 404 && r.status != 405 && r.status < 500;
    v.require(ok, url + " answered " + std::to_string(r.status) + "; ");
    answered += ok ? 1 : 0;
  }
  h.server->stop();
  v.detail << kAgentDiscoveryFields.size() << " agent fields present, " << answered << "/" << urls.size()
           << " URLs answer";
  return v;
}

}  // namespace
}  // namespace oidca

int main() {
  spdlog::set_level(spdlog::level::warn);
  std::vector<std::pair<std::string, std::function<oidca::Verdict()>>> criteria{
      {"AC1", oidca::ac1}, {"AC2", oidca::ac2}, {"AC3", oidca::ac3}, {"AC4", oidca::ac4},
      {"AC5", oidca::ac5}, {"AC6", oidca::ac6}, {"AC7", oidca::ac7}, {"AC8", oidca::ac8},
      {"AC9", oidca::ac9}, {"AC10", oidca::ac10},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    oidca::Verdict verdict;
    try {
      verdict = run();
    } catch (const std::exception& e) {
      verdict.pass = false;
      verdict.detail << "exception: " << e.what();
    }
    std::cout << name << ' ' << (verdict.pass ? "PASS" : "FAIL") << ' ' << verdict.detail.str() << std::endl;
    failures += verdict.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
