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

#ifndef OIDCA_TESTS_SUPPORT_H_
#define OIDCA_TESTS_SUPPORT_H_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oidca/attestation.h"
#include "oidca/chain.h"
#include "oidca/claims.h"
#include "oidca/encoding.h"
#include "oidca/jose.h"

namespace oidca::testing {

using Json = nlohmann::json;

// Seeded generator for property tests. OIDCA_TEST_SEED overrides the seed
// so a failure can be replayed.
class Rng {
 public:
  explicit Rng(std::uint64_t salt = 0) : seed_(base_seed() ^ salt), engine_(seed_) {}

  static std::uint64_t base_seed() {
    if (const char* s = std::getenv("OIDCA_TEST_SEED")) return std::strtoull(s, nullptr, 10);
    return 0x0dca2026;
  }
  std::uint64_t seed() const { return seed_; }

  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(items.size()) - 1))];
  }
  std::string word(std::string_view alphabet, std::size_t min_len, std::size_t max_len) {
    std::size_t n = static_cast<std::size_t>(between(static_cast<std::int64_t>(min_len),
                                                     static_cast<std::int64_t>(max_len)));
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      out += alphabet[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
    }
    return out;
  }
  std::string ident(std::size_t max_len = 8) {
    return word("abcdefghijklmnopqrstuvwxyz0123456789_.-", 1, max_len);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline std::string join_scope(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

inline const std::vector<std::string>& scope_roots() {
  static const std::vector<std::string> roots{"email", "calendar", "files", "profile",
                                              "contacts", "tasks"};
  return roots;
}

// A non-empty scope covered by `parent`: some parent tokens kept as they
// are, some narrowed with an extra ":segment".
inline std::vector<std::string> narrow_scope(Rng& rng, const std::vector<std::string>& parent) {
  std::vector<std::string> out;
  auto add = [&](std::string t) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  };
  for (const auto& t : parent) {
    if (rng.coin(0.6)) add(rng.coin(0.3) ? t + ":" + rng.ident(5) : t);
  }
  if (out.empty()) add(rng.pick(parent));
  return out;
}

inline std::vector<std::string> random_root_scope(Rng& rng) {
  std::vector<std::string> out;
  for (const auto& r : scope_roots()) {
    if (rng.coin(0.5)) out.push_back(r);
  }
  if (out.empty()) out.push_back(rng.pick(scope_roots()));
  return out;
}

// A chain that satisfies every rule under a policy trusting `iss`:
// chronological, linked, scope-reducing, unconstrained, unsigned.
inline DelegationChain random_valid_chain(Rng& rng, const std::string& iss, NumericDate t0,
                                          std::size_t steps, const std::string& first_sub,
                                          const std::string& last_aud) {
  DelegationChain chain;
  std::vector<std::string> scope = random_root_scope(rng);
  std::string sub = first_sub;
  NumericDate t = t0;
  for (std::size_t i = 0; i < steps; ++i) {
    DelegationStep step;
    step.iss = iss;
    step.sub = sub;
    step.aud = i + 1 == steps ? last_aud : "agent_" + std::to_string(i) + "_" + rng.ident(6);
    step.delegated_at = t;
    if (i > 0) scope = narrow_scope(rng, scope);
    step.scope = join_scope(scope);
    if (rng.coin()) step.purpose = "purpose " + rng.ident(10);
    if (rng.coin()) step.jti = random_id();
    chain.push_back(step);
    sub = step.aud;
    t += rng.between(0, 120);
  }
  return chain;
}

inline ConstraintSet random_constraints(Rng& rng) {
  ConstraintSet c;
  if (rng.coin()) c.max_duration_seconds = rng.between(60, 86400);
  if (rng.coin()) c.allowed_resources = std::vector<std::string>{"https://api.example.com/" + rng.ident(6)};
  if (rng.coin()) c.max_delegation_depth = rng.between(0, 4);
  if (rng.coin(0.2)) c.other["x_" + rng.ident(4)] = rng.between(0, 9);
  return c;
}

// A claim set satisfying the AgentClaims invariants, exercising every
// optional claim.
inline AgentClaims random_agent_claims(Rng& rng) {
  AgentClaims c;
  c.agent_type = rng.coin(0.7) ? std::string(rng.pick(std::vector<std::string>(
                                     kStandardAgentTypes.begin(), kStandardAgentTypes.end())))
                               : rng.ident(6) + ":" + rng.ident(8);
  c.agent_model = "model-" + rng.ident(6);
  c.agent_provider = rng.ident(6) + ".com";
  c.agent_instance_id = "agent_instance_" + rng.ident(8);
  if (rng.coin()) c.agent_version = std::to_string(rng.between(2020, 2030)) + "-0" +
                                    std::to_string(rng.between(1, 9));
  if (rng.coin()) {
    std::size_t steps = static_cast<std::size_t>(rng.between(1, 4));
    c.delegation_chain = random_valid_chain(rng, "https://auth.example.com",
                                            rng.between(1700000000, 1800000000), steps,
                                            "user_" + rng.ident(5), c.agent_instance_id);
    c.delegator_sub = c.delegation_chain->back().sub;
  } else if (rng.coin(0.3)) {
    c.delegator_sub = "user_" + rng.ident(5);
  }
  if (rng.coin()) c.delegation_purpose = "do " + rng.ident(12);
  if (rng.coin()) c.delegation_constraints = random_constraints(rng);
  if (rng.coin()) {
    std::vector<std::string> caps;
    for (auto n = rng.between(0, 4); n > 0; --n) {
      std::string cap = rng.ident(5) + (rng.coin() ? ":" + rng.ident(5) : "");
      if (std::find(caps.begin(), caps.end(), cap) == caps.end()) caps.push_back(cap);
    }
    c.agent_capabilities = caps;
  }
  if (rng.coin()) c.agent_trust_level = rng.pick(std::vector<std::string>{"verified", "basic", "high"});
  if (rng.coin()) {
    AttestationEvidence e;
    if (rng.coin()) {
      e.format = std::string(kEatFormat);
      e.token = base64url_encode(R"({"alg":"ES256"})") + "." + base64url_encode(rng.ident(12)) +
                "." + base64url_encode(rng.ident(20));
    } else {
      e.format = "urn:example:tpm2-quote";
      if (rng.coin()) e.token = rng.ident(16);
    }
    if (rng.coin()) e.timestamp = rng.between(1700000000, 1800000000);
    c.agent_attestation = e;
  }
  if (rng.coin()) c.agent_context_id = "conversation_" + rng.ident(6);
  return c;
}

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(OIDCA_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json read_fixture(const std::string& name) {
  return Json::parse(read_file(fixture_path(name)));
}

// The sample token's attestation token is elided ("eyJ...") and would not
// parse. Tests substitute a real EAT token signed by `attester`, leaving
// every other claim unchanged.
inline Json sample_token_with_evidence(const jose::PrivateKey& attester) {
  Json body = read_fixture("sample_agent_token.json");
  EatClaims eat;
  eat.iss = "https://attester.openai.com";
  eat.iat = 1714348800;
  eat.nonce = "n-0S6_WzA2Mj";
  eat.agent_provider = "openai.com";
  eat.agent_model = "gpt-4";
  eat.agent_version = "2025-03";
  eat.measurement = sha256_hex("gpt-4@2025-03");
  body["agent_attestation"]["token"] = make_eat_token(eat, attester);
  return body;
}

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() / ("oidca-test-" + random_id());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Runs tests/oracle/jose_verify.py. nullopt when python3 or the
// cryptography package is missing.
inline std::optional<Json> run_jose_oracle(const std::string& mode, const Json& request) {
  TempDir dir;
  auto input = dir.path() / "request.json";
  std::ofstream(input) << request.dump();
  std::string command = "python3 '" + std::string(OIDCA_ORACLE_SCRIPT) + "' " + mode + " '" +
                        input.string() + "' 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return std::nullopt;
  std::string output;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  int status = pclose(pipe);
  if (status != 0) return std::nullopt;
  Json result = Json::parse(output, nullptr, false);
  if (result.is_discarded()) return std::nullopt;
  return result;
}

}  // namespace oidca::testing

#endif  // OIDCA_TESTS_SUPPORT_H_
