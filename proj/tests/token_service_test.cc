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

#include "oidca/token_service.h"

#include <gtest/gtest.h>

#include "oidca/error.h"
#include "support.h"

namespace oidca {
namespace {

using testing::Json;

constexpr NumericDate kNow = 1714348800;
const std::string kIssuer = "https://auth.example.com";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kMalformedClaim;
}

class TokenServiceTest : public ::testing::Test {
 protected:
  TokenServiceTest() {
    keys_.add(issuer_.key.public_key());
    client_ = registry_.process_registration_request(
        Json{{"agent_provider", "openai.com"},
             {"agent_models_supported", {"gpt-4", "gpt-4o"}},
             {"agent_capabilities", {"email:draft", "calendar:view"}},
             {"jwks", keys_.to_jwks()}});
  }

  StandardClaims user_claims(std::string scope = "email calendar") const {
    return {kIssuer, "user_123", kIssuer, kNow + 3600, kNow, kNow, std::nullopt, scope, "user-jti"};
  }

  IdToken user_token(std::string scope = "email calendar") const {
    return validate_agent_id_token(mint_id_token(user_claims(scope), issuer_.key),
                                   {kIssuer, std::nullopt, 60}, keys_, kNow);
  }

  Delegatee delegatee(const std::string& instance = "agent_instance_456") const {
    return resolve_delegatee(registry_, client_.client_id, instance);
  }

  IdToken validate(const std::string& token, NumericDate now = kNow) const {
    return validate_agent_id_token(token, {kIssuer, std::nullopt, 60}, keys_, now);
  }

  Issuer issuer_{kIssuer, jose::PrivateKey::generate(jose::Algorithm::kES256), 3600};
  jose::KeySet keys_;
  std::unique_ptr<Store> store_ = make_memory_store(std::make_shared<ManualClock>(kNow));
  ClientRegistry registry_{*store_};
  ClientRegistration client_;
};

TEST_F(TokenServiceTest, StandardClaimsRoundTrip) {
  auto s = user_claims();
  EXPECT_EQ(parse_standard_claims(to_json(s)), s);
  Json j = to_json(s);
  j["exp"] = j["iat"];
  EXPECT_EQ(code_of([&] { parse_standard_claims(j); }), ErrorCode::kMalformedToken);
  j = to_json(s);
  j["iat"] = "yesterday";
  EXPECT_EQ(code_of([&] { parse_standard_claims(j); }), ErrorCode::kMalformedToken);
  j = to_json(s);
  j.erase("sub");
  EXPECT_EQ(code_of([&] { parse_standard_claims(j); }), ErrorCode::kMalformedToken);
}

TEST_F(TokenServiceTest, MintAndValidateAgentToken) {
  testing::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    AgentClaims agent = testing::random_agent_claims(rng);
    StandardClaims s{kIssuer, agent.agent_instance_id, "client-1", kNow + 600, kNow};
    std::string token = mint_agent_id_token(s, agent, issuer_.key);
    auto jws = jose::decode(token);
    EXPECT_EQ(jws.header["typ"], "JWT");
    IdToken parsed = validate_agent_id_token(token, {kIssuer, "client-1", 60}, keys_, kNow);
    EXPECT_EQ(parsed.standard, s);
    ASSERT_TRUE(parsed.agent);
    EXPECT_EQ(*parsed.agent, agent);
  }
}

TEST_F(TokenServiceTest, MintRejectsBrokenClaims) {
  AgentClaims agent{"assistant", "gpt-4", std::nullopt, "openai.com", "i1"};
  StandardClaims s{kIssuer, "i1", "c", kNow, kNow};
  EXPECT_EQ(code_of([&] { mint_agent_id_token(s, agent, issuer_.key); }), ErrorCode::kInvalidClaims);
  s.exp = kNow + 1;
  s.sub = "";
  EXPECT_EQ(code_of([&] { mint_agent_id_token(s, agent, issuer_.key); }), ErrorCode::kInvalidClaims);
  s.sub = "i1";
  agent.agent_type = "Bad Type";
  EXPECT_EQ(code_of([&] { mint_agent_id_token(s, agent, issuer_.key); }), ErrorCode::kInvalidClaims);
}

TEST_F(TokenServiceTest, ValidationFailuresAreDistinct) {
  std::string token = mint_id_token(user_claims(), issuer_.key);
  TokenExpectations expect{kIssuer, std::string(kIssuer), 60};
  EXPECT_NO_THROW(validate_agent_id_token(token, expect, keys_, kNow));

  jose::KeySet other;
  other.add(jose::PrivateKey::generate(jose::Algorithm::kES256).public_key());
  EXPECT_EQ(code_of([&] { validate_agent_id_token(token, expect, other, kNow); }),
            ErrorCode::kBadSignature);
  EXPECT_EQ(code_of([&] { validate_agent_id_token("a.b", expect, keys_, kNow); }),
            ErrorCode::kMalformedToken);
  EXPECT_EQ(code_of([&] { validate_agent_id_token(token, {"https://evil.example", kIssuer, 60}, keys_, kNow); }),
            ErrorCode::kWrongIssuer);
  EXPECT_EQ(code_of([&] { validate_agent_id_token(token, {kIssuer, "someone-else", 60}, keys_, kNow); }),
            ErrorCode::kWrongAudience);
  EXPECT_EQ(code_of([&] { validate_agent_id_token(token, expect, keys_, kNow - 61); }),
            ErrorCode::kNotYetValid);
  EXPECT_NO_THROW(validate_agent_id_token(token, expect, keys_, kNow - 60));
  // exp is exclusive and gets no skew.
  EXPECT_NO_THROW(validate_agent_id_token(token, expect, keys_, kNow + 3599));
  EXPECT_EQ(code_of([&] { validate_agent_id_token(token, expect, keys_, kNow + 3600); }),
            ErrorCode::kExpired);
}

TEST_F(TokenServiceTest, TamperedPayloadFailsSignature) {
  std::string token = mint_id_token(user_claims(), issuer_.key);
  auto dot1 = token.find('.');
  auto dot2 = token.find('.', dot1 + 1);
  Json payload = to_json(user_claims("email calendar files"));
  std::string forged = token.substr(0, dot1 + 1) + base64url_encode(payload.dump()) + token.substr(dot2);
  EXPECT_EQ(code_of([&] { validate(forged); }), ErrorCode::kBadSignature);
}

TEST_F(TokenServiceTest, NonAgentTokenHasNoAgentClaims) {
  IdToken user = user_token();
  EXPECT_FALSE(user.agent);
  EXPECT_EQ(user.effective_scope(), "email calendar");
  user.standard.scope.reset();
  EXPECT_FALSE(user.effective_scope());
}

TEST_F(TokenServiceTest, ResolveDelegatee) {
  Delegatee d = delegatee();
  EXPECT_EQ(d.client_id, client_.client_id);
  EXPECT_EQ(d.identity.agent_type, "assistant");
  EXPECT_EQ(d.identity.agent_model, "gpt-4");
  EXPECT_EQ(d.identity.agent_provider, "openai.com");
  EXPECT_EQ(d.identity.agent_capabilities, (std::vector<std::string>{"email:draft", "calendar:view"}));
  EXPECT_EQ(resolve_delegatee(registry_, client_.client_id, "i", "retrieval", "gpt-4o").identity.agent_model,
            "gpt-4o");

  EXPECT_EQ(code_of([&] { resolve_delegatee(registry_, "agent-client-missing", "i"); }),
            ErrorCode::kDelegateeUnknown);
  EXPECT_EQ(code_of([&] { resolve_delegatee(registry_, client_.client_id, ""); }),
            ErrorCode::kDelegateeUnknown);
  EXPECT_EQ(code_of([&] { resolve_delegatee(registry_, client_.client_id, "i", std::nullopt, "llama"); }),
            ErrorCode::kDelegateeUnknown);
  registry_.bind_instance("taken", "agent-client-other");
  EXPECT_EQ(code_of([&] { resolve_delegatee(registry_, client_.client_id, "taken"); }),
            ErrorCode::kDelegateeUnknown);
}

TEST_F(TokenServiceTest, DelegatesFromUserToken) {
  auto out = mint_delegated_token(user_token(), delegatee(), {"email:draft", "draft replies"},
                                  issuer_, kNow + 10);
  IdToken t = validate(out.token, kNow + 10);
  EXPECT_EQ(t.standard.sub, "agent_instance_456");
  EXPECT_EQ(t.standard.aud, client_.client_id);
  EXPECT_EQ(t.standard.scope, "email:draft");
  EXPECT_EQ(t.standard.exp, kNow + 3600);  // capped by the parent
  ASSERT_TRUE(t.agent);
  EXPECT_EQ(t.agent->delegator_sub, "user_123");
  EXPECT_EQ(t.agent->delegation_purpose, "draft replies");
  ASSERT_EQ(t.agent->delegation_chain->size(), 1u);
  const DelegationStep& step = t.agent->delegation_chain->front();
  EXPECT_EQ(step.iss, kIssuer);
  EXPECT_EQ(step.sub, "user_123");
  EXPECT_EQ(step.aud, "agent_instance_456");
  EXPECT_EQ(step.delegated_at, kNow + 10);
  EXPECT_TRUE(step.jti);
  EXPECT_EQ(out.step, step);

  TrustPolicy policy;
  policy.trusted_issuers = {kIssuer};
  policy.root_grant_scopes = "email calendar";
  EXPECT_TRUE(validate_delegation_chain(*t.agent->delegation_chain, policy, kNow + 10,
                                        StaticRevocations{}).valid());
}

TEST_F(TokenServiceTest, ChainsExtendAndStayValid) {
  testing::Rng rng(12);
  TrustPolicy policy;
  policy.trusted_issuers = {kIssuer};
  for (int trial = 0; trial < 30; ++trial) {
    auto scope = testing::random_root_scope(rng);
    IdToken parent = user_token(testing::join_scope(scope));
    NumericDate now = kNow;
    std::size_t depth = static_cast<std::size_t>(rng.between(1, 4));
    for (std::size_t i = 0; i < depth; ++i) {
      now += rng.between(0, 60);
      scope = testing::narrow_scope(rng, scope);
      auto out = mint_delegated_token(parent, delegatee("inst_" + std::to_string(i)),
                                      {testing::join_scope(scope)}, issuer_, now);
      parent = validate(out.token, now);
      ASSERT_EQ(parent.agent->delegation_chain->size(), i + 1);
      auto report = validate_delegation_chain(*parent.agent->delegation_chain, policy, now,
                                              StaticRevocations{});
      ASSERT_TRUE(report.valid()) << report.to_json().dump();
      EXPECT_EQ(parent.agent->delegator_sub, parent.agent->delegation_chain->back().sub);
    }
  }
}

TEST_F(TokenServiceTest, EscalationIsRejectedWithOffendingTokens) {
  try {
    mint_delegated_token(user_token("email:read"), delegatee(), {"email:read email:send calendar"},
                         issuer_, kNow);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScopeEscalation);
    EXPECT_EQ(e.details(), (std::vector<std::string>{"email:send", "calendar"}));
  }
  IdToken scopeless = user_token();
  scopeless.standard.scope.reset();
  EXPECT_EQ(code_of([&] { mint_delegated_token(scopeless, delegatee(), {"email"}, issuer_, kNow); }),
            ErrorCode::kScopeEscalation);
}

TEST_F(TokenServiceTest, LifetimeIsCappedByEveryWindow) {
  Issuer short_lived{kIssuer, issuer_.key, 120};
  auto out = mint_delegated_token(user_token(), delegatee(), {"email"}, short_lived, kNow);
  EXPECT_EQ(out.claims.standard.exp, kNow + 120);

  ConstraintSet c;
  c.max_duration_seconds = 300;
  auto first = mint_delegated_token(user_token(), delegatee("a"), {"email", std::nullopt, c}, issuer_, kNow);
  EXPECT_EQ(first.claims.standard.exp, kNow + 300);
  IdToken parent = validate(first.token);
  auto second = mint_delegated_token(parent, delegatee("b"), {"email"}, issuer_, kNow + 100);
  EXPECT_EQ(second.claims.standard.exp, kNow + 300);

  ConstraintSet longer;
  longer.max_duration_seconds = 1000;
  EXPECT_EQ(code_of([&] { mint_delegated_token(parent, delegatee("b"), {"email", std::nullopt, longer},
                                                issuer_, kNow + 100); }),
            ErrorCode::kConstraintConflict);
  EXPECT_EQ(code_of([&] { mint_delegated_token(parent, delegatee("b"), {"email"}, issuer_, kNow + 300); }),
            ErrorCode::kConstraintConflict);
}

TEST_F(TokenServiceTest, DepthAllowanceIsInherited) {
  ConstraintSet one;
  one.max_delegation_depth = 1;
  auto first = mint_delegated_token(user_token(), delegatee("a"), {"email", std::nullopt, one}, issuer_, kNow);
  IdToken parent = validate(first.token);
  ConstraintSet greedy;
  greedy.max_delegation_depth = 1;
  EXPECT_EQ(code_of([&] { mint_delegated_token(parent, delegatee("b"), {"email", std::nullopt, greedy},
                                                issuer_, kNow); }),
            ErrorCode::kConstraintConflict);
  auto second = mint_delegated_token(parent, delegatee("b"), {"email"}, issuer_, kNow);
  IdToken grandchild = validate(second.token);
  // Depth is used up: a third hop breaks the first step's constraint.
  EXPECT_THROW(mint_delegated_token(grandchild, delegatee("c"), {"email"}, issuer_, kNow), Error);
}

}  // namespace
}  // namespace oidca
