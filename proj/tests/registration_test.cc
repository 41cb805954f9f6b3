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

#include "oidca/registration.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "oidca/claims.h"
#include "oidca/error.h"
#include "support.h"

namespace oidca {
namespace {

using testing::Json;

Json client_jwks() {
  jose::KeySet keys;
  keys.add(jose::PrivateKey::generate(jose::Algorithm::kES256).public_key());
  return keys.to_jwks();
}

Json good_metadata() {
  return Json{{"agent_provider", "openai.com"},
              {"agent_models_supported", {"gpt-4", "gpt-4o"}},
              {"agent_capabilities", {"email:read", "calendar:write"}},
              {"attestation_formats_supported", {std::string(kEatFormat)}},
              {"delegation_methods_supported", {"chain"}},
              {"token_endpoint_auth_method", "private_key_jwt"},
              {"jwks", client_jwks()},
              {"client_name", "Mail assistant"}};
}

std::vector<std::string> metadata_problems(ClientRegistry& registry, const Json& doc) {
  try {
    registry.process_registration_request(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidMetadata) << e.what();
    return e.details();
  }
  ADD_FAILURE() << "registration accepted: " << doc.dump();
  return {};
}

bool mentions(const std::vector<std::string>& problems, std::string_view field) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.rfind(field, 0) == 0; });
}

TEST(DiscoveryTest, AdvertisesEveryAgentField) {
  auto doc = build_discovery_document({"https://auth.example.com/"}).to_json();
  EXPECT_EQ(doc["issuer"], "https://auth.example.com");
  for (auto field : kAgentDiscoveryFields) EXPECT_TRUE(doc.contains(field)) << field;
  EXPECT_EQ(doc["agent_attestation_endpoint"], "https://auth.example.com/agent/attest");
  EXPECT_EQ(doc["agent_capabilities_endpoint"], "https://auth.example.com/agent/capabilities");
  EXPECT_EQ(doc["attestation_verification_keys_endpoint"], "https://auth.example.com/keys/attestation");
  EXPECT_EQ(doc["delegation_methods_supported"], Json::array({"chain"}));
  EXPECT_EQ(doc["attestation_formats_supported"], Json::array({std::string(kEatFormat)}));
  EXPECT_EQ(doc["agent_types_supported"].size(), kStandardAgentTypes.size());
  std::vector<std::string> claims = doc["agent_claims_supported"];
  EXPECT_EQ(claims.size(), kAgentClaimNames.size());
  for (auto name : kAgentClaimNames) {
    EXPECT_NE(std::find(claims.begin(), claims.end(), name), claims.end()) << name;
  }
}

TEST(DiscoveryTest, DisabledFeaturesAreNotAdvertised) {
  DiscoveryConfig config{"http://127.0.0.1:8080"};
  config.attestation_enabled = false;
  config.capabilities_enabled = false;
  auto doc = build_discovery_document(config);
  EXPECT_FALSE(doc.agent_attestation_endpoint);
  EXPECT_FALSE(doc.agent_capabilities_endpoint);
  EXPECT_FALSE(doc.attestation_verification_keys_endpoint);
  EXPECT_EQ(doc.endpoint_urls().size(), 4u);
}

TEST(DiscoveryTest, IssuerPathAndCustomTypes) {
  DiscoveryConfig config{"https://example.com/tenant-a"};
  config.agent_types_supported = {"assistant", "acme:triage"};
  config.extra_attestation_formats = {"urn:example:tpm2-quote", std::string(kEatFormat)};
  auto doc = build_discovery_document(config);
  EXPECT_EQ(doc.delegation_endpoint, "https://example.com/tenant-a/delegate");
  EXPECT_EQ(doc.agent_types_supported, (std::vector<std::string>{"assistant", "acme:triage"}));
  EXPECT_EQ(doc.attestation_formats_supported.size(), 2u);
  config.agent_types_supported = {"Not A Type"};
  EXPECT_THROW(build_discovery_document(config), Error);
}

TEST(DiscoveryTest, RejectsBadIssuers) {
  for (const char* issuer : {"", "auth.example.com", "ftp://x.example", "https://",
                             "https:///path", "https://a.example/?q=1", "https://a.example/#f"}) {
    try {
      build_discovery_document({issuer});
      ADD_FAILURE() << issuer;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig) << issuer;
    }
  }
}

TEST(DiscoveryTest, JsonRoundTrip) {
  auto doc = build_discovery_document({"https://auth.example.com"});
  EXPECT_EQ(DiscoveryDocument::from_json(doc.to_json()), doc);
  Json broken = doc.to_json();
  broken.erase("jwks_uri");
  EXPECT_THROW(DiscoveryDocument::from_json(broken), Error);
}

class RegistryTest : public ::testing::Test {
 protected:
  std::unique_ptr<Store> store_ = make_memory_store(std::make_shared<ManualClock>(1000));
  ClientRegistry registry_{*store_};
};

TEST_F(RegistryTest, RegistersAndPersistsAgentClient) {
  auto reg = registry_.process_registration_request(good_metadata());
  EXPECT_EQ(reg.client_id.rfind("agent-client-", 0), 0u);
  EXPECT_EQ(reg.agent_provider, "openai.com");
  EXPECT_EQ(reg.agent_models_supported, (std::vector<std::string>{"gpt-4", "gpt-4o"}));
  auto found = registry_.find(reg.client_id);
  ASSERT_TRUE(found);
  EXPECT_EQ(found->to_json(), reg.to_json());
  EXPECT_EQ(registry_.all().size(), 1u);
  EXPECT_FALSE(registry_.find("agent-client-nope"));
  auto again = registry_.process_registration_request(good_metadata());
  EXPECT_NE(again.client_id, reg.client_id);
}

TEST_F(RegistryTest, DefaultsToPrivateKeyJwt) {
  Json doc = good_metadata();
  doc.erase("token_endpoint_auth_method");
  EXPECT_EQ(registry_.process_registration_request(doc).token_endpoint_auth_method,
            "private_key_jwt");
}

TEST_F(RegistryTest, RejectsSharedSecrets) {
  for (const char* method : {"client_secret_basic", "client_secret_post", "client_secret_jwt"}) {
    Json doc = good_metadata();
    doc["token_endpoint_auth_method"] = method;
    try {
      registry_.process_registration_request(doc);
      ADD_FAILURE() << method;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnsupportedAuthMethod);
    }
  }
  Json doc = good_metadata();
  doc["client_secret"] = "hunter2";
  EXPECT_THROW(registry_.process_registration_request(doc), Error);
  doc = good_metadata();
  doc["token_endpoint_auth_method"] = "none";
  EXPECT_THROW(registry_.process_registration_request(doc), Error);
  EXPECT_TRUE(registry_.all().empty());
}

TEST_F(RegistryTest, ReportsEveryBadField) {
  Json doc = good_metadata();
  doc.erase("agent_provider");
  doc["agent_models_supported"] = Json::array();
  doc["agent_capabilities"] = {"Email Read"};
  doc["delegation_methods_supported"] = {"token-exchange"};
  doc["client_name"] = 7;
  auto problems = metadata_problems(registry_, doc);
  EXPECT_TRUE(mentions(problems, "agent_provider"));
  EXPECT_TRUE(mentions(problems, "agent_models_supported"));
  EXPECT_TRUE(mentions(problems, "agent_capabilities"));
  EXPECT_TRUE(mentions(problems, "delegation_methods_supported"));
  EXPECT_TRUE(mentions(problems, "client_name"));
  EXPECT_FALSE(mentions(problems, "jwks"));
}

TEST_F(RegistryTest, KeysAreRequired) {
  Json doc = good_metadata();
  doc.erase("jwks");
  EXPECT_TRUE(mentions(metadata_problems(registry_, doc), "jwks"));
  doc["jwks_uri"] = "not a url";
  EXPECT_TRUE(mentions(metadata_problems(registry_, doc), "jwks_uri"));
  doc["jwks_uri"] = "https://agent.example.com/jwks.json";
  EXPECT_EQ(registry_.process_registration_request(doc).jwks_uri, "https://agent.example.com/jwks.json");
  doc = good_metadata();
  doc["jwks"] = Json{{"keys", Json::array()}};
  EXPECT_TRUE(mentions(metadata_problems(registry_, doc), "jwks"));
  doc["jwks"] = Json{{"keys", {{{"kty", "oct"}, {"k", "c2VjcmV0"}}}}};
  EXPECT_TRUE(mentions(metadata_problems(registry_, doc), "jwks"));
}

TEST_F(RegistryTest, StoredJwksHasNoPrivateMembers) {
  auto key = jose::PrivateKey::generate(jose::Algorithm::kES256);
  Json jwk = key.public_key().to_jwk();
  jwk["d"] = "AAAA";
  Json doc = good_metadata();
  doc["jwks"] = Json{{"keys", {jwk}}};
  auto reg = registry_.process_registration_request(doc);
  EXPECT_FALSE(reg.jwks["keys"][0].contains("d"));
}

TEST_F(RegistryTest, EmptyAttestationFormatsIsRejectedWhenPresent) {
  Json doc = good_metadata();
  doc["attestation_formats_supported"] = Json::array();
  EXPECT_TRUE(mentions(metadata_problems(registry_, doc), "attestation_formats_supported"));
  doc.erase("attestation_formats_supported");
  EXPECT_NO_THROW(registry_.process_registration_request(doc));
}

TEST_F(RegistryTest, NonObjectMetadata) {
  EXPECT_THROW(registry_.process_registration_request(Json::array()), Error);
}

TEST_F(RegistryTest, InstanceBinding) {
  EXPECT_FALSE(registry_.client_for_instance("agent_instance_1"));
  registry_.bind_instance("agent_instance_1", "agent-client-a");
  EXPECT_EQ(registry_.client_for_instance("agent_instance_1"), "agent-client-a");
  // Instance records do not show up as clients.
  EXPECT_TRUE(registry_.all().empty());
}

TEST(VerificationKeysTest, PublishesPublicMembersOfEveryRingKey) {
  jose::KeyRing ring(jose::PrivateKey::generate(jose::Algorithm::kES256, "k1"));
  ring.rotate(jose::PrivateKey::generate(jose::Algorithm::kRS256, "k2"));
  Json jwks = publish_verification_keys(ring);
  ASSERT_EQ(jwks["keys"].size(), 2u);
  for (const auto& jwk : jwks["keys"]) {
    for (const char* member : {"d", "p", "q", "dp", "dq", "qi"}) EXPECT_FALSE(jwk.contains(member));
    EXPECT_NO_THROW(jose::PublicKey::from_jwk(jwk));
  }
  try {
    publish_verification_keys(jose::KeyRing{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoActiveKeys);
  }
}

TEST(CapabilityTest, DescriptorShape) {
  CapabilityDescriptor d{"email:read", "Read mail", supported_constraint_keys()};
  EXPECT_EQ(d.to_json(), (Json{{"id", "email:read"},
                               {"description", "Read mail"},
                               {"supported_constraints",
                                {"max_duration_seconds", "allowed_resources", "max_delegation_depth"}}}));
}

}  // namespace
}  // namespace oidca
