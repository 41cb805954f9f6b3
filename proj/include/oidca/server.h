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

#ifndef OIDCA_SERVER_H_
#define OIDCA_SERVER_H_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "oidca/attestation.h"
#include "oidca/clock.h"
#include "oidca/delegation.h"
#include "oidca/jose.h"
#include "oidca/registration.h"
#include "oidca/server_config.h"
#include "oidca/store.h"

namespace oidca {

// Transport-independent request. Header names are lowercase.
struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
  std::string remote_addr;

  std::string header(std::string_view name) const;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
  std::map<std::string, std::string> headers;
};

// The authorization server: discovery, registration, delegated-token
// issuance, attestation, capabilities, verification keys and revocation.
// handle() is safe to call from many threads; the HTTP listener calls it
// from its worker pool.
class AuthorizationServer {
 public:
  // `store` defaults to a file store under config.data_dir, or memory.
  // Throws Error(kInvalidConfig) or Error(kStorageIo).
  explicit AuthorizationServer(ServerConfig config,
                               std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>(),
                               std::unique_ptr<Store> store = nullptr);
  ~AuthorizationServer();
  AuthorizationServer(const AuthorizationServer&) = delete;
  AuthorizationServer& operator=(const AuthorizationServer&) = delete;

  HttpResponse handle(const HttpRequest& request);

  // Binds config.host:config.port (port 0 picks a free one) and serves on a
  // background thread. Returns the bound port. Throws Error(kInvalidConfig)
  // when the address cannot be bound.
  int start();
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();
  // http://host:port of the running listener.
  std::string local_url() const;

  const ServerConfig& config() const;
  const DiscoveryDocument& discovery() const;
  Store& store();
  ClientRegistry& registry();
  AttestationVerifier& verifier();
  const RevocationView& revocations() const;
  jose::KeySet verification_keys() const;
  const jose::KeyRing& key_ring() const;

  // Signs an ID token for a non-agent subject (a user) holding `scope`.
  // It stands in for the interactive login that produces a root grant.
  std::string issue_subject_token(std::string_view subject, std::string_view scope,
                                  std::optional<std::string> audience = std::nullopt);

  // Observes processing stages in order: "rate_limit", "auth", then the
  // expensive ones ("chain_validation", "mint", "attestation_verify",
  // "sign"). Set before serving.
  void set_trace(std::function<void(std::string_view)> trace);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oidca

#endif  // OIDCA_SERVER_H_
