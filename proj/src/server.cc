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

#include "oidca/server.h"

#include <openssl/crypto.h>

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "oidca/encoding.h"
#include "oidca/error.h"
#include "oidca/rate_limiter.h"
#include "oidca/token_service.h"

namespace oidca {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kSigningKeyRecord = "signing";

// A request that ends early with an OAuth-style error body.
struct HttpError {
  int status;
  std::string error;
  std::string description;
  Json extra = Json::object();
};

[[noreturn]] void fail(int status, std::string error, std::string description,
                       Json extra = Json::object()) {
  throw HttpError{status, std::move(error), std::move(description), std::move(extra)};
}

HttpError translate(const Error& e) {
  Json extra = Json::object();
  switch (e.code()) {
    case ErrorCode::kScopeEscalation:
      extra["violating_scopes"] = e.details();
      return {403, "scope_escalation", e.what(), extra};
    case ErrorCode::kDelegateeUnknown:
      return {404, "delegatee_unknown", e.what(), extra};
    case ErrorCode::kInvalidMetadata:
    case ErrorCode::kUnsupportedAuthMethod:
      extra["details"] = e.details();
      return {400, "invalid_client_metadata", e.what(), extra};
    case ErrorCode::kStorageIo:
    case ErrorCode::kSigningFailure:
    case ErrorCode::kNoActiveKeys:
    case ErrorCode::kInvalidKey:
    case ErrorCode::kInvalidConfig:
      return {500, "server_error", e.what(), extra};
    default:
      if (!e.details().empty()) extra["details"] = e.details();
      return {400, std::string(error_code_name(e.code())), e.what(), extra};
  }
}

bool equal_secret(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Json parse_body(const HttpRequest& request) {
  Json body = Json::parse(request.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    fail(400, "invalid_request", "request body must be a JSON object");
  }
  return body;
}

std::optional<std::string> optional_string(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(400, "invalid_request", std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::string bearer_token(const HttpRequest& request) {
  std::string auth = request.header("authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (auth.size() <= kPrefix.size() ||
      !std::equal(kPrefix.begin(), kPrefix.end(), auth.begin(),
                  [](char x, char y) { return std::tolower(x) == std::tolower(y); })) {
    return {};
  }
  return auth.substr(kPrefix.size());
}

std::unique_ptr<Store> open_store(const ServerConfig& config,
                                  const std::shared_ptr<const Clock>& clock) {
  if (config.data_dir) return make_file_store(*config.data_dir, clock);
  return make_memory_store(clock);
}

jose::PrivateKey load_signing_key(const ServerConfig& config, Store& store) {
  if (config.signing_key_path) {
    std::ifstream in(*config.signing_key_path);
    if (!in) {
      throw Error(ErrorCode::kInvalidConfig,
                  "cannot read signing key " + config.signing_key_path->string());
    }
    std::stringstream pem;
    pem << in.rdbuf();
    return jose::PrivateKey::from_pem(pem.str());
  }
  if (auto record = store.get(Namespace::kKeys, kSigningKeyRecord)) {
    return jose::PrivateKey::from_pem(record->at("pem").get<std::string>());
  }
  auto key = jose::PrivateKey::generate(jose::Algorithm::kES256);
  store.put(Namespace::kKeys, std::string(kSigningKeyRecord),
            Json{{"pem", key.to_pem()}, {"kid", key.kid()}});
  return key;
}

}  // namespace

std::string HttpRequest::header(std::string_view name) const {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto it = headers.find(lower);
  return it == headers.end() ? std::string() : it->second;
}

struct AuthorizationServer::Impl {
  using Handler = HttpResponse (Impl::*)(const HttpRequest&);

  Impl(ServerConfig cfg, std::shared_ptr<const Clock> clk, std::unique_ptr<Store> st)
      : config(std::move(cfg)),
        clock(std::move(clk)),
        store(st ? std::move(st) : open_store(config, clock)),
        registry(*store),
        verifier(config.attestation_policy(), *store),
        revocation_list(*store, clock),
        ring(load_signing_key(config, *store)),
        discovery(build_discovery_document(config.discovery())),
        limiter(config.attest_rate_limit, clock) {
    routes[std::string(paths::kDiscovery)]["GET"] = &Impl::on_discovery;
    routes[std::string(paths::kAttestationKeys)]["GET"] = &Impl::on_keys;
    routes[std::string(paths::kRegister)]["POST"] = &Impl::on_register;
    routes[std::string(paths::kDelegate)]["POST"] = &Impl::on_delegate;
    routes[std::string(paths::kRevoke)]["POST"] = &Impl::on_revoke;
    if (config.attestation_enabled) {
      routes[std::string(paths::kAttest)]["POST"] = &Impl::on_attest;
    }
    if (config.capabilities_enabled) {
      routes[std::string(paths::kCapabilities)]["GET"] = &Impl::on_capabilities;
    }
    if (config.audit_log_path) open_audit_log(*config.audit_log_path);
  }

  void emit(std::string_view stage) const {
    if (trace) trace(stage);
  }

  // Audit log: one JSON object per line. Delegation records also feed the
  // jti -> delegator index used to authorize revocation.
  void open_audit_log(const std::filesystem::path& path) {
    if (std::ifstream in(path); in) {
      std::string line;
      while (std::getline(in, line)) {
        Json record = Json::parse(line, nullptr, false);
        if (record.is_object() && record.value("event", "") == "delegate") {
          delegator_of[record.value("jti", "")] = record.value("delegator", "");
        }
      }
    }
    audit.open(path, std::ios::app);
    if (!audit) throw Error(ErrorCode::kStorageIo, "cannot open audit log " + path.string());
  }

  void record_audit(const Json& record) {
    std::lock_guard lock(audit_mu);
    if (record.value("event", "") == "delegate") {
      delegator_of[record["jti"].get<std::string>()] = record["delegator"].get<std::string>();
    }
    if (audit.is_open()) {
      audit << record.dump() << '\n';
      audit.flush();
      if (!audit) throw Error(ErrorCode::kStorageIo, "audit log write failed");
    }
  }

  std::optional<std::string> delegator_for(std::string_view jti) {
    std::lock_guard lock(audit_mu);
    auto it = delegator_of.find(jti);
    if (it == delegator_of.end()) return std::nullopt;
    return it->second;
  }

  TokenExpectations expectations() const {
    return {config.issuer, std::nullopt, config.clock_skew_seconds};
  }

  IdToken authenticate(const HttpRequest& request) {
    emit("auth");
    std::string token = bearer_token(request);
    if (token.empty()) fail(401, "invalid_token", "bearer token required");
    try {
      return validate_agent_id_token(token, expectations(), ring.verification_keys(),
                                     clock->now());
    } catch (const Error& e) {
      fail(401, "invalid_token", e.what());
    }
  }

  HttpResponse on_discovery(const HttpRequest&) { return {200, discovery.to_json(), {}}; }

  HttpResponse on_keys(const HttpRequest&) { return {200, publish_verification_keys(ring), {}}; }

  HttpResponse on_register(const HttpRequest& request) {
    emit("auth");
    if (config.registration_token &&
        !equal_secret(bearer_token(request), *config.registration_token)) {
      fail(401, "invalid_token", "registration requires the initial access token");
    }
    ClientRegistration reg = registry.process_registration_request(parse_body(request));
    spdlog::info(Json{{"event", "register"}, {"client_id", reg.client_id}}.dump());
    return {201, reg.to_json(), {}};
  }

  HttpResponse on_delegate(const HttpRequest& request) {
    IdToken parent = authenticate(request);
    Json body = parse_body(request);
    auto scope = optional_string(body, "scope");
    if (!scope || scope->empty()) fail(400, "invalid_request", "scope is required");
    auto client_id = optional_string(body, "delegatee_client_id");
    auto instance_id = optional_string(body, "agent_instance_id");
    if (!client_id && !instance_id) {
      fail(400, "invalid_request", "delegatee_client_id or agent_instance_id is required");
    }
    DelegationGrant grant;
    grant.scope = *scope;
    grant.purpose = optional_string(body, "purpose");
    if (body.contains("constraints") && !body["constraints"].is_null()) {
      grant.constraints = parse_constraints(body["constraints"]);
    }
    NumericDate now = clock->now();

    emit("chain_validation");
    if (parent.agent && parent.agent->delegation_chain) {
      auto report = validate_delegation_chain(*parent.agent->delegation_chain,
                                              config.trust_policy, now, revocation_list);
      if (!report.valid()) {
        fail(403, "invalid_delegation_chain", "the caller's delegation chain does not validate",
             {{"report", report.to_json()}});
      }
    }

    if (!client_id) {
      client_id = registry.client_for_instance(*instance_id);
      if (!client_id) fail(404, "delegatee_unknown", "agent instance is not registered");
    }
    if (!instance_id) instance_id = "agent-instance-" + random_id();
    Delegatee delegatee = resolve_delegatee(registry, *client_id, *instance_id,
                                            optional_string(body, "agent_type"),
                                            optional_string(body, "agent_model"));
    emit("mint");
    Issuer issuer{config.issuer, ring.active(), config.token_lifetime_seconds};
    DelegatedToken minted = mint_delegated_token(parent, delegatee, grant, issuer, now);

    // The extended chain must still satisfy local policy (length limits,
    // trusted issuers) or relying parties would reject the token anyway.
    auto report = validate_delegation_chain(*minted.claims.agent->delegation_chain,
                                            config.trust_policy, now, revocation_list);
    if (!report.valid()) {
      fail(403, "policy_violation", "the extended chain violates server policy",
           {{"report", report.to_json()}});
    }

    registry.bind_instance(*instance_id, *client_id);
    Json audit_record = Json::object();
    audit_record["event"] = "delegate";
    audit_record["jti"] = *minted.step.jti;
    audit_record["delegator"] = parent.standard.sub;
    audit_record["delegatee"] = *instance_id;
    audit_record["scope"] = grant.scope;
    audit_record["purpose"] = grant.purpose ? Json(*grant.purpose) : Json();
    audit_record["timestamp"] = now;
    record_audit(audit_record);
    spdlog::info(audit_record.dump());
    Json out = Json::object();
    out["id_token"] = minted.token;
    out["jti"] = *minted.step.jti;
    out["agent_instance_id"] = *instance_id;
    out["delegatee_client_id"] = *client_id;
    out["expires_at"] = minted.claims.standard.exp;
    return {200, out, {}};
  }

  HttpResponse on_revoke(const HttpRequest& request) {
    emit("auth");
    std::string token = bearer_token(request);
    if (token.empty()) fail(401, "invalid_token", "bearer token required");
    std::optional<std::string> caller;  // nullopt: admin
    if (!(config.admin_token && equal_secret(token, *config.admin_token))) {
      try {
        caller = validate_agent_id_token(token, expectations(), ring.verification_keys(),
                                         clock->now())
                     .standard.sub;
      } catch (const Error& e) {
        fail(401, "invalid_token", e.what());
      }
    }
    Json body = parse_body(request);
    auto jti = optional_string(body, "jti");
    if (!jti || jti->empty()) fail(400, "invalid_request", "jti is required");
    if (caller && delegator_for(*jti) != caller) {
      fail(403, "access_denied", "only the delegator of a step may revoke it");
    }
    revocation_list.revoke_step(*jti);
    Json audit_record{{"event", "revoke"},
                      {"jti", *jti},
                      {"by", caller.value_or("admin")},
                      {"timestamp", clock->now()}};
    record_audit(audit_record);
    spdlog::info(audit_record.dump());
    return {200, {{"jti", *jti}, {"revoked", true}}, {}};
  }

  HttpResponse on_attest(const HttpRequest& request) {
    emit("rate_limit");
    std::string caller = request.remote_addr.empty() ? "local" : request.remote_addr;
    if (!limiter.try_acquire(caller)) {
      const RateLimit& limit = limiter.limit();
      auto retry = static_cast<std::int64_t>(1.0 / limit.refill_per_second()) + 1;
      HttpError err{429, "rate_limited", "too many attestation requests"};
      err.extra["retry_after"] = retry;
      throw err;
    }
    authenticate(request);
    Json body = parse_body(request);
    auto agent_id = optional_string(body, "agent_id");
    if (!agent_id || agent_id->empty()) fail(400, "invalid_request", "agent_id is required");
    if (!registry.find(*agent_id) && !registry.client_for_instance(*agent_id)) {
      fail(404, "unknown_agent", "agent is not registered");
    }
    NumericDate now = clock->now();
    if (!body.contains("evidence") || body["evidence"].is_null()) {
      Nonce nonce = verifier.issue_nonce(*agent_id, now);
      return {200,
              {{"agent_id", *agent_id},
               {"nonce", nonce.value},
               {"expires_at", now + config.nonce_ttl_seconds}},
              {}};
    }
    auto nonce = optional_string(body, "nonce");
    if (!nonce || nonce->empty()) fail(400, "invalid_request", "nonce is required with evidence");
    AttestationEvidence evidence = parse_attestation_evidence(body["evidence"]);
    emit("attestation_verify");
    AttestationResult result = verifier.verify(evidence, *nonce, *agent_id, now);
    emit("sign");
    std::string signed_result =
        build_attestation_response(*agent_id, result, ring.active(), config.issuer);
    Json out = result.to_json();
    out["agent_id"] = *agent_id;
    out["attestation_result"] = signed_result;
    spdlog::info(Json{{"event", "attest"},
                      {"agent_id", *agent_id},
                      {"status", status_name(result.status)}}
                     .dump());
    return {200, out, {}};
  }

  HttpResponse on_capabilities(const HttpRequest& request) {
    std::vector<std::string> ids;
    if (auto it = request.query.find("client_id"); it != request.query.end()) {
      auto client = registry.find(it->second);
      if (!client) fail(404, "unknown_client", "client is not registered");
      ids = client->agent_capabilities;
    } else {
      for (const auto& [id, description] : config.capability_catalog) ids.push_back(id);
    }
    Json list = Json::array();
    for (const auto& id : ids) {
      CapabilityDescriptor d;
      d.id = id;
      auto described = config.capability_catalog.find(id);
      d.description = described == config.capability_catalog.end() ? id : described->second;
      d.supported_constraints = supported_constraint_keys();
      list.push_back(d.to_json());
    }
    return {200, {{"capabilities", list}, {"supported_constraints", supported_constraint_keys()}},
            {}};
  }

  HttpResponse dispatch(const HttpRequest& request) {
    auto route = routes.find(request.path);
    if (route == routes.end()) fail(404, "not_found", "no such endpoint");
    auto handler = route->second.find(request.method);
    if (handler == route->second.end()) {
      std::string allow;
      for (const auto& [method, fn] : route->second) {
        allow += (allow.empty() ? "" : ", ") + method;
      }
      HttpError err{405, "method_not_allowed", "use " + allow};
      err.extra["allow"] = allow;
      throw err;
    }
    return (this->*(handler->second))(request);
  }

  HttpResponse handle(const HttpRequest& request) {
    std::string request_id = hex_encode(random_bytes(8));
    HttpResponse response;
    try {
      try {
        response = dispatch(request);
      } catch (const Error& e) {
        throw translate(e);
      }
    } catch (const HttpError& e) {
      response.status = e.status;
      response.body = {{"error", e.error}, {"error_description", e.description}};
      for (auto& [k, v] : e.extra.items()) {
        if (k == "retry_after") {
          response.headers["Retry-After"] = std::to_string(v.get<std::int64_t>());
        } else if (k == "allow") {
          response.headers["Allow"] = v.get<std::string>();
        } else {
          response.body[k] = v;
        }
      }
    } catch (const std::exception& e) {
      spdlog::error(Json{{"event", "internal_error"},
                         {"request_id", request_id},
                         {"what", e.what()}}
                        .dump());
      response.status = 500;
      response.body = {{"error", "server_error"}, {"error_description", "internal error"}};
    }
    if (!response.body.is_object()) response.body = Json::object();
    response.body["request_id"] = request_id;
    response.headers["X-Request-Id"] = request_id;
    spdlog::debug(Json{{"event", "request"},
                       {"request_id", request_id},
                       {"method", request.method},
                       {"path", request.path},
                       {"status", response.status}}
                      .dump());
    return response;
  }

  ServerConfig config;
  std::shared_ptr<const Clock> clock;
  std::unique_ptr<Store> store;
  ClientRegistry registry;
  AttestationVerifier verifier;
  RevocationList revocation_list;
  jose::KeyRing ring;
  DiscoveryDocument discovery;
  TokenBucketLimiter limiter;
  std::function<void(std::string_view)> trace;
  std::map<std::string, std::map<std::string, Handler>> routes;

  std::mutex audit_mu;
  std::ofstream audit;
  std::map<std::string, std::string, std::less<>> delegator_of;

  httplib::Server http;
  std::thread listener;
  int bound_port = -1;
  std::mutex run_mu;
  std::condition_variable stopped_cv;
  bool stopped = true;
};

AuthorizationServer::AuthorizationServer(ServerConfig config, std::shared_ptr<const Clock> clock,
                                         std::unique_ptr<Store> store) {
  config.finalize();
  impl_ = std::make_unique<Impl>(std::move(config), std::move(clock), std::move(store));
}

AuthorizationServer::~AuthorizationServer() { stop(); }

HttpResponse AuthorizationServer::handle(const HttpRequest& request) {
  return impl_->handle(request);
}

int AuthorizationServer::start() {
  Impl& s = *impl_;
  auto forward = [&s](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string lower = k;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      request.headers.emplace(std::move(lower), v);
    }
    request.body = req.body;
    request.remote_addr = req.remote_addr;
    HttpResponse response = s.handle(request);
    res.status = response.status;
    for (const auto& [k, v] : response.headers) res.set_header(k, v);
    res.set_content(response.body.dump(), "application/json");
  };
  s.http.Get(".*", forward);
  s.http.Post(".*", forward);
  s.http.Put(".*", forward);
  s.http.Delete(".*", forward);
  s.http.Patch(".*", forward);
  s.http.Options(".*", forward);

  const ServerConfig& c = s.config;
  int port = c.port == 0 ? s.http.bind_to_any_port(c.host) : (s.http.bind_to_port(c.host, c.port)
                                                                  ? c.port
                                                                  : -1);
  if (port < 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  {
    std::lock_guard lock(s.run_mu);
    s.bound_port = port;
    s.stopped = false;
  }
  s.listener = std::thread([&s] { s.http.listen_after_bind(); });
  s.http.wait_until_ready();
  spdlog::info(Json{{"event", "listening"}, {"url", local_url()}, {"issuer", c.issuer}}.dump());
  return port;
}

void AuthorizationServer::wait() {
  std::unique_lock lock(impl_->run_mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void AuthorizationServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  {
    std::lock_guard lock(impl_->run_mu);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

std::string AuthorizationServer::local_url() const {
  std::string host = impl_->config.host == "0.0.0.0" ? "127.0.0.1" : impl_->config.host;
  return "http://" + host + ":" + std::to_string(impl_->bound_port);
}

const ServerConfig& AuthorizationServer::config() const { return impl_->config; }
const DiscoveryDocument& AuthorizationServer::discovery() const { return impl_->discovery; }
Store& AuthorizationServer::store() { return *impl_->store; }
ClientRegistry& AuthorizationServer::registry() { return impl_->registry; }
AttestationVerifier& AuthorizationServer::verifier() { return impl_->verifier; }
const RevocationView& AuthorizationServer::revocations() const { return impl_->revocation_list; }
jose::KeySet AuthorizationServer::verification_keys() const {
  return impl_->ring.verification_keys();
}
const jose::KeyRing& AuthorizationServer::key_ring() const { return impl_->ring; }

std::string AuthorizationServer::issue_subject_token(std::string_view subject,
                                                     std::string_view scope,
                                                     std::optional<std::string> audience) {
  parse_scope(scope);
  NumericDate now = impl_->clock->now();
  StandardClaims claims;
  claims.iss = impl_->config.issuer;
  claims.sub = std::string(subject);
  claims.aud = audience.value_or(impl_->config.issuer);
  claims.iat = now;
  claims.auth_time = now;
  claims.exp = now + impl_->config.token_lifetime_seconds;
  claims.scope = std::string(scope);
  claims.jti = random_id();
  return mint_id_token(claims, impl_->ring.active());
}

void AuthorizationServer::set_trace(std::function<void(std::string_view)> trace) {
  impl_->trace = std::move(trace);
}

}  // namespace oidca
