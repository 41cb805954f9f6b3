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

#include "cli.h"

#include <csignal>
#include <pthread.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "oidca/attestation.h"
#include "oidca/delegation.h"
#include "oidca/encoding.h"
#include "oidca/error.h"
#include "oidca/server.h"
#include "oidca/token_service.h"

namespace oidca::cli {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

// Bad flags, unreadable inputs, unusable keys.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path, std::istream& in) {
  std::stringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
  } else {
    std::ifstream file(path);
    if (!file) throw UsageError("cannot read " + path);
    buf << file.rdbuf();
  }
  return buf.str();
}

Json read_json(const std::string& path, std::istream& in) {
  Json doc = Json::parse(read_input(path, in), nullptr, false);
  if (doc.is_discarded()) throw UsageError(path + " is not valid JSON");
  return doc;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

void write_file(const fs::path& path, const std::string& content, bool secret) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw UsageError("cannot write " + path.string());
  file << content;
  file.close();
  if (secret) {
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write,
                    fs::perm_options::replace);
  }
}

jose::PrivateKey load_private_key(const std::string& path, std::istream& in) {
  try {
    return jose::PrivateKey::from_pem(read_input(path, in));
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Accepts public or private PEM files and JWKS documents.
void add_keys(jose::KeySet& keys, const std::string& path, std::istream& in) {
  std::string text = read_input(path, in);
  try {
    if (text.find("PRIVATE KEY") != std::string::npos) {
      keys.add(jose::PrivateKey::from_pem(text).public_key());
    } else if (text.find("-----BEGIN") != std::string::npos) {
      keys.add(jose::PublicKey::from_pem(text));
    } else {
      Json doc = Json::parse(text, nullptr, false);
      if (doc.is_discarded()) throw UsageError(path + " is neither PEM nor JWKS");
      for (const auto& key : jose::KeySet::from_jwks(doc).keys()) keys.add(key);
    }
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

TrustPolicy load_policy(const std::string& path, std::istream& in) {
  try {
    return TrustPolicy::from_json(read_json(path, in));
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Json error_json(const Error& e) {
  Json out{{"code", error_code_name(e.code())}, {"message", e.what()}};
  if (!e.details().empty()) out["details"] = e.details();
  return out;
}

NumericDate now_or(const std::optional<NumericDate>& now) {
  return now ? *now : SystemClock().now();
}

bool is_token_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedToken:
    case ErrorCode::kBadSignature:
    case ErrorCode::kWrongIssuer:
    case ErrorCode::kWrongAudience:
    case ErrorCode::kNotYetValid:
    case ErrorCode::kExpired:
      return true;
    default:
      return false;
  }
}

// --- keygen ---

struct KeygenOptions {
  std::string alg = "ES256";
  std::string kid;
  std::string out;
  std::string public_out;
};

int cmd_keygen(const KeygenOptions& o, std::ostream& out) {
  auto alg = jose::parse_algorithm(o.alg);
  if (!alg) throw UsageError("unsupported algorithm " + o.alg);
  auto key = jose::PrivateKey::generate(*alg, o.kid);
  Json report{{"alg", o.alg}, {"kid", key.kid()}, {"jwk", key.public_key().to_jwk()}};
  if (o.out.empty()) {
    report["private_key_pem"] = key.to_pem();
  } else {
    write_file(o.out, key.to_pem(), true);
    report["private_key_file"] = o.out;
  }
  if (!o.public_out.empty()) {
    write_file(o.public_out, key.public_key().to_pem(), false);
    report["public_key_file"] = o.public_out;
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

// --- mint ---

struct MintOptions {
  std::string claims;
  std::string key;
};

int cmd_mint(const MintOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  Json payload = read_json(o.claims, in);
  auto key = load_private_key(o.key, in);
  try {
    StandardClaims standard = parse_standard_claims(payload);
    auto agent = parse_agent_claims(payload);
    out << (agent ? mint_agent_id_token(standard, *agent, key) : mint_id_token(standard, key))
        << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "mint: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitInvalid;
  }
}

// --- validate ---

struct ValidateOptions {
  std::string token = "-";
  std::vector<std::string> keys;
  std::string issuer;
  std::optional<std::string> audience;
  std::string policy;
  std::vector<std::string> revoked;
  std::optional<NumericDate> now;
  std::int64_t skew = kDefaultClockSkewSeconds;
};

int cmd_validate(const ValidateOptions& o, std::istream& in, std::ostream& out) {
  jose::KeySet keys;
  for (const auto& k : o.keys) add_keys(keys, k, in);
  TrustPolicy policy;
  if (o.policy.empty()) {
    policy.trusted_issuers.insert(o.issuer);
  } else {
    policy = load_policy(o.policy, in);
  }
  std::string token = trim(read_input(o.token, in));
  NumericDate now = now_or(o.now);

  Json report{{"verdict", "invalid"},
              {"token", {{"result", "fail"}, {"error", nullptr}}},
              {"agent_claims", {{"result", "not_applicable"}, {"error", nullptr}}},
              {"chain", nullptr}};
  std::optional<IdToken> parsed;
  try {
    parsed = validate_agent_id_token(token, {o.issuer, o.audience, o.skew}, keys, now);
    report["token"]["result"] = "pass";
    if (parsed->agent) {
      check_agent_claims(*parsed->agent);
      report["agent_claims"]["result"] = "pass";
    }
  } catch (const Error& e) {
    if (is_token_error(e.code())) {
      report["token"]["error"] = error_json(e);
    } else {
      report["token"]["result"] = "pass";
      report["agent_claims"] = {{"result", "fail"}, {"error", error_json(e)}};
    }
    out << report.dump(2) << '\n';
    return kExitInvalid;
  }
  report["claims"] = to_json(parsed->standard);
  bool valid = true;
  if (parsed->agent && parsed->agent->delegation_chain) {
    StaticRevocations revoked(ScopeSet(o.revoked.begin(), o.revoked.end()));
    auto chain = validate_delegation_chain(*parsed->agent->delegation_chain, policy, now, revoked);
    report["chain"] = chain.to_json();
    valid = chain.valid();
  }
  report["verdict"] = valid ? "valid" : "invalid";
  out << report.dump(2) << '\n';
  return valid ? kExitOk : kExitInvalid;
}

// --- chain-inspect ---

struct InspectOptions {
  std::string input = "-";
  std::string policy;
  std::vector<std::string> trusted_issuers;
  std::vector<std::string> revoked;
  std::optional<NumericDate> now;
  bool pretty = false;
};

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

void render_table(const DelegationChain& chain, const ChainValidationReport& report,
                  std::ostream& out) {
  std::vector<std::string> head{"#", "ISS", "SUB", "AUD", "DELEGATED_AT", "SCOPE"};
  for (std::size_t r = 1; r <= kRuleCount; ++r) {
    head.emplace_back(rule_label(static_cast<Rule>(r)));
  }
  std::vector<std::vector<std::string>> rows{head};
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& s = chain[i];
    std::vector<std::string> row{std::to_string(i), s.iss, s.sub, s.aud,
                                 std::to_string(s.delegated_at), s.scope};
    for (std::size_t r = 1; r <= kRuleCount; ++r) {
      Rule rule = static_cast<Rule>(r);
      bool failed = std::any_of(report.violations.begin(), report.violations.end(),
                                [&](const Violation& v) {
                                  return v.rule == rule && v.step_index == i;
                                });
      if (failed) {
        row.emplace_back("FAIL");
      } else if (report.result(rule) == RuleOutcome::kNotApplicable) {
        row.emplace_back("n/a");
      } else {
        row.emplace_back("pass");
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += c + 1 == row.size() ? row[c] : pad(row[c], widths[c]) + "  ";
    }
    out << line << '\n';
  }
  out << '\n';
  for (std::size_t r = 1; r <= kRuleCount; ++r) {
    Rule rule = static_cast<Rule>(r);
    out << rule_label(rule) << ' ' << pad(std::string(rule_name(rule)), 16)
        << outcome_name(report.result(rule)) << '\n';
  }
  for (const auto& v : report.violations) {
    out << "violation " << rule_label(v.rule) << " at step " << v.step_index << ": "
        << v.detail << '\n';
  }
  out << "verdict: " << (report.valid() ? "valid" : "invalid") << '\n';
}

int cmd_chain_inspect(const InspectOptions& o, std::istream& in, std::ostream& out,
                      std::ostream& err) {
  TrustPolicy policy;
  if (!o.policy.empty()) policy = load_policy(o.policy, in);
  policy.trusted_issuers.insert(o.trusted_issuers.begin(), o.trusted_issuers.end());
  if (policy.trusted_issuers.empty()) {
    throw UsageError("no trusted issuers: pass --policy or --trusted-issuer");
  }
  Json doc = read_json(o.input, in);
  const Json& raw = doc.is_object() && doc.contains("delegation_chain") ? doc["delegation_chain"]
                                                                        : doc;
  DelegationChain chain;
  try {
    chain = parse_delegation_chain(raw);
  } catch (const Error& e) {
    err << "chain-inspect: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    out << Json{{"verdict", "invalid"}, {"error", error_json(e)}}.dump(2) << '\n';
    return kExitInvalid;
  }
  StaticRevocations revoked(ScopeSet(o.revoked.begin(), o.revoked.end()));
  auto report = validate_delegation_chain(chain, policy, now_or(o.now), revoked);
  if (o.pretty) {
    render_table(chain, report, out);
  } else {
    Json j = report.to_json();
    j["steps"] = to_json(chain);
    out << j.dump(2) << '\n';
  }
  return report.valid() ? kExitOk : kExitInvalid;
}

// --- delegate ---

struct DelegateOptions {
  std::string parent;
  std::string key;
  std::string issuer;
  std::string scope;
  std::optional<std::string> purpose;
  std::optional<std::string> constraints;
  std::string client_id;
  std::string instance_id;
  std::string agent_type = "assistant";
  std::string agent_model;
  std::string agent_provider;
  std::optional<std::string> agent_version;
  std::optional<NumericDate> now;
  std::int64_t lifetime = kDefaultTokenLifetimeSeconds;
  std::int64_t skew = kDefaultClockSkewSeconds;
};

int cmd_delegate(const DelegateOptions& o, std::istream& in, std::ostream& out) {
  auto key = load_private_key(o.key, in);
  jose::KeySet keys;
  keys.add(key.public_key());
  std::string parent_token = trim(read_input(o.parent, in));
  NumericDate now = now_or(o.now);
  DelegationGrant grant{o.scope, o.purpose, std::nullopt};
  Json constraints;
  if (o.constraints) {
    constraints = Json::parse(*o.constraints, nullptr, false);
    if (constraints.is_discarded()) throw UsageError("--constraints is not valid JSON");
  }
  try {
    if (o.constraints) grant.constraints = parse_constraints(constraints);
    IdToken parent = validate_agent_id_token(parent_token, {o.issuer, std::nullopt, o.skew},
                                             keys, now);
    Delegatee delegatee;
    delegatee.client_id = o.client_id;
    delegatee.identity.agent_type = o.agent_type;
    delegatee.identity.agent_model = o.agent_model;
    delegatee.identity.agent_provider = o.agent_provider;
    delegatee.identity.agent_version = o.agent_version;
    delegatee.identity.agent_instance_id = o.instance_id;
    auto minted = mint_delegated_token(parent, delegatee, grant,
                                       Issuer{o.issuer, key, o.lifetime}, now);
    out << Json{{"id_token", minted.token},
                {"jti", *minted.step.jti},
                {"expires_at", minted.claims.standard.exp}}
                   .dump(2)
        << '\n';
    return kExitOk;
  } catch (const Error& e) {
    out << Json{{"error", error_json(e)}}.dump(2) << '\n';
    return kExitInvalid;
  }
}

// --- attest ---

struct AttestMakeOptions {
  std::string key;
  std::string nonce;
  std::string issuer = "agent";
  std::string provider;
  std::string model;
  std::string version;
  std::string measurement;
  std::string measure_file;
  std::optional<NumericDate> iat;
  std::optional<NumericDate> timestamp;
};

int cmd_attest_make(const AttestMakeOptions& o, std::istream& in, std::ostream& out) {
  auto key = load_private_key(o.key, in);
  EatClaims claims;
  claims.iss = o.issuer;
  claims.iat = now_or(o.iat);
  claims.nonce = o.nonce;
  claims.agent_provider = o.provider;
  claims.agent_model = o.model;
  claims.agent_version = o.version;
  if (!o.measure_file.empty()) {
    claims.measurement = sha256_hex(read_input(o.measure_file, in));
  } else if (is_sha256_hex(o.measurement)) {
    claims.measurement = o.measurement;
  } else {
    throw UsageError("--measurement must be 64 lowercase hex chars (or use --measure-file)");
  }
  auto evidence = make_eat_evidence(make_eat_token(claims, key), o.timestamp.value_or(claims.iat));
  out << to_json(evidence).dump(2) << '\n';
  return kExitOk;
}

struct AttestVerifyOptions {
  std::string evidence = "-";
  std::string nonce;
  std::string agent_id = "cli";
  std::vector<std::string> trusted_keys;
  std::vector<std::string> references;
  std::string references_file;
  std::optional<NumericDate> now;
  std::int64_t freshness = kDefaultFreshnessWindowSeconds;
};

MeasurementKey parse_reference(const std::string& text, std::string& digest) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 4) {
    throw UsageError("--reference expects provider,model,version,digest: " + text);
  }
  digest = parts[3];
  return {parts[0], parts[1], parts[2]};
}

int cmd_attest_verify(const AttestVerifyOptions& o, std::istream& in, std::ostream& out) {
  AttestationPolicy policy;
  for (const auto& k : o.trusted_keys) add_keys(policy.trusted_attestation_keys, k, in);
  policy.freshness_window_seconds = o.freshness;
  for (const auto& r : o.references) {
    std::string digest;
    MeasurementKey key = parse_reference(r, digest);
    policy.reference_measurements[key] = digest;
  }
  if (!o.references_file.empty()) {
    for (const auto& r : read_json(o.references_file, in)) {
      policy.reference_measurements[{r.at("provider"), r.at("model"), r.at("version")}] =
          r.at("digest");
    }
  }
  NumericDate now = now_or(o.now);
  auto clock = std::make_shared<ManualClock>(now);
  auto store = make_memory_store(clock);
  try {
    AttestationVerifier verifier(policy, *store);
    verifier.accept_nonce(o.nonce, o.agent_id, now);
    auto evidence = parse_attestation_evidence(read_json(o.evidence, in));
    auto result = verifier.verify(evidence, o.nonce, o.agent_id, now);
    out << result.to_json().dump(2) << '\n';
    return result.status == AttestationStatus::kVerified ? kExitOk : kExitInvalid;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig || e.code() == ErrorCode::kInvalidDigest) {
      throw UsageError(e.what());
    }
    out << Json{{"status", "failed"}, {"error", error_json(e)}}.dump(2) << '\n';
    return kExitInvalid;
  }
}

// --- serve ---

struct ServeOptions {
  std::string config;
  std::optional<std::string> host;
  std::optional<int> port;
  std::string log_level = "info";
};

int cmd_serve(const ServeOptions& o, std::ostream& err) {
  ServerConfig config;
  try {
    if (!o.config.empty()) config = ServerConfig::load(o.config);
    config.apply_env();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (o.host) config.host = *o.host;
  if (o.port) config.port = *o.port;
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  // Handle termination signals synchronously on this thread; the listener
  // threads inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<AuthorizationServer> server;
  try {
    server = std::make_unique<AuthorizationServer>(config);
    server->start();
  } catch (const Error& e) {
    err << "serve: " << e.what() << '\n';
    return kExitUsage;
  }
  int received = 0;
  sigwait(&signals, &received);
  spdlog::info(Json{{"event", "shutdown"}, {"signal", received}}.dump());
  server->stop();
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"OIDC-A agent identity toolkit", "oidca"};
  app.require_subcommand(1);

  KeygenOptions keygen;
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a signing key");
  keygen_cmd->add_option("--alg", keygen.alg, "ES256 or RS256")->capture_default_str();
  keygen_cmd->add_option("--kid", keygen.kid, "Key id (default: JWK thumbprint)");
  keygen_cmd->add_option("--out", keygen.out, "Write the private key PEM here");
  keygen_cmd->add_option("--public-out", keygen.public_out, "Write the public key PEM here");

  MintOptions mint;
  auto* mint_cmd = app.add_subcommand("mint", "Sign a claims JSON file as an ID token");
  mint_cmd->add_option("--claims", mint.claims, "Claims JSON file, - for stdin")->required();
  mint_cmd->add_option("--key", mint.key, "Issuer private key PEM")->required();

  ValidateOptions validate;
  auto* validate_cmd = app.add_subcommand("validate", "Validate an ID token");
  validate_cmd->add_option("token", validate.token, "Token file, - for stdin");
  validate_cmd->add_option("--key", validate.keys, "Issuer key: PEM or JWKS file")->required();
  validate_cmd->add_option("--issuer", validate.issuer, "Expected issuer")->required();
  validate_cmd->add_option("--audience", validate.audience, "Expected audience");
  validate_cmd->add_option("--policy", validate.policy,
                           "Trust policy JSON (default: trust --issuer)");
  validate_cmd->add_option("--revoked", validate.revoked, "Revoked step jti");
  validate_cmd->add_option("--now", validate.now, "Evaluation time (NumericDate)");
  validate_cmd->add_option("--skew", validate.skew, "Allowed clock skew for iat, seconds")
      ->capture_default_str();

  InspectOptions inspect;
  auto* inspect_cmd = app.add_subcommand("chain-inspect", "Check a delegation chain rule by rule");
  inspect_cmd->add_option("input", inspect.input,
                          "Chain JSON (array or {delegation_chain}), - for stdin");
  inspect_cmd->add_option("--policy", inspect.policy, "Trust policy JSON");
  inspect_cmd->add_option("--trusted-issuer", inspect.trusted_issuers, "Trusted issuer");
  inspect_cmd->add_option("--revoked", inspect.revoked, "Revoked step jti");
  inspect_cmd->add_option("--now", inspect.now, "Evaluation time (NumericDate)");
  inspect_cmd->add_flag("--pretty", inspect.pretty, "Print a table instead of JSON");

  DelegateOptions delegate;
  auto* delegate_cmd = app.add_subcommand("delegate", "Extend a token's chain to another agent");
  delegate_cmd->add_option("--parent", delegate.parent, "Parent token file")->required();
  delegate_cmd->add_option("--key", delegate.key, "Issuer private key PEM")->required();
  delegate_cmd->add_option("--issuer", delegate.issuer, "Issuer URL")->required();
  delegate_cmd->add_option("--scope", delegate.scope, "Delegated scope")->required();
  delegate_cmd->add_option("--purpose", delegate.purpose, "Delegation purpose");
  delegate_cmd->add_option("--constraints", delegate.constraints, "Constraints JSON object");
  delegate_cmd->add_option("--client-id", delegate.client_id, "Delegatee client id")->required();
  delegate_cmd->add_option("--instance-id", delegate.instance_id, "Delegatee agent instance")
      ->required();
  delegate_cmd->add_option("--agent-type", delegate.agent_type)->capture_default_str();
  delegate_cmd->add_option("--agent-model", delegate.agent_model)->required();
  delegate_cmd->add_option("--agent-provider", delegate.agent_provider)->required();
  delegate_cmd->add_option("--agent-version", delegate.agent_version);
  delegate_cmd->add_option("--now", delegate.now, "Delegation time (NumericDate)");
  delegate_cmd->add_option("--lifetime", delegate.lifetime, "Token lifetime, seconds")
      ->capture_default_str();
  delegate_cmd->add_option("--skew", delegate.skew, "Allowed clock skew for iat, seconds")
      ->capture_default_str();

  auto* attest_cmd = app.add_subcommand("attest", "Create or verify EAT attestation evidence");
  attest_cmd->require_subcommand(1);
  AttestMakeOptions make;
  auto* make_cmd = attest_cmd->add_subcommand("make", "Sign EAT evidence");
  make_cmd->add_option("--key", make.key, "Attestation private key PEM")->required();
  make_cmd->add_option("--nonce", make.nonce, "Challenge nonce")->required();
  make_cmd->add_option("--issuer", make.issuer, "Evidence issuer")->capture_default_str();
  make_cmd->add_option("--provider", make.provider)->required();
  make_cmd->add_option("--model", make.model)->required();
  make_cmd->add_option("--version", make.version)->required();
  auto* measurement = make_cmd->add_option("--measurement", make.measurement, "SHA-256 hex");
  auto* measure_file = make_cmd->add_option("--measure-file", make.measure_file,
                                            "Hash this file as the measurement");
  measurement->excludes(measure_file);
  make_cmd->add_option("--iat", make.iat, "Evidence time (default: now)");
  make_cmd->add_option("--timestamp", make.timestamp, "Outer timestamp (default: iat)");

  AttestVerifyOptions verify;
  auto* verify_cmd = attest_cmd->add_subcommand("verify", "Verify EAT evidence offline");
  verify_cmd->add_option("evidence", verify.evidence, "Evidence JSON, - for stdin");
  verify_cmd->add_option("--nonce", verify.nonce, "Expected nonce")->required();
  verify_cmd->add_option("--agent-id", verify.agent_id)->capture_default_str();
  verify_cmd->add_option("--trusted-key", verify.trusted_keys, "PEM or JWKS file")->required();
  verify_cmd->add_option("--reference", verify.references, "provider,model,version,digest");
  verify_cmd->add_option("--references", verify.references_file, "Reference list JSON");
  verify_cmd->add_option("--now", verify.now, "Verification time (NumericDate)");
  verify_cmd->add_option("--freshness", verify.freshness, "Freshness window, seconds")
      ->capture_default_str();

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the authorization server");
  serve_cmd->add_option("--config", serve.config, "Server config JSON")->envname("OIDCA_CONFIG");
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--log-level", serve.log_level)->capture_default_str();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*keygen_cmd) return cmd_keygen(keygen, out);
    if (*mint_cmd) return cmd_mint(mint, in, out, err);
    if (*validate_cmd) return cmd_validate(validate, in, out);
    if (*inspect_cmd) return cmd_chain_inspect(inspect, in, out, err);
    if (*delegate_cmd) return cmd_delegate(delegate, in, out);
    if (*make_cmd) {
      if (make.measurement.empty() && make.measure_file.empty()) {
        throw UsageError("one of --measurement or --measure-file is required");
      }
      return cmd_attest_make(make, in, out);
    }
    if (*verify_cmd) return cmd_attest_verify(verify, in, out);
    if (*serve_cmd) return cmd_serve(serve, err);
  } catch (const UsageError& e) {
    err << "oidca: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "oidca: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitUsage;
}

}  // namespace oidca::cli
