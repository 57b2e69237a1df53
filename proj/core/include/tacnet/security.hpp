/*
 * Copyright 2026 tacnet-sim Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tacnet/model.hpp"

namespace tacnet {

// Hex-encoded SHA-256; the digest used for challenges and the audit chain.
std::string sha256_hex(std::string_view data);

// System scopes the registration sequence consults: a device needs
// kConfigScope in its granted scope to fetch configuration and kCucScope to
// register with the CUC.
inline constexpr const char* kConfigScope = "config-server";
inline constexpr const char* kCucScope = "cuc";

// Subscriber and device credentials, loaded once at scenario setup and
// immutable afterwards (provisioning happens out of band, by the operator).
class CredentialStore {
 public:
  void provision_secure_element(const std::string& se_id, const std::string& secret);
  void provision_device(const DeviceId& device, const std::string& signature,
                        std::set<std::string> authorized_systems);

  std::optional<std::string> se_secret(const std::string& se_id) const;
  std::optional<std::string> dte_signature(const DeviceId& device) const;
  const std::set<std::string>* authorized_systems(const DeviceId& device) const;

 private:
  std::map<std::string, std::string> se_secrets_;
  std::map<DeviceId, std::string> dte_signatures_;
  std::map<DeviceId, std::set<std::string>> authorized_;
};

// Challenge bound to the run seed and subscriber identity; the expected
// response binds the challenge to the shared secret.
std::string attach_challenge(std::uint64_t run_seed, const std::string& se_id);
std::string attach_response(const std::string& challenge, const std::string& se_secret);

enum class AttachOutcome { Ok, Fail };

struct AuthzGrant { std::set<std::string> scope; };
struct AuthzDenial { std::string reason; };
struct OrderViolation { RegistrationState actual; };
using AuthzOutcome = std::variant<AuthzGrant, AuthzDenial, OrderViolation>;

// Tamper-evident log: each record's chain digest covers the previous digest
// and the record's own canonical serialization, so any byte flip invalidates
// every digest from that record on.
struct AuditRecord {
  std::uint64_t index = 0;
  Micros time = 0;
  std::string actor;
  std::string action;
  std::string outcome;
  std::string chain_digest;  // hex SHA-256
};

nlohmann::json to_json(const AuditRecord& r);
std::optional<AuditRecord> audit_record_from_json(const nlohmann::json& j);

class AuditLog {
 public:
  const AuditRecord& append(Micros time, std::string actor, std::string action,
                            std::string outcome);

  const std::vector<AuditRecord>& records() const { return records_; }

  // Canonical bytes a record's chain digest covers (chain digest excluded).
  static std::string canonical_bytes(const AuditRecord& r);

  // Index of the first record whose chain digest does not verify, or nullopt
  // if the whole chain is intact.
  static std::optional<std::uint64_t> verify_chain(const std::vector<AuditRecord>& records);

 private:
  std::vector<AuditRecord> records_;
};

// Authentication and authorization decisions. Every decision appends exactly
// one audit record.
class SecurityPlane {
 public:
  explicit SecurityPlane(CredentialStore creds) : creds_(std::move(creds)) {}

  // Radio attach: verifies the challenge response of the subscriber identity.
  // `fault_reject` models an injected negative answer from the core.
  AttachOutcome radio_attach_auth(const std::string& se_id, const std::string& challenge,
                                  const std::string& response, bool fault_reject, Micros time);

  // Device authorization: verifies the DTE signature and returns the granted
  // system scope. Legal only for devices currently RadioAttached.
  AuthzOutcome authorize_dte(const DeviceId& device, const std::string& signature,
                             RegistrationState current_state, bool fault_reject, Micros time);

  const CredentialStore& credentials() const { return creds_; }
  AuditLog& audit() { return audit_; }
  const AuditLog& audit() const { return audit_; }

 private:
  CredentialStore creds_;
  AuditLog audit_;
};

}  // namespace tacnet
