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

#include "tacnet/security.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace tacnet {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("sha256: EVP_Digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void CredentialStore::provision_secure_element(const std::string& se_id,
                                               const std::string& secret) {
  se_secrets_[se_id] = secret;
}

void CredentialStore::provision_device(const DeviceId& device, const std::string& signature,
                                       std::set<std::string> authorized_systems) {
  dte_signatures_[device] = signature;
  authorized_[device] = std::move(authorized_systems);
}

std::optional<std::string> CredentialStore::se_secret(const std::string& se_id) const {
  auto it = se_secrets_.find(se_id);
  if (it == se_secrets_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> CredentialStore::dte_signature(const DeviceId& device) const {
  auto it = dte_signatures_.find(device);
  if (it == dte_signatures_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>* CredentialStore::authorized_systems(const DeviceId& device) const {
  auto it = authorized_.find(device);
  return it == authorized_.end() ? nullptr : &it->second;
}

std::string attach_challenge(std::uint64_t run_seed, const std::string& se_id) {
  return sha256_hex("challenge:" + std::to_string(run_seed) + ":" + se_id);
}

std::string attach_response(const std::string& challenge, const std::string& se_secret) {
  return sha256_hex(challenge + ":" + se_secret);
}

nlohmann::json to_json(const AuditRecord& r) {
  return nlohmann::json{{"index", r.index},   {"time", r.time},       {"actor", r.actor},
                        {"action", r.action}, {"outcome", r.outcome}, {"chain_digest", r.chain_digest}};
}

std::optional<AuditRecord> audit_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  for (const char* key : {"index", "time", "actor", "action", "outcome", "chain_digest"}) {
    if (!j.contains(key)) return std::nullopt;
  }
  if (!j["index"].is_number_unsigned() || !j["time"].is_number_integer()) return std::nullopt;
  if (!j["actor"].is_string() || !j["action"].is_string() || !j["outcome"].is_string() ||
      !j["chain_digest"].is_string()) {
    return std::nullopt;
  }
  AuditRecord r;
  r.index = j["index"].get<std::uint64_t>();
  r.time = j["time"].get<Micros>();
  r.actor = j["actor"].get<std::string>();
  r.action = j["action"].get<std::string>();
  r.outcome = j["outcome"].get<std::string>();
  r.chain_digest = j["chain_digest"].get<std::string>();
  return r;
}

std::string AuditLog::canonical_bytes(const AuditRecord& r) {
  // nlohmann::json objects serialize with sorted keys, which fixes the byte
  // layout the chain digest covers.
  nlohmann::json j{{"index", r.index},
                   {"time", r.time},
                   {"actor", r.actor},
                   {"action", r.action},
                   {"outcome", r.outcome}};
  return j.dump();
}

const AuditRecord& AuditLog::append(Micros time, std::string actor, std::string action,
                                    std::string outcome) {
  AuditRecord r;
  r.index = records_.size();
  r.time = time;
  r.actor = std::move(actor);
  r.action = std::move(action);
  r.outcome = std::move(outcome);
  const std::string prev = records_.empty() ? std::string() : records_.back().chain_digest;
  r.chain_digest = sha256_hex(prev + canonical_bytes(r));
  records_.push_back(std::move(r));
  return records_.back();
}

std::optional<std::uint64_t> AuditLog::verify_chain(const std::vector<AuditRecord>& records) {
  std::string prev;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AuditRecord& r = records[i];
    if (r.index != i) return i;
    if (r.chain_digest != sha256_hex(prev + canonical_bytes(r))) return i;
    prev = r.chain_digest;
  }
  return std::nullopt;
}

AttachOutcome SecurityPlane::radio_attach_auth(const std::string& se_id,
                                               const std::string& challenge,
                                               const std::string& response, bool fault_reject,
                                               Micros time) {
  AttachOutcome out = AttachOutcome::Fail;
  std::string why = "unknown_secure_element";
  if (fault_reject) {
    why = "fault_injected";
  } else if (auto secret = creds_.se_secret(se_id)) {
    if (attach_response(challenge, *secret) == response) {
      out = AttachOutcome::Ok;
      why.clear();
    } else {
      why = "challenge_response_mismatch";
    }
  }
  audit_.append(time, se_id, "auth",
                out == AttachOutcome::Ok ? "radio_attach_ok" : "radio_attach_fail:" + why);
  return out;
}

AuthzOutcome SecurityPlane::authorize_dte(const DeviceId& device, const std::string& signature,
                                          RegistrationState current_state, bool fault_reject,
                                          Micros time) {
  if (current_state != RegistrationState::RadioAttached) {
    // Not a decision: the request is out of order and is not answered.
    return OrderViolation{current_state};
  }
  AuthzOutcome out = AuthzDenial{"unknown_device"};
  std::string summary = "authz_denied:unknown_device";
  if (fault_reject) {
    out = AuthzDenial{"fault_injected"};
    summary = "authz_denied:fault_injected";
  } else if (auto expected = creds_.dte_signature(device)) {
    if (*expected == signature) {
      const std::set<std::string>* systems = creds_.authorized_systems(device);
      AuthzGrant grant;
      if (systems) grant.scope = *systems;
      out = grant;
      summary = "authz_granted";
    } else {
      out = AuthzDenial{"signature_mismatch"};
      summary = "authz_denied:signature_mismatch";
    }
  }
  audit_.append(time, device, "auth", summary);
  return out;
}

}  // namespace tacnet
