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

#include <doctest.h>

#include <string>

#include "tacnet/security.hpp"

using namespace tacnet;

TEST_CASE("sha256 matches published test vectors") {
  // FIPS 180-2 examples.
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("challenge and response are deterministic in seed and identity") {
  const std::string c1 = attach_challenge(7, "se-1");
  const std::string c2 = attach_challenge(7, "se-1");
  CHECK(c1 == c2);
  CHECK(attach_challenge(8, "se-1") != c1);
  CHECK(attach_challenge(7, "se-2") != c1);
  CHECK(c1 == sha256_hex("challenge:7:se-1"));

  const std::string r = attach_response(c1, "secret");
  CHECK(r == sha256_hex(c1 + ":secret"));
  CHECK(attach_response(c1, "other") != r);
}

namespace {

CredentialStore store_with_dev1() {
  CredentialStore creds;
  creds.provision_secure_element("se-1", "topsecret");
  creds.provision_device("dev1", "sig-dev1", {"config-server", "cuc"});
  return creds;
}

}  // namespace

TEST_CASE("credential store lookups") {
  CredentialStore creds = store_with_dev1();
  CHECK(creds.se_secret("se-1") == "topsecret");
  CHECK_FALSE(creds.se_secret("se-x").has_value());
  CHECK(creds.dte_signature("dev1") == "sig-dev1");
  CHECK_FALSE(creds.dte_signature("ghost").has_value());
  const auto* systems = creds.authorized_systems("dev1");
  REQUIRE(systems != nullptr);
  CHECK(systems->count("cuc") == 1);
  CHECK(creds.authorized_systems("ghost") == nullptr);
}

TEST_CASE("radio attach verifies the challenge response") {
  SecurityPlane plane(store_with_dev1());
  const std::string challenge = attach_challenge(1, "se-1");

  SUBCASE("correct response passes") {
    const std::string response = attach_response(challenge, "topsecret");
    CHECK(plane.radio_attach_auth("se-1", challenge, response, false, 10) == AttachOutcome::Ok);
  }
  SUBCASE("wrong secret fails") {
    const std::string response = attach_response(challenge, "wrong");
    CHECK(plane.radio_attach_auth("se-1", challenge, response, false, 10) == AttachOutcome::Fail);
  }
  SUBCASE("unknown subscriber fails") {
    const std::string response = attach_response(challenge, "topsecret");
    CHECK(plane.radio_attach_auth("se-??", challenge, response, false, 10) ==
          AttachOutcome::Fail);
  }
  SUBCASE("injected rejection fails even with the right response") {
    const std::string response = attach_response(challenge, "topsecret");
    CHECK(plane.radio_attach_auth("se-1", challenge, response, true, 10) == AttachOutcome::Fail);
  }
  CHECK(plane.audit().records().size() == 1);
  CHECK(plane.audit().records()[0].action == "auth");
}

TEST_CASE("dte authorization grants the configured scope") {
  SecurityPlane plane(store_with_dev1());

  SUBCASE("valid signature in RadioAttached grants") {
    auto outcome =
        plane.authorize_dte("dev1", "sig-dev1", RegistrationState::RadioAttached, false, 5);
    auto* grant = std::get_if<AuthzGrant>(&outcome);
    REQUIRE(grant != nullptr);
    CHECK(grant->scope == std::set<std::string>{"config-server", "cuc"});
    CHECK(plane.audit().records().back().outcome == "authz_granted");
  }
  SUBCASE("wrong signature denies") {
    auto outcome =
        plane.authorize_dte("dev1", "forged", RegistrationState::RadioAttached, false, 5);
    auto* denial = std::get_if<AuthzDenial>(&outcome);
    REQUIRE(denial != nullptr);
    CHECK(denial->reason == "signature_mismatch");
  }
  SUBCASE("unknown device denies") {
    auto outcome =
        plane.authorize_dte("ghost", "sig", RegistrationState::RadioAttached, false, 5);
    CHECK(std::holds_alternative<AuthzDenial>(outcome));
  }
  SUBCASE("injected rejection denies") {
    auto outcome =
        plane.authorize_dte("dev1", "sig-dev1", RegistrationState::RadioAttached, true, 5);
    auto* denial = std::get_if<AuthzDenial>(&outcome);
    REQUIRE(denial != nullptr);
    CHECK(denial->reason == "fault_injected");
  }
}

TEST_CASE("authorization out of order is reported, not audited") {
  SecurityPlane plane(store_with_dev1());
  for (RegistrationState s :
       {RegistrationState::Unprovisioned, RegistrationState::Provisioned,
        RegistrationState::Authorized, RegistrationState::Configured,
        RegistrationState::Operational, RegistrationState::Rejected}) {
    auto outcome = plane.authorize_dte("dev1", "sig-dev1", s, false, 5);
    auto* violation = std::get_if<OrderViolation>(&outcome);
    REQUIRE(violation != nullptr);
    CHECK(violation->actual == s);
  }
  CHECK(plane.audit().records().empty());
}

TEST_CASE("audit chain digests link every record to its predecessor") {
  AuditLog log;
  log.append(10, "dev1", "auth", "radio_attach_ok");
  log.append(12, "dev1", "state", "RadioAttached");
  log.append(15, "dev1", "auth", "authz_granted");
  const auto& records = log.records();
  REQUIRE(records.size() == 3);
  CHECK(records[0].index == 0);
  CHECK(records[2].index == 2);

  // First digest chains from the empty string.
  CHECK(records[0].chain_digest == sha256_hex("" + AuditLog::canonical_bytes(records[0])));
  CHECK(records[1].chain_digest ==
        sha256_hex(records[0].chain_digest + AuditLog::canonical_bytes(records[1])));
  CHECK_FALSE(AuditLog::verify_chain(records).has_value());
}

TEST_CASE("audit verification pinpoints tampering") {
  AuditLog log;
  for (int i = 0; i < 5; ++i) {
    log.append(i, "actor", "action", "outcome" + std::to_string(i));
  }
  auto records = log.records();

  SUBCASE("clean chain verifies") {
    CHECK_FALSE(AuditLog::verify_chain(records).has_value());
  }
  SUBCASE("edited field breaks at the edit") {
    records[2].outcome = "outcomeX";
    auto bad = AuditLog::verify_chain(records);
    REQUIRE(bad.has_value());
    CHECK(*bad == 2);
  }
  SUBCASE("single byte flip in a digest breaks the chain there") {
    records[3].chain_digest[0] = records[3].chain_digest[0] == 'a' ? 'b' : 'a';
    auto bad = AuditLog::verify_chain(records);
    REQUIRE(bad.has_value());
    CHECK(*bad == 3);
  }
  SUBCASE("reindexing is detected") {
    records[1].index = 9;
    auto bad = AuditLog::verify_chain(records);
    REQUIRE(bad.has_value());
    CHECK(*bad == 1);
  }
  SUBCASE("truncation from the tail still verifies, removal inside does not") {
    auto truncated = records;
    truncated.pop_back();
    CHECK_FALSE(AuditLog::verify_chain(truncated).has_value());
    auto gutted = records;
    gutted.erase(gutted.begin() + 1);
    CHECK(AuditLog::verify_chain(gutted).has_value());
  }
}

TEST_CASE("audit records round-trip through json") {
  AuditLog log;
  log.append(42, "dev1", "admission", "admitted");
  const AuditRecord& r = log.records()[0];
  auto parsed = audit_record_from_json(to_json(r));
  REQUIRE(parsed.has_value());
  CHECK(parsed->index == r.index);
  CHECK(parsed->time == r.time);
  CHECK(parsed->actor == r.actor);
  CHECK(parsed->action == r.action);
  CHECK(parsed->outcome == r.outcome);
  CHECK(parsed->chain_digest == r.chain_digest);

  CHECK_FALSE(audit_record_from_json(nlohmann::json::array()).has_value());
  CHECK_FALSE(audit_record_from_json({{"index", "notanumber"}}).has_value());
}

TEST_CASE("byte flip anywhere in serialized records is caught") {
  AuditLog log;
  for (int i = 0; i < 3; ++i) log.append(i * 7, "a" + std::to_string(i), "act", "out");
  std::string blob;
  for (const auto& r : log.records()) blob += to_json(r).dump() + "\n";

  // Flip each byte in turn; reparse; the chain must break or the parse fail.
  int caught = 0;
  int mutations = 0;
  for (std::size_t i = 0; i < blob.size(); ++i) {
    std::string mutated = blob;
    mutated[i] = mutated[i] == 'x' ? 'y' : 'x';
    if (mutated == blob) continue;
    ++mutations;
    std::vector<AuditRecord> records;
    bool parse_ok = true;
    std::size_t start = 0;
    while (start < mutated.size()) {
      std::size_t end = mutated.find('\n', start);
      if (end == std::string::npos) end = mutated.size();
      const std::string line = mutated.substr(start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        parse_ok = false;
        break;
      }
      auto rec = audit_record_from_json(j);
      if (!rec) {
        parse_ok = false;
        break;
      }
      records.push_back(*rec);
    }
    if (!parse_ok || AuditLog::verify_chain(records).has_value()) ++caught;
  }
  CHECK(mutations > 0);
  CHECK(caught == mutations);
}
