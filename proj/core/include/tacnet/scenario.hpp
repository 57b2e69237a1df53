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
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tacnet/model.hpp"
#include "tacnet/registration.hpp"
#include "tacnet/sim.hpp"
#include "tacnet/timesync.hpp"

namespace tacnet {

// One registrant: an industrial device (DTE) together with its communication
// front end (DCE), attached to a graph node.
struct DeviceSpec {
  DeviceId device_id;           // the DTE; also the composite registrant id
  DeviceId dce_id;              // defaults to "<device_id>.dce"
  NodeId node;
  std::string secure_element_id;
  std::string se_secret;                  // provisioned into the subscriber database
  std::string presented_se_secret;        // what the device actually uses (defaults to se_secret)
  std::string dte_signature;
  std::string presented_dte_signature;    // defaults to dte_signature
  std::set<std::string> authorized_systems;
  bool is_tsn_end_device = false;
  std::map<std::string, std::string> settings;
  std::optional<std::string> tsn_transmission_type;
  Micros provision_at_us = 0;
  std::optional<RegistrationState> expect_final;
  std::optional<Position> position;
};

struct UseCaseSpec {
  std::string name;
  UseCaseClass use_case_class = UseCaseClass::IndustrialApplication;
  UseCaseGroup group = UseCaseGroup::None;
  QoSProfile qos;  // resolved: group default overlaid with any explicit fields
  DeviceId talker;
  std::vector<DeviceId> listeners;
  Micros provision_at_us = 0;
  bool expect_failure = false;
};

struct ServicePlacement {
  NodeId config_server;
  NodeId auth_server;
  NodeId cuc;
  NodeId cnc;
};

struct SyncSpec {
  bool enabled = false;
  NodeId reference;
  int rounds = 1;
  Micros at_us = 0;
  Micros server_processing_us = 1;
};

// Latency each non-TSN domain commits to for one provisioned traversal.
struct DomainLatencyConstants {
  Micros five_g_us = 1'000;
  Micros sdn_us = 200;
  Micros industrial_ethernet_us = 500;

  Micros for_domain(Domain d) const {
    switch (d) {
      case Domain::FiveG: return five_g_us;
      case Domain::Sdn: return sdn_us;
      case Domain::IndustrialEthernet: return industrial_ethernet_us;
      case Domain::Tsn: return 0;  // TSN segments use their computed latency
    }
    return 0;
  }
};

struct Scenario {
  int format_version = 1;
  std::uint64_t seed = 0;
  Micros horizon_us = 0;
  NetworkGraph graph;
  ServicePlacement services;
  std::vector<DeviceSpec> devices;
  std::vector<UseCaseSpec> use_cases;
  std::vector<FaultSpec> faults;
  DomainLatencyConstants domain_latency;
  std::map<NodeId, Micros> clock_offsets_us;
  SyncSpec sync;
  int replay_instances = 3;
};

struct ScenarioError {
  std::string path;     // JSON-ish path, e.g. "links[0].endpoints[1]"
  std::string message;
};

// Parses and validates. Syntax errors come back as a single error whose path
// is the byte position; semantic errors are collected across the document,
// not cut short at the first one.
std::variant<Scenario, std::vector<ScenarioError>> parse_scenario(const std::string& text);

// Canonical JSON form; parse_scenario(serialize_scenario(s).dump()) returns a
// scenario that serializes to the same bytes.
nlohmann::json serialize_scenario(const Scenario& s);

std::string format_errors(const std::vector<ScenarioError>& errors);

}  // namespace tacnet
