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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace tacnet {

// All simulation time is integer microseconds on a single virtual clock.
using Micros = std::int64_t;
using BitsPerSecond = std::int64_t;
using NodeId = std::string;
using LinkId = std::string;
using DeviceId = std::string;

enum class Domain { FiveG, Tsn, Sdn, IndustrialEthernet };

enum class NodeKind { EndDevice, TsnBridge, SdnSwitch, BaseStation, CoreFunction, EdgeCloud };

// Lifecycle of a registrant (a DTE/DCE pair acting as one unit).
enum class RegistrationState {
  Unprovisioned,
  Provisioned,
  RadioAttached,
  Authorized,
  Configured,
  TsnRegistered,
  Operational,
  Rejected,
};

// Position on the happy path; Rejected maps to -1 (terminal failure, off the path).
int state_progress(RegistrationState s);
bool is_terminal(RegistrationState s);

const char* to_string(Domain d);
const char* to_string(NodeKind k);
const char* to_string(RegistrationState s);
std::optional<Domain> domain_from_string(const std::string& s);
std::optional<NodeKind> node_kind_from_string(const std::string& s);
std::optional<RegistrationState> registration_state_from_string(const std::string& s);

struct PeriodicTraffic {
  Micros period_us = 0;
  std::int64_t frame_bytes = 0;
  friend bool operator==(const PeriodicTraffic&, const PeriodicTraffic&) = default;
};

struct BurstyTraffic {
  BitsPerSecond mean_rate_bps = 0;
  friend bool operator==(const BurstyTraffic&, const BurstyTraffic&) = default;
};

using TrafficSpec = std::variant<PeriodicTraffic, BurstyTraffic>;

struct QoSProfile {
  Micros max_e2e_latency_us = 0;
  BitsPerSecond min_throughput_bps = 0;
  double reliability_target = 0.0;  // fraction of deliveries that must meet the bound, in [0,1]
  TrafficSpec traffic = PeriodicTraffic{};
  int priority = 0;  // 0 is most critical
  friend bool operator==(const QoSProfile&, const QoSProfile&) = default;
};

enum class UseCaseClass { IndustrialApplication, GeneralFunctionality };

// Application groups. None is only valid for GeneralFunctionality use cases,
// which carry an explicit QoS profile instead of a group default.
enum class UseCaseGroup { Monitoring, RemoteControl, LocalControl, MobileRobotics, None };

const char* to_string(UseCaseClass c);
const char* to_string(UseCaseGroup g);
std::optional<UseCaseClass> use_case_class_from_string(const std::string& s);
std::optional<UseCaseGroup> use_case_group_from_string(const std::string& s);

// Default profile for an application group. The numbers are the documented
// contract (see README table); Local Control is the URLLC-style class and its
// latency bound stays under the 5 ms end-to-end target.
QoSProfile derive_qos_profile(UseCaseGroup group);

struct UseCase {
  std::string name;
  UseCaseClass use_case_class = UseCaseClass::IndustrialApplication;
  UseCaseGroup group = UseCaseGroup::None;
  QoSProfile qos;
  DeviceId talker;
  std::vector<DeviceId> listeners;
};

enum class DeviceRole { Dte, Dce };

const char* to_string(DeviceRole r);

struct DeviceRecord {
  DeviceId device_id;
  DeviceRole role = DeviceRole::Dte;
  DeviceId paired_with;  // the other half of the DTE/DCE pair
  std::string secure_element_id;  // DCE only
  std::string dte_signature;      // DTE only
  bool is_tsn_end_device = false;
  RegistrationState state = RegistrationState::Unprovisioned;
};

struct NetworkNode {
  NodeId id;
  NodeKind kind = NodeKind::EndDevice;
  Domain domain = Domain::IndustrialEthernet;
};

struct NetworkLink {
  LinkId id;
  std::array<NodeId, 2> endpoints;
  BitsPerSecond capacity_bps = 0;
  Micros propagation_us = 0;
  Domain domain = Domain::IndustrialEthernet;
  bool secure = true;  // control-plane traffic only crosses links with this set
};

class NetworkGraph {
 public:
  void add_node(NetworkNode node);
  void add_link(NetworkLink link);

  const NetworkNode* node(const NodeId& id) const;
  const NetworkLink* link(const LinkId& id) const;
  const std::map<NodeId, NetworkNode>& nodes() const { return nodes_; }
  const std::map<LinkId, NetworkLink>& links() const { return links_; }

  // Links touching a node, in ascending link id order. Empty for unknown nodes.
  const std::vector<LinkId>& links_at(const NodeId& id) const;

  // The far end of a link as seen from `from`; empty if `from` is not an endpoint.
  NodeId other_end(const NetworkLink& link, const NodeId& from) const;

 private:
  std::map<NodeId, NetworkNode> nodes_;
  std::map<LinkId, NetworkLink> links_;
  std::map<NodeId, std::vector<LinkId>> adjacency_;
};

struct GraphViolation {
  std::string subject;  // offending link or node id
  std::string message;
  int endpoint = -1;  // 0 or 1 when a specific link endpoint is at fault
  friend bool operator==(const GraphViolation&, const GraphViolation&) = default;
};

// Every structural violation in the graph: endpoints referencing missing
// nodes, non-positive capacities, negative propagation delays, links with
// identical endpoints. Empty result means the graph is well formed.
std::vector<GraphViolation> validate_graph(const NetworkGraph& graph);

// Transmission time of a frame on a link, rounded up to whole microseconds.
Micros transmission_time_us(std::int64_t frame_bits, BitsPerSecond capacity_bps);

}  // namespace tacnet
