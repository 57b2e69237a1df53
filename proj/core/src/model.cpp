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

#include "tacnet/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace tacnet {

int state_progress(RegistrationState s) {
  switch (s) {
    case RegistrationState::Unprovisioned: return 0;
    case RegistrationState::Provisioned: return 1;
    case RegistrationState::RadioAttached: return 2;
    case RegistrationState::Authorized: return 3;
    case RegistrationState::Configured: return 4;
    case RegistrationState::TsnRegistered: return 5;
    case RegistrationState::Operational: return 6;
    case RegistrationState::Rejected: return -1;
  }
  return -1;
}

bool is_terminal(RegistrationState s) {
  return s == RegistrationState::Operational || s == RegistrationState::Rejected;
}

const char* to_string(Domain d) {
  switch (d) {
    case Domain::FiveG: return "FiveG";
    case Domain::Tsn: return "TSN";
    case Domain::Sdn: return "SDN";
    case Domain::IndustrialEthernet: return "IndustrialEthernet";
  }
  return "?";
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::EndDevice: return "EndDevice";
    case NodeKind::TsnBridge: return "TsnBridge";
    case NodeKind::SdnSwitch: return "SdnSwitch";
    case NodeKind::BaseStation: return "BaseStation";
    case NodeKind::CoreFunction: return "CoreFunction";
    case NodeKind::EdgeCloud: return "EdgeCloud";
  }
  return "?";
}

const char* to_string(RegistrationState s) {
  switch (s) {
    case RegistrationState::Unprovisioned: return "Unprovisioned";
    case RegistrationState::Provisioned: return "Provisioned";
    case RegistrationState::RadioAttached: return "RadioAttached";
    case RegistrationState::Authorized: return "Authorized";
    case RegistrationState::Configured: return "Configured";
    case RegistrationState::TsnRegistered: return "TsnRegistered";
    case RegistrationState::Operational: return "Operational";
    case RegistrationState::Rejected: return "Rejected";
  }
  return "?";
}

const char* to_string(UseCaseClass c) {
  switch (c) {
    case UseCaseClass::IndustrialApplication: return "IndustrialApplication";
    case UseCaseClass::GeneralFunctionality: return "GeneralFunctionality";
  }
  return "?";
}

const char* to_string(UseCaseGroup g) {
  switch (g) {
    case UseCaseGroup::Monitoring: return "Monitoring";
    case UseCaseGroup::RemoteControl: return "RemoteControl";
    case UseCaseGroup::LocalControl: return "LocalControl";
    case UseCaseGroup::MobileRobotics: return "MobileRobotics";
    case UseCaseGroup::None: return "None";
  }
  return "?";
}

const char* to_string(DeviceRole r) {
  return r == DeviceRole::Dte ? "DTE" : "DCE";
}

namespace {

template <typename E>
std::optional<E> lookup(const std::string& s, std::initializer_list<E> values) {
  for (E v : values) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Domain> domain_from_string(const std::string& s) {
  return lookup(s, {Domain::FiveG, Domain::Tsn, Domain::Sdn, Domain::IndustrialEthernet});
}

std::optional<NodeKind> node_kind_from_string(const std::string& s) {
  return lookup(s, {NodeKind::EndDevice, NodeKind::TsnBridge, NodeKind::SdnSwitch,
                    NodeKind::BaseStation, NodeKind::CoreFunction, NodeKind::EdgeCloud});
}

std::optional<RegistrationState> registration_state_from_string(const std::string& s) {
  return lookup(s, {RegistrationState::Unprovisioned, RegistrationState::Provisioned,
                    RegistrationState::RadioAttached, RegistrationState::Authorized,
                    RegistrationState::Configured, RegistrationState::TsnRegistered,
                    RegistrationState::Operational, RegistrationState::Rejected});
}

std::optional<UseCaseClass> use_case_class_from_string(const std::string& s) {
  return lookup(s, {UseCaseClass::IndustrialApplication, UseCaseClass::GeneralFunctionality});
}

std::optional<UseCaseGroup> use_case_group_from_string(const std::string& s) {
  return lookup(s, {UseCaseGroup::Monitoring, UseCaseGroup::RemoteControl,
                    UseCaseGroup::LocalControl, UseCaseGroup::MobileRobotics,
                    UseCaseGroup::None});
}

QoSProfile derive_qos_profile(UseCaseGroup group) {
  switch (group) {
    case UseCaseGroup::LocalControl:
      // Closed-loop control: tightest latency, small periodic frames.
      return {5'000, 1'000'000, 0.99999, PeriodicTraffic{1'000, 125}, 0};
    case UseCaseGroup::MobileRobotics:
      return {10'000, 2'000'000, 0.9999, PeriodicTraffic{2'000, 500}, 1};
    case UseCaseGroup::RemoteControl:
      // Operator-in-the-loop: video/haptics burst upstream.
      return {20'000, 10'000'000, 0.999, BurstyTraffic{10'000'000}, 2};
    case UseCaseGroup::Monitoring:
      return {100'000, 10'000, 0.99, PeriodicTraffic{100'000, 125}, 3};
    case UseCaseGroup::None:
      break;
  }
  throw std::invalid_argument("derive_qos_profile: no default profile for group None");
}

void NetworkGraph::add_node(NetworkNode node) {
  NodeId id = node.id;
  nodes_[id] = std::move(node);
  adjacency_.try_emplace(id);
}

void NetworkGraph::add_link(NetworkLink link) {
  LinkId id = link.id;
  for (const NodeId& ep : link.endpoints) {
    auto& adj = adjacency_[ep];
    auto it = std::lower_bound(adj.begin(), adj.end(), id);
    if (it == adj.end() || *it != id) adj.insert(it, id);
  }
  links_[id] = std::move(link);
}

const NetworkNode* NetworkGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const NetworkLink* NetworkGraph::link(const LinkId& id) const {
  auto it = links_.find(id);
  return it == links_.end() ? nullptr : &it->second;
}

const std::vector<LinkId>& NetworkGraph::links_at(const NodeId& id) const {
  static const std::vector<LinkId> empty;
  auto it = adjacency_.find(id);
  return it == adjacency_.end() ? empty : it->second;
}

NodeId NetworkGraph::other_end(const NetworkLink& link, const NodeId& from) const {
  if (link.endpoints[0] == from) return link.endpoints[1];
  if (link.endpoints[1] == from) return link.endpoints[0];
  return {};
}

std::vector<GraphViolation> validate_graph(const NetworkGraph& graph) {
  std::vector<GraphViolation> out;
  for (const auto& [id, link] : graph.links()) {
    for (int ep = 0; ep < 2; ++ep) {
      const NodeId& node = link.endpoints[static_cast<std::size_t>(ep)];
      if (!graph.node(node)) {
        out.push_back({id, "link '" + id + "' references missing node '" + node + "'", ep});
      }
    }
    if (link.endpoints[0] == link.endpoints[1]) {
      out.push_back(
          {id, "link '" + id + "' connects node '" + link.endpoints[0] + "' to itself", -1});
    }
    if (link.capacity_bps <= 0) {
      out.push_back({id, "link '" + id + "' has non-positive capacity " +
                             std::to_string(link.capacity_bps),
                     -1});
    }
    if (link.propagation_us < 0) {
      out.push_back({id, "link '" + id + "' has negative propagation delay " +
                             std::to_string(link.propagation_us),
                     -1});
    }
  }
  return out;
}

Micros transmission_time_us(std::int64_t frame_bits, BitsPerSecond capacity_bps) {
  if (frame_bits <= 0) return 0;
  if (capacity_bps <= 0) throw std::invalid_argument("transmission_time_us: capacity must be positive");
  unsigned __int128 numer = static_cast<unsigned __int128>(frame_bits) * 1'000'000u;
  unsigned __int128 cap = static_cast<unsigned __int128>(capacity_bps);
  return static_cast<Micros>((numer + cap - 1) / cap);
}

}  // namespace tacnet
