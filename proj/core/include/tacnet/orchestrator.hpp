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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tacnet/registration.hpp"
#include "tacnet/routing.hpp"
#include "tacnet/scenario.hpp"
#include "tacnet/security.hpp"
#include "tacnet/sim.hpp"
#include "tacnet/timesync.hpp"
#include "tacnet/tsn.hpp"

namespace tacnet {

// What one domain promises to a provisioned use case: a latency share and a
// committed rate, backed by a concrete reservation (TSN stream or bearer).
struct DomainBudget {
  Domain domain = Domain::IndustrialEthernet;
  Micros latency_us = 0;
  BitsPerSecond throughput_bps = 0;
  std::string backing;
};

enum class ProvisionStatus { Active, Degraded, Withdrawn };

const char* to_string(ProvisionStatus s);

struct E2EProvision {
  std::string use_case;
  UseCaseGroup group = UseCaseGroup::None;
  ProvisionStatus status = ProvisionStatus::Active;
  Micros total_latency_us = 0;       // max over listeners of the budget chain sum
  Micros qos_max_latency_us = 0;
  BitsPerSecond committed_throughput_bps = 0;
  std::map<DeviceId, std::vector<DomainBudget>> budgets;  // per listener
  std::map<DeviceId, Micros> committed_latency_us;        // per listener chain sum
  std::vector<std::string> stream_ids;
  std::vector<std::string> bearer_ids;
  int violations = 0;
  bool retried = false;
  int generation = 1;
};

struct ProvisionFailure {
  // Which part failed and why, e.g. {"listener 'plc2'": "LatencyBudgetExceeded..."}
  std::map<std::string, std::string> reasons;
};

// The per-device view the manager keeps while the device registers.
struct Registrant {
  DeviceSpec spec;
  RegistrationState state = RegistrationState::Unprovisioned;
  std::set<std::string> scope;  // systems granted at authorization
  DeviceConfig config;
  bool has_config = false;
  int config_failures = 0;
  Micros provisioned_at_us = -1;
  Micros terminal_at_us = -1;
};

struct RegistrationOutcome {
  RegistrationState final_state = RegistrationState::Unprovisioned;
  Trace segment;  // trace records appended while the registration ran
};

// Control and management plane in one place: drives device registration over
// the network, provisions use cases across domains with per-domain budgets,
// replays data-plane frames against the committed bounds, and reacts to
// violations by re-provisioning once before withdrawing.
class MultiDomainManager {
 public:
  MultiDomainManager(Engine& engine, const Scenario& scenario);

  // Registers node handlers, loads credentials, emits the service heartbeat.
  // Call once before running.
  void initialize();

  // Queues operator provisioning for every device and provisioning for every
  // use case at their scenario times, plus the sync phase if enabled.
  void schedule_all();

  // Full registration sequence for one device: schedules provisioning at
  // `at`, runs the engine to the horizon, returns the final state with the
  // trace slice appended during the run.
  RegistrationOutcome register_device_e2e(const DeviceId& device, Micros at);

  // Splits each talker->listener path into domain segments, reserves a TSN
  // stream per TSN segment (one multicast stream when every path is pure
  // TSN), commits bearer capacity elsewhere, and checks the budget sum
  // against the profile. All-or-nothing: any failure rolls back everything
  // acquired for the use case.
  std::variant<E2EProvision, ProvisionFailure> provision_use_case(const UseCaseSpec& use_case);

  // One retry: Active -> Degraded -> re-provision (avoiding links down right
  // now) -> Active again or Withdrawn. Further violations withdraw; withdrawn
  // use cases ignore violations.
  void handle_violation(const std::string& use_case, const nlohmann::json& violation);

  // Metrics snapshot: per use case commitments and observations, per link
  // utilization, per device registration outcome, last sync residuals.
  nlohmann::json qos_report() const;

  const std::map<DeviceId, Registrant>& registrants() const { return registrants_; }
  const std::map<std::string, E2EProvision>& provisions() const { return provisions_; }
  const Cnc& cnc() const { return cnc_; }
  const Cuc& cuc() const { return cuc_; }
  SecurityPlane& security() { return security_; }
  const SecurityPlane& security() const { return security_; }
  ConfigServer& config_server() { return config_server_; }
  ClockTable& clocks() { return clocks_; }
  const LocalizationService& localization() const { return localization_; }
  const std::optional<SyncReport>& last_sync_report() const { return sync_report_; }

  // True when every expectation spelled out in the scenario holds (devices'
  // expect_final, use cases' expect_failure). Mismatches are listed.
  bool check_expectations(std::vector<std::string>& mismatches) const;

 private:
  struct HopPlan {
    LinkId link;
    bool gated = false;       // wait for the stream's gate window on this link
    Micros gate_offset_us = 0;
  };
  struct ListenerPlan {
    DeviceId listener;
    NodeId listener_node;
    std::vector<HopPlan> hops;
    Micros committed_us = 0;        // budget chain sum for this listener
    Micros planned_observed_us = 0; // deterministic transit incl. gate waits
  };
  struct ReplayPlan {
    std::string use_case;
    int generation = 1;
    Micros period_us = 0;
    std::int64_t frame_bytes = 0;
    Micros align_phase_us = 0;  // departure phase (mod period)
    std::vector<ListenerPlan> listeners;
  };
  struct ObservedStats {
    std::int64_t delivered = 0;
    Micros max_latency_us = 0;
    Micros last_latency_us = 0;
    std::int64_t lost = 0;
  };

  void on_node_event(const SimEvent& ev);
  void on_auth_request(const SimEvent& ev);
  void on_config_request(const SimEvent& ev);
  void on_cuc_request(const SimEvent& ev);
  void on_device_response(const SimEvent& ev);

  void schedule_provision(const DeviceId& device, Micros at);
  void apply_event(Registrant& r, const RegistrationEvent& ev);
  void perform_action(Registrant& r, RegAction action);
  void send_config_fetch(Registrant& r);
  void on_config_unavailable(Registrant& r);
  void reply_to_device(const NodeId& from, const Registrant& r, const std::string& tag,
                       nlohmann::json payload);
  bool send_control(const NodeId& from, const NodeId& to, const std::string& tag,
                    nlohmann::json payload);

  LinkFilter links_up_now() const;
  void schedule_sync_phase();
  void replay_hop(std::shared_ptr<ReplayPlan> plan, std::size_t listener_index,
                  std::size_t hop_index, int instance, Micros departed_at, NodeId at_node);
  void on_replay_arrival(const ReplayPlan& plan, const ListenerPlan& lp, int instance,
                         Micros departed_at);
  void on_replay_loss(const ReplayPlan& plan, const ListenerPlan& lp, int instance,
                      const std::string& reason);
  void release_backing(E2EProvision& prov);

  const UseCaseSpec* find_use_case(const std::string& name) const;

  Engine& engine_;
  const Scenario& scenario_;
  Router router_;
  SecurityPlane security_;
  ConfigServer config_server_;
  Cuc cuc_;
  Cnc cnc_;
  ClockTable clocks_;
  LocalizationService localization_;
  std::map<DeviceId, Registrant> registrants_;
  std::map<std::string, E2EProvision> provisions_;
  std::map<LinkId, BitsPerSecond> bearer_committed_bps_;
  std::map<std::string, std::vector<std::pair<LinkId, BitsPerSecond>>> bearers_;
  std::map<std::string, std::map<DeviceId, ObservedStats>> observed_;
  std::optional<SyncReport> sync_report_;
  // Use cases whose most recent provisioning attempt failed outright.
  std::set<std::string> failed_use_cases_;
  // Carry-over state for the single repair attempt after a violation.
  std::map<std::string, int> next_generation_;
  std::set<std::string> retried_;
  std::map<std::string, int> carried_violations_;
  bool initialized_ = false;
};

}  // namespace tacnet
