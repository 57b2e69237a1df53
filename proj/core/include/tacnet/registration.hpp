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
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tacnet/model.hpp"

namespace tacnet {

struct DeviceConfig {
  DeviceId device_id;
  std::map<std::string, std::string> settings;
  std::set<std::string> authorized_systems;
  std::optional<std::string> tsn_transmission_type;  // present for TSN end devices
  friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

// Inputs driving the registration lifecycle of one DTE/DCE pair.
struct EvOperatorProvision { DeviceConfig config; };
struct EvRadioAttachOk {};
struct EvRadioAttachFail { std::string reason; };
struct EvAuthzGranted { std::set<std::string> scope; };
struct EvAuthzDenied { std::string reason; };
struct EvConfigDelivered { DeviceConfig config; };
struct EvConfigUnavailable {};
struct EvCucRegistered { std::string transmission_type; };
struct EvCucRejected { std::string reason; };
// Internal zero-delay step that completes registration once nothing is left
// to do (non-TSN devices after Configured, TSN devices after TsnRegistered).
struct EvActivate {};

using RegistrationEvent =
    std::variant<EvOperatorProvision, EvRadioAttachOk, EvRadioAttachFail, EvAuthzGranted,
                 EvAuthzDenied, EvConfigDelivered, EvConfigUnavailable, EvCucRegistered,
                 EvCucRejected, EvActivate>;

const char* registration_event_name(const RegistrationEvent& ev);

// Follow-up work the driver performs after a legal transition.
enum class RegAction {
  PowerOn,               // bring up the DCE and send the radio attach request
  RequestAuthorization,  // DTE signature authorization
  FetchConfig,
  RetryFetchConfig,      // re-fetch after backoff
  RegisterAtCuc,
  AnnounceReady,
  Activate,              // feed EvActivate back in at the same virtual time
};

const char* to_string(RegAction a);

// Per-device facts the transition relation depends on.
struct TransitionCaps {
  bool is_tsn_end_device = false;
  bool config_retries_exhausted = false;
};

struct TransitionResult {
  bool legal = false;
  RegistrationState next = RegistrationState::Unprovisioned;
  std::vector<RegAction> actions;
};

// Pure and total: every (state, event) pair yields either the successor state
// with follow-up actions or legal == false with next == the input state.
TransitionResult transition(RegistrationState state, const RegistrationEvent& event,
                            const TransitionCaps& caps);

// Retry schedule for configuration fetches: first retry after 1000 us, then
// doubling. `failures` counts fetch attempts that have failed so far.
constexpr int kMaxConfigAttempts = 5;
constexpr Micros kConfigBackoffBaseUs = 1'000;
Micros config_retry_backoff_us(int failures);

// Operator-facing configuration store. Configurations may only be written
// while the target device has not started registering (or was rejected and
// awaits re-provisioning); they are immutable in between.
enum class StoreError { ConfigLocked };

class ConfigServer {
 public:
  std::optional<StoreError> store_config(const DeviceConfig& config,
                                         RegistrationState device_state);
  std::optional<DeviceConfig> fetch_config(const DeviceId& device) const;

  const std::map<DeviceId, DeviceConfig>& configs() const { return configs_; }

 private:
  std::map<DeviceId, DeviceConfig> configs_;
};

}  // namespace tacnet
