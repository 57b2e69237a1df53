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

#include "tacnet/registration.hpp"

namespace tacnet {

const char* registration_event_name(const RegistrationEvent& ev) {
  struct Visitor {
    const char* operator()(const EvOperatorProvision&) const { return "OperatorProvision"; }
    const char* operator()(const EvRadioAttachOk&) const { return "RadioAttachOk"; }
    const char* operator()(const EvRadioAttachFail&) const { return "RadioAttachFail"; }
    const char* operator()(const EvAuthzGranted&) const { return "AuthzGranted"; }
    const char* operator()(const EvAuthzDenied&) const { return "AuthzDenied"; }
    const char* operator()(const EvConfigDelivered&) const { return "ConfigDelivered"; }
    const char* operator()(const EvConfigUnavailable&) const { return "ConfigUnavailable"; }
    const char* operator()(const EvCucRegistered&) const { return "CucRegistered"; }
    const char* operator()(const EvCucRejected&) const { return "CucRejected"; }
    const char* operator()(const EvActivate&) const { return "Activate"; }
  };
  return std::visit(Visitor{}, ev);
}

const char* to_string(RegAction a) {
  switch (a) {
    case RegAction::PowerOn: return "PowerOn";
    case RegAction::RequestAuthorization: return "RequestAuthorization";
    case RegAction::FetchConfig: return "FetchConfig";
    case RegAction::RetryFetchConfig: return "RetryFetchConfig";
    case RegAction::RegisterAtCuc: return "RegisterAtCuc";
    case RegAction::AnnounceReady: return "AnnounceReady";
    case RegAction::Activate: return "Activate";
  }
  return "?";
}

Micros config_retry_backoff_us(int failures) {
  Micros b = kConfigBackoffBaseUs;
  for (int i = 1; i < failures; ++i) b *= 2;
  return b;
}

namespace {

using S = RegistrationState;

TransitionResult ok(S next, std::vector<RegAction> actions = {}) {
  return {true, next, std::move(actions)};
}

TransitionResult illegal(S state) { return {false, state, {}}; }

}  // namespace

TransitionResult transition(RegistrationState state, const RegistrationEvent& event,
                            const TransitionCaps& caps) {
  struct Visitor {
    S s;
    const TransitionCaps& caps;

    TransitionResult operator()(const EvOperatorProvision&) const {
      // Provisioning (re)starts the lifecycle; Rejected devices need exactly this.
      if (s == S::Unprovisioned || s == S::Rejected) return ok(S::Provisioned, {RegAction::PowerOn});
      return illegal(s);
    }
    TransitionResult operator()(const EvRadioAttachOk&) const {
      if (s == S::Provisioned) return ok(S::RadioAttached, {RegAction::RequestAuthorization});
      return illegal(s);
    }
    TransitionResult operator()(const EvRadioAttachFail&) const {
      if (s == S::Provisioned) return ok(S::Rejected);
      return illegal(s);
    }
    TransitionResult operator()(const EvAuthzGranted&) const {
      if (s == S::RadioAttached) return ok(S::Authorized, {RegAction::FetchConfig});
      return illegal(s);
    }
    TransitionResult operator()(const EvAuthzDenied&) const {
      if (s == S::RadioAttached) return ok(S::Rejected);
      return illegal(s);
    }
    TransitionResult operator()(const EvConfigDelivered&) const {
      if (s != S::Authorized) return illegal(s);
      if (caps.is_tsn_end_device) return ok(S::Configured, {RegAction::RegisterAtCuc});
      return ok(S::Configured, {RegAction::Activate});
    }
    TransitionResult operator()(const EvConfigUnavailable&) const {
      if (s != S::Authorized) return illegal(s);
      if (caps.config_retries_exhausted) return ok(S::Rejected);
      return ok(S::Authorized, {RegAction::RetryFetchConfig});
    }
    TransitionResult operator()(const EvCucRegistered&) const {
      if (s == S::Configured && caps.is_tsn_end_device)
        return ok(S::TsnRegistered, {RegAction::AnnounceReady, RegAction::Activate});
      return illegal(s);
    }
    TransitionResult operator()(const EvCucRejected&) const {
      if (s == S::Configured && caps.is_tsn_end_device) return ok(S::Rejected);
      return illegal(s);
    }
    TransitionResult operator()(const EvActivate&) const {
      if (s == S::Configured && !caps.is_tsn_end_device) return ok(S::Operational);
      if (s == S::TsnRegistered) return ok(S::Operational);
      return illegal(s);
    }
  };
  return std::visit(Visitor{state, caps}, event);
}

std::optional<StoreError> ConfigServer::store_config(const DeviceConfig& config,
                                                     RegistrationState device_state) {
  if (device_state != RegistrationState::Unprovisioned &&
      device_state != RegistrationState::Rejected) {
    return StoreError::ConfigLocked;
  }
  configs_[config.device_id] = config;
  return std::nullopt;
}

std::optional<DeviceConfig> ConfigServer::fetch_config(const DeviceId& device) const {
  auto it = configs_.find(device);
  if (it == configs_.end()) return std::nullopt;
  return it->second;
}

}  // namespace tacnet
