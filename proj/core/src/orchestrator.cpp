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

#include "tacnet/orchestrator.hpp"

#include <algorithm>

namespace tacnet {

namespace {

using json = nlohmann::json;

Micros floor_mod(Micros a, Micros m) {
  Micros r = a % m;
  return r < 0 ? r + m : r;
}

CredentialStore build_credentials(const Scenario& s) {
  CredentialStore creds;
  for (const DeviceSpec& d : s.devices) {
    creds.provision_secure_element(d.secure_element_id, d.se_secret);
    creds.provision_device(d.device_id, d.dte_signature, d.authorized_systems);
  }
  return creds;
}

json scope_to_json(const std::set<std::string>& scope) {
  json arr = json::array();
  for (const auto& s : scope) arr.push_back(s);
  return arr;
}

json config_to_json(const DeviceConfig& c) {
  json j{{"device_id", c.device_id},
         {"settings", c.settings},
         {"authorized_systems", scope_to_json(c.authorized_systems)}};
  if (c.tsn_transmission_type) j["tsn_transmission_type"] = *c.tsn_transmission_type;
  return j;
}

DeviceConfig config_from_json(const json& j) {
  DeviceConfig c;
  c.device_id = j.value("device_id", std::string());
  if (j.contains("settings") && j["settings"].is_object()) {
    for (auto it = j["settings"].begin(); it != j["settings"].end(); ++it) {
      if (it.value().is_string()) c.settings[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("authorized_systems") && j["authorized_systems"].is_array()) {
    for (const auto& e : j["authorized_systems"]) {
      if (e.is_string()) c.authorized_systems.insert(e.get<std::string>());
    }
  }
  if (j.contains("tsn_transmission_type") && j["tsn_transmission_type"].is_string()) {
    c.tsn_transmission_type = j["tsn_transmission_type"].get<std::string>();
  }
  return c;
}

// Probe shape for use cases without periodic traffic.
constexpr Micros kProbePeriodUs = 10'000;
constexpr std::int64_t kProbeFrameBytes = 125;

}  // namespace

const char* to_string(ProvisionStatus s) {
  switch (s) {
    case ProvisionStatus::Active: return "Active";
    case ProvisionStatus::Degraded: return "Degraded";
    case ProvisionStatus::Withdrawn: return "Withdrawn";
  }
  return "?";
}

MultiDomainManager::MultiDomainManager(Engine& engine, const Scenario& scenario)
    : engine_(engine),
      scenario_(scenario),
      router_(&scenario.graph),
      security_(build_credentials(scenario)),
      cnc_(&scenario.graph) {
  for (const DeviceSpec& d : scenario_.devices) {
    Registrant r;
    r.spec = d;
    registrants_.emplace(d.device_id, std::move(r));
    if (d.position) localization_.set_position(d.node, *d.position);
  }
  for (const auto& [node, offset] : scenario_.clock_offsets_us) {
    clocks_.set_true_offset(node, offset);
  }
}

void MultiDomainManager::initialize() {
  if (initialized_) return;
  initialized_ = true;
  for (const auto& [id, node] : scenario_.graph.nodes()) {
    engine_.set_handler(id, [this](const SimEvent& ev) { on_node_event(ev); });
  }
  spectrum_heartbeat(engine_);
}

void MultiDomainManager::schedule_all() {
  initialize();
  for (const DeviceSpec& d : scenario_.devices) {
    schedule_provision(d.device_id, d.provision_at_us);
  }
  for (const UseCaseSpec& u : scenario_.use_cases) {
    engine_.schedule_callback(u.provision_at_us, [this, name = u.name]() {
      const UseCaseSpec* spec = find_use_case(name);
      if (spec) provision_use_case(*spec);
    });
  }
  if (scenario_.sync.enabled) schedule_sync_phase();
}

void MultiDomainManager::schedule_provision(const DeviceId& device, Micros at) {
  engine_.schedule_callback(at, [this, device]() {
    auto it = registrants_.find(device);
    if (it == registrants_.end()) return;
    Registrant& r = it->second;
    engine_.mark("operator_provision", {{"device", device}, {"node", r.spec.node}});
    DeviceConfig cfg;
    cfg.device_id = device;
    cfg.settings = r.spec.settings;
    cfg.authorized_systems = r.spec.authorized_systems;
    cfg.tsn_transmission_type = r.spec.tsn_transmission_type;
    if (config_server_.store_config(cfg, r.state)) {
      engine_.record_error("config_locked",
                           {{"device", device}, {"state", to_string(r.state)}});
    }
    const RegistrationState before = r.state;
    apply_event(r, EvOperatorProvision{cfg});
    if (r.state == RegistrationState::Provisioned && before != r.state) {
      r.provisioned_at_us = engine_.now();
      r.terminal_at_us = -1;
      r.config_failures = 0;
      r.scope.clear();
      r.has_config = false;
    }
  });
}

RegistrationOutcome MultiDomainManager::register_device_e2e(const DeviceId& device, Micros at) {
  initialize();
  const std::size_t start = engine_.trace().size();
  schedule_provision(device, at);
  engine_.run_until(scenario_.horizon_us);
  RegistrationOutcome out;
  auto it = registrants_.find(device);
  out.final_state = it == registrants_.end() ? RegistrationState::Unprovisioned : it->second.state;
  const Trace& full = engine_.trace();
  out.segment.assign(full.begin() + static_cast<std::ptrdiff_t>(start), full.end());
  return out;
}

void MultiDomainManager::apply_event(Registrant& r, const RegistrationEvent& ev) {
  TransitionCaps caps;
  caps.is_tsn_end_device = r.spec.is_tsn_end_device;
  caps.config_retries_exhausted = r.config_failures >= kMaxConfigAttempts;
  TransitionResult res = transition(r.state, ev, caps);
  if (!res.legal) {
    engine_.record_error("illegal_transition", {{"device", r.spec.device_id},
                                                {"event", registration_event_name(ev)},
                                                {"state", to_string(r.state)}});
    return;
  }
  if (res.next != r.state) {
    engine_.record_state(r.spec.device_id, r.state, res.next);
    security_.audit().append(engine_.now(), r.spec.device_id, "state", to_string(res.next));
    r.state = res.next;
    if (is_terminal(r.state)) r.terminal_at_us = engine_.now();
  }
  for (RegAction a : res.actions) perform_action(r, a);
}

bool MultiDomainManager::send_control(const NodeId& from, const NodeId& to,
                                      const std::string& tag, json payload) {
  auto secure = [](const NetworkLink& l) { return l.secure; };
  auto path = router_.route(from, to, secure);
  if (!path) {
    engine_.record_error("no_secure_path", {{"src", from}, {"dst", to}, {"payload_tag", tag}});
    return false;
  }
  Message msg;
  msg.src = from;
  msg.dst = to;
  msg.payload_tag = tag;
  msg.payload = std::move(payload);
  DeliverOutcome out = engine_.deliver(std::move(msg), *path);
  return std::holds_alternative<Micros>(out);
}

void MultiDomainManager::reply_to_device(const NodeId& from, const Registrant& r,
                                         const std::string& tag, json payload) {
  payload["device"] = r.spec.device_id;
  send_control(from, r.spec.node, tag, std::move(payload));
}

void MultiDomainManager::perform_action(Registrant& r, RegAction action) {
  const DeviceId& device = r.spec.device_id;
  switch (action) {
    case RegAction::PowerOn: {
      engine_.mark("dce_power_on", {{"device", device}, {"dce", r.spec.dce_id}});
      engine_.mark("dte_power_on", {{"device", device}});
      const std::string challenge = attach_challenge(engine_.seed(), r.spec.secure_element_id);
      send_control(r.spec.node, scenario_.services.auth_server, "radio_attach_req",
                   {{"device", device},
                    {"secure_element_id", r.spec.secure_element_id},
                    {"response", attach_response(challenge, r.spec.presented_se_secret)}});
      break;
    }
    case RegAction::RequestAuthorization:
      send_control(r.spec.node, scenario_.services.auth_server, "authz_req",
                   {{"device", device}, {"signature", r.spec.presented_dte_signature}});
      break;
    case RegAction::FetchConfig:
      send_config_fetch(r);
      break;
    case RegAction::RetryFetchConfig: {
      const Micros backoff = config_retry_backoff_us(r.config_failures);
      const Micros at = engine_.now() + backoff;
      engine_.mark("config_retry", {{"device", device},
                                    {"failures", r.config_failures},
                                    {"next_attempt_at_us", at}});
      engine_.schedule_callback(at, [this, device]() {
        auto it = registrants_.find(device);
        if (it != registrants_.end() && it->second.state == RegistrationState::Authorized) {
          send_config_fetch(it->second);
        }
      });
      break;
    }
    case RegAction::RegisterAtCuc:
      if (!r.scope.count(kCucScope)) {
        engine_.mark("scope_blocked", {{"device", device}, {"system", kCucScope}});
        apply_event(r, EvCucRejected{"scope_missing"});
      } else {
        std::string type = r.config.tsn_transmission_type.value_or(
            r.spec.tsn_transmission_type.value_or(""));
        send_control(r.spec.node, scenario_.services.cuc, "cuc_register_req",
                     {{"device", device}, {"transmission_type", type}});
      }
      break;
    case RegAction::AnnounceReady:
      send_control(r.spec.node, scenario_.services.cuc, "tsn_ready", {{"device", device}});
      break;
    case RegAction::Activate:
      apply_event(r, EvActivate{});
      break;
  }
}

void MultiDomainManager::send_config_fetch(Registrant& r) {
  if (!r.scope.count(kConfigScope)) {
    engine_.mark("scope_blocked", {{"device", r.spec.device_id}, {"system", kConfigScope}});
    on_config_unavailable(r);
    return;
  }
  send_control(r.spec.node, scenario_.services.config_server, "config_fetch_req",
               {{"device", r.spec.device_id}});
}

void MultiDomainManager::on_config_unavailable(Registrant& r) {
  ++r.config_failures;
  apply_event(r, EvConfigUnavailable{});
}

void MultiDomainManager::on_node_event(const SimEvent& ev) {
  const std::string& tag = ev.msg.payload_tag;
  const NodeId& here = ev.msg.dst;
  if (here == scenario_.services.auth_server &&
      (tag == "radio_attach_req" || tag == "authz_req")) {
    on_auth_request(ev);
    return;
  }
  if (here == scenario_.services.config_server && tag == "config_fetch_req") {
    on_config_request(ev);
    return;
  }
  if (here == scenario_.services.cuc && (tag == "cuc_register_req" || tag == "tsn_ready")) {
    on_cuc_request(ev);
    return;
  }
  if (tag == "radio_attach_resp" || tag == "authz_resp" || tag == "config_resp" ||
      tag == "cuc_resp") {
    on_device_response(ev);
    return;
  }
  // Data-plane frames and sync messages need no handling here; their trace
  // records are the observable effect.
}

void MultiDomainManager::on_auth_request(const SimEvent& ev) {
  const json& p = ev.msg.payload;
  const DeviceId device = p.value("device", std::string());
  auto it = registrants_.find(device);
  if (it == registrants_.end()) {
    engine_.record_error("unknown_device", {{"device", device}, {"payload_tag", ev.msg.payload_tag}});
    return;
  }
  Registrant& r = it->second;
  const bool fault = engine_.auth_reject_active(device);
  if (ev.msg.payload_tag == "radio_attach_req") {
    const std::string se_id = p.value("secure_element_id", std::string());
    const std::string response = p.value("response", std::string());
    const std::string challenge = attach_challenge(engine_.seed(), se_id);
    AttachOutcome out =
        security_.radio_attach_auth(se_id, challenge, response, fault, engine_.now());
    reply_to_device(ev.msg.dst, r, "radio_attach_resp", {{"ok", out == AttachOutcome::Ok}});
  } else {
    const std::string signature = p.value("signature", std::string());
    AuthzOutcome out = security_.authorize_dte(device, signature, r.state, fault, engine_.now());
    if (auto* grant = std::get_if<AuthzGrant>(&out)) {
      reply_to_device(ev.msg.dst, r, "authz_resp",
                      {{"granted", true}, {"scope", scope_to_json(grant->scope)}});
    } else if (auto* denial = std::get_if<AuthzDenial>(&out)) {
      reply_to_device(ev.msg.dst, r, "authz_resp",
                      {{"granted", false}, {"reason", denial->reason}});
    } else {
      engine_.record_error("order_violation", {{"device", device},
                                               {"op", "authorize_dte"},
                                               {"state", to_string(r.state)}});
    }
  }
}

void MultiDomainManager::on_config_request(const SimEvent& ev) {
  const DeviceId device = ev.msg.payload.value("device", std::string());
  auto it = registrants_.find(device);
  if (it == registrants_.end()) {
    engine_.record_error("unknown_device", {{"device", device}, {"payload_tag", "config_fetch_req"}});
    return;
  }
  Registrant& r = it->second;
  if (engine_.config_unavailable_at(engine_.now())) {
    reply_to_device(ev.msg.dst, r, "config_resp", {{"ok", false}, {"reason", "unavailable"}});
    return;
  }
  if (!r.scope.count(kConfigScope)) {
    reply_to_device(ev.msg.dst, r, "config_resp", {{"ok", false}, {"reason", "scope"}});
    return;
  }
  auto cfg = config_server_.fetch_config(device);
  if (!cfg) {
    reply_to_device(ev.msg.dst, r, "config_resp", {{"ok", false}, {"reason", "no_config"}});
    return;
  }
  reply_to_device(ev.msg.dst, r, "config_resp", {{"ok", true}, {"config", config_to_json(*cfg)}});
}

void MultiDomainManager::on_cuc_request(const SimEvent& ev) {
  if (ev.msg.payload_tag == "tsn_ready") return;  // announcement only
  const DeviceId device = ev.msg.payload.value("device", std::string());
  auto it = registrants_.find(device);
  if (it == registrants_.end()) {
    engine_.record_error("unknown_device", {{"device", device}, {"payload_tag", "cuc_register_req"}});
    return;
  }
  Registrant& r = it->second;
  const std::string type = ev.msg.payload.value("transmission_type", std::string());
  bool reachable = scenario_.services.cuc == scenario_.services.cnc;
  if (!reachable) {
    auto up = links_up_now();
    auto filter = [up](const NetworkLink& l) { return l.secure && up(l); };
    reachable = router_.route(scenario_.services.cuc, scenario_.services.cnc, filter).has_value();
  }
  Cuc::Result result =
      cuc_.register_device(device, type, r.state, r.scope.count(kCucScope) > 0, reachable);
  if (auto* reg = std::get_if<Cuc::Registered>(&result)) {
    security_.audit().append(engine_.now(), device, "cuc", "cuc_registered");
    reply_to_device(ev.msg.dst, r, "cuc_resp",
                    {{"ok", true}, {"transmission_type", reg->transmission_type}});
  } else if (auto* rej = std::get_if<Cuc::Rejected>(&result)) {
    security_.audit().append(engine_.now(), device, "cuc", "cuc_rejected:" + rej->reason);
    reply_to_device(ev.msg.dst, r, "cuc_resp", {{"ok", false}, {"reason", rej->reason}});
  } else {
    engine_.record_error("order_violation", {{"device", device},
                                             {"op", "cuc_register"},
                                             {"state", to_string(r.state)}});
  }
}

void MultiDomainManager::on_device_response(const SimEvent& ev) {
  const json& p = ev.msg.payload;
  const DeviceId device = p.value("device", std::string());
  auto it = registrants_.find(device);
  if (it == registrants_.end()) {
    engine_.record_error("unknown_device", {{"device", device}, {"payload_tag", ev.msg.payload_tag}});
    return;
  }
  Registrant& r = it->second;
  const std::string& tag = ev.msg.payload_tag;
  if (tag == "radio_attach_resp") {
    if (p.value("ok", false)) {
      apply_event(r, EvRadioAttachOk{});
    } else {
      apply_event(r, EvRadioAttachFail{p.value("reason", std::string())});
    }
  } else if (tag == "authz_resp") {
    if (p.value("granted", false)) {
      std::set<std::string> scope;
      if (p.contains("scope") && p["scope"].is_array()) {
        for (const auto& s : p["scope"]) {
          if (s.is_string()) scope.insert(s.get<std::string>());
        }
      }
      r.scope = scope;
      apply_event(r, EvAuthzGranted{std::move(scope)});
    } else {
      apply_event(r, EvAuthzDenied{p.value("reason", std::string())});
    }
  } else if (tag == "config_resp") {
    if (p.value("ok", false)) {
      r.config = config_from_json(p.value("config", json::object()));
      r.has_config = true;
      apply_event(r, EvConfigDelivered{r.config});
    } else {
      on_config_unavailable(r);
    }
  } else if (tag == "cuc_resp") {
    if (p.value("ok", false)) {
      apply_event(r, EvCucRegistered{p.value("transmission_type", std::string())});
    } else {
      apply_event(r, EvCucRejected{p.value("reason", std::string())});
    }
  }
}

LinkFilter MultiDomainManager::links_up_now() const {
  const Micros now = engine_.now();
  Engine* engine = &engine_;
  return [engine, now](const NetworkLink& l) { return !engine->link_down_at(l.id, now); };
}

const UseCaseSpec* MultiDomainManager::find_use_case(const std::string& name) const {
  for (const UseCaseSpec& u : scenario_.use_cases) {
    if (u.name == name) return &u;
  }
  return nullptr;
}

std::variant<E2EProvision, ProvisionFailure> MultiDomainManager::provision_use_case(
    const UseCaseSpec& u) {
  initialize();
  ProvisionFailure failure;
  auto fail = [&](const std::string& where, const std::string& why)
      -> std::variant<E2EProvision, ProvisionFailure> {
    failure.reasons[where] = why;
    json reasons = json::object();
    for (const auto& [w, r] : failure.reasons) reasons[w] = r;
    engine_.mark("provision_failed", {{"use_case", u.name}, {"reasons", reasons}});
    if (!provisions_.count(u.name)) failed_use_cases_.insert(u.name);
    return failure;
  };

  if (provisions_.count(u.name)) {
    return fail("use_case", "already provisioned");
  }

  auto talker_it = registrants_.find(u.talker);
  if (talker_it == registrants_.end()) return fail("talker", "unknown device");
  const Registrant& talker = talker_it->second;
  if (talker.state != RegistrationState::Operational) {
    return fail("talker '" + u.talker + "'", "not Operational");
  }
  std::vector<const Registrant*> listeners;
  for (const DeviceId& id : u.listeners) {
    auto lit = registrants_.find(id);
    if (lit == registrants_.end()) return fail("listener '" + id + "'", "unknown device");
    if (lit->second.state != RegistrationState::Operational) {
      return fail("listener '" + id + "'", "not Operational");
    }
    listeners.push_back(&lit->second);
  }

  const auto* periodic = std::get_if<PeriodicTraffic>(&u.qos.traffic);
  const Micros period = periodic ? periodic->period_us : kProbePeriodUs;
  const std::int64_t frame_bytes = periodic ? periodic->frame_bytes : kProbeFrameBytes;
  const BitsPerSecond commit_bps = u.qos.min_throughput_bps;

  auto up = links_up_now();
  auto tsn_up = [up](const NetworkLink& l) { return l.domain == Domain::Tsn && up(l); };

  // Global paths and their domain segmentation, one per listener.
  struct Segment {
    Domain domain;
    std::vector<LinkId> links;
    NodeId entry;
    NodeId exit;
  };
  std::map<DeviceId, std::vector<Segment>> segmented;
  bool all_pure_tsn = periodic != nullptr;
  for (const Registrant* l : listeners) {
    auto path = router_.route(talker.spec.node, l->spec.node, up);
    if (!path || path->empty()) {
      return fail("listener '" + l->spec.device_id + "'", "unreachable");
    }
    std::vector<Segment> segs;
    NodeId at = talker.spec.node;
    for (const LinkId& lid : *path) {
      const NetworkLink* link = scenario_.graph.link(lid);
      NodeId next = scenario_.graph.other_end(*link, at);
      if (segs.empty() || segs.back().domain != link->domain) {
        segs.push_back(Segment{link->domain, {}, at, next});
      }
      segs.back().links.push_back(lid);
      segs.back().exit = next;
      at = next;
    }
    if (segs.size() != 1 || segs[0].domain != Domain::Tsn) all_pure_tsn = false;
    segmented[l->spec.device_id] = std::move(segs);
  }

  // Everything acquired while building the provision, released on failure.
  std::vector<std::string> streams;
  std::vector<std::string> bearers;
  auto rollback = [&]() {
    for (const std::string& sid : streams) {
      if (cnc_.release(sid)) {
        engine_.mark("stream_released", {{"stream", sid}});
        security_.audit().append(engine_.now(), sid, "admission", "released");
      }
    }
    for (const std::string& bid : bearers) {
      auto bit = bearers_.find(bid);
      if (bit == bearers_.end()) continue;
      for (const auto& [lid, bps] : bit->second) bearer_committed_bps_[lid] -= bps;
      bearers_.erase(bit);
    }
  };

  auto admit_stream = [&](StreamRequest req)
      -> std::variant<std::reference_wrapper<const StreamReservation>, Rejection> {
    auto result = cnc_.admit(req, engine_.now(), tsn_up);
    if (auto* rej = std::get_if<Rejection>(&result)) {
      engine_.mark("cnc_rejected", {{"stream", req.stream_id},
                                    {"reason", to_string(rej->reason)},
                                    {"detail", rej->detail}});
      security_.audit().append(engine_.now(), req.stream_id, "admission",
                               std::string("rejected:") + to_string(rej->reason));
      return *rej;
    }
    const StreamReservation& res = cnc_.reservations().at(req.stream_id);
    json windows = json::array();
    for (const auto& [lid, w] : res.windows) {
      windows.push_back(
          {{"link", lid}, {"offset_us", w.offset_us}, {"duration_us", w.duration_us}});
    }
    json paths = json::object();
    json e2e = json::object();
    for (const auto& [node, p] : res.paths) paths[node] = p;
    for (const auto& [node, lat] : res.e2e_latency_us) e2e[node] = lat;
    engine_.mark("cnc_admitted", {{"stream", res.stream_id},
                                  {"use_case", u.name},
                                  {"period_us", res.period_us},
                                  {"frame_bytes", res.frame_bytes},
                                  {"priority", res.priority},
                                  {"windows", std::move(windows)},
                                  {"paths", std::move(paths)},
                                  {"e2e_latency_us", std::move(e2e)}});
    security_.audit().append(engine_.now(), res.stream_id, "admission", "admitted");
    streams.push_back(res.stream_id);
    return std::cref(res);
  };

  E2EProvision prov;
  prov.use_case = u.name;
  prov.group = u.group;
  prov.qos_max_latency_us = u.qos.max_e2e_latency_us;
  prov.committed_throughput_bps = commit_bps;
  std::vector<ListenerPlan> plans;
  Micros align_phase = 0;

  if (all_pure_tsn) {
    // One multicast stream; fan-out links share windows.
    StreamRequest req;
    req.stream_id = u.name;
    req.talker = talker.spec.node;
    for (const Registrant* l : listeners) req.listeners.push_back(l->spec.node);
    req.period_us = period;
    req.frame_bytes = frame_bytes;
    req.max_e2e_latency_us = u.qos.max_e2e_latency_us;
    req.priority = u.qos.priority;
    auto admitted = admit_stream(std::move(req));
    if (auto* rej = std::get_if<Rejection>(&admitted)) {
      return fail("tsn", to_string(rej->reason) + (": " + rej->detail));
    }
    const StreamReservation& res =
        std::get<std::reference_wrapper<const StreamReservation>>(admitted).get();
    for (const Registrant* l : listeners) {
      const auto& path = res.paths.at(l->spec.node);
      const Micros e2e = res.e2e_latency_us.at(l->spec.node);
      ListenerPlan plan;
      plan.listener = l->spec.device_id;
      plan.listener_node = l->spec.node;
      for (const LinkId& lid : path) {
        const GateWindow& w = res.windows.at(lid);
        plan.hops.push_back(HopPlan{lid, true, w.offset_us});
      }
      plan.committed_us = e2e;
      plan.planned_observed_us = e2e;
      prov.budgets[l->spec.device_id] = {DomainBudget{Domain::Tsn, e2e, commit_bps, u.name}};
      prov.committed_latency_us[l->spec.device_id] = e2e;
      plans.push_back(std::move(plan));
    }
    align_phase = res.windows.at(res.paths.at(listeners.front()->spec.node).front()).offset_us;
  } else {
    for (const Registrant* l : listeners) {
      const DeviceId& lid = l->spec.device_id;
      const auto& segs = segmented[lid];
      ListenerPlan plan;
      plan.listener = lid;
      plan.listener_node = l->spec.node;
      Micros committed = 0;
      Micros planned = 0;  // actual transit from departure, gate waits included
      bool have_phase = false;
      std::optional<Micros> listener_align;
      std::vector<DomainBudget> chain;
      std::size_t seg_index = 0;
      for (const Segment& seg : segs) {
        if (seg.domain == Domain::Tsn) {
          if (!periodic) {
            rollback();
            return fail("tsn", "NonPeriodicTraffic: gate schedules need periodic traffic");
          }
          StreamRequest req;
          req.stream_id = u.name + "#" + lid + "#s" + std::to_string(seg_index);
          req.talker = seg.entry;
          req.listeners = {seg.exit};
          req.period_us = period;
          req.frame_bytes = frame_bytes;
          Micros remaining = u.qos.max_e2e_latency_us - committed;
          req.max_e2e_latency_us = std::max<Micros>(remaining, 0);
          req.priority = u.qos.priority;
          Micros arrival_phase = 0;
          if (have_phase) {
            arrival_phase = floor_mod(*listener_align + planned, period);
            req.first_hop_arrival_us = arrival_phase;
          }
          auto admitted = admit_stream(std::move(req));
          if (auto* rej = std::get_if<Rejection>(&admitted)) {
            rollback();
            return fail("listener '" + lid + "' tsn segment " + std::to_string(seg_index),
                        to_string(rej->reason) + (": " + rej->detail));
          }
          const StreamReservation& res =
              std::get<std::reference_wrapper<const StreamReservation>>(admitted).get();
          const auto& seg_path = res.paths.at(seg.exit);
          const Micros first_offset = res.windows.at(seg_path.front()).offset_us;
          const Micros e2e = res.e2e_latency_us.at(seg.exit);
          Micros wait = 0;
          if (!have_phase) {
            // Departure alignment absorbs the first gate wait entirely.
            listener_align = floor_mod(first_offset - planned, period);
            have_phase = true;
          } else {
            wait = floor_mod(first_offset - floor_mod(*listener_align + planned, period), period);
          }
          for (const LinkId& link : seg_path) {
            const GateWindow& w = res.windows.at(link);
            plan.hops.push_back(HopPlan{link, true, w.offset_us});
          }
          chain.push_back(DomainBudget{Domain::Tsn, wait + e2e, commit_bps, res.stream_id});
          committed += wait + e2e;
          planned += wait + e2e;
        } else {
          const Micros constant = scenario_.domain_latency.for_domain(seg.domain);
          for (const LinkId& link_id : seg.links) {
            const NetworkLink* link = scenario_.graph.link(link_id);
            if (bearer_committed_bps_[link_id] + commit_bps > link->capacity_bps) {
              rollback();
              return fail("listener '" + lid + "' " + std::string(to_string(seg.domain)) +
                              " segment " + std::to_string(seg_index),
                          "CapacityExceeded on link '" + link_id + "'");
            }
          }
          const std::string bearer_id =
              u.name + "#" + lid + "#b" + std::to_string(seg_index);
          auto& entries = bearers_[bearer_id];
          Micros transit = 0;
          for (const LinkId& link_id : seg.links) {
            const NetworkLink* link = scenario_.graph.link(link_id);
            bearer_committed_bps_[link_id] += commit_bps;
            entries.emplace_back(link_id, commit_bps);
            transit += link->propagation_us + transmission_time_us(frame_bytes * 8,
                                                                   link->capacity_bps);
          }
          bearers.push_back(bearer_id);
          for (const LinkId& link_id : seg.links) {
            plan.hops.push_back(HopPlan{link_id, false, 0});
          }
          chain.push_back(DomainBudget{seg.domain, constant, commit_bps, bearer_id});
          committed += constant;
          planned += transit;
        }
        if (committed > u.qos.max_e2e_latency_us) {
          rollback();
          return fail("listener '" + lid + "'",
                      "LatencyBudgetExceeded: " + std::to_string(committed) + " us > " +
                          std::to_string(u.qos.max_e2e_latency_us) + " us");
        }
        ++seg_index;
      }
      plan.committed_us = committed;
      plan.planned_observed_us = planned;
      prov.budgets[lid] = std::move(chain);
      prov.committed_latency_us[lid] = committed;
      if (listener_align) {
        // All listeners share one talker departure; chains agree on the phase
        // because they share the path prefix up to the first divergence.
        align_phase = *listener_align;
      }
      plans.push_back(std::move(plan));
    }
  }

  prov.stream_ids = streams;
  prov.bearer_ids = bearers;
  prov.total_latency_us = 0;
  for (const auto& [lid, c] : prov.committed_latency_us) {
    prov.total_latency_us = std::max(prov.total_latency_us, c);
  }
  prov.status = ProvisionStatus::Active;
  prov.generation = next_generation_.count(u.name) ? next_generation_[u.name] : 1;
  prov.retried = retried_.count(u.name) > 0;
  prov.violations = carried_violations_.count(u.name) ? carried_violations_[u.name] : 0;

  json budgets = json::object();
  for (const auto& [lid, chain] : prov.budgets) {
    json arr = json::array();
    for (const DomainBudget& b : chain) {
      arr.push_back({{"domain", to_string(b.domain)},
                     {"latency_us", b.latency_us},
                     {"throughput_bps", b.throughput_bps},
                     {"backing", b.backing}});
    }
    budgets[lid] = std::move(arr);
  }
  engine_.mark("provision_active", {{"use_case", u.name},
                                    {"group", to_string(u.group)},
                                    {"generation", prov.generation},
                                    {"total_latency_us", prov.total_latency_us},
                                    {"qos_max_latency_us", prov.qos_max_latency_us},
                                    {"committed_throughput_bps", prov.committed_throughput_bps},
                                    {"budgets", std::move(budgets)}});

  auto [stored, fresh] = provisions_.insert_or_assign(u.name, std::move(prov));
  (void)fresh;
  failed_use_cases_.erase(u.name);

  if (scenario_.replay_instances > 0) {
    auto plan = std::make_shared<ReplayPlan>();
    plan->use_case = u.name;
    plan->generation = stored->second.generation;
    plan->period_us = period;
    plan->frame_bytes = frame_bytes;
    plan->align_phase_us = align_phase;
    plan->listeners = std::move(plans);
    const Micros now = engine_.now();
    Micros first = align_phase;
    if (first < now) {
      first += ((now - align_phase + period - 1) / period) * period;
    }
    for (int m = 0; m < scenario_.replay_instances; ++m) {
      const Micros dep = first + static_cast<Micros>(m) * period;
      for (std::size_t li = 0; li < plan->listeners.size(); ++li) {
        engine_.schedule_callback(dep, [this, plan, li, m, dep, node = talker.spec.node]() {
          replay_hop(plan, li, 0, m, dep, node);
        });
      }
    }
  }
  return stored->second;
}

void MultiDomainManager::replay_hop(std::shared_ptr<ReplayPlan> plan, std::size_t listener_index,
                                    std::size_t hop_index, int instance, Micros departed_at,
                                    NodeId at_node) {
  const ListenerPlan& lp = plan->listeners[listener_index];
  if (hop_index >= lp.hops.size()) {
    on_replay_arrival(*plan, lp, instance, departed_at);
    return;
  }
  const HopPlan& hop = lp.hops[hop_index];
  const NetworkLink* link = scenario_.graph.link(hop.link);
  const NodeId next = scenario_.graph.other_end(*link, at_node);
  Micros send_at = engine_.now();
  if (hop.gated) {
    send_at += floor_mod(hop.gate_offset_us - send_at, plan->period_us);
  }
  Message msg;
  msg.src = at_node;
  msg.dst = next;
  msg.payload_tag = "stream_frame";
  msg.frame_bits = plan->frame_bytes * 8;
  msg.payload = {{"use_case", plan->use_case},
                 {"listener", lp.listener},
                 {"instance", instance},
                 {"hop", hop_index},
                 {"generation", plan->generation},
                 {"departed_at_us", departed_at}};
  const bool last = hop_index + 1 == lp.hops.size();
  if (last) {
    msg.payload["final"] = true;
    msg.payload["committed_us"] = lp.committed_us;
    msg.payload["planned_us"] = lp.planned_observed_us;
  }
  DeliverOutcome out = engine_.deliver_from(send_at, std::move(msg), {hop.link});
  if (auto* dropped = std::get_if<DeliverDropped>(&out)) {
    const std::string reason = dropped->reason;
    engine_.schedule_callback(dropped->at, [this, plan, listener_index, instance, reason]() {
      on_replay_loss(*plan, plan->listeners[listener_index], instance, reason);
    });
    return;
  }
  if (!std::holds_alternative<Micros>(out)) return;
  const Micros arrival = std::get<Micros>(out);
  engine_.schedule_callback(
      arrival, [this, plan, listener_index, hop_index, instance, departed_at, next]() {
        replay_hop(plan, listener_index, hop_index + 1, instance, departed_at, next);
      });
}

void MultiDomainManager::on_replay_arrival(const ReplayPlan& plan, const ListenerPlan& lp,
                                           int instance, Micros departed_at) {
  auto it = provisions_.find(plan.use_case);
  if (it == provisions_.end() || it->second.generation != plan.generation) return;
  if (it->second.status == ProvisionStatus::Withdrawn) return;
  const Micros observed = engine_.now() - departed_at;
  ObservedStats& stats = observed_[plan.use_case][lp.listener];
  ++stats.delivered;
  stats.last_latency_us = observed;
  stats.max_latency_us = std::max(stats.max_latency_us, observed);
  if (observed > lp.committed_us) {
    handle_violation(plan.use_case, {{"kind", "latency"},
                                     {"listener", lp.listener},
                                     {"instance", instance},
                                     {"observed_us", observed},
                                     {"committed_us", lp.committed_us}});
  }
}

void MultiDomainManager::on_replay_loss(const ReplayPlan& plan, const ListenerPlan& lp,
                                        int instance, const std::string& reason) {
  auto it = provisions_.find(plan.use_case);
  if (it == provisions_.end() || it->second.generation != plan.generation) return;
  if (it->second.status == ProvisionStatus::Withdrawn) return;
  ++observed_[plan.use_case][lp.listener].lost;
  handle_violation(plan.use_case, {{"kind", "frame_lost"},
                                   {"listener", lp.listener},
                                   {"instance", instance},
                                   {"reason", reason}});
}

void MultiDomainManager::release_backing(E2EProvision& prov) {
  for (const std::string& sid : prov.stream_ids) {
    if (cnc_.release(sid)) {
      engine_.mark("stream_released", {{"stream", sid}});
      security_.audit().append(engine_.now(), sid, "admission", "released");
    }
  }
  prov.stream_ids.clear();
  for (const std::string& bid : prov.bearer_ids) {
    auto bit = bearers_.find(bid);
    if (bit == bearers_.end()) continue;
    for (const auto& [lid, bps] : bit->second) bearer_committed_bps_[lid] -= bps;
    bearers_.erase(bit);
  }
  prov.bearer_ids.clear();
}

void MultiDomainManager::handle_violation(const std::string& use_case, const json& violation) {
  auto it = provisions_.find(use_case);
  if (it == provisions_.end()) {
    engine_.record_error("unknown_use_case", {{"use_case", use_case}});
    return;
  }
  E2EProvision& prov = it->second;
  if (prov.status == ProvisionStatus::Withdrawn) return;
  ++prov.violations;
  engine_.mark("qos_violation", {{"use_case", use_case}, {"violation", violation}});
  if (prov.status != ProvisionStatus::Active) return;

  if (prov.retried) {
    prov.status = ProvisionStatus::Withdrawn;
    release_backing(prov);
    engine_.mark("provision_withdrawn",
                 {{"use_case", use_case}, {"reason", "violation after re-provisioning"}});
    return;
  }

  prov.status = ProvisionStatus::Degraded;
  engine_.mark("provision_degraded", {{"use_case", use_case}, {"violation", violation}});

  const UseCaseSpec* spec = find_use_case(use_case);
  if (!spec) {
    prov.status = ProvisionStatus::Withdrawn;
    release_backing(prov);
    engine_.mark("provision_withdrawn",
                 {{"use_case", use_case}, {"reason", "definition unavailable"}});
    return;
  }

  // One repair attempt: rebuild from scratch avoiding links down right now.
  const int violations = prov.violations;
  const int generation = prov.generation + 1;
  release_backing(prov);
  provisions_.erase(it);
  next_generation_[use_case] = generation;
  retried_.insert(use_case);
  carried_violations_[use_case] = violations;
  auto result = provision_use_case(*spec);
  next_generation_.erase(use_case);
  carried_violations_.erase(use_case);
  if (std::holds_alternative<E2EProvision>(result)) {
    engine_.mark("provision_reprovisioned",
                 {{"use_case", use_case},
                  {"generation", generation},
                  {"total_latency_us", std::get<E2EProvision>(result).total_latency_us}});
  } else {
    E2EProvision shell;
    shell.use_case = use_case;
    shell.group = spec->group;
    shell.status = ProvisionStatus::Withdrawn;
    shell.qos_max_latency_us = spec->qos.max_e2e_latency_us;
    shell.committed_throughput_bps = spec->qos.min_throughput_bps;
    shell.violations = violations;
    shell.retried = true;
    shell.generation = generation;
    provisions_[use_case] = std::move(shell);
    failed_use_cases_.erase(use_case);
    json reasons = json::object();
    for (const auto& [w, r] : std::get<ProvisionFailure>(result).reasons) reasons[w] = r;
    engine_.mark("provision_withdrawn", {{"use_case", use_case}, {"reasons", reasons}});
  }
}

void MultiDomainManager::schedule_sync_phase() {
  engine_.schedule_callback(scenario_.sync.at_us, [this]() {
    std::vector<NodeId> nodes;
    for (const auto& [id, node] : scenario_.graph.nodes()) nodes.push_back(id);
    SyncReport report = sync_all(engine_, router_, clocks_, nodes, scenario_.sync.reference,
                                 scenario_.sync.rounds, scenario_.sync.server_processing_us);
    json residuals = json::object();
    for (const auto& [node, r] : report.residual_us) residuals[node] = r;
    engine_.mark("sync_report", {{"reference", scenario_.sync.reference},
                                 {"max_residual_us", report.max_residual_us},
                                 {"residual_us", std::move(residuals)},
                                 {"unsynced", report.unsynced}});
    sync_report_ = std::move(report);
  });
}

nlohmann::json MultiDomainManager::qos_report() const {
  json use_cases = json::object();
  for (const auto& [name, prov] : provisions_) {
    json listeners = json::object();
    for (const auto& [lid, committed] : prov.committed_latency_us) {
      json entry{{"committed_latency_us", committed}};
      auto oit = observed_.find(name);
      if (oit != observed_.end()) {
        auto sit = oit->second.find(lid);
        if (sit != oit->second.end()) {
          entry["delivered"] = sit->second.delivered;
          entry["lost"] = sit->second.lost;
          entry["max_observed_latency_us"] = sit->second.max_latency_us;
          entry["last_observed_latency_us"] = sit->second.last_latency_us;
        }
      }
      listeners[lid] = std::move(entry);
    }
    use_cases[name] = {{"status", to_string(prov.status)},
                       {"group", to_string(prov.group)},
                       {"generation", prov.generation},
                       {"violations", prov.violations},
                       {"qos_max_e2e_latency_us", prov.qos_max_latency_us},
                       {"committed_total_latency_us", prov.total_latency_us},
                       {"committed_throughput_bps", prov.committed_throughput_bps},
                       {"listeners", std::move(listeners)}};
  }
  json links = json::object();
  for (const auto& [id, link] : scenario_.graph.links()) {
    double utilization = 0.0;
    if (link.domain == Domain::Tsn) {
      utilization = cnc_.link_utilization(id).value_or(0.0);
    } else {
      auto it = bearer_committed_bps_.find(id);
      if (it != bearer_committed_bps_.end() && link.capacity_bps > 0) {
        utilization = static_cast<double>(it->second) / static_cast<double>(link.capacity_bps);
      }
    }
    links[id] = {{"domain", to_string(link.domain)}, {"utilization", utilization}};
  }
  json devices = json::object();
  for (const auto& [id, r] : registrants_) {
    json entry{{"state", to_string(r.state)}, {"node", r.spec.node}};
    if (r.provisioned_at_us >= 0 && r.terminal_at_us >= 0) {
      entry["registration_us"] = r.terminal_at_us - r.provisioned_at_us;
    }
    if (auto pos = localization_.position(r.spec.node)) {
      entry["position"] = {pos->x, pos->y};
    }
    devices[id] = std::move(entry);
  }
  json report{{"use_cases", std::move(use_cases)},
              {"links", std::move(links)},
              {"devices", std::move(devices)}};
  if (sync_report_) {
    json residuals = json::object();
    for (const auto& [node, r] : sync_report_->residual_us) residuals[node] = r;
    report["sync"] = {{"max_residual_us", sync_report_->max_residual_us},
                      {"residual_us", std::move(residuals)},
                      {"unsynced", sync_report_->unsynced}};
  }
  return report;
}

bool MultiDomainManager::check_expectations(std::vector<std::string>& mismatches) const {
  for (const auto& [id, r] : registrants_) {
    if (r.spec.expect_final && r.state != *r.spec.expect_final) {
      mismatches.push_back("device '" + id + "' expected " + to_string(*r.spec.expect_final) +
                           ", ended " + to_string(r.state));
    }
  }
  for (const UseCaseSpec& u : scenario_.use_cases) {
    const bool failed = failed_use_cases_.count(u.name) > 0;
    const bool provisioned = provisions_.count(u.name) > 0;
    if (u.expect_failure && provisioned) {
      mismatches.push_back("use case '" + u.name + "' expected to fail but was provisioned");
    }
    if (!u.expect_failure && (failed || !provisioned)) {
      mismatches.push_back("use case '" + u.name + "' expected to provision but failed");
    }
  }
  return mismatches.empty();
}

}  // namespace tacnet
