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

#include "tacnet/sim.hpp"

namespace tacnet {

const char* to_string(TraceRecordKind k) {
  switch (k) {
    case TraceRecordKind::Deliver: return "deliver";
    case TraceRecordKind::Drop: return "drop";
    case TraceRecordKind::State: return "state";
    case TraceRecordKind::Error: return "error";
    case TraceRecordKind::Mark: return "mark";
  }
  return "?";
}

nlohmann::json to_json(const TraceRecord& r) {
  nlohmann::json j{{"time", r.time}, {"seq", r.seq}, {"kind", to_string(r.kind)}};
  switch (r.kind) {
    case TraceRecordKind::Deliver:
    case TraceRecordKind::Drop:
      j["src"] = r.msg.src;
      j["dst"] = r.msg.dst;
      j["payload_tag"] = r.msg.payload_tag;
      j["payload"] = r.msg.payload;
      if (r.kind == TraceRecordKind::Drop) j["reason"] = r.reason;
      break;
    case TraceRecordKind::State:
      j["device"] = r.device;
      j["old_state"] = to_string(r.old_state);
      j["new_state"] = to_string(r.new_state);
      break;
    case TraceRecordKind::Error:
      j["payload_tag"] = r.msg.payload_tag;
      j["payload"] = r.msg.payload;
      j["reason"] = r.reason;
      break;
    case TraceRecordKind::Mark:
      j["payload_tag"] = r.msg.payload_tag;
      j["payload"] = r.msg.payload;
      break;
  }
  return j;
}

bool MessageMatch::matches(Micros send_time, const Message& m) const {
  if (from_us && send_time < *from_us) return false;
  if (until_us && send_time >= *until_us) return false;
  if (src && m.src != *src) return false;
  if (dst && m.dst != *dst) return false;
  if (payload_tag && m.payload_tag != *payload_tag) return false;
  if (device) {
    auto it = m.payload.find("device");
    if (it == m.payload.end() || !it->is_string() || it->get<std::string>() != *device)
      return false;
  }
  return true;
}

Engine::Engine(const NetworkGraph* graph, std::uint64_t seed)
    : graph_(graph), seed_(seed), rng_(seed) {}

void Engine::set_handler(const NodeId& node, Handler h) { handlers_[node] = std::move(h); }

void Engine::push(Micros at, std::variant<DeliverEntry, DropEntry, CallbackEntry> what) {
  queue_.push(QueueEntry{at, next_seq(), std::move(what)});
}

std::uint64_t Engine::schedule(Micros at, Message msg) {
  if (at < clock_) throw SchedulingInPast(at, clock_);
  ++counters_.scheduled;
  std::uint64_t seq = seq_counter_;
  if (drop_fault_matches(clock_, msg)) {
    push(at, DropEntry{std::move(msg), "fault_injected"});
  } else {
    push(at, DeliverEntry{std::move(msg)});
  }
  return seq;
}

void Engine::schedule_callback(Micros at, std::function<void()> fn) {
  if (at < clock_) throw SchedulingInPast(at, clock_);
  push(at, CallbackEntry{std::move(fn)});
}

bool Engine::drop_fault_matches(Micros send_time, const Message& msg) const {
  for (const auto& f : drop_faults_) {
    if (f.match.matches(send_time, msg)) return true;
  }
  return false;
}

DeliverOutcome Engine::deliver(Message msg, const std::vector<LinkId>& path) {
  return deliver_from(clock_, std::move(msg), path);
}

DeliverOutcome Engine::deliver_from(Micros start, Message msg, const std::vector<LinkId>& path) {
  if (start < clock_) throw SchedulingInPast(start, clock_);
  if (path.empty() && msg.src != msg.dst) {
    return NoPath{};
  }
  ++counters_.scheduled;
  if (drop_fault_matches(start, msg)) {
    push(start, DropEntry{std::move(msg), "fault_injected"});
    return DeliverDropped{"fault_injected", start};
  }
  Micros t = start;
  for (const LinkId& lid : path) {
    const NetworkLink* l = graph_->link(lid);
    if (!l) throw std::invalid_argument("deliver: unknown link '" + lid + "'");
    if (link_down_at(lid, t)) {
      std::string reason = "link_down:" + lid;
      push(t, DropEntry{std::move(msg), reason});
      return DeliverDropped{reason, t};
    }
    t += l->propagation_us + transmission_time_us(msg.frame_bits, l->capacity_bps);
  }
  push(t, DeliverEntry{std::move(msg)});
  return t;
}

void Engine::inject_fault(FaultSpec fault) {
  std::visit(
      [this](auto&& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DropMessageFault>) {
          drop_faults_.push_back(f);
        } else if constexpr (std::is_same_v<T, LinkDownFault>) {
          link_faults_[f.link].push_back(f);
        } else if constexpr (std::is_same_v<T, AuthRejectFault>) {
          auth_rejects_.insert(f.device);
        } else {
          config_faults_.push_back(f);
        }
      },
      std::move(fault));
}

bool Engine::link_down_at(const LinkId& link, Micros t) const {
  auto it = link_faults_.find(link);
  if (it == link_faults_.end()) return false;
  for (const auto& f : it->second) {
    if (t >= f.from_us && t < f.until_us) return true;
  }
  return false;
}

bool Engine::auth_reject_active(const DeviceId& device) const {
  return auth_rejects_.count(device) > 0;
}

bool Engine::config_unavailable_at(Micros t) const {
  for (const auto& f : config_faults_) {
    if (t >= f.from_us && t < f.until_us) return true;
  }
  return false;
}

void Engine::append_drop(const Message& msg, const std::string& reason) {
  TraceRecord r;
  r.time = clock_;
  r.seq = next_seq();
  r.kind = TraceRecordKind::Drop;
  r.msg = msg;
  r.reason = reason;
  trace_.push_back(std::move(r));
  ++counters_.dropped;
}

const Trace& Engine::run_until(Micros t_end) {
  while (!queue_.empty() && queue_.top().time <= t_end) {
    QueueEntry entry = queue_.top();
    queue_.pop();
    clock_ = entry.time;
    if (auto* d = std::get_if<DeliverEntry>(&entry.what)) {
      TraceRecord r;
      r.time = clock_;
      r.seq = next_seq();
      r.kind = TraceRecordKind::Deliver;
      r.msg = d->msg;
      trace_.push_back(r);
      ++counters_.delivered;
      auto h = handlers_.find(d->msg.dst);
      if (h != handlers_.end() && h->second) {
        h->second(SimEvent{clock_, r.seq, std::move(d->msg)});
      }
    } else if (auto* p = std::get_if<DropEntry>(&entry.what)) {
      append_drop(p->msg, p->reason);
    } else {
      std::get<CallbackEntry>(entry.what).fn();
    }
  }
  clock_ = std::max(clock_, t_end);
  return trace_;
}

void Engine::mark(const std::string& tag, nlohmann::json payload) {
  TraceRecord r;
  r.time = clock_;
  r.seq = next_seq();
  r.kind = TraceRecordKind::Mark;
  r.msg.payload_tag = tag;
  r.msg.payload = std::move(payload);
  trace_.push_back(std::move(r));
}

void Engine::record_error(const std::string& tag, nlohmann::json payload) {
  TraceRecord r;
  r.time = clock_;
  r.seq = next_seq();
  r.kind = TraceRecordKind::Error;
  r.msg.payload_tag = tag;
  r.msg.payload = std::move(payload);
  r.reason = tag;
  trace_.push_back(std::move(r));
}

void Engine::record_state(const DeviceId& device, RegistrationState from, RegistrationState to) {
  TraceRecord r;
  r.time = clock_;
  r.seq = next_seq();
  r.kind = TraceRecordKind::State;
  r.device = device;
  r.old_state = from;
  r.new_state = to;
  trace_.push_back(std::move(r));
}

}  // namespace tacnet
