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
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tacnet/model.hpp"

namespace tacnet {

struct Message {
  NodeId src;
  NodeId dst;
  std::string payload_tag;
  nlohmann::json payload = nlohmann::json::object();
  std::int64_t frame_bits = 0;  // 0 for control-plane signalling
};

// A message due for delivery. (time, seq) totally orders all events in a run.
struct SimEvent {
  Micros time = 0;
  std::uint64_t seq = 0;
  Message msg;
};

enum class TraceRecordKind { Deliver, Drop, State, Error, Mark };

const char* to_string(TraceRecordKind k);

struct TraceRecord {
  Micros time = 0;
  std::uint64_t seq = 0;
  TraceRecordKind kind = TraceRecordKind::Mark;
  Message msg;                // Deliver / Drop; Mark and Error use tag+payload only
  std::string reason;         // Drop / Error
  DeviceId device;            // State
  RegistrationState old_state = RegistrationState::Unprovisioned;
  RegistrationState new_state = RegistrationState::Unprovisioned;
};

using Trace = std::vector<TraceRecord>;

nlohmann::json to_json(const TraceRecord& r);

// Fault injection -------------------------------------------------------

// Matches messages by any subset of attributes; unset fields match anything.
// The time window [from_us, until_us) is checked against the send time.
struct MessageMatch {
  std::optional<NodeId> src;
  std::optional<NodeId> dst;
  std::optional<std::string> payload_tag;
  std::optional<DeviceId> device;  // compared with payload["device"]
  std::optional<Micros> from_us;
  std::optional<Micros> until_us;

  bool matches(Micros send_time, const Message& m) const;
};

struct DropMessageFault { MessageMatch match; };
struct LinkDownFault {
  LinkId link;
  Micros from_us = 0;
  Micros until_us = 0;  // half-open: down for from_us <= t < until_us
};
struct AuthRejectFault { DeviceId device; };
struct ConfigUnavailableFault {
  Micros from_us = 0;
  Micros until_us = 0;
};

using FaultSpec = std::variant<DropMessageFault, LinkDownFault, AuthRejectFault, ConfigUnavailableFault>;

// Engine ----------------------------------------------------------------

struct SchedulingInPast : std::logic_error {
  SchedulingInPast(Micros at, Micros now)
      : std::logic_error("schedule at t=" + std::to_string(at) +
                         " before current time t=" + std::to_string(now)) {}
};

struct DeliverDropped {
  std::string reason;
  Micros at = 0;
};
struct NoPath {};

// Either the arrival time, a drop (recorded in the trace), or no usable path.
using DeliverOutcome = std::variant<Micros, DeliverDropped, NoPath>;

// Deterministic discrete-event core. One virtual clock, a (time, seq)-ordered
// queue, and an append-only trace. Identical seeds and inputs give identical
// traces, byte for byte once serialized.
class Engine {
 public:
  using Handler = std::function<void(const SimEvent&)>;

  Engine(const NetworkGraph* graph, std::uint64_t seed);

  Micros now() const { return clock_; }
  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& rng() { return rng_; }
  const NetworkGraph& graph() const { return *graph_; }

  void set_handler(const NodeId& node, Handler h);

  // Queue a message for delivery at `at` (same virtual time allowed, the past
  // is not). Ties at equal time dispatch in scheduling order.
  std::uint64_t schedule(Micros at, Message msg);

  // Internal timer; runs at `at` with the clock advanced, records nothing.
  void schedule_callback(Micros at, std::function<void()> fn);

  // Send `msg` along `path` starting now. Transit per link is propagation
  // plus transmission time rounded up to whole microseconds. A LinkDown
  // active when the message reaches a link drops it there; a matching
  // DropMessage fault drops it at send time. Drops are recorded in the trace.
  DeliverOutcome deliver(Message msg, const std::vector<LinkId>& path);

  // Same, but the message leaves at `start` (>= now), e.g. after a service
  // processing delay. The outcome is resolved immediately; the delivery or
  // drop is queued for its computed time.
  DeliverOutcome deliver_from(Micros start, Message msg, const std::vector<LinkId>& path);

  void inject_fault(FaultSpec fault);

  // Fault state queries for the services layered on top.
  bool link_down_at(const LinkId& link, Micros t) const;
  bool auth_reject_active(const DeviceId& device) const;
  bool config_unavailable_at(Micros t) const;

  // Run all events with time <= t_end; afterwards now() == t_end.
  const Trace& run_until(Micros t_end);

  const Trace& trace() const { return trace_; }

  // Trace appends from handlers; each record gets a fresh sequence number.
  void mark(const std::string& tag, nlohmann::json payload);
  void record_error(const std::string& tag, nlohmann::json payload);
  void record_state(const DeviceId& device, RegistrationState from, RegistrationState to);

  struct Counters {
    std::uint64_t scheduled = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
  };
  Counters counters() const { return counters_; }

 private:
  struct DeliverEntry { Message msg; };
  struct DropEntry {
    Message msg;
    std::string reason;
  };
  struct CallbackEntry { std::function<void()> fn; };
  struct QueueEntry {
    Micros time;
    std::uint64_t seq;
    std::variant<DeliverEntry, DropEntry, CallbackEntry> what;
  };
  struct QueueOrder {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::uint64_t next_seq() { return seq_counter_++; }
  void push(Micros at, std::variant<DeliverEntry, DropEntry, CallbackEntry> what);
  void append_drop(const Message& msg, const std::string& reason);
  bool drop_fault_matches(Micros send_time, const Message& msg) const;

  const NetworkGraph* graph_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  Micros clock_ = 0;
  std::uint64_t seq_counter_ = 0;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue_;
  std::map<NodeId, Handler> handlers_;
  Trace trace_;
  Counters counters_;

  std::vector<DropMessageFault> drop_faults_;
  std::map<LinkId, std::vector<LinkDownFault>> link_faults_;
  std::set<DeviceId> auth_rejects_;
  std::vector<ConfigUnavailableFault> config_faults_;
};

}  // namespace tacnet
