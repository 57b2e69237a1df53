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
#include <string>
#include <variant>
#include <vector>

#include "tacnet/model.hpp"
#include "tacnet/routing.hpp"

namespace tacnet {

struct StreamRequest {
  std::string stream_id;
  NodeId talker;
  std::vector<NodeId> listeners;
  Micros period_us = 0;
  std::int64_t frame_bytes = 0;
  Micros max_e2e_latency_us = 0;
  int priority = 0;
  // Cycle phase at which the frame reaches the talker's first gate; the first
  // window opens no earlier. Zero when the talker transmits at will.
  Micros first_hop_arrival_us = 0;
};

// One periodic transmission window on a link's egress gate. The window
// repeats every period of its stream: it occupies [offset + k*period,
// offset + k*period + duration) for every cycle k, so the occupied span may
// cross the cycle boundary. offset is always in [0, period).
struct GateWindow {
  LinkId link;
  Micros offset_us = 0;
  Micros duration_us = 0;
  friend bool operator==(const GateWindow&, const GateWindow&) = default;
};

struct StreamReservation {
  std::string stream_id;
  Micros period_us = 0;
  std::int64_t frame_bytes = 0;
  int priority = 0;
  std::map<NodeId, std::vector<LinkId>> paths;     // per listener
  std::map<LinkId, GateWindow> windows;            // one window per link
  std::map<NodeId, Micros> e2e_latency_us;         // per listener
  Micros admitted_at_us = 0;
};

enum class RejectionReason {
  NoRoute,
  FrameExceedsPeriod,
  CapacityExceeded,
  HyperperiodOverflow,
  NoFeasibleSchedule,
  LatencyExceeded,
  DuplicateStream,
};

const char* to_string(RejectionReason r);

struct Rejection {
  RejectionReason reason;
  std::string detail;
};

// Least common multiple of the periods, in microseconds. nullopt when the
// result would exceed 2^32 us (the schedule is no longer analyzable).
std::optional<Micros> compute_hyperperiod(const std::vector<Micros>& periods_us);

constexpr Micros kMaxHyperperiodUs = Micros{1} << 32;

// Whether two periodic windows (offset, duration, period) ever overlap.
bool windows_overlap(Micros o1, Micros d1, Micros p1, Micros o2, Micros d2, Micros p2);

// Central network configuration: computes paths, admits or rejects streams,
// owns the per-link gate schedules.
class Cnc {
 public:
  explicit Cnc(const NetworkGraph* graph) : graph_(graph) {}

  // Checks run in a fixed order per link direction: route, frame-vs-period,
  // capacity, hyperperiod, gate schedule search, then the latency bound.
  // First-fit places each window at the earliest feasible offset.
  std::variant<StreamReservation, Rejection> admit(const StreamRequest& request,
                                                   Micros now = 0,
                                                   const LinkFilter& filter = {});

  // Frees the stream's windows and capacity. False for unknown streams.
  bool release(const std::string& stream_id);

  // Fraction of a link's capacity consumed by admitted streams crossing it.
  // nullopt for links the graph does not contain.
  std::optional<double> link_utilization(const LinkId& link) const;

  const std::map<std::string, StreamReservation>& reservations() const { return reservations_; }

 private:
  struct ScheduledWindow {
    std::string stream_id;
    Micros offset_us;
    Micros duration_us;
    Micros period_us;
  };

  const std::vector<ScheduledWindow>& windows_on(const LinkId& link) const;

  const NetworkGraph* graph_;
  std::map<std::string, StreamReservation> reservations_;
  std::map<LinkId, std::vector<ScheduledWindow>> schedules_;
};

// TSN end device registration front end. The CUC accepts a device's stream
// requirements once the device is configured and the CNC is reachable.
class Cuc {
 public:
  struct Registered { std::string transmission_type; };
  struct Rejected { std::string reason; };
  struct OutOfOrder { RegistrationState actual; };
  using Result = std::variant<Registered, Rejected, OutOfOrder>;

  Result register_device(const DeviceId& device, const std::string& transmission_type,
                         RegistrationState current_state, bool scope_has_cuc,
                         bool cnc_reachable);

  bool is_registered(const DeviceId& device) const { return registered_.count(device) > 0; }
  const std::map<DeviceId, std::string>& registered() const { return registered_; }

 private:
  std::map<DeviceId, std::string> registered_;
};

}  // namespace tacnet
