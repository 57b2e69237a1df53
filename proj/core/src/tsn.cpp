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

#include "tacnet/tsn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tacnet {

const char* to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::NoRoute: return "NoRoute";
    case RejectionReason::FrameExceedsPeriod: return "FrameExceedsPeriod";
    case RejectionReason::CapacityExceeded: return "CapacityExceeded";
    case RejectionReason::HyperperiodOverflow: return "HyperperiodOverflow";
    case RejectionReason::NoFeasibleSchedule: return "NoFeasibleSchedule";
    case RejectionReason::LatencyExceeded: return "LatencyExceeded";
    case RejectionReason::DuplicateStream: return "DuplicateStream";
  }
  return "?";
}

std::optional<Micros> compute_hyperperiod(const std::vector<Micros>& periods_us) {
  if (periods_us.empty()) throw std::invalid_argument("compute_hyperperiod: no periods");
  Micros acc = 1;
  for (Micros p : periods_us) {
    if (p <= 0) throw std::invalid_argument("compute_hyperperiod: period must be positive");
    Micros g = std::gcd(acc, p);
    // acc/g * p can overflow Micros before the cap check; test via division.
    Micros step = acc / g;
    if (p > kMaxHyperperiodUs / step) return std::nullopt;
    acc = step * p;
    if (acc > kMaxHyperperiodUs) return std::nullopt;
  }
  return acc;
}

namespace {

Micros floor_mod(Micros a, Micros m) {
  Micros r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

bool windows_overlap(Micros o1, Micros d1, Micros p1, Micros o2, Micros d2, Micros p2) {
  // Occurrence start differences span all multiples of g; the two families
  // collide iff some multiple of g falls in the open interval
  // (o1 - o2 - d2, o1 - o2 + d1).
  Micros g = std::gcd(p1, p2);
  return floor_mod(o1 - o2, g) < d2 || floor_mod(o2 - o1, g) < d1;
}

const std::vector<Cnc::ScheduledWindow>& Cnc::windows_on(const LinkId& link) const {
  static const std::vector<ScheduledWindow> empty;
  auto it = schedules_.find(link);
  return it == schedules_.end() ? empty : it->second;
}

Cuc::Result Cuc::register_device(const DeviceId& device, const std::string& transmission_type,
                                 RegistrationState current_state, bool scope_has_cuc,
                                 bool cnc_reachable) {
  if (current_state != RegistrationState::Configured) return OutOfOrder{current_state};
  if (!scope_has_cuc) return Rejected{"scope_missing"};
  if (!cnc_reachable) return Rejected{"cnc_unreachable"};
  if (transmission_type.empty()) return Rejected{"no_transmission_type"};
  registered_[device] = transmission_type;
  return Registered{transmission_type};
}

std::variant<StreamReservation, Rejection> Cnc::admit(const StreamRequest& request, Micros now,
                                                      const LinkFilter& filter) {
  if (reservations_.count(request.stream_id)) {
    return Rejection{RejectionReason::DuplicateStream, request.stream_id};
  }
  if (request.period_us <= 0 || request.frame_bytes <= 0 || request.listeners.empty()) {
    return Rejection{RejectionReason::NoRoute, "malformed request"};
  }
  const Micros p = request.period_us;
  const std::int64_t frame_bits = request.frame_bytes * 8;

  // Paths first: every later check needs to know which links carry the stream.
  std::map<NodeId, std::vector<LinkId>> paths;
  std::vector<LinkId> touched;  // in first-visit order, deduplicated
  for (const NodeId& listener : request.listeners) {
    auto path = min_hop_lexicographic(*graph_, request.talker, listener, filter);
    if (!path || path->empty()) {
      return Rejection{RejectionReason::NoRoute,
                       "no path " + request.talker + " -> " + listener};
    }
    for (const LinkId& lid : *path) {
      if (std::find(touched.begin(), touched.end(), lid) == touched.end()) touched.push_back(lid);
    }
    paths[listener] = std::move(*path);
  }

  // Frame must fit in one period on every link it crosses (exact compare:
  // transmission time strictly greater than the period rejects).
  for (const LinkId& lid : touched) {
    const NetworkLink* l = graph_->link(lid);
    if (transmission_time_us(frame_bits, l->capacity_bps) > p) {
      return Rejection{RejectionReason::FrameExceedsPeriod, lid};
    }
  }

  // Capacity: on each link, the sum of frame_bits/period over all streams
  // (this one included) must not pass the link rate. Exact in 128-bit
  // integers over the hyperperiod of the involved streams.
  for (const LinkId& lid : touched) {
    const NetworkLink* l = graph_->link(lid);
    const auto& committed = windows_on(lid);
    std::vector<Micros> periods{p};
    for (const auto& w : committed) periods.push_back(w.period_us);
    auto lcm = compute_hyperperiod(periods);
    if (!lcm) return Rejection{RejectionReason::HyperperiodOverflow, lid};
    // sum(bits_i * (L/p_i)) * 1e6 <= capacity * L, all terms exact
    unsigned __int128 used = static_cast<unsigned __int128>(frame_bits) * (*lcm / p);
    for (const auto& w : committed) {
      // duration was derived from frame bits; recover bits from reservations
      const auto& res = reservations_.at(w.stream_id);
      used += static_cast<unsigned __int128>(res.frame_bytes) * 8 * (*lcm / w.period_us);
    }
    unsigned __int128 lhs = used * 1'000'000u;
    unsigned __int128 rhs =
        static_cast<unsigned __int128>(l->capacity_bps) * static_cast<unsigned __int128>(*lcm);
    if (lhs > rhs) return Rejection{RejectionReason::CapacityExceeded, lid};
  }

  // Hyperperiod across everything admitted so far plus this stream must stay
  // analyzable.
  {
    std::vector<Micros> periods{p};
    for (const auto& [id, res] : reservations_) periods.push_back(res.period_us);
    if (!compute_hyperperiod(periods)) {
      return Rejection{RejectionReason::HyperperiodOverflow, request.stream_id};
    }
  }

  // Gate schedule search: walk each listener's chain placing windows at the
  // earliest time that clears every committed window on the link and opens
  // no earlier than the frame can arrive from the previous hop. Windows are
  // periodic, so a frame arriving past the window's phase in one cycle waits
  // for the next occurrence; the walk runs in absolute time and stores the
  // phase. Links shared between listeners (multicast fan-out) keep a single
  // window.
  std::map<LinkId, GateWindow> placed;
  std::map<NodeId, Micros> e2e;
  if (request.first_hop_arrival_us < 0 || request.first_hop_arrival_us >= p) {
    return Rejection{RejectionReason::NoFeasibleSchedule, "first hop arrival outside cycle"};
  }
  for (const NodeId& listener : request.listeners) {
    const auto& path = paths[listener];
    Micros arrival = request.first_hop_arrival_us;  // when the frame reaches the next gate
    Micros first_open = -1;
    Micros last_exit = 0;
    for (const LinkId& lid : path) {
      const NetworkLink* l = graph_->link(lid);
      const Micros dur = transmission_time_us(frame_bits, l->capacity_bps);
      Micros open;  // absolute time this hop's window passes the frame
      if (auto it = placed.find(lid); it != placed.end()) {
        // Window already fixed by an earlier listener's chain; wait for its
        // next occurrence.
        open = arrival + floor_mod(it->second.offset_us - arrival, p);
      } else {
        Micros o = arrival;
        const auto& committed = windows_on(lid);
        bool moved = true;
        while (moved) {
          moved = false;
          for (const auto& w : committed) {
            Micros g = std::gcd(p, w.period_us);
            if (w.duration_us + dur > g) {
              // No relative offset can separate the two window families.
              return Rejection{RejectionReason::NoFeasibleSchedule, lid};
            }
            if (windows_overlap(o, dur, p, w.offset_us, w.duration_us, w.period_us)) {
              // Jump to the first time clearing this window family; times in
              // between stay in conflict with it, so nothing is skipped.
              Micros r = floor_mod(o - w.offset_us, g);
              o += floor_mod(w.duration_us - r, g);
              moved = true;
            }
          }
          if (o - arrival >= 2 * p) {
            // The scan visited every phase of the cycle without finding a
            // fit; no later time can do better.
            return Rejection{RejectionReason::NoFeasibleSchedule, lid};
          }
        }
        open = o;
        placed[lid] = GateWindow{lid, floor_mod(open, p), dur};
      }
      if (first_open < 0) first_open = open;
      last_exit = open + dur + l->propagation_us;
      arrival = last_exit;
    }
    e2e[listener] = last_exit - first_open;
  }

  for (const NodeId& listener : request.listeners) {
    if (e2e[listener] > request.max_e2e_latency_us) {
      return Rejection{RejectionReason::LatencyExceeded,
                       listener + ": " + std::to_string(e2e[listener]) + " us > " +
                           std::to_string(request.max_e2e_latency_us) + " us"};
    }
  }

  StreamReservation res;
  res.stream_id = request.stream_id;
  res.period_us = p;
  res.frame_bytes = request.frame_bytes;
  res.priority = request.priority;
  res.paths = std::move(paths);
  res.windows = placed;
  res.e2e_latency_us = std::move(e2e);
  res.admitted_at_us = now;
  for (const auto& [lid, w] : placed) {
    schedules_[lid].push_back(ScheduledWindow{res.stream_id, w.offset_us, w.duration_us, p});
  }
  auto [it, inserted] = reservations_.emplace(res.stream_id, std::move(res));
  (void)inserted;
  return it->second;
}

bool Cnc::release(const std::string& stream_id) {
  auto it = reservations_.find(stream_id);
  if (it == reservations_.end()) return false;
  for (const auto& [lid, w] : it->second.windows) {
    auto& vec = schedules_[lid];
    vec.erase(std::remove_if(vec.begin(), vec.end(),
                             [&](const ScheduledWindow& sw) { return sw.stream_id == stream_id; }),
              vec.end());
    if (vec.empty()) schedules_.erase(lid);
  }
  reservations_.erase(it);
  return true;
}

std::optional<double> Cnc::link_utilization(const LinkId& link) const {
  const NetworkLink* l = graph_->link(link);
  if (!l) return std::nullopt;
  auto it = schedules_.find(link);
  if (it == schedules_.end()) return 0.0;
  long double sum = 0.0L;
  for (const auto& w : it->second) {
    const auto& res = reservations_.at(w.stream_id);
    long double rate = static_cast<long double>(res.frame_bytes) * 8 * 1'000'000.0L /
                       static_cast<long double>(w.period_us);
    sum += rate / static_cast<long double>(l->capacity_bps);
  }
  return static_cast<double>(sum);
}

}  // namespace tacnet
