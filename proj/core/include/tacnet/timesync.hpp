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
#include <variant>
#include <vector>

#include "tacnet/routing.hpp"
#include "tacnet/sim.hpp"

namespace tacnet {

// A node's clock: the true offset from the virtual (global) clock is scenario
// input; the estimate is what the sync protocol recovers.
struct ClockState {
  NodeId node;
  Micros true_offset_us = 0;
  std::optional<Micros> estimated_offset_us;  // relative to the reference clock
};

class ClockTable {
 public:
  void set_true_offset(const NodeId& node, Micros offset_us) {
    clocks_[node].node = node;
    clocks_[node].true_offset_us = offset_us;
  }
  Micros true_offset(const NodeId& node) const {
    auto it = clocks_.find(node);
    return it == clocks_.end() ? 0 : it->second.true_offset_us;
  }
  ClockState& state(const NodeId& node) {
    auto& st = clocks_[node];
    if (st.node.empty()) st.node = node;
    return st;
  }
  const std::map<NodeId, ClockState>& clocks() const { return clocks_; }

 private:
  std::map<NodeId, ClockState> clocks_;
};

struct SyncTimeout { std::string reason; };

// Two-way exchange between client and server clocks over the given paths.
// Returns the client's estimate of (server clock - client clock), computed as
// ((t1 - t0) + (t2 - t3)) / 2 with integer division truncating toward zero.
// Exact when both directions take equally long; with asymmetric delays the
// error stays within ceil(|d_fwd - d_back| / 2).
using ExchangeResult = std::variant<Micros, SyncTimeout>;

ExchangeResult timesync_exchange(Engine& engine, ClockTable& clocks, const NodeId& client,
                                 const NodeId& server, const std::vector<LinkId>& to_server,
                                 const std::vector<LinkId>& to_client,
                                 Micros server_processing_us);

struct SyncReport {
  std::map<NodeId, Micros> estimate_us;   // per node, offset vs reference
  std::map<NodeId, Micros> residual_us;   // |estimate - true relative offset|
  std::vector<NodeId> unsynced;           // exchanges that timed out
  Micros max_residual_us = 0;
};

// Runs `rounds` exchanges from every node to the reference and keeps each
// node's last successful estimate. Residuals compare against the true
// relative offsets.
SyncReport sync_all(Engine& engine, const Router& router, ClockTable& clocks,
                    const std::vector<NodeId>& nodes, const NodeId& reference, int rounds,
                    Micros server_processing_us);

// Fixed, scenario-declared positions; a stand-in for the localization service.
struct Position {
  double x = 0;
  double y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

class LocalizationService {
 public:
  void set_position(const NodeId& node, Position p) { positions_[node] = p; }
  std::optional<Position> position(const NodeId& node) const {
    auto it = positions_.find(node);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<NodeId, Position> positions_;
};

// Spectrum management stand-in: announces itself once so traces show the
// service is wired in.
void spectrum_heartbeat(Engine& engine);

}  // namespace tacnet
