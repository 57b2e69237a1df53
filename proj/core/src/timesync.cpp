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

#include "tacnet/timesync.hpp"

#include <cstdlib>

namespace tacnet {

ExchangeResult timesync_exchange(Engine& engine, ClockTable& clocks, const NodeId& client,
                                 const NodeId& server, const std::vector<LinkId>& to_server,
                                 const std::vector<LinkId>& to_client,
                                 Micros server_processing_us) {
  const Micros send = engine.now();
  const Micros theta_c = clocks.true_offset(client);
  const Micros theta_s = clocks.true_offset(server);

  Message req;
  req.src = client;
  req.dst = server;
  req.payload_tag = "sync_req";
  req.payload = {{"t0_us", send + theta_c}};
  DeliverOutcome up = engine.deliver_from(send, std::move(req), to_server);
  if (std::holds_alternative<NoPath>(up)) return SyncTimeout{"no_path"};
  if (std::holds_alternative<DeliverDropped>(up)) return SyncTimeout{"request_dropped"};
  const Micros arrive_server = std::get<Micros>(up);

  const Micros t0 = send + theta_c;
  const Micros t1 = arrive_server + theta_s;
  const Micros reply_at = arrive_server + server_processing_us;
  const Micros t2 = reply_at + theta_s;

  Message resp;
  resp.src = server;
  resp.dst = client;
  resp.payload_tag = "sync_resp";
  resp.payload = {{"t1_us", t1}, {"t2_us", t2}};
  DeliverOutcome down = engine.deliver_from(reply_at, std::move(resp), to_client);
  if (std::holds_alternative<NoPath>(down)) return SyncTimeout{"no_path"};
  if (std::holds_alternative<DeliverDropped>(down)) return SyncTimeout{"response_dropped"};
  const Micros arrive_client = std::get<Micros>(down);
  const Micros t3 = arrive_client + theta_c;

  // Symmetric-delay estimator; integer division truncates toward zero.
  return ((t1 - t0) + (t2 - t3)) / 2;
}

SyncReport sync_all(Engine& engine, const Router& router, ClockTable& clocks,
                    const std::vector<NodeId>& nodes, const NodeId& reference, int rounds,
                    Micros server_processing_us) {
  SyncReport report;
  auto secure = [](const NetworkLink& l) { return l.secure; };
  for (const NodeId& node : nodes) {
    if (node == reference) continue;
    auto up = router.route(node, reference, secure);
    auto down = router.route(reference, node, secure);
    std::optional<Micros> last;
    std::string why = "no_path";
    if (up && down) {
      for (int r = 0; r < rounds; ++r) {
        ExchangeResult res =
            timesync_exchange(engine, clocks, node, reference, *up, *down, server_processing_us);
        if (auto* est = std::get_if<Micros>(&res)) {
          last = *est;
        } else {
          why = std::get<SyncTimeout>(res).reason;
        }
      }
    }
    if (!last) {
      report.unsynced.push_back(node);
      continue;
    }
    report.estimate_us[node] = *last;
    clocks.state(node).estimated_offset_us = *last;
    const Micros truth = clocks.true_offset(reference) - clocks.true_offset(node);
    const Micros residual = std::llabs(*last - truth);
    report.residual_us[node] = residual;
    report.max_residual_us = std::max(report.max_residual_us, residual);
  }
  return report;
}

void spectrum_heartbeat(Engine& engine) {
  engine.mark("spectrum_heartbeat", {{"status", "idle"}, {"managed_bands", nlohmann::json::array()}});
}

}  // namespace tacnet
