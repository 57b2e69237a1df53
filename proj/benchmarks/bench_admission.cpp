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

#include <benchmark/benchmark.h>

#include <string>

#include "tacnet/tsn.hpp"

namespace {

using namespace tacnet;

// Line of TSN bridges with an end device at each bridge.
NetworkGraph line_topology(int bridges) {
  NetworkGraph g;
  g.add_node({"t", NodeKind::EndDevice});
  g.add_node({"b0", NodeKind::TsnBridge});
  g.add_link({"l-t", {"t", "b0"}, 1'000'000'000, 1, Domain::Tsn, true});
  for (int i = 1; i < bridges; ++i) {
    g.add_node({"b" + std::to_string(i), NodeKind::TsnBridge});
    g.add_link({"l" + std::to_string(i), {"b" + std::to_string(i - 1), "b" + std::to_string(i)},
                1'000'000'000, 1, Domain::Tsn, true});
  }
  g.add_node({"d", NodeKind::EndDevice});
  g.add_link({"l-d", {"b" + std::to_string(bridges - 1), "d"}, 1'000'000'000, 1, Domain::Tsn,
              true});
  return g;
}

void BM_AdmitStreams(benchmark::State& state) {
  const int streams = static_cast<int>(state.range(0));
  NetworkGraph g = line_topology(8);
  for (auto _ : state) {
    Cnc cnc(&g);
    int admitted = 0;
    for (int i = 0; i < streams; ++i) {
      StreamRequest req;
      req.stream_id = "s" + std::to_string(i);
      req.talker = "t";
      req.listeners = {"d"};
      req.period_us = 1'000 + (i % 4) * 1'000;
      req.frame_bytes = 125;
      req.max_e2e_latency_us = 1'000'000;
      req.priority = i % 8;
      auto result = cnc.admit(req, 0, {});
      if (std::holds_alternative<StreamReservation>(result)) ++admitted;
    }
    benchmark::DoNotOptimize(admitted);
  }
  state.SetItemsProcessed(state.iterations() * streams);
}
BENCHMARK(BM_AdmitStreams)->Arg(16)->Arg(64)->Arg(200);

void BM_AdmitRelease(benchmark::State& state) {
  NetworkGraph g = line_topology(4);
  Cnc cnc(&g);
  StreamRequest req;
  req.talker = "t";
  req.listeners = {"d"};
  req.period_us = 1'000;
  req.frame_bytes = 125;
  req.max_e2e_latency_us = 1'000'000;
  int i = 0;
  for (auto _ : state) {
    req.stream_id = "s" + std::to_string(i++);
    auto result = cnc.admit(req, 0, {});
    benchmark::DoNotOptimize(result);
    cnc.release(req.stream_id);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AdmitRelease);

}  // namespace
