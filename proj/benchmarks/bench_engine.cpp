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

#include "tacnet/sim.hpp"

namespace {

using namespace tacnet;

NetworkGraph pair_topology() {
  NetworkGraph g;
  g.add_node({"a", NodeKind::EndDevice});
  g.add_node({"b", NodeKind::EndDevice});
  g.add_link({"ab", {"a", "b"}, 1'000'000'000, 1, Domain::IndustrialEthernet, true});
  return g;
}

void BM_DeliverDrain(benchmark::State& state) {
  const int messages = static_cast<int>(state.range(0));
  NetworkGraph g = pair_topology();
  for (auto _ : state) {
    Engine engine(&g, 42);
    engine.set_handler("b", [](const SimEvent&) {});
    for (int i = 0; i < messages; ++i) {
      Message m;
      m.src = "a";
      m.dst = "b";
      m.payload_tag = "tick";
      m.payload = {{"i", i}};
      m.frame_bits = 1000;
      engine.deliver_from(i, std::move(m), {"ab"});
    }
    engine.run_until(messages + 10);
    benchmark::DoNotOptimize(engine.trace().size());
  }
  state.SetItemsProcessed(state.iterations() * messages);
}
BENCHMARK(BM_DeliverDrain)->Arg(1'000)->Arg(10'000);

void BM_CallbackChurn(benchmark::State& state) {
  NetworkGraph g = pair_topology();
  for (auto _ : state) {
    Engine engine(&g, 7);
    long hits = 0;
    for (int i = 0; i < 1'000; ++i) {
      engine.schedule_callback(i, [&hits]() { ++hits; });
    }
    engine.run_until(2'000);
    benchmark::DoNotOptimize(hits);
  }
  state.SetItemsProcessed(state.iterations() * 1'000);
}
BENCHMARK(BM_CallbackChurn);

}  // namespace

BENCHMARK_MAIN();
