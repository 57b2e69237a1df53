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
#include <optional>
#include <string>
#include <vector>

#include "tacnet/orchestrator.hpp"
#include "tacnet/scenario.hpp"
#include "tacnet/security.hpp"
#include "tacnet/sim.hpp"
#include "tacnet/trace_check.hpp"

namespace tacnet {

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<Micros> horizon_override;
  // When set, artifacts are written here: trace.jsonl, audit.jsonl,
  // metrics.jsonl, summary.json. Created if missing.
  std::string out_dir;
};

// Everything one simulation run produces. Exit codes: 0 all checks green,
// 1 a check failed (trace property, expectation, audit chain), 2 the input
// could not be parsed or artifacts could not be written.
struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> problems;  // human-readable, empty on success

  Scenario scenario;  // effective scenario after overrides
  Trace trace;
  std::vector<AuditRecord> audit;
  bool audit_ok = true;
  TraceVerdict verdict;
  std::vector<std::string> expectation_mismatches;
  nlohmann::json metrics;  // one entry per use case / link / device / engine
  nlohmann::json summary;
};

// Parses, simulates to the horizon, verifies the audit chain, runs the trace
// properties, checks scenario expectations, and optionally writes artifacts.
RunOutcome run_scenario_json(const nlohmann::json& doc, const RunOptions& opts = {});
RunOutcome run_scenario_file(const std::string& path, const RunOptions& opts = {});

// Serializes trace records to JSON lines with a leading header line.
std::string trace_to_jsonl(const Trace& trace, std::uint64_t seed);

}  // namespace tacnet
