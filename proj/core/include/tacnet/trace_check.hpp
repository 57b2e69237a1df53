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

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tacnet {

// Outcome of one named property over a trace. A property that never found an
// instance to check passes vacuously; callers that expected coverage should
// treat `vacuous` as a warning.
struct PropertyResult {
  std::string name;
  bool passed = true;
  bool vacuous = false;
  std::vector<std::string> failures;  // capped; one line per counterexample
};

struct TraceVerdict {
  std::vector<PropertyResult> properties;
  bool all_passed() const;
  const PropertyResult* find(const std::string& name) const;
};

// Checks structural properties of a recorded trace:
//   timestamps-ordered      records sorted by time, sequence strictly increasing
//   no-error-records        the run recorded no error records
//   registration-ordering   each state change starts where the previous ended
//   state-monotonicity      progress never moves backwards except to Rejected,
//                           and Rejected only recovers to Provisioned
//   auth-ordering           attach, authorization, config, CUC steps happen in
//                           order per device (first occurrences)
//   scope-soundness         config and CUC successes only for devices whose
//                           authorization granted that scope
//   tsn-gate-non-overlap    admitted gate windows on a link never overlap,
//                           checked by expanding instances over the hyperperiod
//   budget-additivity       per-listener budget chains sum to the committed
//                           latency and stay within the profile bound
//   urllc-bound             LocalControl commitments stay under 5 ms
//   replay-latency          delivered final frames arrive exactly when planned,
//                           and any commitment overshoot raises a violation
//
// Records are trace lines as written by the engine; lines with kind "header"
// are ignored.
TraceVerdict check_trace(const std::vector<nlohmann::json>& records);

// Reads a JSON-lines trace file and checks it. Returns an error message if
// the file cannot be read or a line is not valid JSON.
std::variant<TraceVerdict, std::string> check_trace_file(const std::string& path);

// One line per property: "PASS name", "PASS name (vacuous)" or "FAIL name: first failure".
std::string format_verdict(const TraceVerdict& verdict);

}  // namespace tacnet
