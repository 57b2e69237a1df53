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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tacnet/runner.hpp"
#include "tacnet/scenario.hpp"
#include "tacnet/trace_check.hpp"

namespace {

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<std::int64_t> horizon) {
  tacnet::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed_override = seed;
  if (horizon) opts.horizon_override = *horizon;
  tacnet::RunOutcome outcome = tacnet::run_scenario_file(scenario_path, opts);
  if (outcome.exit_code == 2) {
    for (const std::string& p : outcome.problems) std::cerr << "error: " << p << "\n";
    return 2;
  }
  std::cout << "scenario: " << scenario_path << "\n"
            << "seed: " << outcome.scenario.seed << "\n"
            << "horizon_us: " << outcome.scenario.horizon_us << "\n"
            << "trace_records: " << outcome.trace.size() << "\n"
            << "audit_chain: " << (outcome.audit_ok ? "intact" : "broken") << "\n";
  std::cout << tacnet::format_verdict(outcome.verdict);
  for (const std::string& m : outcome.expectation_mismatches) {
    std::cout << "FAIL expectation: " << m << "\n";
  }
  if (!out_dir.empty()) std::cout << "artifacts: " << out_dir << "\n";
  std::cout << (outcome.exit_code == 0 ? "result: ok" : "result: check_failed") << "\n";
  return outcome.exit_code;
}

int cmd_check(const std::string& trace_path) {
  auto result = tacnet::check_trace_file(trace_path);
  if (auto* err = std::get_if<std::string>(&result)) {
    std::cerr << "error: " << *err << "\n";
    return 2;
  }
  const tacnet::TraceVerdict& verdict = std::get<tacnet::TraceVerdict>(result);
  std::cout << tacnet::format_verdict(verdict);
  return verdict.all_passed() ? 0 : 1;
}

int cmd_validate(const std::string& scenario_path, bool canonical) {
  std::ifstream in(scenario_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << scenario_path << "'\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto parsed = tacnet::parse_scenario(buf.str());
  if (auto* errors = std::get_if<std::vector<tacnet::ScenarioError>>(&parsed)) {
    std::cerr << tacnet::format_errors(*errors);
    return 2;
  }
  if (canonical) {
    std::cout << tacnet::serialize_scenario(std::get<tacnet::Scenario>(parsed)).dump(2) << "\n";
  } else {
    std::cout << "valid\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic industrial network control plane simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  auto* run = app.add_subcommand("run", "Simulate a scenario and check it");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Directory for trace/audit/metrics/summary artifacts");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--horizon", horizon, "Override the horizon (microseconds)");

  std::string trace_path;
  auto* check = app.add_subcommand("check", "Check trace properties on a recorded trace");
  check->add_option("trace", trace_path, "Trace JSON-lines file")->required();

  std::string validate_path;
  bool canonical = false;
  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("scenario", validate_path, "Scenario JSON file")->required();
  validate->add_flag("--canonical", canonical, "Print the canonical serialized form");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(scenario_path, out_dir, seed, horizon);
  if (check->parsed()) return cmd_check(trace_path);
  if (validate->parsed()) return cmd_validate(validate_path, canonical);
  return 2;
}
