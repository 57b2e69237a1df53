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

#include "tacnet/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tacnet {

namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

bool write_file(const std::string& path, const std::string& body,
                std::vector<std::string>& problems) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    problems.push_back("cannot write '" + path + "'");
    return false;
  }
  out << body;
  return out.good();
}

std::string audit_to_jsonl(const std::vector<AuditRecord>& audit, std::uint64_t seed) {
  std::ostringstream out;
  out << json{{"kind", "header"},
              {"format", "tacnet-audit"},
              {"version", kFormatVersion},
              {"seed", seed}}
             .dump()
      << "\n";
  for (const AuditRecord& rec : audit) {
    out << to_json(rec).dump() << "\n";
  }
  return out.str();
}

std::string metrics_to_jsonl(const json& metrics, std::uint64_t seed) {
  std::ostringstream out;
  out << json{{"kind", "header"},
              {"format", "tacnet-metrics"},
              {"version", kFormatVersion},
              {"seed", seed}}
             .dump()
      << "\n";
  for (const json& entry : metrics) {
    out << entry.dump() << "\n";
  }
  return out.str();
}

json flatten_metrics(const json& report, const Engine& engine, const Trace& trace) {
  json lines = json::array();
  if (report.contains("use_cases")) {
    for (auto it = report["use_cases"].begin(); it != report["use_cases"].end(); ++it) {
      json entry = it.value();
      entry["kind"] = "use_case";
      entry["name"] = it.key();
      lines.push_back(std::move(entry));
    }
  }
  if (report.contains("links")) {
    for (auto it = report["links"].begin(); it != report["links"].end(); ++it) {
      json entry = it.value();
      entry["kind"] = "link";
      entry["id"] = it.key();
      lines.push_back(std::move(entry));
    }
  }
  if (report.contains("devices")) {
    for (auto it = report["devices"].begin(); it != report["devices"].end(); ++it) {
      json entry = it.value();
      entry["kind"] = "device";
      entry["id"] = it.key();
      lines.push_back(std::move(entry));
    }
  }
  if (report.contains("sync")) {
    json entry = report["sync"];
    entry["kind"] = "sync";
    lines.push_back(std::move(entry));
  }
  const Engine::Counters& c = engine.counters();
  lines.push_back(json{{"kind", "engine"},
                       {"scheduled", c.scheduled},
                       {"delivered", c.delivered},
                       {"dropped", c.dropped},
                       {"final_time_us", engine.now()},
                       {"trace_records", trace.size()}});
  return lines;
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace, std::uint64_t seed) {
  std::ostringstream out;
  out << json{{"kind", "header"},
              {"format", "tacnet-trace"},
              {"version", kFormatVersion},
              {"seed", seed}}
             .dump()
      << "\n";
  for (const TraceRecord& rec : trace) {
    out << to_json(rec).dump() << "\n";
  }
  return out.str();
}

namespace {

RunOutcome run_scenario_text(const std::string& text, const RunOptions& opts);

}  // namespace

RunOutcome run_scenario_json(const json& doc, const RunOptions& opts) {
  return run_scenario_text(doc.dump(), opts);
}

namespace {

RunOutcome run_scenario_text(const std::string& text, const RunOptions& opts) {
  RunOutcome out;
  auto parsed = parse_scenario(text);
  if (auto* errors = std::get_if<std::vector<ScenarioError>>(&parsed)) {
    out.exit_code = 2;
    for (const ScenarioError& e : *errors) {
      out.problems.push_back(e.path + ": " + e.message);
    }
    out.summary = {{"format_version", kFormatVersion},
                   {"result", "parse_error"},
                   {"problems", out.problems}};
    return out;
  }
  out.scenario = std::move(std::get<Scenario>(parsed));
  if (opts.seed_override) out.scenario.seed = *opts.seed_override;
  if (opts.horizon_override) out.scenario.horizon_us = *opts.horizon_override;

  Engine engine(&out.scenario.graph, out.scenario.seed);
  MultiDomainManager manager(engine, out.scenario);
  manager.initialize();
  for (const FaultSpec& fault : out.scenario.faults) {
    engine.inject_fault(fault);
  }
  manager.schedule_all();
  engine.run_until(out.scenario.horizon_us);

  out.trace = engine.trace();
  out.audit = manager.security().audit().records();
  auto first_bad = AuditLog::verify_chain(out.audit);
  out.audit_ok = !first_bad.has_value();
  if (!out.audit_ok) {
    out.problems.push_back("audit chain broken at index " + std::to_string(*first_bad));
  }

  std::vector<json> records;
  records.reserve(out.trace.size());
  for (const TraceRecord& rec : out.trace) records.push_back(to_json(rec));
  out.verdict = check_trace(records);
  for (const PropertyResult& p : out.verdict.properties) {
    if (!p.passed) {
      out.problems.push_back("trace property " + p.name + " failed" +
                             (p.failures.empty() ? "" : ": " + p.failures.front()));
    }
  }

  manager.check_expectations(out.expectation_mismatches);
  for (const std::string& m : out.expectation_mismatches) {
    out.problems.push_back("expectation: " + m);
  }

  out.metrics = flatten_metrics(manager.qos_report(), engine, out.trace);

  json properties = json::object();
  for (const PropertyResult& p : out.verdict.properties) {
    properties[p.name] = !p.passed ? "fail" : (p.vacuous ? "pass (vacuous)" : "pass");
  }
  out.exit_code = out.problems.empty() ? 0 : 1;
  out.summary = {{"format_version", kFormatVersion},
                 {"result", out.exit_code == 0 ? "ok" : "check_failed"},
                 {"seed", out.scenario.seed},
                 {"horizon_us", out.scenario.horizon_us},
                 {"scenario",
                  {{"nodes", out.scenario.graph.nodes().size()},
                   {"links", out.scenario.graph.links().size()},
                   {"devices", out.scenario.devices.size()},
                   {"use_cases", out.scenario.use_cases.size()},
                   {"faults", out.scenario.faults.size()}}},
                 {"engine",
                  {{"scheduled", engine.counters().scheduled},
                   {"delivered", engine.counters().delivered},
                   {"dropped", engine.counters().dropped},
                   {"final_time_us", engine.now()},
                   {"trace_records", out.trace.size()}}},
                 {"checks",
                  {{"trace_properties", std::move(properties)},
                   {"expectation_mismatches", out.expectation_mismatches},
                   {"audit_chain", out.audit_ok ? "intact" : "broken"},
                   {"audit_records", out.audit.size()}}},
                 {"problems", out.problems}};

  if (!opts.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) {
      out.problems.push_back("cannot create '" + opts.out_dir + "': " + ec.message());
      out.exit_code = 2;
      return out;
    }
    const std::filesystem::path dir(opts.out_dir);
    bool ok = write_file((dir / "trace.jsonl").string(),
                         trace_to_jsonl(out.trace, out.scenario.seed), out.problems);
    ok = write_file((dir / "audit.jsonl").string(), audit_to_jsonl(out.audit, out.scenario.seed),
                    out.problems) &&
         ok;
    ok = write_file((dir / "metrics.jsonl").string(),
                    metrics_to_jsonl(out.metrics, out.scenario.seed), out.problems) &&
         ok;
    ok = write_file((dir / "summary.json").string(), out.summary.dump(2) + "\n", out.problems) &&
         ok;
    if (!ok) out.exit_code = 2;
  }
  return out;
}

}  // namespace

RunOutcome run_scenario_file(const std::string& path, const RunOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    RunOutcome out;
    out.exit_code = 2;
    out.problems.push_back("cannot open '" + path + "'");
    out.summary = {{"format_version", kFormatVersion},
                   {"result", "io_error"},
                   {"problems", out.problems}};
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_scenario_text(buf.str(), opts);
}

}  // namespace tacnet
