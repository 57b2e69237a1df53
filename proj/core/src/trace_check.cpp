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

#include "tacnet/trace_check.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "tacnet/model.hpp"

namespace tacnet {

namespace {

using json = nlohmann::json;

constexpr std::size_t kMaxFailures = 8;

struct Collector {
  PropertyResult result;
  std::size_t checked = 0;

  explicit Collector(std::string name) { result.name = std::move(name); }

  void instance() { ++checked; }

  void fail(const std::string& why) {
    result.passed = false;
    if (result.failures.size() < kMaxFailures) result.failures.push_back(why);
  }

  PropertyResult finish() {
    result.vacuous = result.passed && checked == 0;
    return std::move(result);
  }
};

std::string str(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string();
}

std::int64_t num(const json& j, const char* key, std::int64_t fallback = 0) {
  auto it = j.find(key);
  return it != j.end() && it->is_number_integer() ? it->get<std::int64_t>() : fallback;
}

bool flag(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_boolean() && it->get<bool>();
}

// One admitted gate window, in the active set of its link.
struct ActiveWindow {
  std::string stream;
  std::int64_t offset_us = 0;
  std::int64_t duration_us = 0;
  std::int64_t period_us = 0;
};

std::int64_t floor_mod64(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// True when two periodic windows collide. Expands instances over the joint
// hyperperiod when that stays small, otherwise falls back to the residue
// argument: instances of window 1 meet instances of window 2 iff their
// offsets collide modulo gcd of the periods.
bool windows_collide(const ActiveWindow& a, const ActiveWindow& b) {
  if (a.period_us <= 0 || b.period_us <= 0) return false;
  const std::int64_t g = std::gcd(a.period_us, b.period_us);
  const std::int64_t lcm = a.period_us / g * b.period_us;
  const std::int64_t instances = lcm / a.period_us + lcm / b.period_us;
  if (lcm <= 10'000'000 && instances <= 200'000) {
    struct Span {
      std::int64_t begin, end;
    };
    std::vector<Span> spans;
    spans.reserve(static_cast<std::size_t>(instances));
    for (std::int64_t t = a.offset_us; t < lcm + a.offset_us; t += a.period_us) {
      spans.push_back({t, t + a.duration_us});
    }
    for (std::int64_t t = b.offset_us; t < lcm + b.offset_us; t += b.period_us) {
      spans.push_back({t, t + b.duration_us});
    }
    // Wrap every span into [0, lcm); a span crossing the boundary splits.
    std::vector<Span> wrapped;
    for (const Span& s : spans) {
      std::int64_t begin = floor_mod64(s.begin, lcm);
      std::int64_t len = s.end - s.begin;
      if (begin + len <= lcm) {
        wrapped.push_back({begin, begin + len});
      } else {
        wrapped.push_back({begin, lcm});
        wrapped.push_back({0, begin + len - lcm});
      }
    }
    std::sort(wrapped.begin(), wrapped.end(),
              [](const Span& x, const Span& y) { return x.begin < y.begin; });
    for (std::size_t i = 1; i < wrapped.size(); ++i) {
      if (wrapped[i].begin < wrapped[i - 1].end) return true;
    }
    // Identical begins with zero-length gap handled above; also compare heads.
    return false;
  }
  const std::int64_t d1 = floor_mod64(a.offset_us - b.offset_us, g);
  const std::int64_t d2 = floor_mod64(b.offset_us - a.offset_us, g);
  return d1 < b.duration_us || d2 < a.duration_us;
}

}  // namespace

bool TraceVerdict::all_passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed; });
}

const PropertyResult* TraceVerdict::find(const std::string& name) const {
  for (const PropertyResult& p : properties) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

TraceVerdict check_trace(const std::vector<json>& records) {
  Collector ordered("timestamps-ordered");
  Collector no_errors("no-error-records");
  Collector reg_order("registration-ordering");
  Collector monotone("state-monotonicity");
  Collector auth_order("auth-ordering");
  Collector scopes("scope-soundness");
  Collector gates("tsn-gate-non-overlap");
  Collector budgets("budget-additivity");
  Collector urllc("urllc-bound");
  Collector replay("replay-latency");

  std::int64_t prev_time = std::numeric_limits<std::int64_t>::min();
  std::int64_t prev_seq = -1;

  std::map<std::string, std::string> last_state;  // device -> latest state name

  // Step ranks for the registration message flow; retries repeat a rank.
  const std::map<std::string, int> step_rank = {
      {"radio_attach_req", 1}, {"radio_attach_resp", 2}, {"authz_req", 3},
      {"authz_resp", 4},       {"config_fetch_req", 5},  {"config_resp", 6},
      {"cuc_register_req", 7}, {"cuc_resp", 8},          {"tsn_ready", 9}};
  std::map<std::string, int> max_rank_seen;  // device -> highest rank so far

  std::map<std::string, std::set<std::string>> granted;  // device -> scopes

  std::map<std::string, std::vector<ActiveWindow>> active;  // link -> windows

  struct FinalFrame {
    std::int64_t time;
    std::string use_case;
    std::string listener;
    std::int64_t observed;
    std::int64_t planned;
    std::int64_t committed;
  };
  std::vector<FinalFrame> finals;
  std::vector<std::pair<std::int64_t, std::string>> violations;  // (time, use case)

  for (const json& rec : records) {
    if (!rec.is_object()) continue;
    const std::string kind = str(rec, "kind");
    if (kind == "header") continue;

    const std::int64_t time = num(rec, "time");
    const std::int64_t seq = num(rec, "seq", -1);
    ordered.instance();
    if (time < prev_time) {
      ordered.fail("time " + std::to_string(time) + " after " + std::to_string(prev_time));
    }
    if (seq <= prev_seq) {
      ordered.fail("seq " + std::to_string(seq) + " not above " + std::to_string(prev_seq));
    }
    prev_time = std::max(prev_time, time);
    prev_seq = std::max(prev_seq, seq);

    if (kind == "error") {
      no_errors.instance();
      no_errors.fail("error at t=" + std::to_string(time) + ": " + str(rec, "reason"));
      continue;
    }
    no_errors.instance();

    if (kind == "state") {
      const std::string device = str(rec, "device");
      const std::string old_state = str(rec, "old_state");
      const std::string new_state = str(rec, "new_state");
      reg_order.instance();
      auto it = last_state.find(device);
      const std::string expected = it == last_state.end() ? "Unprovisioned" : it->second;
      if (old_state != expected) {
        reg_order.fail("device " + device + " moved from " + old_state + " but was " + expected);
      }
      auto from = registration_state_from_string(old_state);
      auto to = registration_state_from_string(new_state);
      monotone.instance();
      if (!from || !to) {
        monotone.fail("device " + device + " has unknown state name");
      } else if (*to == RegistrationState::Rejected) {
        // Any state may fall to Rejected.
      } else if (*from == RegistrationState::Rejected) {
        if (*to != RegistrationState::Provisioned) {
          monotone.fail("device " + device + " left Rejected to " + new_state);
        }
      } else if (state_progress(*to) <= state_progress(*from)) {
        monotone.fail("device " + device + " regressed " + old_state + " -> " + new_state);
      }
      last_state[device] = new_state;
      // A fresh provisioning restarts the message flow and the grants.
      if (to && *to == RegistrationState::Provisioned) {
        max_rank_seen[device] = 0;
        granted[device].clear();
      }
      continue;
    }

    if (kind == "deliver") {
      const json& payload = rec.value("payload", json::object());
      const std::string tag = str(rec, "payload_tag");
      const std::string device = str(payload, "device");

      auto rank_it = step_rank.find(tag);
      if (rank_it != step_rank.end() && !device.empty()) {
        auth_order.instance();
        int& seen = max_rank_seen[device];
        if (rank_it->second > seen + 1) {
          auth_order.fail("device " + device + " reached " + tag + " skipping steps (rank " +
                          std::to_string(rank_it->second) + " after " + std::to_string(seen) +
                          ")");
        }
        seen = std::max(seen, rank_it->second);
      }

      if (tag == "authz_resp" && flag(payload, "granted")) {
        std::set<std::string>& s = granted[device];
        if (payload.contains("scope") && payload["scope"].is_array()) {
          for (const auto& e : payload["scope"]) {
            if (e.is_string()) s.insert(e.get<std::string>());
          }
        }
      }
      if (tag == "config_resp" && flag(payload, "ok")) {
        scopes.instance();
        if (!granted[device].count("config-server")) {
          scopes.fail("device " + device + " got config without config-server scope");
        }
      }
      if (tag == "cuc_resp" && flag(payload, "ok")) {
        scopes.instance();
        if (!granted[device].count("cuc")) {
          scopes.fail("device " + device + " registered at CUC without cuc scope");
        }
      }
      if (tag == "stream_frame" && flag(payload, "final")) {
        FinalFrame f;
        f.time = time;
        f.use_case = str(payload, "use_case");
        f.listener = str(payload, "listener");
        f.observed = time - num(payload, "departed_at_us");
        f.planned = num(payload, "planned_us", -1);
        f.committed = num(payload, "committed_us", -1);
        finals.push_back(std::move(f));
      }
      continue;
    }

    if (kind == "mark") {
      const std::string tag = str(rec, "payload_tag");
      const json& payload = rec.value("payload", json::object());
      if (tag == "cnc_admitted") {
        const std::string stream = str(payload, "stream");
        const std::int64_t period = num(payload, "period_us");
        if (payload.contains("windows") && payload["windows"].is_array()) {
          for (const auto& w : payload["windows"]) {
            ActiveWindow win;
            win.stream = stream;
            win.offset_us = num(w, "offset_us");
            win.duration_us = num(w, "duration_us");
            win.period_us = period;
            const std::string link = str(w, "link");
            // Every new window must clear everything already on the link.
            for (const ActiveWindow& other : active[link]) {
              gates.instance();
              if (windows_collide(win, other)) {
                gates.fail("link " + link + ": stream " + stream + " window [" +
                           std::to_string(win.offset_us) + "+" +
                           std::to_string(win.duration_us) + " mod " +
                           std::to_string(win.period_us) + ") collides with stream " +
                           other.stream);
              }
            }
            if (active[link].empty()) gates.instance();
            active[link].push_back(win);
          }
        }
      } else if (tag == "stream_released") {
        const std::string stream = str(payload, "stream");
        for (auto& [link, windows] : active) {
          windows.erase(std::remove_if(windows.begin(), windows.end(),
                                       [&](const ActiveWindow& w) { return w.stream == stream; }),
                        windows.end());
        }
      } else if (tag == "provision_active") {
        const std::int64_t total = num(payload, "total_latency_us");
        const std::int64_t qos_max = num(payload, "qos_max_latency_us");
        budgets.instance();
        std::int64_t max_chain = 0;
        bool chains_ok = true;
        if (payload.contains("budgets") && payload["budgets"].is_object()) {
          for (auto it = payload["budgets"].begin(); it != payload["budgets"].end(); ++it) {
            std::int64_t sum = 0;
            for (const auto& b : it.value()) sum += num(b, "latency_us");
            max_chain = std::max(max_chain, sum);
            if (sum > qos_max) {
              chains_ok = false;
              budgets.fail("use case " + str(payload, "use_case") + " listener " + it.key() +
                           " chain sums to " + std::to_string(sum) + " above bound " +
                           std::to_string(qos_max));
            }
          }
        }
        if (chains_ok && total != max_chain) {
          budgets.fail("use case " + str(payload, "use_case") + " total " +
                       std::to_string(total) + " != max chain " + std::to_string(max_chain));
        }
        if (str(payload, "group") == "LocalControl") {
          urllc.instance();
          if (total >= 5'000) {
            urllc.fail("use case " + str(payload, "use_case") + " committed " +
                       std::to_string(total) + " us, bound is 5000 us");
          }
        }
      } else if (tag == "qos_violation") {
        violations.emplace_back(time, str(payload, "use_case"));
      }
      continue;
    }
  }

  for (const FinalFrame& f : finals) {
    replay.instance();
    if (f.planned >= 0 && f.observed != f.planned) {
      replay.fail("use case " + f.use_case + " listener " + f.listener + " observed " +
                  std::to_string(f.observed) + " us, planned " + std::to_string(f.planned));
    }
    if (f.committed >= 0 && f.observed > f.committed) {
      const bool flagged =
          std::any_of(violations.begin(), violations.end(), [&](const auto& v) {
            return v.second == f.use_case && v.first >= f.time;
          });
      if (!flagged) {
        replay.fail("use case " + f.use_case + " exceeded commitment (" +
                    std::to_string(f.observed) + " > " + std::to_string(f.committed) +
                    " us) with no violation recorded");
      }
    }
  }

  TraceVerdict verdict;
  verdict.properties.push_back(ordered.finish());
  verdict.properties.push_back(no_errors.finish());
  verdict.properties.push_back(reg_order.finish());
  verdict.properties.push_back(monotone.finish());
  verdict.properties.push_back(auth_order.finish());
  verdict.properties.push_back(scopes.finish());
  verdict.properties.push_back(gates.finish());
  verdict.properties.push_back(budgets.finish());
  verdict.properties.push_back(urllc.finish());
  verdict.properties.push_back(replay.finish());
  return verdict;
}

std::variant<TraceVerdict, std::string> check_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "cannot open '" + path + "'";
  std::vector<json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      return "'" + path + "' line " + std::to_string(lineno) + ": not valid JSON";
    }
    records.push_back(std::move(rec));
  }
  return check_trace(records);
}

std::string format_verdict(const TraceVerdict& verdict) {
  std::ostringstream out;
  for (const PropertyResult& p : verdict.properties) {
    if (p.passed) {
      out << "PASS " << p.name << (p.vacuous ? " (vacuous)" : "") << "\n";
    } else {
      out << "FAIL " << p.name;
      if (!p.failures.empty()) out << ": " << p.failures.front();
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace tacnet
