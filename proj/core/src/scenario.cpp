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

#include "tacnet/scenario.hpp"

#include <algorithm>
#include <sstream>

#include "tacnet/routing.hpp"
#include "tacnet/security.hpp"

namespace tacnet {

namespace {

using json = nlohmann::json;

class Errors {
 public:
  void add(std::string path, std::string message) {
    list_.push_back({std::move(path), std::move(message)});
  }
  bool any() const { return !list_.empty(); }
  std::vector<ScenarioError> take() { return std::move(list_); }

 private:
  std::vector<ScenarioError> list_;
};

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

bool require_object(const json& j, const std::string& path, Errors& errs) {
  if (j.is_object()) return true;
  errs.add(path, "expected an object");
  return false;
}

const json* get_field(const json& j, const std::string& path, const std::string& key,
                      bool required, Errors& errs) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) errs.add(path + "." + key, "missing required field");
    return nullptr;
  }
  return &*it;
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       bool required, Errors& errs, const std::string& fallback = {}) {
  const json* f = get_field(j, path, key, required, errs);
  if (!f) return fallback;
  if (!f->is_string()) {
    errs.add(path + "." + key, "expected a string");
    return fallback;
  }
  return f->get<std::string>();
}

std::int64_t get_int(const json& j, const std::string& path, const std::string& key,
                     bool required, Errors& errs, std::int64_t fallback = 0) {
  const json* f = get_field(j, path, key, required, errs);
  if (!f) return fallback;
  if (!f->is_number_integer() && !f->is_number_unsigned()) {
    errs.add(path + "." + key, "expected an integer");
    return fallback;
  }
  return f->get<std::int64_t>();
}

double get_number(const json& j, const std::string& path, const std::string& key,
                  bool required, Errors& errs, double fallback = 0.0) {
  const json* f = get_field(j, path, key, required, errs);
  if (!f) return fallback;
  if (!f->is_number()) {
    errs.add(path + "." + key, "expected a number");
    return fallback;
  }
  return f->get<double>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key, bool required,
              Errors& errs, bool fallback = false) {
  const json* f = get_field(j, path, key, required, errs);
  if (!f) return fallback;
  if (!f->is_boolean()) {
    errs.add(path + "." + key, "expected a boolean");
    return fallback;
  }
  return f->get<bool>();
}

TrafficSpec parse_traffic(const json& j, const std::string& path, Errors& errs) {
  if (!j.is_object()) {
    errs.add(path, "expected an object");
    return PeriodicTraffic{};
  }
  std::string type = get_string(j, path, "type", true, errs);
  if (type == "periodic") {
    PeriodicTraffic t;
    t.period_us = get_int(j, path, "period_us", true, errs);
    t.frame_bytes = get_int(j, path, "frame_bytes", true, errs);
    if (t.period_us <= 0) errs.add(path + ".period_us", "period must be positive");
    if (t.frame_bytes <= 0) errs.add(path + ".frame_bytes", "frame size must be positive");
    return t;
  }
  if (type == "bursty") {
    BurstyTraffic t;
    t.mean_rate_bps = get_int(j, path, "mean_rate_bps", true, errs);
    if (t.mean_rate_bps <= 0) errs.add(path + ".mean_rate_bps", "rate must be positive");
    return t;
  }
  if (!type.empty()) errs.add(path + ".type", "unknown traffic type '" + type + "'");
  return PeriodicTraffic{};
}

// Overlay: start from `base` (the group default) and replace any field that
// is spelled out. For use cases without a default, all fields are required.
QoSProfile parse_qos(const json& j, const std::string& path, std::optional<QoSProfile> base,
                     Errors& errs) {
  QoSProfile q = base.value_or(QoSProfile{});
  const bool require_all = !base.has_value();
  if (!j.is_object()) {
    errs.add(path, "expected an object");
    return q;
  }
  if (j.contains("max_e2e_latency_us") || require_all)
    q.max_e2e_latency_us = get_int(j, path, "max_e2e_latency_us", require_all, errs,
                                   q.max_e2e_latency_us);
  if (j.contains("min_throughput_bps") || require_all)
    q.min_throughput_bps = get_int(j, path, "min_throughput_bps", require_all, errs,
                                   q.min_throughput_bps);
  if (j.contains("reliability_target") || require_all)
    q.reliability_target = get_number(j, path, "reliability_target", require_all, errs,
                                      q.reliability_target);
  if (j.contains("priority") || require_all)
    q.priority = static_cast<int>(get_int(j, path, "priority", require_all, errs, q.priority));
  if (j.contains("traffic")) {
    q.traffic = parse_traffic(j["traffic"], path + ".traffic", errs);
  } else if (require_all) {
    errs.add(path + ".traffic", "missing required field");
  }
  if (q.max_e2e_latency_us <= 0) errs.add(path + ".max_e2e_latency_us", "must be positive");
  if (q.min_throughput_bps <= 0) errs.add(path + ".min_throughput_bps", "must be positive");
  if (q.reliability_target < 0.0 || q.reliability_target > 1.0)
    errs.add(path + ".reliability_target", "must lie in [0, 1]");
  return q;
}

json traffic_to_json(const TrafficSpec& t) {
  if (const auto* p = std::get_if<PeriodicTraffic>(&t)) {
    return {{"type", "periodic"}, {"period_us", p->period_us}, {"frame_bytes", p->frame_bytes}};
  }
  const auto& b = std::get<BurstyTraffic>(t);
  return {{"type", "bursty"}, {"mean_rate_bps", b.mean_rate_bps}};
}

json qos_to_json(const QoSProfile& q) {
  return {{"max_e2e_latency_us", q.max_e2e_latency_us},
          {"min_throughput_bps", q.min_throughput_bps},
          {"reliability_target", q.reliability_target},
          {"priority", q.priority},
          {"traffic", traffic_to_json(q.traffic)}};
}

void parse_graph(const json& j, Scenario& s, Errors& errs) {
  if (!require_object(j, "graph", errs)) return;
  std::map<std::string, std::size_t> node_at;
  std::map<std::string, std::size_t> link_at;
  if (const json* nodes = get_field(j, "graph", "nodes", true, errs)) {
    if (!nodes->is_array()) {
      errs.add("graph.nodes", "expected an array");
    } else {
      for (std::size_t i = 0; i < nodes->size(); ++i) {
        const std::string path = idx("graph.nodes", i);
        const json& n = (*nodes)[i];
        if (!require_object(n, path, errs)) continue;
        NetworkNode node;
        node.id = get_string(n, path, "id", true, errs);
        std::string kind = get_string(n, path, "kind", true, errs);
        std::string domain = get_string(n, path, "domain", true, errs);
        if (auto k = node_kind_from_string(kind)) {
          node.kind = *k;
        } else if (!kind.empty()) {
          errs.add(path + ".kind", "unknown node kind '" + kind + "'");
        }
        if (auto d = domain_from_string(domain)) {
          node.domain = *d;
        } else if (!domain.empty()) {
          errs.add(path + ".domain", "unknown domain '" + domain + "'");
        }
        if (node.id.empty()) continue;
        if (auto [it, fresh] = node_at.emplace(node.id, i); !fresh) {
          errs.add(path + ".id", "duplicate node id '" + node.id + "', first declared at " +
                                     idx("graph.nodes", it->second));
          continue;
        }
        s.graph.add_node(std::move(node));
      }
    }
  }
  if (const json* links = get_field(j, "graph", "links", true, errs)) {
    if (!links->is_array()) {
      errs.add("graph.links", "expected an array");
    } else {
      for (std::size_t i = 0; i < links->size(); ++i) {
        const std::string path = idx("graph.links", i);
        const json& l = (*links)[i];
        if (!require_object(l, path, errs)) continue;
        NetworkLink link;
        link.id = get_string(l, path, "id", true, errs);
        if (const json* eps = get_field(l, path, "endpoints", true, errs)) {
          if (!eps->is_array() || eps->size() != 2 || !(*eps)[0].is_string() ||
              !(*eps)[1].is_string()) {
            errs.add(path + ".endpoints", "expected an array of two node ids");
          } else {
            link.endpoints = {(*eps)[0].get<std::string>(), (*eps)[1].get<std::string>()};
          }
        }
        link.capacity_bps = get_int(l, path, "capacity_bps", true, errs);
        link.propagation_us = get_int(l, path, "propagation_us", true, errs);
        std::string domain = get_string(l, path, "domain", true, errs);
        if (auto d = domain_from_string(domain)) {
          link.domain = *d;
        } else if (!domain.empty()) {
          errs.add(path + ".domain", "unknown domain '" + domain + "'");
        }
        link.secure = get_bool(l, path, "secure", false, errs, true);
        if (link.id.empty()) continue;
        if (auto [it, fresh] = link_at.emplace(link.id, i); !fresh) {
          errs.add(path + ".id", "duplicate link id '" + link.id + "', first declared at " +
                                     idx("graph.links", it->second));
          continue;
        }
        s.graph.add_link(std::move(link));
      }
    }
  }
  // Structural checks over the assembled graph, mapped back to their input
  // positions.
  for (const GraphViolation& v : validate_graph(s.graph)) {
    auto it = link_at.find(v.subject);
    std::string path = it == link_at.end() ? "graph" : idx("graph.links", it->second);
    if (v.endpoint >= 0 && it != link_at.end()) {
      path += ".endpoints[" + std::to_string(v.endpoint) + "]";
    }
    errs.add(std::move(path), v.message);
  }
}

void parse_services(const json& j, Scenario& s, Errors& errs) {
  if (!require_object(j, "services", errs)) return;
  s.services.config_server = get_string(j, "services", "config_server", true, errs);
  s.services.auth_server = get_string(j, "services", "auth_server", true, errs);
  s.services.cuc = get_string(j, "services", "cuc", true, errs);
  s.services.cnc = get_string(j, "services", "cnc", true, errs);
  const std::pair<const char*, const NodeId*> entries[] = {
      {"config_server", &s.services.config_server},
      {"auth_server", &s.services.auth_server},
      {"cuc", &s.services.cuc},
      {"cnc", &s.services.cnc},
  };
  for (auto [key, node] : entries) {
    if (!node->empty() && !s.graph.node(*node)) {
      errs.add(std::string("services.") + key, "unknown node '" + *node + "'");
    }
  }
}

void parse_devices(const json& arr, Scenario& s, Errors& errs) {
  if (!arr.is_array()) {
    errs.add("devices", "expected an array");
    return;
  }
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = idx("devices", i);
    const json& d = arr[i];
    if (!require_object(d, path, errs)) continue;
    DeviceSpec spec;
    spec.device_id = get_string(d, path, "device_id", true, errs);
    spec.dce_id = get_string(d, path, "dce_id", false, errs,
                             spec.device_id.empty() ? "" : spec.device_id + ".dce");
    spec.node = get_string(d, path, "node", true, errs);
    spec.secure_element_id = get_string(d, path, "secure_element_id", true, errs);
    spec.se_secret = get_string(d, path, "se_secret", true, errs);
    spec.presented_se_secret = get_string(d, path, "presented_se_secret", false, errs,
                                          spec.se_secret);
    spec.dte_signature = get_string(d, path, "dte_signature", true, errs);
    spec.presented_dte_signature = get_string(d, path, "presented_dte_signature", false, errs,
                                              spec.dte_signature);
    bool scope_listed = false;
    if (const json* sys = get_field(d, path, "authorized_systems", false, errs)) {
      scope_listed = true;
      if (!sys->is_array()) {
        errs.add(path + ".authorized_systems", "expected an array of strings");
      } else {
        for (const auto& e : *sys) {
          if (e.is_string()) spec.authorized_systems.insert(e.get<std::string>());
          else errs.add(path + ".authorized_systems", "expected an array of strings");
        }
      }
    }
    spec.is_tsn_end_device = get_bool(d, path, "is_tsn_end_device", false, errs, false);
    if (!scope_listed) {
      // Unlisted scope means the operator provisioned the usual systems: every
      // device may fetch its configuration, TSN end devices may also register
      // at the CUC. An explicit empty list still blocks everything.
      spec.authorized_systems.insert(kConfigScope);
      if (spec.is_tsn_end_device) spec.authorized_systems.insert(kCucScope);
    }
    if (const json* settings = get_field(d, path, "settings", false, errs)) {
      if (!settings->is_object()) {
        errs.add(path + ".settings", "expected an object of string values");
      } else {
        for (auto it = settings->begin(); it != settings->end(); ++it) {
          if (it.value().is_string()) spec.settings[it.key()] = it.value().get<std::string>();
          else errs.add(path + ".settings." + it.key(), "expected a string");
        }
      }
    }
    if (d.contains("tsn_transmission_type")) {
      spec.tsn_transmission_type = get_string(d, path, "tsn_transmission_type", false, errs);
    } else if (spec.is_tsn_end_device) {
      spec.tsn_transmission_type = "e2e-stream";
    }
    spec.provision_at_us = get_int(d, path, "provision_at_us", false, errs, 0);
    if (spec.provision_at_us < 0) errs.add(path + ".provision_at_us", "must be non-negative");
    if (d.contains("expect_final")) {
      std::string st = get_string(d, path, "expect_final", false, errs);
      if (auto parsed = registration_state_from_string(st)) {
        spec.expect_final = *parsed;
      } else {
        errs.add(path + ".expect_final", "unknown registration state '" + st + "'");
      }
    }
    if (const json* pos = get_field(d, path, "position", false, errs)) {
      if (!pos->is_array() || pos->size() != 2 || !(*pos)[0].is_number() ||
          !(*pos)[1].is_number()) {
        errs.add(path + ".position", "expected [x, y]");
      } else {
        spec.position = Position{(*pos)[0].get<double>(), (*pos)[1].get<double>()};
      }
    }
    if (!spec.node.empty() && !s.graph.node(spec.node)) {
      errs.add(path + ".node", "unknown node '" + spec.node + "'");
    }
    if (spec.device_id.empty()) continue;
    if (auto [it, fresh] = seen.emplace(spec.device_id, i); !fresh) {
      errs.add(path + ".device_id", "duplicate device_id '" + spec.device_id +
                                        "', first declared at " + idx("devices", it->second));
      continue;
    }
    s.devices.push_back(std::move(spec));
  }
}

void parse_use_cases(const json& arr, Scenario& s, Errors& errs) {
  if (!arr.is_array()) {
    errs.add("use_cases", "expected an array");
    return;
  }
  std::map<std::string, std::size_t> device_at;
  for (std::size_t i = 0; i < s.devices.size(); ++i) device_at[s.devices[i].device_id] = i;
  std::map<std::string, std::size_t> seen;
  Router router(&s.graph);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = idx("use_cases", i);
    const json& u = arr[i];
    if (!require_object(u, path, errs)) continue;
    UseCaseSpec spec;
    spec.name = get_string(u, path, "name", true, errs);
    std::string cls = get_string(u, path, "class", true, errs);
    if (auto c = use_case_class_from_string(cls)) {
      spec.use_case_class = *c;
    } else if (!cls.empty()) {
      errs.add(path + ".class", "unknown use case class '" + cls + "'");
    }
    std::string group = get_string(u, path, "group", false, errs, "None");
    if (auto g = use_case_group_from_string(group)) {
      spec.group = *g;
    } else {
      errs.add(path + ".group", "unknown use case group '" + group + "'");
    }
    if (spec.use_case_class == UseCaseClass::IndustrialApplication &&
        spec.group == UseCaseGroup::None) {
      errs.add(path + ".group", "industrial application use cases need an application group");
    }
    std::optional<QoSProfile> base;
    if (spec.group != UseCaseGroup::None) base = derive_qos_profile(spec.group);
    if (u.contains("qos")) {
      spec.qos = parse_qos(u["qos"], path + ".qos", base, errs);
    } else if (base) {
      spec.qos = *base;
    } else {
      errs.add(path + ".qos", "use cases without an application group need an explicit profile");
    }
    spec.talker = get_string(u, path, "talker", true, errs);
    if (const json* listeners = get_field(u, path, "listeners", true, errs)) {
      if (!listeners->is_array() || listeners->empty()) {
        errs.add(path + ".listeners", "expected a non-empty array of device ids");
      } else {
        for (const auto& e : *listeners) {
          if (e.is_string()) spec.listeners.push_back(e.get<std::string>());
          else errs.add(path + ".listeners", "expected a non-empty array of device ids");
        }
      }
    }
    spec.provision_at_us = get_int(u, path, "provision_at_us", false, errs, 0);
    if (spec.provision_at_us < 0) errs.add(path + ".provision_at_us", "must be non-negative");
    spec.expect_failure = get_bool(u, path, "expect_failure", false, errs, false);

    auto check_device = [&](const DeviceId& id, const std::string& where) -> const DeviceSpec* {
      auto it = device_at.find(id);
      if (it == device_at.end()) {
        if (!id.empty()) errs.add(where, "unknown device '" + id + "'");
        return nullptr;
      }
      return &s.devices[it->second];
    };
    const DeviceSpec* talker = check_device(spec.talker, path + ".talker");
    for (std::size_t li = 0; li < spec.listeners.size(); ++li) {
      const std::string lpath = path + ".listeners[" + std::to_string(li) + "]";
      if (spec.listeners[li] == spec.talker) {
        errs.add(lpath, "listener must differ from the talker");
        continue;
      }
      const DeviceSpec* listener = check_device(spec.listeners[li], lpath);
      if (talker && listener && !router.route(talker->node, listener->node)) {
        errs.add(lpath, "listener '" + spec.listeners[li] + "' is unreachable from talker '" +
                            spec.talker + "'");
      }
    }
    if (spec.name.empty()) continue;
    if (auto [it, fresh] = seen.emplace(spec.name, i); !fresh) {
      errs.add(path + ".name", "duplicate use case name '" + spec.name +
                                   "', first declared at " + idx("use_cases", it->second));
      continue;
    }
    s.use_cases.push_back(std::move(spec));
  }
}

void parse_faults(const json& arr, Scenario& s, Errors& errs) {
  if (!arr.is_array()) {
    errs.add("faults", "expected an array");
    return;
  }
  std::set<std::string> device_ids;
  for (const auto& d : s.devices) device_ids.insert(d.device_id);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = idx("faults", i);
    const json& f = arr[i];
    if (!require_object(f, path, errs)) continue;
    std::string kind = get_string(f, path, "kind", true, errs);
    if (kind == "DropMessage") {
      DropMessageFault fault;
      if (const json* m = get_field(f, path, "match", true, errs)) {
        if (!m->is_object()) {
          errs.add(path + ".match", "expected an object");
        } else {
          const std::string mp = path + ".match";
          if (m->contains("src")) fault.match.src = get_string(*m, mp, "src", false, errs);
          if (m->contains("dst")) fault.match.dst = get_string(*m, mp, "dst", false, errs);
          if (m->contains("payload_tag"))
            fault.match.payload_tag = get_string(*m, mp, "payload_tag", false, errs);
          if (m->contains("device")) fault.match.device = get_string(*m, mp, "device", false, errs);
          if (m->contains("from_us")) fault.match.from_us = get_int(*m, mp, "from_us", false, errs);
          if (m->contains("until_us"))
            fault.match.until_us = get_int(*m, mp, "until_us", false, errs);
        }
      }
      s.faults.push_back(fault);
    } else if (kind == "LinkDown") {
      LinkDownFault fault;
      fault.link = get_string(f, path, "link", true, errs);
      fault.from_us = get_int(f, path, "from_us", true, errs);
      fault.until_us = get_int(f, path, "until_us", true, errs);
      if (!fault.link.empty() && !s.graph.link(fault.link)) {
        errs.add(path + ".link", "unknown link '" + fault.link + "'");
      }
      if (fault.until_us < fault.from_us) {
        errs.add(path + ".until_us", "window ends before it starts");
      }
      s.faults.push_back(fault);
    } else if (kind == "AuthReject") {
      AuthRejectFault fault;
      fault.device = get_string(f, path, "device", true, errs);
      if (!fault.device.empty() && !device_ids.count(fault.device)) {
        errs.add(path + ".device", "unknown device '" + fault.device + "'");
      }
      s.faults.push_back(fault);
    } else if (kind == "ConfigUnavailable") {
      ConfigUnavailableFault fault;
      fault.from_us = get_int(f, path, "from_us", true, errs);
      fault.until_us = get_int(f, path, "until_us", true, errs);
      if (fault.until_us < fault.from_us) {
        errs.add(path + ".until_us", "window ends before it starts");
      }
      s.faults.push_back(fault);
    } else if (!kind.empty()) {
      errs.add(path + ".kind", "unknown fault kind '" + kind + "'");
    }
  }
}

}  // namespace

std::variant<Scenario, std::vector<ScenarioError>> parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::vector<ScenarioError> errors;
    errors.push_back({"$", "syntax error at line " + std::to_string(line) + ", column " +
                               std::to_string(col) + ": " + e.what()});
    return errors;
  }

  Errors errs;
  Scenario s;
  if (!doc.is_object()) {
    errs.add("$", "expected a JSON object");
    return errs.take();
  }
  const std::string top = "$";
  std::int64_t version = get_int(doc, top, "format_version", true, errs, 1);
  s.format_version = static_cast<int>(version);
  if (doc.contains("format_version") && version != 1) {
    errs.add("format_version", "unsupported format version " + std::to_string(version));
  }
  std::int64_t seed = get_int(doc, top, "seed", false, errs, 0);
  if (seed < 0) errs.add("seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.horizon_us = get_int(doc, top, "horizon_us", true, errs, 0);
  if (s.horizon_us <= 0) errs.add("horizon_us", "must be positive");

  if (const json* g = get_field(doc, top, "graph", true, errs)) parse_graph(*g, s, errs);
  if (const json* sv = get_field(doc, top, "services", true, errs)) parse_services(*sv, s, errs);
  if (const json* d = get_field(doc, top, "devices", true, errs)) parse_devices(*d, s, errs);
  if (const json* u = get_field(doc, top, "use_cases", false, errs)) parse_use_cases(*u, s, errs);
  if (const json* f = get_field(doc, top, "faults", false, errs)) parse_faults(*f, s, errs);

  if (const json* dl = get_field(doc, top, "domain_latency_us", false, errs)) {
    if (!dl->is_object()) {
      errs.add("domain_latency_us", "expected an object");
    } else {
      const std::string path = "domain_latency_us";
      if (dl->contains("FiveG"))
        s.domain_latency.five_g_us = get_int(*dl, path, "FiveG", false, errs, 1'000);
      if (dl->contains("SDN"))
        s.domain_latency.sdn_us = get_int(*dl, path, "SDN", false, errs, 200);
      if (dl->contains("IndustrialEthernet"))
        s.domain_latency.industrial_ethernet_us =
            get_int(*dl, path, "IndustrialEthernet", false, errs, 500);
      for (auto it = dl->begin(); it != dl->end(); ++it) {
        if (it.key() != "FiveG" && it.key() != "SDN" && it.key() != "IndustrialEthernet") {
          errs.add(path + "." + it.key(), "unknown domain (TSN latency is computed, not configured)");
        }
      }
    }
  }
  if (const json* co = get_field(doc, top, "clock_offsets_us", false, errs)) {
    if (!co->is_object()) {
      errs.add("clock_offsets_us", "expected an object");
    } else {
      for (auto it = co->begin(); it != co->end(); ++it) {
        if (!it.value().is_number_integer()) {
          errs.add("clock_offsets_us." + it.key(), "expected an integer");
          continue;
        }
        if (!s.graph.node(it.key())) {
          errs.add("clock_offsets_us." + it.key(), "unknown node '" + it.key() + "'");
          continue;
        }
        s.clock_offsets_us[it.key()] = it.value().get<Micros>();
      }
    }
  }
  if (const json* sy = get_field(doc, top, "sync", false, errs)) {
    if (!sy->is_object()) {
      errs.add("sync", "expected an object");
    } else {
      s.sync.enabled = true;
      s.sync.reference = get_string(*sy, "sync", "reference", true, errs);
      s.sync.rounds = static_cast<int>(get_int(*sy, "sync", "rounds", false, errs, 1));
      s.sync.at_us = get_int(*sy, "sync", "at_us", false, errs, 0);
      s.sync.server_processing_us = get_int(*sy, "sync", "server_processing_us", false, errs, 1);
      if (!s.sync.reference.empty() && !s.graph.node(s.sync.reference)) {
        errs.add("sync.reference", "unknown node '" + s.sync.reference + "'");
      }
      if (s.sync.rounds < 1) errs.add("sync.rounds", "must be at least 1");
      if (s.sync.at_us < 0) errs.add("sync.at_us", "must be non-negative");
      if (s.sync.server_processing_us < 0)
        errs.add("sync.server_processing_us", "must be non-negative");
    }
  }
  s.replay_instances = static_cast<int>(get_int(doc, top, "replay_instances", false, errs, 3));
  if (s.replay_instances < 0) errs.add("replay_instances", "must be non-negative");

  if (errs.any()) return errs.take();
  return s;
}

nlohmann::json serialize_scenario(const Scenario& s) {
  json doc;
  doc["format_version"] = s.format_version;
  doc["seed"] = s.seed;
  doc["horizon_us"] = s.horizon_us;

  json nodes = json::array();
  for (const auto& [id, n] : s.graph.nodes()) {
    nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"domain", to_string(n.domain)}});
  }
  json links = json::array();
  for (const auto& [id, l] : s.graph.links()) {
    links.push_back({{"id", l.id},
                     {"endpoints", {l.endpoints[0], l.endpoints[1]}},
                     {"capacity_bps", l.capacity_bps},
                     {"propagation_us", l.propagation_us},
                     {"domain", to_string(l.domain)},
                     {"secure", l.secure}});
  }
  doc["graph"] = {{"nodes", std::move(nodes)}, {"links", std::move(links)}};
  doc["services"] = {{"config_server", s.services.config_server},
                     {"auth_server", s.services.auth_server},
                     {"cuc", s.services.cuc},
                     {"cnc", s.services.cnc}};

  json devices = json::array();
  for (const DeviceSpec& d : s.devices) {
    json jd{{"device_id", d.device_id},
            {"dce_id", d.dce_id},
            {"node", d.node},
            {"secure_element_id", d.secure_element_id},
            {"se_secret", d.se_secret},
            {"presented_se_secret", d.presented_se_secret},
            {"dte_signature", d.dte_signature},
            {"presented_dte_signature", d.presented_dte_signature},
            {"authorized_systems", d.authorized_systems},
            {"is_tsn_end_device", d.is_tsn_end_device},
            {"settings", d.settings},
            {"provision_at_us", d.provision_at_us}};
    if (d.tsn_transmission_type) jd["tsn_transmission_type"] = *d.tsn_transmission_type;
    if (d.expect_final) jd["expect_final"] = to_string(*d.expect_final);
    if (d.position) jd["position"] = {d.position->x, d.position->y};
    devices.push_back(std::move(jd));
  }
  doc["devices"] = std::move(devices);

  json use_cases = json::array();
  for (const UseCaseSpec& u : s.use_cases) {
    use_cases.push_back({{"name", u.name},
                         {"class", to_string(u.use_case_class)},
                         {"group", to_string(u.group)},
                         {"qos", qos_to_json(u.qos)},
                         {"talker", u.talker},
                         {"listeners", u.listeners},
                         {"provision_at_us", u.provision_at_us},
                         {"expect_failure", u.expect_failure}});
  }
  doc["use_cases"] = std::move(use_cases);

  json faults = json::array();
  for (const FaultSpec& f : s.faults) {
    if (const auto* drop = std::get_if<DropMessageFault>(&f)) {
      json match = json::object();
      if (drop->match.src) match["src"] = *drop->match.src;
      if (drop->match.dst) match["dst"] = *drop->match.dst;
      if (drop->match.payload_tag) match["payload_tag"] = *drop->match.payload_tag;
      if (drop->match.device) match["device"] = *drop->match.device;
      if (drop->match.from_us) match["from_us"] = *drop->match.from_us;
      if (drop->match.until_us) match["until_us"] = *drop->match.until_us;
      faults.push_back({{"kind", "DropMessage"}, {"match", std::move(match)}});
    } else if (const auto* down = std::get_if<LinkDownFault>(&f)) {
      faults.push_back({{"kind", "LinkDown"},
                        {"link", down->link},
                        {"from_us", down->from_us},
                        {"until_us", down->until_us}});
    } else if (const auto* rej = std::get_if<AuthRejectFault>(&f)) {
      faults.push_back({{"kind", "AuthReject"}, {"device", rej->device}});
    } else if (const auto* cfg = std::get_if<ConfigUnavailableFault>(&f)) {
      faults.push_back(
          {{"kind", "ConfigUnavailable"}, {"from_us", cfg->from_us}, {"until_us", cfg->until_us}});
    }
  }
  doc["faults"] = std::move(faults);

  doc["domain_latency_us"] = {{"FiveG", s.domain_latency.five_g_us},
                              {"SDN", s.domain_latency.sdn_us},
                              {"IndustrialEthernet", s.domain_latency.industrial_ethernet_us}};
  doc["clock_offsets_us"] = s.clock_offsets_us;
  if (s.sync.enabled) {
    doc["sync"] = {{"reference", s.sync.reference},
                   {"rounds", s.sync.rounds},
                   {"at_us", s.sync.at_us},
                   {"server_processing_us", s.sync.server_processing_us}};
  }
  doc["replay_instances"] = s.replay_instances;
  return doc;
}

std::string format_errors(const std::vector<ScenarioError>& errors) {
  std::ostringstream out;
  for (const auto& e : errors) {
    out << e.path << ": " << e.message << "\n";
  }
  return out.str();
}

}  // namespace tacnet
