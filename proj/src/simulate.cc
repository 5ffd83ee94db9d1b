// Copyright 2026 The faultloc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faultloc/simulate.h"

#include <algorithm>

#include "faultloc/error.h"

namespace faultloc {

namespace {

[[noreturn]] void invalid(const std::string& entity, const std::string& detail) {
  throw Error(ErrorCode::kInvalidScenario, entity, "invalid scenario: " + detail);
}

}  // namespace

ComponentState healthy_state(const Topology& t) {
  ComponentState state;
  for (const auto& c : t.components()) state.components.insert(c.id);
  return state;
}

ComponentState apply_failure(const ComponentState& state, const Colocation& colocation,
                             const std::string& c) {
  if (state.components.count(c) == 0) {
    throw Error(ErrorCode::kUnknownComponent, c, "unknown component '" + c + "'");
  }
  ComponentState next = state;
  next.failed.insert(c);
  for (const auto& [component, host] : colocation) {
    if (host == c && component != c) {
      next.failed.insert(component);
      next.sticky.insert(component);
    }
  }
  return next;
}

ComponentState apply_fix(const ComponentState& state, const std::string& c) {
  if (state.components.count(c) == 0) {
    throw Error(ErrorCode::kUnknownComponent, c, "unknown component '" + c + "'");
  }
  ComponentState next = state;
  next.failed.erase(c);
  next.sticky.erase(c);
  return next;
}

std::vector<std::string> resolve_target(const Topology& t, const std::string& target) {
  if (const Component* c = t.find_component(target)) {
    if (!c->members.empty()) return c->members;
    return {target};
  }
  auto replicas = t.replicas_of(target);
  if (replicas.empty()) {
    throw Error(ErrorCode::kUnknownComponent, target,
                "unknown component or service '" + target + "'");
  }
  return replicas;
}

ScenarioRunner::ScenarioRunner(Topology topology, Scenario scenario,
                               Colocation colocation, std::uint64_t seed,
                               bool apply_repairs)
    : topology_(std::move(topology)),
      scenario_(std::move(scenario)),
      colocation_(std::move(colocation)),
      apply_repairs_(apply_repairs),
      rng_(seed),
      state_(healthy_state(topology_)) {
  const Scenario& sc = scenario_;
  if (sc.duration < 0) invalid(sc.name, "negative duration");
  if (!(sc.noise_failure_rate >= 0.0 && sc.noise_failure_rate < 1.0)) {
    invalid(sc.name, "noise_failure_rate must lie in [0, 1)");
  }
  for (const auto& [rt, rate] : sc.traffic) {
    if (topology_.find_request_type(rt) == nullptr) {
      invalid(rt, "traffic for unknown request type '" + rt + "'");
    }
    if (rate < 0) invalid(rt, "negative traffic for '" + rt + "'");
  }
  for (const auto& [rt, quota] : sc.success_quota) {
    if (topology_.find_request_type(rt) == nullptr) {
      invalid(rt, "quota for unknown request type '" + rt + "'");
    }
    auto it = sc.traffic.find(rt);
    const std::int64_t rate = it == sc.traffic.end() ? 0 : it->second;
    if (quota < 0 || quota > rate) invalid(rt, "quota for '" + rt + "' exceeds its traffic");
  }
  for (const auto& event : sc.events) {
    if (event.window < 0 || event.window >= sc.duration) {
      invalid(event.component, "event window " + std::to_string(event.window) +
                                   " outside the scenario duration");
    }
    try {
      resolve_target(topology_, event.component);
    } catch (const Error&) {
      invalid(event.component, "event targets unknown id '" + event.component + "'");
    }
  }
  for (const auto& [component, host] : colocation_) {
    if (topology_.find_component(component) == nullptr) {
      invalid(component, "colocation of unknown component '" + component + "'");
    }
    const Component* h = topology_.find_component(host);
    if (h == nullptr || h->kind != ComponentKind::kHost) {
      invalid(host, "'" + component + "' is placed on '" + host + "', which is not a host");
    }
  }
}

double ScenarioRunner::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::vector<CallRecord> ScenarioRunner::step() {
  for (const auto& event : scenario_.events) {
    if (event.window != window_) continue;
    for (const auto& id : resolve_target(topology_, event.component)) {
      if (event.action == EventAction::kFail) {
        state_ = apply_failure(state_, colocation_, id);
      } else if (apply_repairs_) {
        state_ = apply_fix(state_, id);
      }
    }
  }

  std::vector<CallRecord> records;
  for (const auto& rt : topology_.request_types()) {
    auto rate_it = scenario_.traffic.find(rt.id);
    if (rate_it == scenario_.traffic.end() || rate_it->second == 0) continue;
    const auto quota_it = scenario_.success_quota.find(rt.id);
    const bool healthy = rt.expr.evaluate(
        [&](const std::string& id) { return !state_.is_failed(id); });
    const auto caller = topology_.caller_of(rt);
    std::vector<std::string> callee;
    for (const auto& id : rt.expr.members()) {
      if (std::find(caller.begin(), caller.end(), id) == caller.end()) callee.push_back(id);
    }
    for (std::int64_t k = 0; k < rate_it->second; ++k) {
      bool success;
      if (quota_it != scenario_.success_quota.end()) {
        success = k < quota_it->second;
      } else {
        success = healthy;
        if (success && scenario_.noise_failure_rate > 0.0 &&
            uniform() < scenario_.noise_failure_rate) {
          success = false;
        }
      }
      records.push_back({window_, rt.id, success, caller, callee});
    }
  }
  ++window_;
  return records;
}

void ScenarioRunner::fix(const std::string& target) {
  for (const auto& id : resolve_target(topology_, target)) state_ = apply_fix(state_, id);
}

std::vector<CallRecord> run_scenario(const Topology& t, const Scenario& sc,
                                     const Colocation& colocation, std::uint64_t seed) {
  ScenarioRunner runner(t, sc, colocation, seed);
  std::vector<CallRecord> out;
  for (std::int64_t w = 0; w < sc.duration; ++w) {
    auto records = runner.step();
    out.insert(out.end(), std::make_move_iterator(records.begin()),
               std::make_move_iterator(records.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Library

Topology scenario_topology() {
  const Topology base = replica_example_system();
  std::vector<RequestType> request_types = base.request_types();
  RequestType ping;
  ping.id = "R7";
  ping.expr.terms.push_back(Atom{"N1"});
  ping.is_probe = true;
  request_types.push_back(std::move(ping));
  RequestType health;
  health.id = "R8";
  health.expr.terms.push_back(OrGroup{{"A@N1", "A@N2"}});
  request_types.push_back(std::move(health));
  return Topology(base.components(), std::move(request_types));
}

std::map<std::string, LibraryEntry> scenario_library() {
  const Colocation colocation{{"A@N1", "N1"}, {"C", "N1"}, {"A@N2", "N2"}, {"B", "N2"}};
  const std::map<std::string, std::int64_t> traffic{
      {"R1", 300}, {"R2", 200}, {"R3", 500}, {"R7", 100}, {"R8", 100}};
  const Topology topology = scenario_topology();

  std::map<std::string, LibraryEntry> library;
  library.emplace("example-scenario-1",
                  LibraryEntry{topology,
                               Scenario{"example-scenario-1", 5,
                                        {{1, EventAction::kFail, "B"},
                                         {3, EventAction::kRepair, "B"}},
                                        traffic, 0.0, {}},
                               colocation});
  library.emplace("example-scenario-2",
                  LibraryEntry{topology,
                               Scenario{"example-scenario-2", 5,
                                        {{1, EventAction::kFail, "A"},
                                         {3, EventAction::kRepair, "A"}},
                                        traffic, 0.0, {}},
                               colocation});
  library.emplace("example-scenario-3",
                  LibraryEntry{topology,
                               Scenario{"example-scenario-3", 9,
                                        {{1, EventAction::kFail, "N1"},
                                         {3, EventAction::kRepair, "N1"},
                                         {5, EventAction::kRepair, "C"},
                                         {7, EventAction::kRepair, "A@N1"}},
                                        traffic, 0.0, {}},
                               colocation});

  // Uniform Beta(0.1, 0.1) priors everywhere, and exact success counts.
  const Topology replicas = replica_example_system();
  std::vector<Component> flat = replicas.components();
  for (auto& c : flat) {
    c.prior_alpha = 0.1;
    c.prior_beta = 0.1;
  }
  library.emplace(
      "empirical-illustration",
      LibraryEntry{Topology(std::move(flat), replicas.request_types()),
                   Scenario{"empirical-illustration", 1,
                            {{0, EventAction::kFail, "N1"}},
                            {{"R1", 300}, {"R2", 200}, {"R3", 500}},
                            0.0,
                            {{"R1", 60}, {"R2", 40}, {"R3", 100}}},
                   colocation});
  return library;
}

// ---------------------------------------------------------------------------
// Documents

nlohmann::json scenario_to_json(const Scenario& sc, const Colocation& colocation) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : sc.events) {
    events.push_back({{"window", e.window},
                      {"action", e.action == EventAction::kFail ? "fail" : "repair"},
                      {"component", e.component}});
  }
  nlohmann::json doc{{"name", sc.name},
                     {"duration", sc.duration},
                     {"traffic", sc.traffic},
                     {"noise_failure_rate", sc.noise_failure_rate},
                     {"events", std::move(events)}};
  if (!colocation.empty()) doc["colocation"] = colocation;
  if (!sc.success_quota.empty()) doc["success_quota"] = sc.success_quota;
  return doc;
}

Scenario scenario_from_json(const nlohmann::json& doc, Colocation* colocation) {
  auto parse_error = [](const std::string& detail) {
    throw Error(ErrorCode::kParse, "", "scenario document: " + detail);
  };
  if (!doc.is_object()) parse_error("expected an object");
  Scenario sc;
  try {
    sc.name = doc.value("name", std::string("scenario"));
    if (!doc.contains("duration")) parse_error("missing 'duration'");
    sc.duration = doc.at("duration").get<std::int64_t>();
    if (doc.contains("traffic")) {
      sc.traffic = doc.at("traffic").get<std::map<std::string, std::int64_t>>();
    }
    sc.noise_failure_rate = doc.value("noise_failure_rate", 0.0);
    if (doc.contains("success_quota")) {
      sc.success_quota = doc.at("success_quota").get<std::map<std::string, std::int64_t>>();
    }
    if (doc.contains("events")) {
      for (const auto& node : doc.at("events")) {
        ScenarioEvent e;
        e.window = node.at("window").get<std::int64_t>();
        const std::string action = node.at("action").get<std::string>();
        if (action == "fail") {
          e.action = EventAction::kFail;
        } else if (action == "repair") {
          e.action = EventAction::kRepair;
        } else {
          parse_error("unknown action '" + action + "'");
        }
        e.component = node.at("component").get<std::string>();
        sc.events.push_back(std::move(e));
      }
    }
    if (colocation != nullptr) {
      colocation->clear();
      if (doc.contains("colocation")) {
        *colocation = doc.at("colocation").get<Colocation>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    parse_error(e.what());
  }
  return sc;
}

nlohmann::json call_to_json(const CallRecord& record) {
  return {{"window", record.window},
          {"request_type", record.request_type},
          {"outcome", record.success ? "success" : "failure"},
          {"caller", record.caller},
          {"callee", record.callee}};
}

std::string serialize_call(const CallRecord& record) { return call_to_json(record).dump(); }

}  // namespace faultloc
