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

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "faultloc/model.h"

namespace faultloc {

enum class EventAction { kFail, kRepair };

/// `component` may also name a service, meaning every replica of it.
struct ScenarioEvent {
  std::int64_t window = 0;
  EventAction action = EventAction::kFail;
  std::string component;
};

struct Scenario {
  std::string name;
  std::int64_t duration = 0;
  std::vector<ScenarioEvent> events;
  /// Requests per window for each request type; absent means zero.
  std::map<std::string, std::int64_t> traffic;
  double noise_failure_rate = 0.0;
  /// When present for a request type, the first `quota` requests of every
  /// window succeed and the rest fail, regardless of component health.
  std::map<std::string, std::int64_t> success_quota;
};

/// Component id -> id of the host it runs on.
using Colocation = std::map<std::string, std::string>;

/// Health of every component. `sticky` holds components that went down
/// with their host and stay down until repaired themselves.
struct ComponentState {
  std::set<std::string> components;
  std::set<std::string> failed;
  std::set<std::string> sticky;

  bool is_failed(const std::string& id) const { return failed.count(id) != 0; }
  bool operator==(const ComponentState&) const = default;
};

ComponentState healthy_state(const Topology& t);
/// Fails `c` and, when `c` is a host, everything co-located on it.
ComponentState apply_failure(const ComponentState& state, const Colocation& colocation,
                             const std::string& c);
/// Restores `c` alone. Throws Error(kUnknownComponent).
ComponentState apply_fix(const ComponentState& state, const std::string& c);

struct CallRecord {
  std::int64_t window = 0;
  std::string request_type;
  bool success = true;
  std::vector<std::string> caller;
  std::vector<std::string> callee;

  bool operator==(const CallRecord&) const = default;
};

/// Component ids an event or operator target refers to.
std::vector<std::string> resolve_target(const Topology& t, const std::string& target);

/// Generates windows one at a time so that operators can intervene between
/// them.
class ScenarioRunner {
 public:
  /// Validates everything up front. With `apply_repairs` false the
  /// scenario's repair events are ignored and only interventions heal.
  ScenarioRunner(Topology topology, Scenario scenario, Colocation colocation,
                 std::uint64_t seed, bool apply_repairs = true);

  std::int64_t next_window() const { return window_; }
  /// Applies that window's events, then emits its records.
  std::vector<CallRecord> step();
  /// Operator repair of a component or service.
  void fix(const std::string& target);

  const ComponentState& state() const { return state_; }
  const Topology& topology() const { return topology_; }
  const Scenario& scenario() const { return scenario_; }

 private:
  double uniform();

  Topology topology_;
  Scenario scenario_;
  Colocation colocation_;
  bool apply_repairs_;
  std::mt19937_64 rng_;
  std::int64_t window_ = 0;
  ComponentState state_;
};

std::vector<CallRecord> run_scenario(const Topology& t, const Scenario& sc,
                                     const Colocation& colocation, std::uint64_t seed);

struct LibraryEntry {
  Topology topology;
  Scenario scenario;
  Colocation colocation;
};

/// Built-in scenarios keyed by name.
std::map<std::string, LibraryEntry> scenario_library();

/// Replica-modeled Example System plus a ping on N1 (R7) and a health check
/// that reaches either replica of A (R8).
Topology scenario_topology();

nlohmann::json scenario_to_json(const Scenario& sc, const Colocation& colocation);
/// Parses a scenario document; its optional `colocation` is written to
/// `colocation`.
Scenario scenario_from_json(const nlohmann::json& document, Colocation* colocation);

nlohmann::json call_to_json(const CallRecord& record);
/// One JSON object per line, no trailing whitespace.
std::string serialize_call(const CallRecord& record);

}  // namespace faultloc
