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

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace faultloc {

enum class ComponentKind {
  kService,
  kReplica,
  kHost,
  kPod,
  kContainer,
  kProcess,
  kMerged,
};

const char* to_string(ComponentKind kind);
/// Throws Error(kInvalidTopology) for an unrecognized name.
ComponentKind parse_component_kind(std::string_view name);

/// Default Beta pseudo-counts (alpha, beta) for a component kind. Hosts and
/// their relatives get a prior that leans harder towards "working".
std::pair<double, double> default_prior(ComponentKind kind);

/// A diagnosable unit. `members` is non-empty only for merged classes and
/// lists the original component ids. `service` optionally names the service
/// a replica belongs to, used for report rollups and scenario targets.
struct Component {
  std::string id;
  ComponentKind kind = ComponentKind::kService;
  std::string display_name;
  double prior_alpha = 0.1;
  double prior_beta = 0.1;
  std::vector<std::string> members;
  std::string service;

  bool operator==(const Component&) const = default;
};

struct Atom {
  std::string id;
  bool operator==(const Atom&) const = default;
};

/// Healthy when at least one member is healthy.
struct OrGroup {
  std::vector<std::string> ids;
  bool operator==(const OrGroup&) const = default;
};

/// Healthy when at least `k` members are healthy.
struct KofN {
  int k = 1;
  std::vector<std::string> ids;
  bool operator==(const KofN&) const = default;
};

using Term = std::variant<Atom, OrGroup, KofN>;

/// Member ids of one term, in declaration order.
std::vector<std::string> term_members(const Term& term);
/// Minimum number of healthy members for the term to hold.
int term_threshold(const Term& term);

/// Conjunction of terms.
struct DependencyExpr {
  std::vector<Term> terms;

  /// The dependency set: every referenced id, sorted and unique.
  std::vector<std::string> members() const;
  /// Evaluates fail-stop semantics given a health predicate.
  bool evaluate(const std::function<bool(const std::string&)>& healthy) const;

  bool operator==(const DependencyExpr&) const = default;
};

/// A request type. `caller` lists the caller-side components used when the
/// simulator emits call records; empty means "the first term's members".
struct RequestType {
  std::string id;
  DependencyExpr expr;
  bool is_probe = false;
  std::vector<std::string> caller;

  bool operator==(const RequestType&) const = default;
};

/// Request-type id -> outcome (true = succeeds).
using SymptomPattern = std::map<std::string, bool>;

/// Validated, immutable system description. Components and request types
/// are kept sorted by id.
class Topology {
 public:
  /// Validates and sorts. Throws Error naming the offending id.
  Topology(std::vector<Component> components,
           std::vector<RequestType> request_types);

  const std::vector<Component>& components() const { return components_; }
  const std::vector<RequestType>& request_types() const {
    return request_types_;
  }

  const Component* find_component(std::string_view id) const;
  const RequestType* find_request_type(std::string_view id) const;
  /// Throws Error(kUnknownComponent).
  const Component& component(std::string_view id) const;
  /// Throws Error(kUnknownRequestType).
  const RequestType& request_type(std::string_view id) const;
  std::size_t component_index(std::string_view id) const;

  /// Caller side of a request type after applying the default.
  std::vector<std::string> caller_of(const RequestType& rt) const;
  /// Ids of replicas whose `service` equals `service`, sorted.
  std::vector<std::string> replicas_of(std::string_view service) const;

  bool operator==(const Topology& other) const {
    return components_ == other.components_ &&
           request_types_ == other.request_types_;
  }

 private:
  std::vector<Component> components_;
  std::vector<RequestType> request_types_;
  std::map<std::string, std::size_t, std::less<>> component_index_;
  std::map<std::string, std::size_t, std::less<>> request_type_index_;
};

/// Parses and validates a topology document.
Topology build_topology(const nlohmann::json& document);
Topology build_topology(std::string_view text);
inline Topology build_topology(const char* text) { return build_topology(std::string_view(text)); }
nlohmann::json topology_to_json(const Topology& t);

/// Component id -> membership bits over request types in sorted id order.
std::map<std::string, std::vector<bool>> observability_signature(
    const Topology& t);

/// Replaces every class of components with identical signatures by one
/// merged component. Merged ids join the sorted member ids with '+'.
Topology merge_indistinguishable(const Topology& t);

/// Id of the probe request type `add_probe` creates for `component`.
std::string probe_id(std::string_view component);

/// Adds a singleton probe request type on `c`. Returns `t` unchanged when
/// that probe is already present.
Topology add_probe(const Topology& t, std::string_view c);

struct SymptomRow {
  std::string component;
  SymptomPattern pattern;
};

/// One row per component: the pattern seen when only that component fails.
std::vector<SymptomRow> symptom_table(const Topology& t);

/// Pattern induced by failing exactly `failed`.
SymptomPattern induced_pattern(const Topology& t,
                               const std::vector<std::string>& failed);

/// The Example System at service granularity (A, B, C on two hosts).
Topology example_system();
/// The Example System with service A split into replicas A@N1 and A@N2.
Topology replica_example_system();

}  // namespace faultloc
