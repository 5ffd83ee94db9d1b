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

#include "faultloc/model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "faultloc/error.h"

namespace faultloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateId: return "duplicate id";
    case ErrorCode::kDanglingReference: return "dangling reference";
    case ErrorCode::kEmptyDependencySet: return "empty dependency set";
    case ErrorCode::kKofNBounds: return "k-of-n bounds violated";
    case ErrorCode::kInvalidTopology: return "invalid topology";
    case ErrorCode::kUnknownComponent: return "unknown component";
    case ErrorCode::kUnknownRequestType: return "unknown request type";
    case ErrorCode::kInvalidCounts: return "invalid counts";
    case ErrorCode::kMissingPattern: return "pattern missing request type";
    case ErrorCode::kMissingTheta: return "missing theta";
    case ErrorCode::kThetaOutOfRange: return "theta out of range";
    case ErrorCode::kDuplicateTermMember: return "duplicate component across terms";
    case ErrorCode::kTooManyComponents: return "too many components";
    case ErrorCode::kDimensionTooHigh: return "dimension too high";
    case ErrorCode::kDegenerateLikelihood: return "degenerate likelihood";
    case ErrorCode::kMismatchedComponents: return "mismatched component sets";
    case ErrorCode::kInvalidConfig: return "invalid configuration";
    case ErrorCode::kInvalidScenario: return "invalid scenario";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kInvariant: return "internal invariant violated";
  }
  return "error";
}

namespace {

struct KindName {
  ComponentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ComponentKind::kService, "service"},
    {ComponentKind::kReplica, "replica"},
    {ComponentKind::kHost, "host"},
    {ComponentKind::kPod, "pod"},
    {ComponentKind::kContainer, "container"},
    {ComponentKind::kProcess, "process"},
    {ComponentKind::kMerged, "merged"},
};

[[noreturn]] void fail(ErrorCode code, const std::string& entity,
                       const std::string& detail) {
  throw Error(code, entity, std::string(to_string(code)) + ": " + detail);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

const char* to_string(ComponentKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "service";
}

ComponentKind parse_component_kind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (name == entry.name) return entry.kind;
  }
  fail(ErrorCode::kInvalidTopology, std::string(name),
       "unknown component kind '" + std::string(name) + "'");
}

std::pair<double, double> default_prior(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kHost:
    case ComponentKind::kPod:
    case ComponentKind::kContainer:
      return {0.5, 0.1};
    default:
      return {0.1, 0.1};
  }
}

std::vector<std::string> term_members(const Term& term) {
  if (const auto* atom = std::get_if<Atom>(&term)) return {atom->id};
  if (const auto* group = std::get_if<OrGroup>(&term)) return group->ids;
  return std::get<KofN>(term).ids;
}

int term_threshold(const Term& term) {
  if (const auto* kofn = std::get_if<KofN>(&term)) return kofn->k;
  return 1;
}

std::vector<std::string> DependencyExpr::members() const {
  std::set<std::string> ids;
  for (const auto& term : terms) {
    for (auto& id : term_members(term)) ids.insert(std::move(id));
  }
  return {ids.begin(), ids.end()};
}

bool DependencyExpr::evaluate(
    const std::function<bool(const std::string&)>& healthy) const {
  for (const auto& term : terms) {
    int up = 0;
    for (const auto& id : term_members(term)) up += healthy(id) ? 1 : 0;
    if (up < term_threshold(term)) return false;
  }
  return true;
}

Topology::Topology(std::vector<Component> components,
                   std::vector<RequestType> request_types)
    : components_(std::move(components)),
      request_types_(std::move(request_types)) {
  std::sort(components_.begin(), components_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(request_types_.begin(), request_types_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  for (std::size_t i = 0; i < components_.size(); ++i) {
    const Component& c = components_[i];
    if (c.id.empty()) fail(ErrorCode::kInvalidTopology, "", "empty component id");
    if (!component_index_.emplace(c.id, i).second) {
      fail(ErrorCode::kDuplicateId, c.id, "component '" + c.id + "'");
    }
    if (!(c.prior_alpha > 0.0) || !(c.prior_beta > 0.0) ||
        !std::isfinite(c.prior_alpha) || !std::isfinite(c.prior_beta)) {
      fail(ErrorCode::kInvalidTopology, c.id,
           "component '" + c.id + "' needs positive finite prior pseudo-counts");
    }
    const bool merged = c.kind == ComponentKind::kMerged;
    if (merged == c.members.empty()) {
      fail(ErrorCode::kInvalidTopology, c.id,
           "component '" + c.id + "': members must be listed iff kind is merged");
    }
    if (std::set<std::string>(c.members.begin(), c.members.end()).size() !=
        c.members.size()) {
      fail(ErrorCode::kDuplicateId, c.id,
           "component '" + c.id + "' lists a member twice");
    }
  }

  if (request_types_.empty()) {
    fail(ErrorCode::kInvalidTopology, "", "at least one request type is required");
  }
  for (std::size_t i = 0; i < request_types_.size(); ++i) {
    const RequestType& rt = request_types_[i];
    if (rt.id.empty()) fail(ErrorCode::kInvalidTopology, "", "empty request type id");
    if (component_index_.count(rt.id) != 0 ||
        !request_type_index_.emplace(rt.id, i).second) {
      fail(ErrorCode::kDuplicateId, rt.id, "request type '" + rt.id + "'");
    }
    if (rt.expr.terms.empty()) {
      fail(ErrorCode::kEmptyDependencySet, rt.id, "request type '" + rt.id + "'");
    }
    std::set<std::string> seen;
    for (const auto& term : rt.expr.terms) {
      const auto ids = term_members(term);
      if (std::holds_alternative<OrGroup>(term) && ids.size() < 2) {
        fail(ErrorCode::kInvalidTopology, rt.id,
             "request type '" + rt.id + "': an or-group needs at least 2 members");
      }
      if (const auto* kofn = std::get_if<KofN>(&term)) {
        if (ids.empty() || kofn->k < 1 ||
            static_cast<std::size_t>(kofn->k) > ids.size()) {
          fail(ErrorCode::kKofNBounds, rt.id,
               "request type '" + rt.id + "': k=" + std::to_string(kofn->k) +
                   " of " + std::to_string(ids.size()));
        }
      }
      for (const auto& id : ids) {
        if (component_index_.count(id) == 0) {
          fail(ErrorCode::kDanglingReference, rt.id,
               "request type '" + rt.id + "' references unknown component '" +
                   id + "'");
        }
        if (!seen.insert(id).second) {
          fail(ErrorCode::kDuplicateTermMember, rt.id,
               "request type '" + rt.id + "' references '" + id + "' twice");
        }
      }
    }
    if (rt.is_probe && seen.size() != 1) {
      fail(ErrorCode::kInvalidTopology, rt.id,
           "probe '" + rt.id + "' must depend on exactly one component");
    }
    for (const auto& id : rt.caller) {
      if (seen.count(id) == 0) {
        fail(ErrorCode::kDanglingReference, rt.id,
             "request type '" + rt.id + "': caller '" + id +
                 "' is not in its dependency set");
      }
    }
  }
}

const Component* Topology::find_component(std::string_view id) const {
  auto it = component_index_.find(id);
  return it == component_index_.end() ? nullptr : &components_[it->second];
}

const RequestType* Topology::find_request_type(std::string_view id) const {
  auto it = request_type_index_.find(id);
  return it == request_type_index_.end() ? nullptr : &request_types_[it->second];
}

const Component& Topology::component(std::string_view id) const {
  const Component* c = find_component(id);
  if (c == nullptr) {
    fail(ErrorCode::kUnknownComponent, std::string(id),
         "'" + std::string(id) + "'");
  }
  return *c;
}

const RequestType& Topology::request_type(std::string_view id) const {
  const RequestType* rt = find_request_type(id);
  if (rt == nullptr) {
    fail(ErrorCode::kUnknownRequestType, std::string(id),
         "'" + std::string(id) + "'");
  }
  return *rt;
}

std::size_t Topology::component_index(std::string_view id) const {
  auto it = component_index_.find(id);
  if (it == component_index_.end()) {
    fail(ErrorCode::kUnknownComponent, std::string(id),
         "'" + std::string(id) + "'");
  }
  return it->second;
}

std::vector<std::string> Topology::caller_of(const RequestType& rt) const {
  if (!rt.caller.empty()) return rt.caller;
  return term_members(rt.expr.terms.front());
}

std::vector<std::string> Topology::replicas_of(std::string_view service) const {
  std::vector<std::string> out;
  for (const auto& c : components_) {
    if (!c.service.empty() && c.service == service) out.push_back(c.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON documents

namespace {

using nlohmann::json;

std::string require_string(const json& node, const char* key,
                           const std::string& context) {
  if (!node.is_object() || !node.contains(key) || !node.at(key).is_string()) {
    fail(ErrorCode::kParse, context,
         context + ": missing string field '" + key + "'");
  }
  return node.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& node,
                                     const std::string& context) {
  if (!node.is_array()) fail(ErrorCode::kParse, context, context + ": expected array");
  std::vector<std::string> out;
  for (const auto& item : node) {
    if (!item.is_string()) {
      fail(ErrorCode::kParse, context, context + ": expected array of ids");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

Term parse_term(const json& node, const std::string& rt) {
  if (node.is_string()) return Atom{node.get<std::string>()};
  if (node.is_object() && node.size() == 1 && node.contains("or")) {
    return OrGroup{string_list(node.at("or"), rt)};
  }
  if (node.is_object() && node.size() == 1 && node.contains("k_of_n")) {
    const json& body = node.at("k_of_n");
    if (!body.is_object() || !body.contains("k") ||
        !body.at("k").is_number_integer() || !body.contains("of")) {
      fail(ErrorCode::kParse, rt, rt + ": k_of_n needs integer 'k' and 'of'");
    }
    return KofN{body.at("k").get<int>(), string_list(body.at("of"), rt)};
  }
  fail(ErrorCode::kParse, rt, rt + ": unrecognized dependency term " + node.dump());
}

json term_to_json(const Term& term) {
  if (const auto* atom = std::get_if<Atom>(&term)) return atom->id;
  if (const auto* group = std::get_if<OrGroup>(&term)) {
    return json{{"or", group->ids}};
  }
  const auto& kofn = std::get<KofN>(term);
  return json{{"k_of_n", {{"k", kofn.k}, {"of", kofn.ids}}}};
}

double optional_prior(const json& node, const char* key, double fallback,
                      const std::string& id) {
  if (!node.contains(key)) return fallback;
  if (!node.at(key).is_number()) {
    fail(ErrorCode::kParse, id, id + ": '" + key + "' must be a number");
  }
  return node.at(key).get<double>();
}

}  // namespace

Topology build_topology(const json& document) {
  if (!document.is_object() || !document.contains("components") ||
      !document.contains("request_types") ||
      !document.at("components").is_array() ||
      !document.at("request_types").is_array()) {
    fail(ErrorCode::kParse, "",
         "topology document needs 'components' and 'request_types' arrays");
  }
  std::vector<Component> components;
  for (const json& node : document.at("components")) {
    Component c;
    c.id = require_string(node, "id", "component");
    c.kind = node.contains("kind")
                 ? parse_component_kind(require_string(node, "kind", c.id))
                 : ComponentKind::kService;
    c.display_name = node.contains("display_name")
                         ? require_string(node, "display_name", c.id)
                         : c.id;
    const auto [alpha, beta] = default_prior(c.kind);
    c.prior_alpha = optional_prior(node, "prior_alpha", alpha, c.id);
    c.prior_beta = optional_prior(node, "prior_beta", beta, c.id);
    if (node.contains("members")) c.members = string_list(node.at("members"), c.id);
    if (node.contains("service")) c.service = require_string(node, "service", c.id);
    components.push_back(std::move(c));
  }
  std::vector<RequestType> request_types;
  for (const json& node : document.at("request_types")) {
    RequestType rt;
    rt.id = require_string(node, "id", "request type");
    if (!node.contains("depends_on") || !node.at("depends_on").is_array()) {
      fail(ErrorCode::kParse, rt.id, rt.id + ": missing 'depends_on' array");
    }
    for (const json& term : node.at("depends_on")) {
      rt.expr.terms.push_back(parse_term(term, rt.id));
    }
    if (node.contains("is_probe")) {
      if (!node.at("is_probe").is_boolean()) {
        fail(ErrorCode::kParse, rt.id, rt.id + ": 'is_probe' must be boolean");
      }
      rt.is_probe = node.at("is_probe").get<bool>();
    }
    if (node.contains("caller")) rt.caller = string_list(node.at("caller"), rt.id);
    request_types.push_back(std::move(rt));
  }
  return Topology(std::move(components), std::move(request_types));
}

Topology build_topology(std::string_view text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, "", std::string("topology document: ") + e.what());
  }
  return build_topology(document);
}

json topology_to_json(const Topology& t) {
  json components = json::array();
  for (const auto& c : t.components()) {
    json node{{"id", c.id},
              {"kind", to_string(c.kind)},
              {"display_name", c.display_name},
              {"prior_alpha", c.prior_alpha},
              {"prior_beta", c.prior_beta}};
    if (!c.members.empty()) node["members"] = c.members;
    if (!c.service.empty()) node["service"] = c.service;
    components.push_back(std::move(node));
  }
  json request_types = json::array();
  for (const auto& rt : t.request_types()) {
    json terms = json::array();
    for (const auto& term : rt.expr.terms) terms.push_back(term_to_json(term));
    json node{{"id", rt.id}, {"depends_on", std::move(terms)},
              {"is_probe", rt.is_probe}};
    if (!rt.caller.empty()) node["caller"] = rt.caller;
    request_types.push_back(std::move(node));
  }
  return json{{"components", std::move(components)},
              {"request_types", std::move(request_types)}};
}

// ---------------------------------------------------------------------------
// Observability structure

std::map<std::string, std::vector<bool>> observability_signature(
    const Topology& t) {
  std::map<std::string, std::vector<bool>> out;
  const std::size_t width = t.request_types().size();
  for (const auto& c : t.components()) out[c.id].assign(width, false);
  for (std::size_t j = 0; j < width; ++j) {
    for (const auto& id : t.request_types()[j].expr.members()) out[id][j] = true;
  }
  return out;
}

namespace {

// Rewrites one expression through `rename`, collapsing the duplicates that
// merging introduces. Members required by an atom are healthy whenever the
// whole expression holds, so they count towards any group they also sit in.
DependencyExpr rewrite_expr(const DependencyExpr& expr,
                            const std::map<std::string, std::string>& rename,
                            const std::string& rt) {
  DependencyExpr out;
  std::set<std::string> atoms;
  for (const auto& term : expr.terms) {
    if (const auto* atom = std::get_if<Atom>(&term)) atoms.insert(rename.at(atom->id));
  }
  std::set<std::string> emitted;
  std::set<std::string> grouped;
  for (const auto& term : expr.terms) {
    if (const auto* atom = std::get_if<Atom>(&term)) {
      const std::string& id = rename.at(atom->id);
      if (emitted.insert(id).second) out.terms.push_back(Atom{id});
      continue;
    }
    const auto original = term_members(term);
    std::vector<std::string> distinct;
    for (const auto& id : original) {
      const std::string& mapped = rename.at(id);
      if (std::find(distinct.begin(), distinct.end(), mapped) == distinct.end()) {
        distinct.push_back(mapped);
      }
    }
    const int n = static_cast<int>(original.size());
    const int d = static_cast<int>(distinct.size());
    int k = term_threshold(term);
    if (d < n) k = std::clamp((k * d + n - 1) / n, 1, d);
    std::vector<std::string> remaining;
    for (auto& id : distinct) {
      if (atoms.count(id) != 0) {
        --k;
      } else {
        remaining.push_back(std::move(id));
      }
    }
    if (k <= 0) continue;
    for (const auto& id : remaining) {
      if (!grouped.insert(id).second) {
        fail(ErrorCode::kDuplicateTermMember, rt,
             "merging places '" + id + "' in two groups of request type '" +
                 rt + "'");
      }
    }
    const int m = static_cast<int>(remaining.size());
    if (m == 1) {
      out.terms.push_back(Atom{remaining.front()});
    } else if (k == 1) {
      out.terms.push_back(OrGroup{std::move(remaining)});
    } else {
      out.terms.push_back(KofN{std::min(k, m), std::move(remaining)});
    }
  }
  for (const auto& id : grouped) {
    if (atoms.count(id) != 0) {
      fail(ErrorCode::kInvariant, rt, "rewrite left a duplicate member");
    }
  }
  return out;
}

}  // namespace

Topology merge_indistinguishable(const Topology& t) {
  std::map<std::vector<bool>, std::vector<std::string>> classes;
  for (const auto& [id, bits] : observability_signature(t)) classes[bits].push_back(id);

  std::map<std::string, std::string> rename;
  std::vector<Component> components;
  for (const auto& [bits, ids] : classes) {
    if (ids.size() == 1) {
      rename[ids.front()] = ids.front();
      components.push_back(t.component(ids.front()));
      continue;
    }
    Component merged;
    merged.kind = ComponentKind::kMerged;
    merged.prior_alpha = 0.0;
    merged.prior_beta = 0.0;
    std::set<std::string> originals;
    for (const auto& id : ids) {
      const Component& c = t.component(id);
      merged.prior_alpha += c.prior_alpha;
      merged.prior_beta += c.prior_beta;
      if (c.members.empty()) {
        originals.insert(c.id);
      } else {
        originals.insert(c.members.begin(), c.members.end());
      }
    }
    merged.members.assign(originals.begin(), originals.end());
    merged.id = join(ids, "+");
    merged.display_name = merged.id;
    for (const auto& id : ids) rename[id] = merged.id;
    components.push_back(std::move(merged));
  }

  std::vector<RequestType> request_types;
  for (const auto& rt : t.request_types()) {
    RequestType out = rt;
    out.expr = rewrite_expr(rt.expr, rename, rt.id);
    out.caller.clear();
    for (const auto& id : rt.caller) {
      const std::string& mapped = rename.at(id);
      if (std::find(out.caller.begin(), out.caller.end(), mapped) ==
          out.caller.end()) {
        out.caller.push_back(mapped);
      }
    }
    request_types.push_back(std::move(out));
  }
  return Topology(std::move(components), std::move(request_types));
}

std::string probe_id(std::string_view component) {
  return "probe:" + std::string(component);
}

Topology add_probe(const Topology& t, std::string_view c) {
  t.component(c);
  const std::string id = probe_id(c);
  if (t.find_request_type(id) != nullptr) return t;
  std::vector<RequestType> request_types = t.request_types();
  RequestType probe;
  probe.id = id;
  probe.expr.terms.push_back(Atom{std::string(c)});
  probe.is_probe = true;
  request_types.push_back(std::move(probe));
  return Topology(t.components(), std::move(request_types));
}

SymptomPattern induced_pattern(const Topology& t,
                               const std::vector<std::string>& failed) {
  const std::set<std::string> down(failed.begin(), failed.end());
  for (const auto& id : down) t.component(id);
  SymptomPattern pattern;
  for (const auto& rt : t.request_types()) {
    pattern[rt.id] =
        rt.expr.evaluate([&](const std::string& id) { return down.count(id) == 0; });
  }
  return pattern;
}

std::vector<SymptomRow> symptom_table(const Topology& t) {
  std::vector<SymptomRow> rows;
  for (const auto& c : t.components()) {
    rows.push_back({c.id, induced_pattern(t, {c.id})});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Built-in systems

namespace {

Component make(std::string id, ComponentKind kind, std::string service = "") {
  const auto [alpha, beta] = default_prior(kind);
  return Component{id, kind, id, alpha, beta, {}, std::move(service)};
}

RequestType request(std::string id, std::vector<std::string> deps,
                    std::vector<std::string> caller) {
  RequestType rt;
  rt.id = std::move(id);
  for (auto& dep : deps) rt.expr.terms.push_back(Atom{std::move(dep)});
  rt.caller = std::move(caller);
  return rt;
}

}  // namespace

Topology example_system() {
  return Topology(
      {make("A", ComponentKind::kService), make("B", ComponentKind::kService),
       make("C", ComponentKind::kService), make("N1", ComponentKind::kHost),
       make("N2", ComponentKind::kHost)},
      {request("R1", {"A", "B", "N1", "N2"}, {"A", "N1"}),
       request("R2", {"A", "C", "N1"}, {"A", "N1"}),
       request("R3", {"A", "C", "N1", "N2"}, {"A", "N2"})});
}

Topology replica_example_system() {
  return Topology(
      {make("A@N1", ComponentKind::kReplica, "A"),
       make("A@N2", ComponentKind::kReplica, "A"),
       make("B", ComponentKind::kService), make("C", ComponentKind::kService),
       make("N1", ComponentKind::kHost), make("N2", ComponentKind::kHost)},
      {request("R1", {"A@N1", "N1", "B", "N2"}, {"A@N1", "N1"}),
       request("R2", {"A@N1", "N1", "C"}, {"A@N1", "N1"}),
       request("R3", {"A@N2", "N2", "C", "N1"}, {"A@N2", "N2"})});
}

}  // namespace faultloc
