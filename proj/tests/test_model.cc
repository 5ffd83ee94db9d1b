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

#include <random>
#include <set>

#include "doctest.h"
#include "faultloc/error.h"
#include "faultloc/model.h"

using namespace faultloc;

namespace {

std::vector<bool> bits(std::initializer_list<int> values) {
  std::vector<bool> out;
  for (int v : values) out.push_back(v != 0);
  return out;
}

ErrorCode error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvariant;
}

// Random topology with pure-AND request types over `n` components.
Topology random_and_topology(std::mt19937_64& rng, int n, int requests) {
  std::vector<Component> components;
  for (int i = 0; i < n; ++i) {
    components.push_back({"c" + std::to_string(i), ComponentKind::kService,
                          "c" + std::to_string(i), 0.1, 0.1, {}, ""});
  }
  std::vector<RequestType> rts;
  for (int j = 0; j < requests; ++j) {
    RequestType rt;
    rt.id = "r" + std::to_string(j);
    for (int i = 0; i < n; ++i) {
      if (rng() % 2) rt.expr.terms.push_back(Atom{"c" + std::to_string(i)});
    }
    if (rt.expr.terms.empty()) rt.expr.terms.push_back(Atom{"c" + std::to_string(rng() % n)});
    rts.push_back(std::move(rt));
  }
  return Topology(std::move(components), std::move(rts));
}

}  // namespace

TEST_CASE("example document builds with sorted ids") {
  const Topology t = build_topology(R"({
    "components": [{"id": "N2", "kind": "host"}, {"id": "A"}, {"id": "B"},
                   {"id": "C"}, {"id": "N1", "kind": "host"}],
    "request_types": [{"id": "R3", "depends_on": ["A", "C", "N1", "N2"]},
                      {"id": "R1", "depends_on": ["A", "B", "N1", "N2"]},
                      {"id": "R2", "depends_on": ["A", "C", "N1"]}]})");
  REQUIRE(t.components().size() == 5);
  REQUIRE(t.request_types().size() == 3);
  CHECK(t.components().front().id == "A");
  CHECK(t.request_types().front().id == "R1");
  CHECK(t.component("N1").prior_alpha == 0.5);
  CHECK(t.component("A").prior_alpha == 0.1);
}

TEST_CASE("minimal topology") {
  const Topology t = build_topology(
      R"({"components": [{"id": "x"}], "request_types": [{"id": "r", "depends_on": ["x"]}]})");
  CHECK(t.components().size() == 1);
}

TEST_CASE("validation errors name the offender") {
  auto build = [](const char* text) { return [text] { build_topology(std::string_view(text)); }; };
  CHECK(error_code_of(build(R"({"components": [{"id": "A"}],
      "request_types": [{"id": "R1", "depends_on": ["A", "Z"]}]})")) ==
        ErrorCode::kDanglingReference);
  CHECK(error_code_of(build(R"({"components": [{"id": "A"}, {"id": "A"}],
      "request_types": [{"id": "R1", "depends_on": ["A"]}]})")) == ErrorCode::kDuplicateId);
  CHECK(error_code_of(build(R"({"components": [{"id": "A"}],
      "request_types": [{"id": "R1", "depends_on": []}]})")) ==
        ErrorCode::kEmptyDependencySet);
  CHECK(error_code_of(build(R"({"components": [{"id": "A"}, {"id": "B"}],
      "request_types": [{"id": "R1", "depends_on": [{"k_of_n": {"k": 3, "of": ["A", "B"]}}]}]})")) ==
        ErrorCode::kKofNBounds);
  CHECK(error_code_of(build(R"({"components": [{"id": "A"}], "request_types": []})")) ==
        ErrorCode::kInvalidTopology);
  CHECK(error_code_of(build("not json")) == ErrorCode::kParse);
  try {
    build_topology(std::string_view(R"({"components": [{"id": "A"}],
        "request_types": [{"id": "R1", "depends_on": ["Z"]}]})"));
  } catch (const Error& e) {
    CHECK(e.entity() == "R1");
    CHECK(std::string(e.what()).find("Z") != std::string::npos);
  }
}

TEST_CASE("observability signatures of the example system") {
  auto sig = observability_signature(example_system());
  CHECK(sig["A"] == bits({1, 1, 1}));
  CHECK(sig["B"] == bits({1, 0, 0}));
  CHECK(sig["C"] == bits({0, 1, 1}));
  CHECK(sig["N1"] == bits({1, 1, 1}));
  CHECK(sig["N2"] == bits({1, 0, 1}));

  const auto probed = observability_signature(add_probe(example_system(), "N1"));
  CHECK(probed.at("A") != probed.at("N1"));

  const Topology single = build_topology(std::string_view(
      R"({"components": [{"id": "x"}, {"id": "y"}], "request_types": [{"id": "r", "depends_on": ["x", "y"]}]})"));
  for (const auto& [id, b] : observability_signature(single)) CHECK(b == bits({1}));
}

TEST_CASE("replica model signatures are all distinct") {
  const auto sig = observability_signature(replica_example_system());
  std::set<std::vector<bool>> distinct;
  for (const auto& [id, b] : sig) distinct.insert(b);
  CHECK(distinct.size() == sig.size());
}

TEST_CASE("merging indistinguishable components") {
  const Topology merged = merge_indistinguishable(example_system());
  REQUIRE(merged.components().size() == 4);
  const Component& an1 = merged.component("A+N1");
  CHECK(an1.kind == ComponentKind::kMerged);
  CHECK(an1.members == std::vector<std::string>{"A", "N1"});
  CHECK(an1.prior_alpha == doctest::Approx(0.6));
  CHECK(an1.prior_beta == doctest::Approx(0.2));
  CHECK(merged.request_type("R2").expr.members() == std::vector<std::string>{"A+N1", "C"});
  CHECK(merge_indistinguishable(merged) == merged);

  const Topology distinct = replica_example_system();
  CHECK(merge_indistinguishable(distinct) == distinct);
}

TEST_CASE("pod, container and process seen together merge into one") {
  const Topology t = build_topology(std::string_view(R"({
    "components": [{"id": "pod", "kind": "pod"}, {"id": "ctr", "kind": "container"},
                   {"id": "proc", "kind": "process"}, {"id": "db"}],
    "request_types": [{"id": "q1", "depends_on": ["pod", "ctr", "proc", "db"]},
                      {"id": "q2", "depends_on": ["pod", "ctr", "proc"]}]})"));
  const Topology merged = merge_indistinguishable(t);
  REQUIRE(merged.components().size() == 2);
  CHECK(merged.component("ctr+pod+proc").members.size() == 3);
}

TEST_CASE("merging rewrites groups") {
  // a and b always appear together, so the or-group collapses to one atom.
  const Topology t = build_topology(std::string_view(R"({
    "components": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
    "request_types": [{"id": "r1", "depends_on": [{"or": ["a", "b"]}, "c"]},
                      {"id": "r2", "depends_on": ["c"]}]})"));
  const Topology merged = merge_indistinguishable(t);
  const auto& terms = merged.request_type("r1").expr.terms;
  REQUIRE(terms.size() == 2);
  CHECK(std::get<Atom>(terms[0]).id == "a+b");
}

TEST_CASE("merge properties on random and-topologies") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Topology t = random_and_topology(rng, 2 + trial % 6, 1 + trial % 4);
    const Topology merged = merge_indistinguishable(t);
    CHECK(merge_indistinguishable(merged) == merged);
    std::set<std::vector<bool>> before, after;
    for (const auto& [id, b] : observability_signature(t)) before.insert(b);
    const auto sig = observability_signature(merged);
    for (const auto& [id, b] : sig) after.insert(b);
    CHECK(before == after);
    CHECK(after.size() == sig.size());

    // Identical rows iff identical signatures for pure-AND expressions.
    const auto rows = symptom_table(t);
    const auto original = observability_signature(t);
    for (const auto& r1 : rows) {
      for (const auto& r2 : rows) {
        CHECK((r1.pattern == r2.pattern) ==
              (original.at(r1.component) == original.at(r2.component)));
      }
    }
  }
}

TEST_CASE("probes") {
  const Topology t = add_probe(example_system(), "N1");
  const RequestType& probe = t.request_type(probe_id("N1"));
  CHECK(probe.is_probe);
  CHECK(probe.expr.members() == std::vector<std::string>{"N1"});
  CHECK(add_probe(t, "N1") == t);
  CHECK(add_probe(example_system(), "A").request_type(probe_id("A")).expr.members() ==
        std::vector<std::string>{"A"});
  CHECK(error_code_of([] { add_probe(example_system(), "nope"); }) ==
        ErrorCode::kUnknownComponent);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Topology base = random_and_topology(rng, 5, 3);
    const std::string c = "c" + std::to_string(trial % 5);
    const auto sig = observability_signature(add_probe(base, c));
    for (const auto& [id, b] : sig) {
      if (id != c) CHECK(b != sig.at(c));
    }
  }
}

TEST_CASE("single-fault symptom table") {
  std::map<std::string, SymptomPattern> rows;
  for (auto& row : symptom_table(example_system())) rows[row.component] = row.pattern;
  auto pattern = [](int r1, int r2, int r3) {
    return SymptomPattern{{"R1", r1 != 0}, {"R2", r2 != 0}, {"R3", r3 != 0}};
  };
  CHECK(rows["B"] == pattern(0, 1, 1));
  CHECK(rows["C"] == pattern(1, 0, 0));
  CHECK(rows["N2"] == pattern(0, 1, 0));
  CHECK(rows["A"] == pattern(0, 0, 0));
  CHECK(rows["N1"] == pattern(0, 0, 0));
}

TEST_CASE("group semantics under a single fault") {
  const Topology t = build_topology(std::string_view(R"({
    "components": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
    "request_types": [{"id": "any", "depends_on": [{"or": ["a", "b"]}]},
                      {"id": "two", "depends_on": [{"k_of_n": {"k": 2, "of": ["a", "b", "c"]}}]}]})"));
  for (const auto& row : symptom_table(t)) {
    CHECK(row.pattern.at("any"));
    CHECK(row.pattern.at("two"));
  }
  const auto both = induced_pattern(t, {"a", "b"});
  CHECK_FALSE(both.at("any"));
  CHECK_FALSE(both.at("two"));
}

TEST_CASE("document round trip") {
  std::mt19937_64 rng(3);
  std::vector<Topology> samples{example_system(), replica_example_system(),
                                merge_indistinguishable(example_system()),
                                build_topology(std::string_view(R"({
    "components": [{"id": "a", "prior_alpha": 2.5}, {"id": "b", "kind": "pod"}, {"id": "c"}],
    "request_types": [{"id": "g", "depends_on": [{"k_of_n": {"k": 2, "of": ["a", "b", "c"]}}]},
                      {"id": "p", "depends_on": ["b"], "is_probe": true}]})"))};
  for (int i = 0; i < 20; ++i) samples.push_back(random_and_topology(rng, 4, 3));
  for (const auto& t : samples) {
    CHECK(build_topology(topology_to_json(t)) == t);
    CHECK(build_topology(std::string_view(topology_to_json(t).dump())) == t);
  }
}
