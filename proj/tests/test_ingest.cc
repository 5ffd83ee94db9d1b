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
#include <sstream>

#include "doctest.h"
#include "faultloc/error.h"
#include "faultloc/ingest.h"

using namespace faultloc;

namespace {

std::string jsonl(const std::vector<CallRecord>& records) {
  std::string out;
  for (const auto& r : records) out += serialize_call(r) + "\n";
  return out;
}

std::vector<CallRecord> parse_all(const std::string& text, const Topology* t = nullptr) {
  std::istringstream in(text);
  ParseOptions options;
  options.topology = t;
  std::vector<CallRecord> out;
  for (auto& p : parse_calls(in, options)) out.push_back(std::move(p.record));
  return out;
}

std::vector<CallRecord> empirical_records() {
  const LibraryEntry e = scenario_library().at("empirical-illustration");
  return run_scenario(e.topology, e.scenario, e.colocation, 1);
}

}  // namespace

TEST_CASE("parse valid lines") {
  const std::string text =
      R"({"window": 0, "request_type": "R1", "outcome": "success", "caller": ["A"], "callee": ["B", "N1", "N2"]})"
      "\n\n"
      R"({"window": 0, "request_type": "R2", "outcome": "failure", "caller": ["A"], "callee": ["C", "N1"]})"
      "\n"
      R"({"window": 1, "request_type": "R3", "outcome": "success", "caller": ["A", "N2"], "callee": ["C", "N1"]})";
  std::istringstream in(text);
  const auto parsed = parse_calls(in, ParseOptions{false, nullptr});
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[1].line == 3);
  CHECK_FALSE(parsed[1].record.success);
  const Topology t = example_system();
  CHECK(parse_all(text, &t).size() == 3);
}

TEST_CASE("malformed lines report their line number") {
  const std::string text =
      R"({"window": 0, "request_type": "R1", "outcome": "success", "caller": [], "callee": []})"
      "\n"
      R"({"window": 0, "request_type": "R1", "caller": [], "callee": []})";
  std::istringstream in(text);
  try {
    parse_calls(in, ParseOptions{false, nullptr});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream again(text + "\n{oops\n");
  std::vector<SkippedLine> skipped;
  const auto kept = parse_calls(again, ParseOptions{true, nullptr}, &skipped);
  CHECK(kept.size() == 1);
  REQUIRE(skipped.size() == 2);
  CHECK(skipped[0].line == 2);
  CHECK(skipped[1].line == 3);
}

TEST_CASE("validation against a topology") {
  const Topology t = example_system();
  auto code = [&](const char* line) {
    try {
      parse_call_line(line, 1, &t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvariant;
  };
  CHECK(code(R"({"window": 0, "request_type": "R9", "outcome": "success", "caller": ["A"], "callee": []})") ==
        ErrorCode::kUnknownRequestType);
  try {
    parse_call_line(
        R"({"window": 0, "request_type": "R2", "outcome": "success", "caller": ["A"], "callee": ["B"]})", 4, &t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDanglingReference);
    CHECK(e.entity() == "R2");
  }
}

TEST_CASE("serialize then parse is the identity") {
  const LibraryEntry e = scenario_library().at("example-scenario-3");
  const auto records = run_scenario(e.topology, e.scenario, e.colocation, 1);
  CHECK(parse_all(jsonl(records), &e.topology) == records);
}

TEST_CASE("aggregate the empirical illustration") {
  const auto windows = aggregate(empirical_records());
  REQUIRE(windows.size() == 1);
  const std::vector<WindowObservation> expected{{"R1", 300, 60}, {"R2", 200, 40}, {"R3", 500, 100}};
  CHECK(windows[0].observations == expected);
  CHECK(aggregate({}).empty());
}

TEST_CASE("identical windows aggregate identically") {
  auto records = empirical_records();
  auto copy = records;
  for (auto& r : copy) r.window = 1;
  records.insert(records.end(), copy.begin(), copy.end());
  const auto windows = aggregate(records);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].observations == windows[1].observations);
  CHECK(windows[1].start == 1);
}

TEST_CASE("window buckets") {
  std::vector<CallRecord> records;
  for (std::int64_t w = 0; w < 7; ++w) records.push_back({w, "R1", w % 2 == 0, {}, {}});
  const auto windows = aggregate(records, {3, 0});
  REQUIRE(windows.size() == 3);
  CHECK(windows[0].start == 0);
  CHECK(windows[0].end == 2);
  CHECK(windows[0].observations[0].n == 3);
  CHECK(windows[0].observations[0].s == 2);
  CHECK(windows[2].start == 6);
  CHECK_THROWS_AS(aggregate(records, {0, 0}), Error);

  WindowAggregator streaming({1, 0});
  CHECK_FALSE(streaming.push({2, "R1", true, {}, {}}).has_value());
  CHECK_THROWS_AS(streaming.push({1, "R1", true, {}, {}}), Error);
}

TEST_CASE("aggregation is a homomorphism over merged streams") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<CallRecord> a, b;
    for (int i = 0; i < 200; ++i) {
      CallRecord r{static_cast<std::int64_t>(rng() % 6), "R" + std::to_string(1 + rng() % 3),
                   rng() % 3 != 0, {}, {}};
      (rng() % 2 ? a : b).push_back(r);
    }
    auto by_window = [](const CallRecord& x, const CallRecord& y) { return x.window < y.window; };
    std::stable_sort(a.begin(), a.end(), by_window);
    std::stable_sort(b.begin(), b.end(), by_window);
    std::vector<CallRecord> both;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both), by_window);

    std::map<std::pair<std::int64_t, std::string>, std::pair<std::int64_t, std::int64_t>> summed, joint;
    for (const auto* part : {&a, &b}) {
      for (const auto& w : aggregate(*part)) {
        for (const auto& o : w.observations) {
          summed[{w.start, o.request_type}].first += o.n;
          summed[{w.start, o.request_type}].second += o.s;
        }
      }
    }
    for (const auto& w : aggregate(both)) {
      for (const auto& o : w.observations) {
        CHECK(o.s <= o.n);
        CHECK(o.n > 0);
        joint[{w.start, o.request_type}] = {o.n, o.s};
      }
    }
    CHECK(summed == joint);
  }
}

TEST_CASE("binarize") {
  const std::vector<WindowObservation> counts{{"R1", 300, 60}, {"R2", 200, 40}, {"R3", 500, 100}};
  CHECK(binarize(counts, 0.5) == SymptomPattern{{"R1", false}, {"R2", false}, {"R3", false}});
  CHECK(binarize({{"R1", 10, 10}, {"R2", 3, 3}}) == SymptomPattern{{"R1", true}, {"R2", true}});
  const auto partial = binarize({{"R1", 0, 0}, {"R2", 10, 5}});
  CHECK(partial.count("R1") == 0);
  CHECK(partial.at("R2"));
  CHECK_THROWS_AS(binarize(counts, 1.0), Error);
}

TEST_CASE("window documents") {
  const auto windows = aggregate(empirical_records());
  const auto doc = window_to_json(windows[0]);
  CHECK(doc["window"] == 0);
  CHECK(doc["observations"][0]["n"] == 300);
  CHECK(doc["observations"][0]["s"] == 60);
}
