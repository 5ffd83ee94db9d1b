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

#include "faultloc/ingest.h"

#include <algorithm>
#include <istream>
#include <set>

#include "faultloc/error.h"

namespace faultloc {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& detail) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line),
              "line " + std::to_string(line) + ": " + detail);
}

std::vector<std::string> id_list(const nlohmann::json& node, const char* key,
                                 std::size_t line) {
  if (!node.contains(key) || !node.at(key).is_array()) {
    malformed(line, std::string("missing array '") + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& item : node.at(key)) {
    if (!item.is_string()) malformed(line, std::string("'") + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

CallRecord parse_call_line(std::string_view text, std::size_t line,
                           const Topology* topology) {
  nlohmann::json node;
  try {
    node = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    malformed(line, "not valid JSON");
  }
  if (!node.is_object()) malformed(line, "expected a JSON object");
  CallRecord record;
  if (!node.contains("window") || !node.at("window").is_number_integer()) {
    malformed(line, "missing integer 'window'");
  }
  record.window = node.at("window").get<std::int64_t>();
  if (!node.contains("request_type") || !node.at("request_type").is_string()) {
    malformed(line, "missing string 'request_type'");
  }
  record.request_type = node.at("request_type").get<std::string>();
  if (!node.contains("outcome") || !node.at("outcome").is_string()) {
    malformed(line, "missing 'outcome'");
  }
  const std::string outcome = node.at("outcome").get<std::string>();
  if (outcome != "success" && outcome != "failure") {
    malformed(line, "outcome must be 'success' or 'failure'");
  }
  record.success = outcome == "success";
  record.caller = id_list(node, "caller", line);
  record.callee = id_list(node, "callee", line);

  if (topology != nullptr) {
    const RequestType* rt = topology->find_request_type(record.request_type);
    if (rt == nullptr) {
      throw Error(ErrorCode::kUnknownRequestType, record.request_type,
                  "line " + std::to_string(line) + ": unknown request type '" +
                      record.request_type + "'");
    }
    std::set<std::string> seen(record.caller.begin(), record.caller.end());
    seen.insert(record.callee.begin(), record.callee.end());
    const auto expected = rt->expr.members();
    if (!std::equal(seen.begin(), seen.end(), expected.begin(), expected.end())) {
      throw Error(ErrorCode::kDanglingReference, record.request_type,
                  "line " + std::to_string(line) + ": caller and callee of '" +
                      record.request_type + "' do not match its dependency set");
    }
  }
  return record;
}

std::vector<ParsedCall> parse_calls(std::istream& in, const ParseOptions& options,
                                    std::vector<SkippedLine>* skipped) {
  std::vector<ParsedCall> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back({line, parse_call_line(text, line, options.topology)});
    } catch (const Error& e) {
      if (!options.skip_malformed || e.code() != ErrorCode::kParse) throw;
      if (skipped != nullptr) skipped->push_back({line, e.what()});
    }
  }
  return out;
}

WindowAggregator::WindowAggregator(WindowSpec spec) : spec_(spec) {
  if (spec_.length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "", "window length must be positive");
  }
}

ObservationWindow WindowAggregator::close() {
  ObservationWindow window;
  window.start = spec_.origin + *bucket_ * spec_.length;
  window.end = window.start + spec_.length - 1;
  for (const auto& [rt, counts] : counts_) {
    window.observations.push_back({rt, counts.first, counts.second});
  }
  counts_.clear();
  return window;
}

std::optional<ObservationWindow> WindowAggregator::push(const CallRecord& record) {
  const std::int64_t bucket = floor_div(record.window - spec_.origin, spec_.length);
  std::optional<ObservationWindow> done;
  if (bucket_.has_value() && bucket != *bucket_) {
    if (bucket < *bucket_) {
      throw Error(ErrorCode::kInvalidArgument, record.request_type,
                  "records are not ordered by window (window " +
                      std::to_string(record.window) + " arrived late)");
    }
    done = close();
  }
  bucket_ = bucket;
  auto& counts = counts_[record.request_type];
  ++counts.first;
  if (record.success) ++counts.second;
  return done;
}

std::optional<ObservationWindow> WindowAggregator::finish() {
  if (!bucket_.has_value()) return std::nullopt;
  ObservationWindow window = close();
  bucket_.reset();
  return window;
}

std::vector<ObservationWindow> aggregate(const std::vector<CallRecord>& records,
                                         WindowSpec spec) {
  WindowAggregator aggregator(spec);
  std::vector<ObservationWindow> out;
  for (const auto& record : records) {
    if (auto window = aggregator.push(record)) out.push_back(std::move(*window));
  }
  if (auto window = aggregator.finish()) out.push_back(std::move(*window));
  return out;
}

SymptomPattern binarize(const std::vector<WindowObservation>& obs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "", "binarize threshold must lie in (0, 1)");
  }
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> totals;
  for (const auto& o : obs) {
    totals[o.request_type].first += o.n;
    totals[o.request_type].second += o.s;
  }
  SymptomPattern pattern;
  for (const auto& [rt, counts] : totals) {
    if (counts.first == 0) continue;
    const double failure_fraction =
        static_cast<double>(counts.first - counts.second) / static_cast<double>(counts.first);
    pattern[rt] = !(failure_fraction > threshold);
  }
  return pattern;
}

nlohmann::json window_to_json(const ObservationWindow& window) {
  nlohmann::json observations = nlohmann::json::array();
  for (const auto& o : window.observations) {
    observations.push_back({{"request_type", o.request_type}, {"n", o.n}, {"s", o.s}});
  }
  return {{"window", window.start},
          {"window_end", window.end},
          {"observations", std::move(observations)}};
}

}  // namespace faultloc
