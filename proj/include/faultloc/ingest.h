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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faultloc/bayes.h"
#include "faultloc/model.h"
#include "faultloc/simulate.h"

namespace faultloc {

struct ParseOptions {
  /// Skip malformed lines instead of failing on the first one.
  bool skip_malformed = false;
  /// When set, records are also checked against this topology.
  const Topology* topology = nullptr;
};

struct ParsedCall {
  std::size_t line = 0;
  CallRecord record;
};

struct SkippedLine {
  std::size_t line = 0;
  std::string reason;
};

/// Parses one JSON Lines record. Throws Error(kParse) mentioning `line`.
CallRecord parse_call_line(std::string_view text, std::size_t line,
                           const Topology* topology = nullptr);

/// Parses a JSON Lines stream. Blank lines are ignored. Lines that fail to
/// parse are collected in `skipped` when `skip_malformed` is set; topology
/// mismatches are always fatal.
std::vector<ParsedCall> parse_calls(std::istream& in, const ParseOptions& options,
                                    std::vector<SkippedLine>* skipped = nullptr);

/// Buckets window indices: bucket b spans [origin + b*length, origin + (b+1)*length).
struct WindowSpec {
  std::int64_t length = 1;
  std::int64_t origin = 0;
};

/// Streaming aggregation over records ordered by window. Holds one open
/// window at a time.
class WindowAggregator {
 public:
  explicit WindowAggregator(WindowSpec spec);

  /// Returns the previous window once a record from a later one arrives.
  /// Throws Error(kInvalidArgument) when records go back in time.
  std::optional<ObservationWindow> push(const CallRecord& record);
  /// Flushes the open window, if any.
  std::optional<ObservationWindow> finish();

 private:
  ObservationWindow close();

  WindowSpec spec_;
  std::optional<std::int64_t> bucket_;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts_;
};

std::vector<ObservationWindow> aggregate(const std::vector<CallRecord>& records,
                                         WindowSpec spec = {});

/// Bit 0 iff the failure fraction exceeds `threshold`. Request types with
/// no traffic are left out.
SymptomPattern binarize(const std::vector<WindowObservation>& obs, double threshold = 0.5);

nlohmann::json window_to_json(const ObservationWindow& window);

}  // namespace faultloc
