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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "faultloc/model.h"

namespace faultloc {

/// Component id -> state (false = failed, true = working).
using Assignment = std::map<std::string, bool>;
/// Failed components of an explanation, sorted.
using FaultSet = std::set<std::string>;

/// Exhaustive search refuses topologies larger than this.
inline constexpr std::size_t kMaxSatComponents = 24;

/// True iff every request type's expression under `a` matches `p`.
/// Components absent from `a` are taken as working. Throws
/// Error(kMissingPattern) when `p` lacks a request type and
/// Error(kUnknownComponent) for ids outside the topology.
bool check_assignment(const Topology& t, const Assignment& a,
                      const SymptomPattern& p);

/// All explanations with the fewest failed components, sorted
/// lexicographically. An empty result means no assignment reproduces `p`.
std::vector<FaultSet> minimal_fault_sets(const Topology& t,
                                         const SymptomPattern& p);

/// True iff failing exactly `f1` and exactly `f2` produce different patterns.
bool distinguishable(const Topology& t, const FaultSet& f1, const FaultSet& f2);

/// Restricts `t` to the request types present in `p`, for patterns that
/// leave some request types unknown.
Topology restrict_to_pattern(const Topology& t, const SymptomPattern& p);

}  // namespace faultloc
