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

#include "faultloc/satdiag.h"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "faultloc/error.h"

namespace faultloc {

namespace {

// A term compiled to a bitmask over component indices: it holds when at
// least `k` of the masked components are working.
struct MaskTerm {
  std::uint32_t mask;
  int k;
};

struct MaskRequest {
  std::vector<MaskTerm> terms;
  bool expected;
};

std::vector<MaskRequest> compile(const Topology& t, const SymptomPattern& p) {
  std::vector<MaskRequest> out;
  for (const auto& rt : t.request_types()) {
    auto it = p.find(rt.id);
    if (it == p.end()) {
      throw Error(ErrorCode::kMissingPattern, rt.id,
                  "pattern has no bit for request type '" + rt.id + "'");
    }
    MaskRequest req{{}, it->second};
    for (const auto& term : rt.expr.terms) {
      std::uint32_t mask = 0;
      for (const auto& id : term_members(term)) {
        mask |= std::uint32_t{1} << t.component_index(id);
      }
      req.terms.push_back({mask, term_threshold(term)});
    }
    out.push_back(std::move(req));
  }
  return out;
}

bool satisfies(const std::vector<MaskRequest>& requests, std::uint32_t working) {
  for (const auto& req : requests) {
    bool value = true;
    for (const auto& term : req.terms) {
      if (std::popcount(working & term.mask) < term.k) {
        value = false;
        break;
      }
    }
    if (value != req.expected) return false;
  }
  return true;
}

std::uint32_t next_combination(std::uint32_t v) {
  const std::uint32_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace

bool check_assignment(const Topology& t, const Assignment& a,
                      const SymptomPattern& p) {
  for (const auto& [id, state] : a) t.component(id);
  for (const auto& rt : t.request_types()) {
    auto it = p.find(rt.id);
    if (it == p.end()) {
      throw Error(ErrorCode::kMissingPattern, rt.id,
                  "pattern has no bit for request type '" + rt.id + "'");
    }
    const bool value = rt.expr.evaluate([&](const std::string& id) {
      auto found = a.find(id);
      return found == a.end() || found->second;
    });
    if (value != it->second) return false;
  }
  return true;
}

std::vector<FaultSet> minimal_fault_sets(const Topology& t,
                                         const SymptomPattern& p) {
  const std::size_t n = t.components().size();
  if (n > kMaxSatComponents) {
    throw Error(ErrorCode::kTooManyComponents, "",
                "exhaustive search supports at most " +
                    std::to_string(kMaxSatComponents) + " components, got " +
                    std::to_string(n));
  }
  const auto requests = compile(t, p);
  const std::uint32_t all = n == 32 ? ~0u : ((std::uint32_t{1} << n) - 1);

  std::vector<FaultSet> found;
  for (std::size_t size = 0; size <= n && found.empty(); ++size) {
    if (size == 0) {
      if (satisfies(requests, all)) found.emplace_back();
      continue;
    }
    const std::uint32_t last = ((std::uint32_t{1} << size) - 1) << (n - size);
    for (std::uint32_t failed = (std::uint32_t{1} << size) - 1;;
         failed = next_combination(failed)) {
      if (satisfies(requests, all & ~failed)) {
        FaultSet set;
        for (std::size_t i = 0; i < n; ++i) {
          if (failed & (std::uint32_t{1} << i)) set.insert(t.components()[i].id);
        }
        found.push_back(std::move(set));
      }
      if (failed == last) break;
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

bool distinguishable(const Topology& t, const FaultSet& f1, const FaultSet& f2) {
  return induced_pattern(t, {f1.begin(), f1.end()}) !=
         induced_pattern(t, {f2.begin(), f2.end()});
}

Topology restrict_to_pattern(const Topology& t, const SymptomPattern& p) {
  std::vector<RequestType> kept;
  for (const auto& rt : t.request_types()) {
    if (p.count(rt.id) != 0) kept.push_back(rt);
  }
  return Topology(t.components(), std::move(kept));
}

}  // namespace faultloc
