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

#include "faultloc/report.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace faultloc {

std::string format_fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

namespace {

std::string format_sci(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3e", value);
  return buffer;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

// Groups of components whose single-fault rows coincide.
std::vector<std::vector<std::string>> identical_rows(const std::vector<SymptomRow>& rows) {
  std::map<SymptomPattern, std::vector<std::string>> by_pattern;
  for (const auto& row : rows) by_pattern[row.pattern].push_back(row.component);
  std::vector<std::vector<std::string>> groups;
  for (auto& [pattern, ids] : by_pattern) {
    if (ids.size() > 1) groups.push_back(std::move(ids));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace

nlohmann::json diagnosis_to_json(const Diagnosis& d) {
  nlohmann::json causes = nlohmann::json::array();
  for (const auto& cause : d.causes) {
    nlohmann::json evidence = nlohmann::json::object();
    for (const auto& o : cause.evidence) evidence[o.request_type] = {{"n", o.n}, {"s", o.s}};
    nlohmann::json node{{"component", cause.ranked.component},
                        {"mean", cause.ranked.mean},
                        {"variance", cause.ranked.variance},
                        {"category", to_string(cause.ranked.category)},
                        {"members", cause.members},
                        {"evidence", std::move(evidence)}};
    node["rollup"] = cause.rollup.empty()
                         ? nlohmann::json(nullptr)
                         : nlohmann::json{{"service", cause.rollup}, {"mean", cause.rollup_mean}};
    causes.push_back(std::move(node));
  }
  return {{"window_start", d.window_start},
          {"window_end", d.window_end},
          {"causes", std::move(causes)},
          {"unobserved_components", d.unobserved_components},
          {"indistinguishable_with", d.indistinguishable_with}};
}

std::string render_diagnosis(const Diagnosis& d) {
  std::ostringstream out;
  out << "window " << d.window_start;
  if (d.window_end != d.window_start) out << ".." << d.window_end;
  out << "\n";
  if (d.causes.empty()) {
    out << "  no probable root cause\n";
  } else {
    out << "  " << pad("#", 3) << pad("component", 14) << pad("mean", 9)
        << pad("variance", 11) << pad("category", 10) << "evidence (s/n)\n";
    for (std::size_t i = 0; i < d.causes.size(); ++i) {
      const Cause& c = d.causes[i];
      std::vector<std::string> evidence;
      for (const auto& o : c.evidence) {
        evidence.push_back(o.request_type + " " + std::to_string(o.s) + "/" +
                           std::to_string(o.n));
      }
      out << "  " << pad(std::to_string(i + 1), 3) << pad(c.ranked.component, 14)
          << pad(format_fixed(c.ranked.mean, 4), 9) << pad(format_sci(c.ranked.variance), 11)
          << pad(to_string(c.ranked.category), 10) << join(evidence, ", ") << "\n";
      if (!c.rollup.empty()) {
        out << "     replica of " << c.rollup << " (service mean "
            << format_fixed(c.rollup_mean, 4) << ")\n";
      }
      if (!c.members.empty()) {
        out << "     merged: " << join(c.members, ", ") << "\n";
      }
    }
  }
  for (const auto& group : d.indistinguishable_with) {
    out << "  indistinguishable: " << join(group, ", ") << "\n";
  }
  if (!d.unobserved_components.empty()) {
    out << "  unobserved: " << join(d.unobserved_components, ", ") << "\n";
  }
  return out.str();
}

nlohmann::json symptom_table_to_json(const Topology& t) {
  const auto rows = symptom_table(t);
  const auto groups = identical_rows(rows);
  nlohmann::json request_types = nlohmann::json::array();
  for (const auto& rt : t.request_types()) request_types.push_back(rt.id);
  nlohmann::json out_rows = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json bits = nlohmann::json::array();
    for (const auto& rt : t.request_types()) bits.push_back(row.pattern.at(rt.id) ? 1 : 0);
    std::vector<std::string> twins;
    for (const auto& group : groups) {
      if (std::find(group.begin(), group.end(), row.component) == group.end()) continue;
      for (const auto& id : group) {
        if (id != row.component) twins.push_back(id);
      }
    }
    out_rows.push_back(
        {{"component", row.component}, {"pattern", std::move(bits)}, {"indistinguishable_with", twins}});
  }
  return {{"request_types", std::move(request_types)},
          {"rows", std::move(out_rows)},
          {"indistinguishable_groups", groups}};
}

std::string render_symptom_table(const Topology& t) {
  const auto rows = symptom_table(t);
  const auto groups = identical_rows(rows);
  std::size_t width = 9;
  for (const auto& row : rows) width = std::max(width, row.component.size() + 2);
  std::vector<std::size_t> columns;
  for (const auto& rt : t.request_types()) columns.push_back(std::max<std::size_t>(rt.id.size() + 2, 4));

  std::ostringstream out;
  out << pad("fault", width);
  for (std::size_t j = 0; j < columns.size(); ++j) out << pad(t.request_types()[j].id, columns[j]);
  out << "note\n";
  for (const auto& row : rows) {
    out << pad(row.component, width);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out << pad(row.pattern.at(t.request_types()[j].id) ? "1" : "0", columns[j]);
    }
    for (const auto& group : groups) {
      if (std::find(group.begin(), group.end(), row.component) != group.end()) {
        out << "can't differentiate: " << join(group, ", ");
      }
    }
    std::string line = out.str();
    out.str("");
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

}  // namespace faultloc
