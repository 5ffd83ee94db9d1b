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

#include <string>

#include "faultloc/bayes.h"
#include "faultloc/model.h"

namespace faultloc {

nlohmann::json diagnosis_to_json(const Diagnosis& d);
/// Terminal rendering of one diagnosis, newline-terminated.
std::string render_diagnosis(const Diagnosis& d);

nlohmann::json symptom_table_to_json(const Topology& t);
/// Plain-text table: one row per component, one column per request type,
/// with indistinguishable rows annotated.
std::string render_symptom_table(const Topology& t);

/// Fixed-precision formatting used by every text rendering.
std::string format_fixed(double value, int digits);

}  // namespace faultloc
