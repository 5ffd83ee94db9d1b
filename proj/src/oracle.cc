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

// Grid-integration oracle used to check the windowed update independently.

#include <cmath>
#include <cstdint>
#include <limits>

#include "faultloc/bayes.h"
#include "faultloc/error.h"

namespace faultloc {

namespace {

constexpr std::size_t kMaxOracleComponents = 4;

// Success probability by summing over every joint state of the members,
// kept separate from success_probability on purpose.
struct TruthTable {
  std::vector<std::size_t> members;
  std::vector<char> holds;
  double s;
  double f;
};

TruthTable tabulate(const Topology& t, const RequestType& rt, double s, double f) {
  TruthTable table{{}, {}, s, f};
  const auto ids = rt.expr.members();
  for (const auto& id : ids) table.members.push_back(t.component_index(id));
  const std::size_t states = std::size_t{1} << ids.size();
  table.holds.resize(states);
  for (std::size_t state = 0; state < states; ++state) {
    table.holds[state] = rt.expr.evaluate([&](const std::string& id) {
      for (std::size_t m = 0; m < ids.size(); ++m) {
        if (ids[m] == id) return ((state >> m) & 1u) != 0;
      }
      return true;
    });
  }
  return table;
}

double table_gamma(const TruthTable& table, const std::vector<double>& theta) {
  double gamma = 0.0;
  for (std::size_t state = 0; state < table.holds.size(); ++state) {
    if (!table.holds[state]) continue;
    double p = 1.0;
    for (std::size_t m = 0; m < table.members.size(); ++m) {
      const double x = theta[table.members[m]];
      p *= (state >> m) & 1u ? x : 1.0 - x;
    }
    gamma += p;
  }
  return gamma;
}

}  // namespace

std::vector<OracleMean> oracle_posterior(const Topology& t,
                                         const std::vector<WindowObservation>& obs,
                                         int grid_points) {
  const std::size_t dims = t.components().size();
  if (dims > kMaxOracleComponents) {
    throw Error(ErrorCode::kDimensionTooHigh, "",
                "oracle supports at most 4 components, got " + std::to_string(dims));
  }
  if (grid_points < 101) {
    throw Error(ErrorCode::kInvalidArgument, "", "oracle needs at least 101 grid points");
  }

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> totals;
  for (const auto& o : obs) {
    t.request_type(o.request_type);
    if (o.n < 0 || o.s < 0 || o.s > o.n) {
      throw Error(ErrorCode::kInvalidCounts, o.request_type,
                  "invalid counts for '" + o.request_type + "'");
    }
    totals[o.request_type].first += o.n;
    totals[o.request_type].second += o.s;
  }
  std::vector<TruthTable> tables;
  for (const auto& [id, counts] : totals) {
    if (counts.first == 0) continue;
    tables.push_back(tabulate(t, t.request_type(id), static_cast<double>(counts.second),
                              static_cast<double>(counts.first - counts.second)));
  }

  const std::size_t g = static_cast<std::size_t>(grid_points);
  std::vector<double> grid(g);
  for (std::size_t k = 0; k < g; ++k) grid[k] = (static_cast<double>(k) + 0.5) / g;
  std::vector<std::vector<double>> log_prior(dims, std::vector<double>(g));
  for (std::size_t i = 0; i < dims; ++i) {
    const double a = t.components()[i].prior_alpha;
    const double b = t.components()[i].prior_beta;
    for (std::size_t k = 0; k < g; ++k) {
      log_prior[i][k] = (a - 1.0) * std::log(grid[k]) + (b - 1.0) * std::log1p(-grid[k]);
    }
  }

  // Streaming log-sum-exp over the grid: running maximum plus rescaling.
  double peak = -std::numeric_limits<double>::infinity();
  double mass = 0.0;
  std::vector<double> moment(dims, 0.0);
  std::vector<std::size_t> index(dims, 0);
  std::vector<double> theta(dims);
  std::size_t total = 1;
  for (std::size_t i = 0; i < dims; ++i) total *= g;

  for (std::size_t point = 0; point < total; ++point) {
    double lw = 0.0;
    for (std::size_t i = 0; i < dims; ++i) {
      theta[i] = grid[index[i]];
      lw += log_prior[i][index[i]];
    }
    for (const auto& table : tables) {
      const double gamma = table_gamma(table, theta);
      if (table.s > 0.0) lw += table.s * std::log(gamma);
      if (table.f > 0.0) lw += table.f * std::log1p(-gamma);
    }
    if (std::isfinite(lw)) {
      if (lw > peak) {
        const double scale = std::exp(peak - lw);
        mass *= scale;
        for (double& m : moment) m *= scale;
        peak = lw;
      }
      const double w = std::exp(lw - peak);
      mass += w;
      for (std::size_t i = 0; i < dims; ++i) moment[i] += w * theta[i];
    }
    for (std::size_t i = 0; i < dims; ++i) {
      if (++index[i] < g) break;
      index[i] = 0;
    }
  }

  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::kDegenerateLikelihood, "",
                "likelihood vanishes on every grid point");
  }
  std::vector<OracleMean> out;
  for (std::size_t i = 0; i < dims; ++i) {
    const double mean = moment[i] / mass;
    if (!std::isfinite(mean)) {
      throw Error(ErrorCode::kDegenerateLikelihood, t.components()[i].id,
                  "non-finite posterior mean");
    }
    out.push_back({t.components()[i].id, mean});
  }
  return out;
}

}  // namespace faultloc
