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
#include <map>
#include <string>
#include <vector>

#include "faultloc/model.h"

namespace faultloc {

double beta_mean(double alpha, double beta);
double beta_variance(double alpha, double beta);

/// Beta belief over one component's probability of working.
struct HealthPosterior {
  std::string component;
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const { return beta_mean(alpha, beta); }
  double variance() const { return beta_variance(alpha, beta); }
};

/// Counts for one request type in one window.
struct WindowObservation {
  std::string request_type;
  std::int64_t n = 0;
  std::int64_t s = 0;

  std::int64_t failures() const { return n - s; }
  bool operator==(const WindowObservation&) const = default;
};

/// All observations for the window range [start, end].
struct ObservationWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::vector<WindowObservation> observations;

  bool operator==(const ObservationWindow&) const = default;
};

struct InferenceConfig {
  int max_iterations = 100;
  double convergence_epsilon = 1e-4;
  double gamma_clamp_epsilon = 1e-6;
  double mu_threshold = 0.5;
  double mu_high = 0.2;
  double mu_moderate = 0.35;
  double carry_forward_lambda = 0.0;
  int top_k = 3;
  /// Largest fault hypothesis enumerated explicitly (besides the full set).
  int max_hypothesis_size = 3;
  /// Prior odds of any one component being at fault in a hypothesis.
  double occam_fault_rate = 0.01;

  /// Throws Error(kInvalidConfig).
  void validate() const;
};

enum class Category { kHigh, kModerate, kLow };
const char* to_string(Category category);

/// Success probability of `expr` under independent per-component health
/// probabilities.
double success_probability(const DependencyExpr& expr,
                           const std::map<std::string, double>& theta);

/// Priors taken from the topology's component pseudo-counts.
std::vector<HealthPosterior> base_priors(const Topology& t);

/// One windowed update. Each fault hypothesis (which components may be
/// broken) runs its own expected-evidence sweep, and the sweeps are mixed by
/// their evidence bound. Components no observed request type touches keep
/// their priors.
std::vector<HealthPosterior> update_window(
    const Topology& t, const std::vector<HealthPosterior>& priors,
    const std::vector<WindowObservation>& obs, const InferenceConfig& cfg);

struct OracleMean {
  std::string component;
  double mean;
};

/// Posterior means by brute-force integration over a midpoint grid.
/// Limited to four components.
std::vector<OracleMean> oracle_posterior(const Topology& t,
                                         const std::vector<WindowObservation>& obs,
                                         int grid_points);

/// Negative log-likelihood of `obs` with the listed components forced to a
/// state (0 failed, 1 working). Lower explains the data better.
double intervention_score(const Topology& t,
                          const std::vector<WindowObservation>& obs,
                          const std::map<std::string, int>& interventions,
                          const std::map<std::string, double>& theta_base,
                          double clamp_epsilon = 1e-6);

struct RankedCause {
  std::string component;
  double mean = 0.0;
  double variance = 0.0;
  Category category = Category::kLow;
};

/// Thresholded, sorted, truncated, labelled.
std::vector<RankedCause> rank(const std::vector<HealthPosterior>& posteriors,
                              const InferenceConfig& cfg);

std::vector<HealthPosterior> carry_forward(
    const std::vector<HealthPosterior>& previous,
    const std::vector<HealthPosterior>& base, double lambda);

/// A cause together with its report context.
struct Cause {
  RankedCause ranked;
  std::vector<std::string> members;
  std::string rollup;
  double rollup_mean = 0.0;
  std::vector<WindowObservation> evidence;
};

struct Diagnosis {
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  std::vector<Cause> causes;
  std::vector<std::string> unobserved_components;
  std::vector<std::vector<std::string>> indistinguishable_with;
};

/// Builds the report for one window from already-updated posteriors.
Diagnosis diagnose(const Topology& t, const std::vector<HealthPosterior>& posteriors,
                   const ObservationWindow& window, const InferenceConfig& cfg);

/// Window-by-window engine: carry forward, update, rank.
class Localizer {
 public:
  Localizer(Topology topology, InferenceConfig cfg);

  Diagnosis observe(const ObservationWindow& window);
  /// Drops accumulated belief after an operator intervention.
  void reset();

  const Topology& topology() const { return topology_; }
  const std::vector<HealthPosterior>& posteriors() const { return current_; }

 private:
  Topology topology_;
  InferenceConfig cfg_;
  std::vector<HealthPosterior> base_;
  std::vector<HealthPosterior> current_;
};

std::vector<Diagnosis> iterative_localize(const Topology& t,
                                          const std::vector<ObservationWindow>& windows,
                                          const InferenceConfig& cfg);

}  // namespace faultloc
