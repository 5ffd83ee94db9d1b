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

#include "faultloc/bayes.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

#include "faultloc/error.h"

namespace faultloc {

namespace {

constexpr std::size_t kMaxGroupMembers = 16;

[[noreturn]] void fail(ErrorCode code, const std::string& entity,
                       const std::string& detail) {
  throw Error(code, entity, std::string(to_string(code)) + ": " + detail);
}

// Sums and products over sorted operands so that the result does not depend
// on the order components were listed in. Symmetric inputs then produce
// bit-identical outputs.
double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

double stable_product(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 1.0;
  for (double v : values) total *= v;
  return total;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log(p) + (1.0 - p) * std::log1p(-p));
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace

double beta_mean(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "", "Beta shape parameters must be positive");
  }
  return alpha / (alpha + beta);
}

double beta_variance(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "", "Beta shape parameters must be positive");
  }
  const double total = alpha + beta;
  return alpha * beta / (total * total * (total + 1.0));
}

void InferenceConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidConfig, what, what); };
  if (max_iterations < 1) bad("max_iterations must be at least 1");
  if (!(convergence_epsilon > 0.0)) bad("convergence_epsilon must be positive");
  if (!(gamma_clamp_epsilon > 0.0) || !(gamma_clamp_epsilon < 0.5)) {
    bad("gamma_clamp_epsilon must lie in (0, 0.5)");
  }
  if (!(0.0 < mu_high && mu_high < mu_moderate && mu_moderate < mu_threshold &&
        mu_threshold < 1.0)) {
    bad("category bounds must satisfy 0 < mu_high < mu_moderate < mu_threshold < 1");
  }
  if (!(carry_forward_lambda >= 0.0 && carry_forward_lambda <= 1.0)) {
    bad("carry_forward_lambda must lie in [0, 1]");
  }
  if (top_k < 1) bad("top_k must be at least 1");
  if (max_hypothesis_size < 0) bad("max_hypothesis_size must be non-negative");
  if (!(occam_fault_rate > 0.0 && occam_fault_rate <= 1.0)) {
    bad("occam_fault_rate must lie in (0, 1]");
  }
}

const char* to_string(Category category) {
  switch (category) {
    case Category::kHigh: return "High";
    case Category::kModerate: return "Moderate";
    case Category::kLow: return "Low";
  }
  return "Low";
}

// ---------------------------------------------------------------------------
// Success probability

double success_probability(const DependencyExpr& expr,
                           const std::map<std::string, double>& theta) {
  std::set<std::string> seen;
  double gamma = 1.0;
  for (const auto& term : expr.terms) {
    const auto ids = term_members(term);
    std::vector<double> p;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) {
        fail(ErrorCode::kDuplicateTermMember, id,
             "component '" + id + "' appears in more than one term");
      }
      auto it = theta.find(id);
      if (it == theta.end()) fail(ErrorCode::kMissingTheta, id, "no theta for '" + id + "'");
      if (!(it->second >= 0.0 && it->second <= 1.0)) {
        fail(ErrorCode::kThetaOutOfRange, id, "theta for '" + id + "' outside [0, 1]");
      }
      p.push_back(it->second);
    }
    const int k = term_threshold(term);
    const int n = static_cast<int>(p.size());
    double term_p;
    if (k == n) {
      term_p = 1.0;
      for (double v : p) term_p *= v;
    } else if (k == 1) {
      double all_down = 1.0;
      for (double v : p) all_down *= 1.0 - v;
      term_p = 1.0 - all_down;
    } else {
      // dist[c] = probability that exactly c of the members seen so far work.
      std::vector<double> dist(n + 1, 0.0);
      dist[0] = 1.0;
      for (int m = 0; m < n; ++m) {
        for (int c = m + 1; c >= 1; --c) {
          dist[c] = dist[c] * (1.0 - p[m]) + dist[c - 1] * p[m];
        }
        dist[0] *= 1.0 - p[m];
      }
      term_p = 0.0;
      for (int c = k; c <= n; ++c) term_p += dist[c];
    }
    gamma *= term_p;
  }
  return std::clamp(gamma, 0.0, 1.0);
}

std::vector<HealthPosterior> base_priors(const Topology& t) {
  std::vector<HealthPosterior> out;
  for (const auto& c : t.components()) out.push_back({c.id, c.prior_alpha, c.prior_beta});
  return out;
}

// ---------------------------------------------------------------------------
// Windowed update

namespace {

struct CompiledTerm {
  std::vector<std::size_t> members;
  int k;
};

struct CompiledRequest {
  std::vector<CompiledTerm> terms;
  std::vector<std::size_t> members;
  double s;
  double f;
};

struct TermStats {
  double p;
  std::vector<double> joint;  // P(X_i = 1, term holds) per member
  double entropy;             // H(member states | term holds)
};

TermStats term_stats(const CompiledTerm& term, const std::vector<double>& mu) {
  const std::size_t m = term.members.size();
  if (m == 1) return {mu[term.members[0]], {mu[term.members[0]]}, 0.0};

  std::vector<double> probs;
  std::vector<std::vector<double>> joint_parts(m);
  std::vector<double> factors(m);
  for (std::uint32_t state = 0; state < (std::uint32_t{1} << m); ++state) {
    if (std::popcount(state) < term.k) continue;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = mu[term.members[i]];
      factors[i] = (state >> i) & 1u ? x : 1.0 - x;
    }
    const double pz = stable_product(factors);
    if (pz <= 0.0) continue;
    probs.push_back(pz);
    for (std::size_t i = 0; i < m; ++i) {
      if ((state >> i) & 1u) joint_parts[i].push_back(pz);
    }
  }
  TermStats stats{stable_sum(probs), {}, 0.0};
  for (auto& parts : joint_parts) stats.joint.push_back(stable_sum(std::move(parts)));
  if (stats.p > 0.0) {
    std::vector<double> terms;
    for (double pz : probs) {
      const double q = pz / stats.p;
      if (q > 0.0) terms.push_back(-q * std::log(q));
    }
    stats.entropy = stable_sum(std::move(terms));
  }
  return stats;
}

struct SweepResult {
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_weight;
};

// Expected-evidence sweep for one hypothesis. Components with free[i] == 0
// are held working; the rest are updated until the means settle. Returns
// completed pseudo-counts and an evidence lower bound for the hypothesis.
SweepResult sweep(const std::vector<CompiledRequest>& requests,
                  const std::vector<double>& alpha0,
                  const std::vector<double>& beta0,
                  const std::vector<char>& free, const InferenceConfig& cfg) {
  const std::size_t count = alpha0.size();
  const double eps = cfg.gamma_clamp_epsilon;
  const double log_eps = std::log(eps);

  std::vector<double> mu(count);
  for (std::size_t i = 0; i < count; ++i) {
    mu[i] = free[i] ? alpha0[i] / (alpha0[i] + beta0[i]) : 1.0;
  }

  SweepResult result{alpha0, beta0, 0.0};
  for (int iteration = 0; iteration < cfg.max_iterations; ++iteration) {
    std::vector<std::vector<double>> add_alpha(count);
    std::vector<std::vector<double>> add_beta(count);
    double bound = 0.0;

    for (const auto& req : requests) {
      std::vector<TermStats> stats;
      std::vector<double> term_p;
      std::vector<double> term_h;
      for (const auto& term : req.terms) {
        stats.push_back(term_stats(term, mu));
        term_p.push_back(stats.back().p);
        term_h.push_back(stats.back().entropy);
      }
      const double gamma = stable_product(term_p);
      const double gc = std::clamp(gamma, eps, 1.0 - eps);
      const bool unexplained = 1.0 - gamma < eps;
      const double h_success = stable_sum(term_h);

      std::vector<double> member_h;
      for (std::size_t t = 0; t < req.terms.size(); ++t) {
        const TermStats& st = stats[t];
        const double others = st.p > 0.0 ? gamma / st.p : 0.0;
        for (std::size_t m = 0; m < req.terms[t].members.size(); ++m) {
          const std::size_t i = req.terms[t].members[m];
          const double up_given_success = st.p > 0.0 ? st.joint[m] / st.p : mu[i];
          const double up_given_failure =
              unexplained ? mu[i]
                          : std::clamp((mu[i] - others * st.joint[m]) / (1.0 - gc),
                                       0.0, 1.0);
          const double a = req.s * up_given_success + req.f * up_given_failure;
          add_alpha[i].push_back(a);
          add_beta[i].push_back(req.s + req.f - a);
          member_h.push_back(binary_entropy(mu[i]));
        }
      }
      const double h_states = stable_sum(std::move(member_h));
      const double h_failure = std::max(
          0.0, (h_states - binary_entropy(gc) - gc * h_success) / (1.0 - gc));
      bound += req.s * h_success + req.f * h_failure;
      if (req.f > 0.0 && unexplained) bound += req.f * log_eps;
      if (req.s > 0.0 && gamma < eps) bound += req.s * log_eps;
    }

    double delta = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      result.alpha[i] = alpha0[i] + stable_sum(std::move(add_alpha[i]));
      result.beta[i] = beta0[i] + stable_sum(std::move(add_beta[i]));
      if (free[i]) {
        const double next = result.alpha[i] / (result.alpha[i] + result.beta[i]);
        delta = std::max(delta, std::abs(next - mu[i]));
        mu[i] = next;
      }
    }
    std::vector<double> divergence;
    for (std::size_t i = 0; i < count; ++i) {
      if (!free[i]) continue;
      divergence.push_back(log_beta(result.alpha[i], result.beta[i]) -
                           log_beta(alpha0[i], beta0[i]));
    }
    result.log_weight = stable_sum(std::move(divergence)) + bound;
    if (delta < cfg.convergence_epsilon) break;
  }
  return result;
}

void enumerate_subsets(std::size_t n, std::size_t max_size,
                       std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> current;
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    out.push_back(current);
    if (current.size() == max_size) return;
    for (std::size_t i = start; i < n; ++i) {
      current.push_back(i);
      self(self, i + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
}

void check_observations(const Topology& t, const std::vector<WindowObservation>& obs) {
  for (const auto& o : obs) {
    t.request_type(o.request_type);
    if (o.n < 0 || o.s < 0 || o.s > o.n) {
      fail(ErrorCode::kInvalidCounts, o.request_type,
           "request type '" + o.request_type + "': n=" + std::to_string(o.n) +
               ", s=" + std::to_string(o.s));
    }
  }
}

}  // namespace

std::vector<HealthPosterior> update_window(
    const Topology& t, const std::vector<HealthPosterior>& priors,
    const std::vector<WindowObservation>& obs, const InferenceConfig& cfg) {
  cfg.validate();
  check_observations(t, obs);
  const std::size_t count = t.components().size();
  if (priors.size() != count) {
    fail(ErrorCode::kMismatchedComponents, "",
         "priors must cover every component exactly once");
  }
  std::vector<double> alpha0(count), beta0(count);
  std::vector<char> covered(count, 0);
  for (const auto& p : priors) {
    const Component* c = t.find_component(p.component);
    if (c == nullptr) {
      fail(ErrorCode::kMismatchedComponents, p.component,
           "prior for unknown component '" + p.component + "'");
    }
    const std::size_t i = t.component_index(p.component);
    if (covered[i]) {
      fail(ErrorCode::kMismatchedComponents, p.component,
           "duplicate prior for '" + p.component + "'");
    }
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) {
      fail(ErrorCode::kInvalidArgument, p.component,
           "prior for '" + p.component + "' needs positive shape parameters");
    }
    covered[i] = 1;
    alpha0[i] = p.alpha;
    beta0[i] = p.beta;
  }

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> totals;
  for (const auto& o : obs) {
    auto& entry = totals[o.request_type];
    entry.first += o.n;
    entry.second += o.s;
  }

  std::vector<CompiledRequest> requests;
  std::vector<char> observed(count, 0);
  std::vector<char> suspect(count, 0);
  for (const auto& [id, counts] : totals) {
    if (counts.first == 0) continue;
    const RequestType& rt = t.request_type(id);
    CompiledRequest req;
    req.s = static_cast<double>(counts.second);
    req.f = static_cast<double>(counts.first - counts.second);
    for (const auto& term : rt.expr.terms) {
      CompiledTerm compiled{{}, term_threshold(term)};
      for (const auto& member : term_members(term)) {
        compiled.members.push_back(t.component_index(member));
      }
      if (compiled.members.size() > kMaxGroupMembers) {
        fail(ErrorCode::kInvalidArgument, rt.id,
             "request type '" + rt.id + "' has a group larger than " +
                 std::to_string(kMaxGroupMembers));
      }
      for (std::size_t i : compiled.members) {
        req.members.push_back(i);
        observed[i] = 1;
        if (req.f > 0.0) suspect[i] = 1;
      }
      req.terms.push_back(std::move(compiled));
    }
    requests.push_back(std::move(req));
  }

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < count; ++i) {
    if (suspect[i]) candidates.push_back(i);
  }
  std::vector<std::vector<std::size_t>> hypotheses;
  enumerate_subsets(candidates.size(),
                    static_cast<std::size_t>(cfg.max_hypothesis_size), hypotheses);
  if (candidates.size() > static_cast<std::size_t>(cfg.max_hypothesis_size)) {
    std::vector<std::size_t> everything(candidates.size());
    for (std::size_t i = 0; i < everything.size(); ++i) everything[i] = i;
    hypotheses.push_back(std::move(everything));
  }

  const double log_rate = std::log(cfg.occam_fault_rate);
  std::vector<SweepResult> results;
  for (const auto& hypothesis : hypotheses) {
    std::vector<char> free(count, 0);
    for (std::size_t pos : hypothesis) free[candidates[pos]] = 1;
    results.push_back(sweep(requests, alpha0, beta0, free, cfg));
    results.back().log_weight += static_cast<double>(hypothesis.size()) * log_rate;
  }

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& r : results) top = std::max(top, r.log_weight);
  std::vector<double> weights;
  for (const auto& r : results) weights.push_back(std::exp(r.log_weight - top));
  const double norm = stable_sum(weights);
  if (!std::isfinite(top) || !(norm > 0.0)) {
    throw InvariantError("hypothesis weights did not normalize");
  }

  std::vector<HealthPosterior> out = priors;
  for (auto& posterior : out) {
    const std::size_t i = t.component_index(posterior.component);
    if (!observed[i]) continue;
    std::vector<double> a, b;
    for (std::size_t h = 0; h < results.size(); ++h) {
      a.push_back(weights[h] * results[h].alpha[i]);
      b.push_back(weights[h] * results[h].beta[i]);
    }
    posterior.alpha = stable_sum(std::move(a)) / norm;
    posterior.beta = stable_sum(std::move(b)) / norm;
    if (!(posterior.alpha > 0.0) || !(posterior.beta > 0.0) ||
        !std::isfinite(posterior.alpha) || !std::isfinite(posterior.beta)) {
      throw InvariantError("posterior for '" + posterior.component +
                           "' left the Beta parameter space");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interventions, ranking, temporal carry-forward

double intervention_score(const Topology& t,
                          const std::vector<WindowObservation>& obs,
                          const std::map<std::string, int>& interventions,
                          const std::map<std::string, double>& theta_base,
                          double clamp_epsilon) {
  check_observations(t, obs);
  std::map<std::string, double> theta = theta_base;
  for (const auto& [id, state] : interventions) {
    t.component(id);
    if (state != 0 && state != 1) {
      fail(ErrorCode::kInvalidArgument, id,
           "forced state for '" + id + "' must be 0 or 1");
    }
    theta[id] = state == 0 ? clamp_epsilon : 1.0 - clamp_epsilon;
  }
  double nll = 0.0;
  for (const auto& o : obs) {
    if (o.n == 0) continue;
    const double gamma = std::clamp(
        success_probability(t.request_type(o.request_type).expr, theta),
        clamp_epsilon, 1.0 - clamp_epsilon);
    nll -= static_cast<double>(o.s) * std::log(gamma) +
           static_cast<double>(o.failures()) * std::log1p(-gamma);
  }
  return nll;
}

std::vector<RankedCause> rank(const std::vector<HealthPosterior>& posteriors,
                              const InferenceConfig& cfg) {
  std::vector<RankedCause> out;
  for (const auto& p : posteriors) {
    const double mean = p.mean();
    if (!(mean < cfg.mu_threshold)) continue;
    Category category = Category::kLow;
    if (mean < cfg.mu_high) {
      category = Category::kHigh;
    } else if (mean < cfg.mu_moderate) {
      category = Category::kModerate;
    }
    out.push_back({p.component, mean, p.variance(), category});
  }
  std::sort(out.begin(), out.end(), [](const RankedCause& a, const RankedCause& b) {
    if (a.mean != b.mean) return a.mean < b.mean;
    if (a.variance != b.variance) return a.variance < b.variance;
    return a.component < b.component;
  });
  if (out.size() > static_cast<std::size_t>(cfg.top_k)) out.resize(cfg.top_k);
  return out;
}

std::vector<HealthPosterior> carry_forward(
    const std::vector<HealthPosterior>& previous,
    const std::vector<HealthPosterior>& base, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "", "lambda must lie in [0, 1]");
  }
  std::map<std::string, const HealthPosterior*> prev;
  for (const auto& p : previous) {
    if (!prev.emplace(p.component, &p).second) {
      fail(ErrorCode::kMismatchedComponents, p.component,
           "duplicate component '" + p.component + "'");
    }
  }
  if (prev.size() != base.size()) {
    fail(ErrorCode::kMismatchedComponents, "",
         "previous and base posteriors cover different components");
  }
  std::vector<HealthPosterior> out;
  for (const auto& b : base) {
    auto it = prev.find(b.component);
    if (it == prev.end()) {
      fail(ErrorCode::kMismatchedComponents, b.component,
           "no previous posterior for '" + b.component + "'");
    }
    out.push_back({b.component, lambda * it->second->alpha + (1.0 - lambda) * b.alpha,
                   lambda * it->second->beta + (1.0 - lambda) * b.beta});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports and the window loop

Diagnosis diagnose(const Topology& t, const std::vector<HealthPosterior>& posteriors,
                   const ObservationWindow& window, const InferenceConfig& cfg) {
  Diagnosis d;
  d.window_start = window.start;
  d.window_end = window.end;

  std::map<std::string, std::vector<WindowObservation>> evidence;
  for (const auto& o : window.observations) {
    if (o.n == 0) continue;
    for (const auto& id : t.request_type(o.request_type).expr.members()) {
      evidence[id].push_back(o);
    }
  }
  std::vector<HealthPosterior> observed;
  std::map<std::string, double> means;
  for (const auto& p : posteriors) {
    means[p.component] = p.mean();
    if (evidence.count(p.component) != 0) {
      observed.push_back(p);
    } else {
      d.unobserved_components.push_back(p.component);
    }
  }
  std::sort(d.unobserved_components.begin(), d.unobserved_components.end());

  for (auto& ranked : rank(observed, cfg)) {
    Cause cause;
    const Component& c = t.component(ranked.component);
    cause.members = c.members;
    if (!c.service.empty()) {
      cause.rollup = c.service;
      cause.rollup_mean = ranked.mean;
      for (const auto& replica : t.replicas_of(c.service)) {
        auto it = means.find(replica);
        if (it != means.end()) cause.rollup_mean = std::min(cause.rollup_mean, it->second);
      }
    }
    cause.evidence = evidence[ranked.component];
    std::sort(cause.evidence.begin(), cause.evidence.end(),
              [](const auto& a, const auto& b) { return a.request_type < b.request_type; });
    cause.ranked = std::move(ranked);
    d.causes.push_back(std::move(cause));
  }
  for (const auto& c : t.components()) {
    if (!c.members.empty()) d.indistinguishable_with.push_back(c.members);
  }
  return d;
}

Localizer::Localizer(Topology topology, InferenceConfig cfg)
    : topology_(std::move(topology)), cfg_(cfg) {
  cfg_.validate();
  base_ = base_priors(topology_);
  current_ = base_;
}

Diagnosis Localizer::observe(const ObservationWindow& window) {
  const auto priors = carry_forward(current_, base_, cfg_.carry_forward_lambda);
  current_ = update_window(topology_, priors, window.observations, cfg_);
  return diagnose(topology_, current_, window, cfg_);
}

void Localizer::reset() { current_ = base_; }

std::vector<Diagnosis> iterative_localize(const Topology& t,
                                          const std::vector<ObservationWindow>& windows,
                                          const InferenceConfig& cfg) {
  Localizer localizer(t, cfg);
  std::vector<Diagnosis> out;
  for (const auto& window : windows) out.push_back(localizer.observe(window));
  return out;
}

}  // namespace faultloc
