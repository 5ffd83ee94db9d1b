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

#include <cmath>

#include "doctest.h"
#include "faultloc/bayes.h"
#include "faultloc/error.h"

using namespace faultloc;

namespace {

Topology uniform_pair() {
  return build_topology(std::string_view(R"({
    "components": [{"id": "x", "prior_alpha": 1, "prior_beta": 1},
                   {"id": "y", "prior_alpha": 1, "prior_beta": 1}],
    "request_types": [{"id": "r", "depends_on": ["x", "y"]}]})"));
}

}  // namespace

TEST_CASE("oracle reproduces the conjugate closed form") {
  const Topology t = build_topology(std::string_view(R"({
    "components": [{"id": "x", "prior_alpha": 1, "prior_beta": 1}],
    "request_types": [{"id": "r", "depends_on": ["x"]}]})"));
  const auto out = oracle_posterior(t, {{"r", 10, 7}}, 401);
  REQUIRE(out.size() == 1);
  CHECK(out[0].mean == doctest::Approx(8.0 / 12.0).epsilon(1e-4));
}

TEST_CASE("oracle without data returns prior means") {
  const auto out = oracle_posterior(uniform_pair(), {{"r", 0, 0}}, 101);
  CHECK(out[0].mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out[1].mean == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("oracle keeps symmetric components equal") {
  const auto out = oracle_posterior(uniform_pair(), {{"r", 20, 0}}, 201);
  CHECK(std::abs(out[0].mean - out[1].mean) < 1e-12);
  CHECK(out[0].mean < 0.5);
}

TEST_CASE("oracle handles groups and prefers the engine's answer on clear data") {
  const Topology t = build_topology(std::string_view(R"({
    "components": [{"id": "a", "prior_alpha": 1, "prior_beta": 1},
                   {"id": "b", "prior_alpha": 1, "prior_beta": 1},
                   {"id": "c", "prior_alpha": 1, "prior_beta": 1}],
    "request_types": [{"id": "ab", "depends_on": [{"or": ["a", "b"]}]},
                      {"id": "bc", "depends_on": ["b", "c"]},
                      {"id": "only_c", "depends_on": ["c"]}]})"));
  const std::vector<WindowObservation> obs{{"ab", 100, 99}, {"bc", 100, 5}, {"only_c", 100, 100}};
  const auto exact = oracle_posterior(t, obs, 101);
  CHECK(exact[1].mean < exact[0].mean);
  CHECK(exact[1].mean < exact[2].mean);
  const auto engine = update_window(t, base_priors(t), obs, {});
  CHECK(engine[1].mean() < engine[0].mean());
  CHECK(engine[1].mean() < engine[2].mean());
}

TEST_CASE("oracle errors") {
  const Topology big = build_topology(std::string_view(R"({
    "components": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}, {"id": "e"}],
    "request_types": [{"id": "r", "depends_on": ["a", "b", "c", "d", "e"]}]})"));
  auto code = [](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvariant;
  };
  CHECK(code([&] { oracle_posterior(big, {}, 101); }) == ErrorCode::kDimensionTooHigh);
  CHECK(code([&] { oracle_posterior(uniform_pair(), {}, 50); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("oracle integrates in log space") {
  // Linear-space weights would underflow to zero everywhere here.
  const auto out = oracle_posterior(uniform_pair(), {{"r", 2000000, 1000000}}, 101);
  CHECK(std::isfinite(out[0].mean));
  CHECK(out[0].mean == doctest::Approx(out[1].mean));
}
