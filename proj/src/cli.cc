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

#include "faultloc/cli.h"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "faultloc/bayes.h"
#include "faultloc/error.h"
#include "faultloc/ingest.h"
#include "faultloc/model.h"
#include "faultloc/report.h"
#include "faultloc/satdiag.h"
#include "faultloc/simulate.h"

namespace faultloc::cli {

namespace {

struct Options {
  std::string topology;
  std::string library;
  std::string scenario;
  std::string calls = "-";
  std::string out;
  std::string format = "table";
  std::uint64_t seed = 1;
  double mu_threshold = InferenceConfig{}.mu_threshold;
  double lambda = InferenceConfig{}.carry_forward_lambda;
  double binarize_threshold = 0.5;
  std::int64_t window_length = 1;
  bool skip_malformed = false;
  std::vector<std::string> probes;
  int max_windows = 50;
};

[[noreturn]] void input_error(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, "", message);
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) input_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path, "'" + path + "': " + e.what());
  }
}

const LibraryEntry& library_entry(const std::map<std::string, LibraryEntry>& library,
                                  const std::string& name) {
  auto it = library.find(name);
  if (it != library.end()) return it->second;
  std::string names;
  for (const auto& [key, entry] : library) names += (names.empty() ? "" : ", ") + key;
  input_error("unknown library scenario '" + name + "' (available: " + names + ")");
}

Topology load_topology(const Options& o) {
  if (!o.topology.empty()) return build_topology(read_json(o.topology));
  if (!o.library.empty()) return library_entry(scenario_library(), o.library).topology;
  input_error("--topology or --library is required");
}

LibraryEntry load_scenario(const Options& o) {
  if (!o.library.empty() && o.scenario.empty()) {
    LibraryEntry entry = library_entry(scenario_library(), o.library);
    if (!o.topology.empty()) entry.topology = build_topology(read_json(o.topology));
    return entry;
  }
  if (o.scenario.empty()) input_error("--library or --scenario is required");
  Colocation colocation;
  Scenario scenario = scenario_from_json(read_json(o.scenario), &colocation);
  return {load_topology(o), std::move(scenario), std::move(colocation)};
}

InferenceConfig inference_config(const Options& o) {
  InferenceConfig cfg;
  cfg.mu_threshold = o.mu_threshold;
  cfg.carry_forward_lambda = o.lambda;
  cfg.validate();
  return cfg;
}

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) input_error("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

bool json_format(const Options& o) { return o.format == "json"; }

// SAT view of the window: bits from the counts, then the smallest fault sets.
nlohmann::json sat_explanations(const Topology& t, const ObservationWindow& window,
                                double threshold) {
  const SymptomPattern pattern = binarize(window.observations, threshold);
  if (pattern.empty() || t.components().size() > kMaxSatComponents) return nullptr;
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& set : minimal_fault_sets(restrict_to_pattern(t, pattern), pattern)) {
    sets.push_back(std::vector<std::string>(set.begin(), set.end()));
  }
  return sets;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const LibraryEntry entry = load_scenario(o);
  const auto records = run_scenario(entry.topology, entry.scenario, entry.colocation, o.seed);
  Sink sink(o.out, out);
  for (const auto& record : records) sink.stream() << serialize_call(record) << "\n";
  return kExitOk;
}

int cmd_localize(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  const Topology topology = load_topology(o);
  const InferenceConfig cfg = inference_config(o);

  std::ifstream file;
  std::istream* source = &in;
  if (o.calls != "-") {
    file.open(o.calls, std::ios::binary);
    if (!file) input_error("cannot open '" + o.calls + "'");
    source = &file;
  }
  ParseOptions parse_options;
  parse_options.skip_malformed = o.skip_malformed;
  parse_options.topology = &topology;
  std::vector<SkippedLine> skipped;
  const auto parsed = parse_calls(*source, parse_options, &skipped);
  for (const auto& s : skipped) err << "skipped " << s.reason << "\n";

  const Topology merged = merge_indistinguishable(topology);
  WindowAggregator aggregator({o.window_length, 0});
  std::vector<ObservationWindow> windows;
  for (const auto& p : parsed) {
    if (auto w = aggregator.push(p.record)) windows.push_back(std::move(*w));
  }
  if (auto w = aggregator.finish()) windows.push_back(std::move(*w));

  Localizer localizer(merged, cfg);
  Sink sink(o.out, out);
  nlohmann::json report = nlohmann::json::array();
  for (const auto& window : windows) {
    const Diagnosis d = localizer.observe(window);
    if (json_format(o)) {
      nlohmann::json node = diagnosis_to_json(d);
      node["sat_explanations"] = sat_explanations(merged, window, o.binarize_threshold);
      report.push_back(std::move(node));
    } else {
      sink.stream() << render_diagnosis(d);
    }
  }
  if (json_format(o)) sink.stream() << nlohmann::json{{"windows", report}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_table(const Options& o, std::ostream& out) {
  Topology topology = load_topology(o);
  for (const auto& c : o.probes) topology = add_probe(topology, c);
  Sink sink(o.out, out);
  if (json_format(o)) {
    sink.stream() << symptom_table_to_json(topology).dump(2) << "\n";
  } else {
    sink.stream() << render_symptom_table(topology);
  }
  return kExitOk;
}

int cmd_probe(const Options& o, std::ostream& out) {
  Topology topology = load_topology(o);
  if (o.probes.empty()) input_error("probe needs at least one --component");
  for (const auto& c : o.probes) topology = add_probe(topology, c);
  Sink sink(o.out, out);
  sink.stream() << topology_to_json(topology).dump(2) << "\n";
  return kExitOk;
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

// Reads operator choices until one is usable. Returns the atomic components
// to repair, empty for a pass.
std::vector<std::string> prompt_fix(std::istream& in, std::ostream& err, const Diagnosis& d,
                                    const Topology& merged, const Topology& original) {
  std::string line;
  while (true) {
    err << "fix> " << std::flush;
    if (!std::getline(in, line)) return {};
    const std::string choice = trim(line);
    if (choice.empty() || choice == "pass") return {};
    std::string target = choice;
    if (choice == "top") {
      if (d.causes.empty()) return {};
      target = d.causes.front().ranked.component;
    }
    for (const Topology* t : {&merged, &original}) {
      try {
        std::vector<std::string> atoms;
        for (const auto& id : resolve_target(*t, target)) {
          for (const auto& atom : resolve_target(original, id)) atoms.push_back(atom);
        }
        return atoms;
      } catch (const Error&) {
      }
    }
    err << "unknown component '" << choice << "'\n";
  }
}

int cmd_replay(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  const LibraryEntry entry = load_scenario(o);
  const InferenceConfig cfg = inference_config(o);
  const Topology merged = merge_indistinguishable(entry.topology);
  ScenarioRunner runner(entry.topology, entry.scenario, entry.colocation, o.seed,
                        /*apply_repairs=*/false);
  Localizer localizer(merged, cfg);

  std::int64_t last_fault = -1;
  for (const auto& e : entry.scenario.events) {
    if (e.action == EventAction::kFail) last_fault = std::max(last_fault, e.window);
  }

  Sink sink(o.out, out);
  nlohmann::json turns = nlohmann::json::array();
  nlohmann::json fixes = nlohmann::json::array();
  std::vector<std::string> order;
  bool recovered = false;
  std::int64_t elapsed = 0;
  while (elapsed < o.max_windows) {
    const std::int64_t window = runner.next_window();
    const auto windows = aggregate(runner.step());
    const ObservationWindow observed =
        windows.empty() ? ObservationWindow{window, window, {}} : windows.front();
    const Diagnosis d = localizer.observe(observed);
    ++elapsed;
    const auto& failed = runner.state().failed;
    nlohmann::json turn{{"window", window},
                        {"diagnosis", diagnosis_to_json(d)},
                        {"failed", std::vector<std::string>(failed.begin(), failed.end())}};
    if (!json_format(o)) sink.stream() << render_diagnosis(d);
    if (window >= last_fault && d.causes.empty() && failed.empty()) {
      recovered = true;
      turn["action"] = "done";
      turns.push_back(std::move(turn));
      break;
    }
    if (elapsed >= o.max_windows) {
      turn["action"] = "stopped";
      turns.push_back(std::move(turn));
      break;
    }
    const auto repair = prompt_fix(in, err, d, merged, entry.topology);
    if (repair.empty()) {
      turn["action"] = "pass";
      if (!json_format(o)) sink.stream() << "  operator: pass\n";
    } else {
      for (const auto& id : repair) runner.fix(id);
      localizer.reset();
      std::string label;
      for (const auto& id : repair) label += (label.empty() ? "" : "+") + id;
      turn["action"] = "fix";
      turn["fixed"] = repair;
      fixes.push_back({{"window", window}, {"components", repair}});
      order.push_back(label);
      if (!json_format(o)) sink.stream() << "  operator: fix " << label << "\n";
    }
    turns.push_back(std::move(turn));
  }

  if (json_format(o)) {
    sink.stream() << nlohmann::json{{"scenario", entry.scenario.name},
                                    {"seed", o.seed},
                                    {"windows_elapsed", elapsed},
                                    {"recovered", recovered},
                                    {"fix_order", order},
                                    {"fixes", fixes},
                                    {"turns", turns}}
                         .dump(2)
                  << "\n";
  } else {
    std::string joined;
    for (const auto& label : order) joined += (joined.empty() ? "" : ", ") + label;
    sink.stream() << "transcript: " << elapsed << " windows, " << order.size() << " fixes"
                  << (order.empty() ? "" : " (" + joined + ")") << ", "
                  << (recovered ? "system healthy" : "not recovered") << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Fault localization for request-type dependency models", "faultloc"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--topology", o.topology, "Topology document (JSON)");
  app.add_option("--library", o.library, "Built-in scenario name");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  app.add_option("--mu-threshold", o.mu_threshold, "Diagnosis threshold on posterior means")
      ->capture_default_str();
  app.add_option("--lambda", o.lambda, "Carry-forward weight of the previous window")
      ->capture_default_str();
  app.add_option("--binarize-threshold", o.binarize_threshold,
                 "Failure fraction above which a request type counts as failing")
      ->capture_default_str();
  app.add_option("--out", o.out, "Output path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Emit call records for a scenario");
  simulate->add_option("--scenario", o.scenario, "Scenario document (JSON)");

  auto* localize = app.add_subcommand("localize", "Rank probable root causes per window");
  localize->add_option("--calls", o.calls, "Call records (JSON Lines, '-' for stdin)")
      ->capture_default_str();
  localize->add_option("--window-length", o.window_length, "Windows per bucket")
      ->capture_default_str();
  localize->add_flag("--skip-malformed", o.skip_malformed, "Skip unparsable lines");

  auto* table = app.add_subcommand("table", "Print the single-fault symptom table");
  table->add_option("--probe", o.probes, "Add a probe on this component first");

  auto* replay = app.add_subcommand("replay", "Diagnose, fix and re-observe turn by turn");
  replay->add_option("--scenario", o.scenario, "Scenario document (JSON)");
  replay->add_option("--max-windows", o.max_windows, "Stop after this many windows")
      ->capture_default_str();

  auto* probe = app.add_subcommand("probe", "Add probe request types and print the topology");
  probe->add_option("--component", o.probes, "Component to probe")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(o, out);
    if (*localize) return cmd_localize(o, in, out, err);
    if (*table) return cmd_table(o, out);
    if (*replay) return cmd_replay(o, in, out, err);
    if (*probe) return cmd_probe(o, out);
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}

}  // namespace faultloc::cli
