// Copyright 2026 The kpogates Authors
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

// kpo: batch experiments for cat-qubit gates in Kerr parametric oscillators.
//
//   kpo <verb> CONFIG.json [--set key=value ...] [--output-dir DIR]
//
// Results go to CSV / JSON files; a JSON summary is printed on stdout. On
// failure a JSON error object is printed on stderr and the exit code is
// nonzero (2 config, 3 I/O, 4 provenance, 5 numerics, 1 other).

#include "kpo/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

using kpo::experiments::json;

int fail(const std::string& type, const std::string& message, int code, const json& extra = json::object()) {
  json err = {{"error", {{"type", type}, {"message", message}}}};
  for (const auto& [k, v] : extra.items()) err["error"][k] = v;
  std::cerr << err.dump() << std::endl;
  return code;
}

/// "key=value"; the value is parsed as JSON when possible, else taken as a string.
json parse_overrides(const std::vector<std::string>& sets) {
  json out = json::object();
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw kpo::experiments::ConfigError(s, 0, "override must be key=value");
    const std::string key = s.substr(0, eq);
    const std::string value = s.substr(eq + 1);
    try {
      out[key] = json::parse(value);
    } catch (const json::parse_error&) {
      out[key] = value;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gate experiments for Kerr parametric oscillator qubits"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string output_dir;

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"gate-time-sweep", "infidelity versus gate time for analytic and optimized waveforms"},
      {"optimize", "optimize the pulse coefficients at one gate time"},
      {"trajectory", "observables (and Wigner snapshots) during a gate"},
      {"angle-sweep", "continuous-angle gates from a scaled pulse"},
      {"robustness-grid", "infidelity under relative amplitude errors"},
      {"loss-sweep", "infidelity under single-photon loss"},
      {"wigner", "Wigner function of a state on a grid"},
      {"validate-config", "check a config file and print its hash"}};
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override a config field, key=value (value parsed as JSON)");
    sub->add_option("--output-dir,-o", output_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    json overrides = parse_overrides(sets);
    if (!output_dir.empty()) overrides["output_dir"] = output_dir;

    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    // The verb names the experiment; a config naming a different one is rejected.
    json probe;
    try {
      probe = json::parse(text.str());
    } catch (const json::parse_error&) {
      probe = json::object();  // parse_config_text reports the syntax error with its line
    }
    if (verb != "validate-config") {
      if (probe.is_object() && probe.contains("experiment") && probe["experiment"].is_string() &&
          probe["experiment"].get<std::string>() != verb) {
        return fail("config", "config is for '" + probe["experiment"].get<std::string>() + "', not '" + verb + "'", 2);
      }
      overrides["experiment"] = verb;
    }
    const auto cfg = kpo::experiments::parse_config_text(text.str(), overrides);
    if (verb == "validate-config") {
      std::cout << json{{"ok", true},
                        {"experiment", std::string(to_string(cfg.kind))},
                        {"config_hash", cfg.hash}}
                       .dump()
                << std::endl;
      return 0;
    }
    const auto res = kpo::experiments::run(cfg);
    json out = res.summary;
    out["experiment"] = verb;
    out["config_hash"] = cfg.hash;
    out["outputs"] = json::array();
    for (const auto& p : res.outputs) out["outputs"].push_back(p.string());
    std::cout << out.dump(2) << std::endl;
    return 0;
  } catch (const kpo::experiments::ConfigError& e) {
    return fail("config", e.what(), 2, {{"field", e.field()}, {"line", e.line()}});
  } catch (const kpo::experiments::IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const kpo::experiments::ProvenanceError& e) {
    return fail("provenance", e.what(), 4);
  } catch (const std::runtime_error& e) {
    return fail("numerics", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("error", e.what(), 1);
  }
}
