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

#pragma once

#include "kpo/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

/// \file experiments.hpp
/// Batch experiments driven by JSON configs. Every command writes CSV (with a
/// commented header carrying the config hash) and returns a JSON summary.

namespace kpo::experiments {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Errors

/// Invalid configuration. `line` is the 1-based line of the offending key in
/// the config text (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& message)
      : std::runtime_error(format(field, line, message)), field_(field), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& message) {
    std::string s = "config";
    if (line > 0) s += ":" + std::to_string(line);
    if (!field.empty()) s += ": field '" + field + "'";
    return s + ": " + message;
  }
  std::string field_;
  int line_;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pulse file does not belong to the experiment it is used in.
class ProvenanceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config

enum class ExperimentKind { GateTimeSweep, Optimize, Trajectory, AngleSweep, RobustnessGrid, LossSweep, Wigner };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GateTimeSweep: return "gate-time-sweep";
    case ExperimentKind::Optimize: return "optimize";
    case ExperimentKind::Trajectory: return "trajectory";
    case ExperimentKind::AngleSweep: return "angle-sweep";
    case ExperimentKind::RobustnessGrid: return "robustness-grid";
    case ExperimentKind::LossSweep: return "loss-sweep";
    case ExperimentKind::Wigner: return "wigner";
  }
  return "?";
}

inline std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::GateTimeSweep, ExperimentKind::Optimize, ExperimentKind::Trajectory,
                 ExperimentKind::AngleSweep, ExperimentKind::RobustnessGrid, ExperimentKind::LossSweep,
                 ExperimentKind::Wigner}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

/// Waveform families compared in gate-time sweeps.
inline const std::vector<std::string>& all_variants() {
  static const std::vector<std::string> v{"analytic", "analytic_counter", "optimized", "optimized_counter"};
  return v;
}

struct GridSpec {
  double lo = -4.0;
  double hi = 4.0;
  int points = 81;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Optimize;
  GateKind gate = GateKind::Rz;
  double angle = std::numbers::pi;
  CounterVariant counter = CounterVariant::Standard;
  std::string waveform = "optimized";  ///< analytic | optimized (trajectory / wigner without a pulse file)
  std::optional<double> detuning;      ///< Rx analytic amplitude; calibrated when absent
  PhysicalConstants constants;

  std::vector<double> gate_times;    ///< sweep grid, or the single optimization time
  std::vector<double> continuation;  ///< optimize: gate times visited before gate_times.back()
  std::vector<std::string> variants = all_variants();

  int cutoff = kDefaultCutoff;
  double dt = 1e-4;
  int optimization_cutoff = 0;  ///< 0: 40 for one mode, 20 for two
  double optimization_dt = 1e-3;

  std::vector<double> kappas;
  int loss_cutoff = 0;  ///< 0: cutoff for one mode, 16 for two
  double loss_dt = 0.0;  ///< 0: dt
  bool convergence_check = false;

  std::vector<double> lambdas;
  std::vector<double> delta0s;
  std::vector<double> delta1s;
  double gradient_step = 1e-4;

  std::vector<std::string> initial_states{"C+", "C-"};
  int record_stride = 100;
  std::vector<double> snapshot_times;
  std::string state = "C+";
  double time = 0.0;  ///< wigner: evolve the state under the pulse up to this time
  GridSpec wigner_x;
  GridSpec wigner_y;

  std::vector<std::string> pulses;
  std::string pulse_config_hash;

  std::string output_dir;
  std::uint64_t seed = 20231;
  int restarts = 3;
  int max_iterations = 300;
  double objective_target = 5e-4;
  double threshold = 1e-3;
  double amplitude_bound = 20.0;  ///< runs with max|g_j|/K above this are flagged
  bool verbose = false;

  json raw;          ///< the config as given (after overrides)
  std::string hash;  ///< hash of raw

  int resolved_optimization_cutoff() const {
    return optimization_cutoff > 0 ? optimization_cutoff : (is_two_qubit(gate) ? 20 : kDefaultCutoff);
  }
  int resolved_loss_cutoff() const { return loss_cutoff > 0 ? loss_cutoff : (is_two_qubit(gate) ? 16 : cutoff); }
  double resolved_loss_dt() const { return loss_dt > 0.0 ? loss_dt : dt; }
  fs::path output_path() const { return output_dir.empty() ? fs::path("out") / std::string(to_string(kind)) : fs::path(output_dir); }
};

/// 64-bit FNV-1a over the canonical (key-sorted, compact) JSON text.
inline std::string config_hash(const json& j) {
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline int line_of(const std::string& text, const std::string& key) {
  if (text.empty()) return 0;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

inline int line_at_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

/// Reads {start, stop, step} or an explicit array.
inline std::vector<double> read_grid(const json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_number()) return {v.get<double>()};
  if (v.is_object()) {
    const double start = v.at("start").get<double>();
    const double stop = v.at("stop").get<double>();
    const double step = v.at("step").get<double>();
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("need step > 0 and stop >= start");
    std::vector<double> out;
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(std::round((start + step * k) * 1e12) / 1e12);
    return out;
  }
  throw std::invalid_argument("expected a number, an array or {start, stop, step}");
}

/// Logarithmic grid {min, max, per_decade}.
inline std::vector<double> read_log_grid(const json& v) {
  if (v.is_object() && v.contains("per_decade")) {
    const double lo = std::log10(v.at("min").get<double>());
    const double hi = std::log10(v.at("max").get<double>());
    const int per = v.at("per_decade").get<int>();
    if (per < 1 || hi < lo) throw std::invalid_argument("need per_decade >= 1 and max >= min");
    std::vector<double> out;
    const long n = std::lround((hi - lo) * per);
    for (long k = 0; k <= n; ++k) out.push_back(std::pow(10.0, lo + static_cast<double>(k) / per));
    return out;
  }
  return read_grid(v);
}

inline GridSpec read_axis(const json& v) {
  GridSpec g;
  const auto r = v.get<std::vector<double>>();
  if (r.size() != 2 && r.size() != 3) throw std::invalid_argument("axis must be [lo, hi] or [lo, hi, points]");
  g.lo = r[0];
  g.hi = r[1];
  if (r.size() == 3) g.points = static_cast<int>(r[2]);
  if (!(g.hi > g.lo) || g.points < 2) throw std::invalid_argument("axis needs hi > lo and at least 2 points");
  return g;
}

}  // namespace detail

/// Builds a config from parsed JSON. `text` (optional) is the original
/// document, used to report line numbers.
inline ExperimentConfig parse_config(const json& j, const std::string& text = {}) {
  if (!j.is_object()) throw ConfigError("", 1, "top level must be a JSON object");
  static const std::set<std::string> known{
      "experiment", "gate", "angle", "counter", "waveform", "detuning", "kerr", "pump", "gate_time", "gate_times",
      "continuation", "variants", "cutoff", "dt", "optimization_cutoff", "optimization_dt", "kappa", "kappas",
      "loss_cutoff", "loss_dt", "convergence_check", "lambdas", "delta0", "delta1", "gradient_step", "initial_states",
      "record_stride", "snapshot_times", "state", "time", "wigner", "pulse", "pulses", "pulse_config_hash",
      "output_dir", "seed", "restarts", "max_iterations", "objective_target", "threshold", "amplitude_bound",
      "verbose", "description", "long_running", "notes"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(key, detail::line_of(text, key), "unknown field");
  }

  ExperimentConfig c;
  std::string current;
  auto field = [&](const char* key) -> const json* {
    current = key;
    return j.contains(key) ? &j.at(key) : nullptr;
  };
  try {
    if (const json* v = field("experiment")) {
      const auto k = parse_experiment_kind(v->get<std::string>());
      if (!k) throw std::invalid_argument("unknown experiment '" + v->get<std::string>() + "'");
      c.kind = *k;
    } else {
      throw std::invalid_argument("missing (or pass it through the command verb)");
    }
    if (const json* v = field("gate")) c.gate = parse_gate_kind(v->get<std::string>());
    c.angle = c.gate == GateKind::Rz ? std::numbers::pi : std::numbers::pi / 2;
    if (const json* v = field("angle")) c.angle = v->get<double>();
    if (const json* v = field("counter")) c.counter = parse_counter_variant(v->get<std::string>());
    if (c.counter == CounterVariant::BeamSplitterOrthogonal && !is_two_qubit(c.gate)) {
      current = "counter";
      throw std::invalid_argument("beam_splitter_orthogonal requires an Rzz gate");
    }
    if (const json* v = field("waveform")) {
      c.waveform = v->get<std::string>();
      if (c.waveform != "analytic" && c.waveform != "optimized") throw std::invalid_argument("analytic | optimized");
    }
    if (const json* v = field("detuning")) c.detuning = v->get<double>();
    if (const json* v = field("kerr")) c.constants.kerr = v->get<double>();
    if (const json* v = field("pump")) c.constants.pump = v->get<double>();
    current = "pump";
    c.constants.validate();

    if (const json* v = field("gate_time")) c.gate_times = {v->get<double>()};
    if (const json* v = field("gate_times")) c.gate_times = detail::read_grid(*v);
    current = "gate_times";
    for (double t : c.gate_times) {
      if (!(t > 0.0)) throw std::invalid_argument("gate times must be positive");
    }
    if (const json* v = field("continuation")) c.continuation = detail::read_grid(*v);
    if (const json* v = field("variants")) {
      c.variants = v->get<std::vector<std::string>>();
      for (const auto& s : c.variants) {
        if (std::find(all_variants().begin(), all_variants().end(), s) == all_variants().end()) {
          throw std::invalid_argument("unknown variant '" + s + "'");
        }
      }
    }
    if (const json* v = field("cutoff")) c.cutoff = v->get<int>();
    if (c.cutoff < 2) throw std::invalid_argument("must be >= 2");
    if (const json* v = field("dt")) c.dt = v->get<double>();
    if (!(c.dt > 0.0)) throw std::invalid_argument("must be positive");
    if (const json* v = field("optimization_cutoff")) c.optimization_cutoff = v->get<int>();
    if (c.optimization_cutoff < 0 || c.optimization_cutoff == 1) throw std::invalid_argument("must be >= 2");
    if (const json* v = field("optimization_dt")) c.optimization_dt = v->get<double>();
    if (!(c.optimization_dt > 0.0)) throw std::invalid_argument("must be positive");

    if (const json* v = field("kappa")) c.kappas = {v->get<double>()};
    if (const json* v = field("kappas")) c.kappas = detail::read_log_grid(*v);
    current = "kappas";
    for (double k : c.kappas) {
      if (!(k >= 0.0)) throw std::invalid_argument("loss rates must be >= 0");
    }
    if (const json* v = field("loss_cutoff")) c.loss_cutoff = v->get<int>();
    if (c.loss_cutoff < 0 || c.loss_cutoff == 1) throw std::invalid_argument("must be >= 2");
    if (const json* v = field("loss_dt")) c.loss_dt = v->get<double>();
    if (c.loss_dt < 0.0) throw std::invalid_argument("must be >= 0");
    c.convergence_check = is_two_qubit(c.gate);
    if (const json* v = field("convergence_check")) c.convergence_check = v->get<bool>();

    if (const json* v = field("lambdas")) c.lambdas = detail::read_grid(*v);
    if (const json* v = field("delta0")) c.delta0s = detail::read_grid(*v);
    if (const json* v = field("delta1")) c.delta1s = detail::read_grid(*v);
    if (const json* v = field("gradient_step")) c.gradient_step = v->get<double>();
    if (!(c.gradient_step > 0.0)) throw std::invalid_argument("must be positive");

    if (is_two_qubit(c.gate)) c.initial_states = {"0|0", "1|1"};
    if (const json* v = field("initial_states")) c.initial_states = v->get<std::vector<std::string>>();
    if (const json* v = field("record_stride")) c.record_stride = v->get<int>();
    if (c.record_stride < 0) throw std::invalid_argument("must be >= 0");
    if (const json* v = field("snapshot_times")) c.snapshot_times = v->get<std::vector<double>>();
    if (const json* v = field("state")) c.state = v->get<std::string>();
    if (const json* v = field("time")) c.time = v->get<double>();
    if (c.time < 0.0) throw std::invalid_argument("must be >= 0");
    if (const json* v = field("wigner")) {
      if (v->contains("x")) c.wigner_x = detail::read_axis(v->at("x"));
      if (v->contains("y")) c.wigner_y = detail::read_axis(v->at("y"));
    }

    if (const json* v = field("pulse")) c.pulses = {v->get<std::string>()};
    if (const json* v = field("pulses")) c.pulses = v->get<std::vector<std::string>>();
    if (const json* v = field("pulse_config_hash")) c.pulse_config_hash = v->get<std::string>();
    if (const json* v = field("output_dir")) c.output_dir = v->get<std::string>();
    if (const json* v = field("seed")) c.seed = v->get<std::uint64_t>();
    if (const json* v = field("restarts")) c.restarts = v->get<int>();
    if (c.restarts < 0) throw std::invalid_argument("must be >= 0");
    if (const json* v = field("max_iterations")) c.max_iterations = v->get<int>();
    if (c.max_iterations < 0) throw std::invalid_argument("must be >= 0");
    if (const json* v = field("objective_target")) c.objective_target = v->get<double>();
    if (const json* v = field("threshold")) c.threshold = v->get<double>();
    if (!(c.threshold > 0.0)) throw std::invalid_argument("must be positive");
    if (const json* v = field("amplitude_bound")) c.amplitude_bound = v->get<double>();
    if (!(c.amplitude_bound > 0.0)) throw std::invalid_argument("must be positive");
    if (const json* v = field("verbose")) c.verbose = v->get<bool>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(current, detail::line_of(text, current), e.what());
  }

  // Per-experiment requirements.
  auto require = [&](bool ok, const char* key, const char* message) {
    if (!ok) throw ConfigError(key, detail::line_of(text, key), message);
  };
  switch (c.kind) {
    case ExperimentKind::GateTimeSweep:
      require(!c.gate_times.empty(), "gate_times", "gate-time-sweep needs gate_times");
      break;
    case ExperimentKind::Optimize:
      require(c.gate_times.size() == 1, "gate_time", "optimize needs exactly one gate_time");
      require(c.counter == CounterVariant::None || c.counter == CounterVariant::Standard || is_two_qubit(c.gate),
              "counter", "invalid counter for this gate");
      break;
    case ExperimentKind::Trajectory:
      require(!c.pulses.empty() || (c.waveform == "analytic" && c.gate_times.size() == 1), "pulse",
              "trajectory needs a pulse file or an analytic waveform with one gate_time");
      break;
    case ExperimentKind::AngleSweep:
      require(c.pulses.size() == 1, "pulse", "angle-sweep needs one pulse file");
      if (c.lambdas.empty()) c.lambdas = detail::read_grid(json{{"start", 0.1}, {"stop", 1.0}, {"step", 0.1}});
      break;
    case ExperimentKind::RobustnessGrid:
      require(c.pulses.size() == 1, "pulse", "robustness-grid needs one pulse file");
      require(!c.delta0s.empty() && !c.delta1s.empty(), "delta0", "robustness-grid needs delta0 and delta1 grids");
      break;
    case ExperimentKind::LossSweep:
      require(!c.kappas.empty(), "kappas", "loss-sweep needs kappas");
      require(!c.pulses.empty() || !c.gate_times.empty(), "pulses", "loss-sweep needs pulses or gate_times");
      break;
    case ExperimentKind::Wigner:
      break;
  }
  c.raw = j;
  c.hash = config_hash(j);
  return c;
}

/// Parses config text; JSON syntax errors carry the line number.
inline ExperimentConfig parse_config_text(const std::string& text, const json& overrides = json::object()) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", detail::line_at_byte(text, e.byte), std::string("invalid JSON: ") + e.what());
  }
  if (j.is_object()) {
    for (const auto& [k, v] : overrides.items()) j[k] = v;
  }
  return parse_config(j, text);
}

inline ExperimentConfig load_config(const fs::path& path, const json& overrides = json::object()) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

// ---------------------------------------------------------------------------
// Output

/// Number of sweep workers: KPO_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("KPO_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(0..n-1) on a pool of independent workers. The first exception (by
/// index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f,
                         unsigned workers = worker_count()) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_header(std::ostream& os, const ExperimentConfig& cfg, const std::string& title) {
  os << "# kpo " << to_string(cfg.kind) << ": " << title << '\n';
  os << "# config_hash: " << cfg.hash << '\n';
  os << "# units: times in 1/K, rates and pulse amplitudes in K\n";
  os << "# config: " << cfg.raw.dump() << '\n';
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const ExperimentConfig& cfg, const std::string& title,
            const std::vector<std::string>& columns)
      : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    write_header(out_, cfg, title);
    if (!columns.empty()) row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  std::ostream& stream() { return out_; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline fs::path prepare_output(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// Pulses

inline PulseDocument load_pulse(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("pulse file '" + path.string() + "' not found");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("pulse file '" + path.string() + "': " + e.what());
  }
  return pulse_document_from_json(j);
}

/// Pulse files carry the gate, angle, counter, constants and config hash of
/// the run that produced them; all must agree with the consuming config.
inline void check_provenance(const PulseDocument& doc, const ExperimentConfig& cfg, const std::string& name) {
  auto fail = [&](const std::string& what) {
    throw ProvenanceError("pulse '" + name + "' does not match the experiment config: " + what);
  };
  if (doc.gate != cfg.gate) fail("gate " + std::string(to_string(doc.gate)) + " vs " + std::string(to_string(cfg.gate)));
  if (std::abs(doc.angle - cfg.angle) > 1e-12) fail("angle " + fmt(doc.angle) + " vs " + fmt(cfg.angle));
  const std::string counter = doc.meta.value("counter", std::string(doc.with_counter() ? "standard" : "none"));
  if (counter != to_string(cfg.counter)) fail("counter " + counter + " vs " + std::string(to_string(cfg.counter)));
  if (doc.meta.contains("kerr") && std::abs(doc.meta["kerr"].get<double>() - cfg.constants.kerr) > 1e-12) fail("kerr");
  if (doc.meta.contains("pump") && std::abs(doc.meta["pump"].get<double>() - cfg.constants.pump) > 1e-12) fail("pump");
  if (!cfg.pulse_config_hash.empty() && doc.meta.value("config_hash", std::string()) != cfg.pulse_config_hash) {
    fail("config hash " + doc.meta.value("config_hash", std::string("<none>")) + " vs " + cfg.pulse_config_hash);
  }
}

inline std::vector<PulseDocument> load_pulses(const ExperimentConfig& cfg) {
  std::vector<PulseDocument> out;
  for (const auto& p : cfg.pulses) {
    out.push_back(load_pulse(p));
    check_provenance(out.back(), cfg, p);
  }
  return out;
}

/// Follows a pulse up to `t_end` only.
template <PulseShape P>
struct TruncatedPulse {
  const P& pulse;
  double t_end;
  double duration() const { return t_end; }
  double g0(double t) const { return pulse.g0(t); }
  double g1(double t) const { return pulse.g1(t); }
};

inline GateProblem problem_for(const ExperimentConfig& cfg, int cutoff) {
  return make_gate_problem(cfg.gate, cfg.counter, cfg.angle, cfg.constants, cutoff);
}

/// Analytic waveform on gate time T; Rx uses cfg.detuning or calibrates it.
inline AnalyticWaveform analytic_for(const ExperimentConfig& cfg, double T, bool with_counter, int cutoff, double dt) {
  std::optional<double> det = cfg.detuning;
  if (cfg.gate == GateKind::Rx && !det) {
    det = calibrate_detuning(T, with_counter, cfg.angle, cfg.constants, cutoff, IntegratorConfig{dt}).detuning;
  }
  return analytic_pulse(cfg.gate, with_counter ? WaveformVariant::WithCounter : WaveformVariant::NoCounter,
                        cfg.angle, T, cfg.constants, det);
}

inline OptimizerOptions optimizer_options(const ExperimentConfig& cfg) {
  OptimizerOptions o;
  o.max_iterations = cfg.max_iterations;
  o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  o.objective_target = cfg.objective_target;
  o.restart_threshold = cfg.threshold;
  o.verbose = cfg.verbose;
  return o;
}

struct OptimizedGate {
  OptimizationResult result;
  std::vector<OptimizationResult> stages;
  std::vector<double> path;  ///< gate times visited
  FidelityReport verified;   ///< at (cutoff, dt)
};

/// Optimizes at the optimization settings, then re-evaluates at the full ones.
inline OptimizedGate optimize_for(const ExperimentConfig& cfg, double T, CounterVariant counter) {
  ExperimentConfig c = cfg;
  c.counter = counter;
  const bool with_counter = counter != CounterVariant::None;
  const int opt_cutoff = c.resolved_optimization_cutoff();
  const IntegratorConfig opt_config{c.optimization_dt};
  OptimizedGate out;
  out.path = c.continuation;
  out.path.push_back(T);
  std::optional<double> det = c.detuning;
  if (c.gate == GateKind::Rx && !det) {
    det = calibrate_detuning(out.path.front(), with_counter, c.angle, c.constants, opt_cutoff, opt_config).detuning;
  }
  const PulseCoefficients seed = seed_coefficients(c.gate, with_counter, c.angle, out.path.front(), c.constants, det);
  const GateProblem opt_problem = problem_for(c, opt_cutoff);
  out.result = optimize_gate_continuation(opt_problem, with_counter, seed, out.path, optimizer_options(c), opt_config,
                                          &out.stages);
  const GateProblem full = problem_for(c, c.cutoff);
  out.verified = average_fidelity(propagate_gate(full, out.result.best, IntegratorConfig{c.dt}), full.target);
  return out;
}

inline PulseDocument make_pulse_document(const ExperimentConfig& cfg, const OptimizedGate& g, CounterVariant counter) {
  PulseDocument doc;
  doc.gate = cfg.gate;
  doc.angle = cfg.angle;
  doc.coefficients = g.result.best;
  doc.meta = {{"counter", std::string(to_string(counter))},
              {"kerr", cfg.constants.kerr},
              {"pump", cfg.constants.pump},
              {"config_hash", cfg.hash},
              {"infidelity", g.verified.infidelity},
              {"cutoff", cfg.cutoff},
              {"dt", cfg.dt},
              {"max_g0", g.result.peak.g0},
              {"max_g1", g.result.peak.g1}};
  return doc;
}

// ---------------------------------------------------------------------------
// Commands

struct CommandResult {
  json summary = json::object();
  std::vector<fs::path> outputs;
};

namespace detail {

inline CounterVariant counter_of_variant(const ExperimentConfig& cfg, const std::string& variant) {
  const bool with = variant.ends_with("_counter");
  if (!with) return CounterVariant::None;
  return cfg.counter == CounterVariant::None ? CounterVariant::Standard : cfg.counter;
}

/// Amplitudes beyond this are far outside what the hardware can drive; always warned about.
inline constexpr double kAmplitudeHardWarning = 50.0;

inline json amplitude_flags(const PeakAmplitudes& peak, double bound, const std::string& what) {
  const double m = peak.max();
  if (m > kAmplitudeHardWarning) {
    std::clog << "warning: " << what << ": max|g_j|/K = " << m << " exceeds " << kAmplitudeHardWarning << '\n';
  }
  return {{"amplitude_bound", bound},
          {"exceeds_amplitude_bound", m > bound},
          {"exceeds_hard_warning", m > kAmplitudeHardWarning}};
}

/// Smallest grid time from which every longer grid time also meets the threshold.
inline std::optional<double> kt_min(const std::vector<std::pair<double, double>>& points, double threshold) {
  std::vector<std::pair<double, double>> p = points;
  std::sort(p.begin(), p.end());
  std::optional<double> best;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    if (it->second <= threshold) {
      best = it->first;
    } else {
      break;
    }
  }
  return best;
}

}  // namespace detail

inline CommandResult cmd_gate_time_sweep(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  struct Point {
    double T;
    std::string variant;
    FidelityReport report{};
    PeakAmplitudes peak{};
    double runtime = 0.0;
  };
  std::vector<Point> points;
  for (const auto& v : cfg.variants) {
    for (double T : cfg.gate_times) points.push_back({T, v});
  }
  parallel_for(points.size(), [&](std::size_t i) {
    Point& p = points[i];
    const auto start = std::chrono::steady_clock::now();
    const CounterVariant counter = detail::counter_of_variant(cfg, p.variant);
    if (p.variant.starts_with("analytic")) {
      ExperimentConfig c = cfg;
      c.counter = counter;
      const GateProblem problem = problem_for(c, c.cutoff);
      const AnalyticWaveform w = analytic_for(c, p.T, counter != CounterVariant::None, c.cutoff, c.dt);
      p.report = average_fidelity(propagate_gate(problem, w, IntegratorConfig{c.dt}), problem.target);
      p.peak = peak_amplitudes(w);
    } else {
      ExperimentConfig c = cfg;
      c.continuation.clear();
      const OptimizedGate g = optimize_for(c, p.T, counter);
      p.report = g.verified;
      p.peak = g.result.peak;
    }
    p.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  CommandResult res;
  {
    CsvWriter csv(dir / "gate_time_sweep.csv", cfg, "average infidelity versus gate time",
                  {"KT", "variant", "infidelity", "leakage", "max_abs_g0", "max_abs_g1", "exceeds_amplitude_bound",
                   "runtime_s"});
    for (const auto& p : points) {
      const json flags = detail::amplitude_flags(p.peak, cfg.amplitude_bound, p.variant + " KT=" + fmt(p.T));
      csv.row({fmt(p.T), p.variant, fmt(p.report.infidelity), fmt(p.report.leakage), fmt(p.peak.g0), fmt(p.peak.g1),
               flags["exceeds_amplitude_bound"].get<bool>() ? "1" : "0", fmt(p.runtime)});
    }
    res.outputs.push_back(csv.path());
  }
  CsvWriter kt(dir / "kt_min.csv", cfg, "shortest gate time meeting the infidelity threshold",
               {"variant", "KT_min", "threshold"});
  json mins = json::object();
  for (const auto& v : cfg.variants) {
    std::vector<std::pair<double, double>> series;
    for (const auto& p : points) {
      if (p.variant == v) series.emplace_back(p.T, p.report.infidelity);
    }
    const auto m = detail::kt_min(series, cfg.threshold);
    kt.row({v, m ? fmt(*m) : "none", fmt(cfg.threshold)});
    mins[v] = m ? json(*m) : json(nullptr);
  }
  res.outputs.push_back(kt.path());
  res.summary = {{"kt_min", mins}};
  return res;
}

inline CommandResult cmd_optimize(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const auto start = std::chrono::steady_clock::now();
  const OptimizedGate g = optimize_for(cfg, cfg.gate_times.front(), cfg.counter);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CommandResult res;
  write_json(dir / "pulse.json", to_json(make_pulse_document(cfg, g, cfg.counter)));
  res.outputs.push_back(dir / "pulse.json");
  {
    CsvWriter csv(dir / "trace.csv", cfg, "objective per accepted iteration", {"stage_KT", "index", "infidelity"});
    for (std::size_t s = 0; s < g.stages.size(); ++s) {
      for (std::size_t k = 0; k < g.stages[s].trace.size(); ++k) {
        csv.row({fmt(g.path[s]), std::to_string(k), fmt(g.stages[s].trace[k])});
      }
    }
    res.outputs.push_back(csv.path());
  }
  res.summary = {{"gate", std::string(to_string(cfg.gate))},
                 {"angle", cfg.angle},
                 {"counter", std::string(to_string(cfg.counter))},
                 {"KT", cfg.gate_times.front()},
                 {"seed_infidelity", g.result.seed_infidelity},
                 {"final_infidelity", g.result.final_infidelity},
                 {"verified_infidelity", g.verified.infidelity},
                 {"leakage", g.verified.leakage},
                 {"max_abs_g0", g.result.peak.g0},
                 {"max_abs_g1", g.result.peak.g1},
                 {"converged", g.result.converged},
                 {"runs", g.result.runs},
                 {"evaluations", g.result.evaluations},
                 {"wall_time_s", wall},
                 {"config_hash", cfg.hash}};
  res.summary.update(detail::amplitude_flags(g.result.peak, cfg.amplitude_bound, "optimize"));
  write_json(dir / "summary.json", res.summary);
  res.outputs.push_back(dir / "summary.json");
  return res;
}

namespace detail {

inline StateVector single_state(const FockSpace& space, const std::string& name, double alpha) {
  if (name == "C+") return cat_state(space, alpha, CatParity::Even);
  if (name == "C-") return cat_state(space, alpha, CatParity::Odd);
  if (name == "0") return computational_basis(space, alpha).first;
  if (name == "1") return computational_basis(space, alpha).second;
  if (name == "vacuum") return StateVector::fock(space, 0);
  throw std::invalid_argument("unknown state '" + name + "' (C+, C-, 0, 1, vacuum)");
}

/// "C+" for one mode; "a|b" for two modes.
inline StateVector named_state(const FockSpace& space, const std::string& name, double alpha) {
  if (space.modes() == 1) return single_state(space, name, alpha);
  const auto bar = name.find('|');
  if (bar == std::string::npos) throw std::invalid_argument("two-mode state must be written 'a|b', got '" + name + "'");
  const FockSpace one = space.single_mode();
  return tensor(single_state(one, name.substr(0, bar), alpha), single_state(one, name.substr(bar + 1), alpha));
}

inline std::string file_tag(std::string s) {
  for (char& ch : s) {
    if (ch == '+') ch = 'p';
    else if (ch == '-') ch = 'm';
    else if (ch == '|') ch = '_';
  }
  return s;
}

inline std::vector<double> axis(const GridSpec& g) { return linspace(g.lo, g.hi, g.points); }

}  // namespace detail

/// The pulse used by trajectory / wigner: the first pulse file, else analytic.
inline AnyPulse experiment_pulse(const ExperimentConfig& cfg) {
  if (!cfg.pulses.empty()) return load_pulses(cfg).front().coefficients;
  if (cfg.gate_times.size() != 1) throw ConfigError("gate_time", 0, "analytic waveform needs one gate_time");
  return analytic_for(cfg, cfg.gate_times.front(), cfg.counter != CounterVariant::None, cfg.cutoff, cfg.dt);
}

inline CommandResult cmd_trajectory(const ExperimentConfig& cfg) {
  const AnyPulse pulse = experiment_pulse(cfg);
  const fs::path dir = prepare_output(cfg);
  const GateProblem problem = problem_for(cfg, cfg.cutoff);
  const double alpha = cfg.constants.alpha();
  if (!cfg.snapshot_times.empty() && is_two_qubit(cfg.gate)) {
    throw ConfigError("snapshot_times", 0, "Wigner snapshots are available for single-mode gates only");
  }
  for (double t : cfg.snapshot_times) {
    if (t < 0.0 || t > pulse.duration() + 1e-12) throw ConfigError("snapshot_times", 0, "outside [0, T]");
  }

  CommandResult res;
  res.summary["states"] = json::object();
  std::vector<std::pair<std::string, double>> snaps;
  for (const auto& s : cfg.initial_states) {
    for (double t : cfg.snapshot_times) snaps.emplace_back(s, t);
  }
  std::vector<WignerGrid> grids(snaps.size());
  std::vector<Trajectory> trajectories(cfg.initial_states.size());
  parallel_for(cfg.initial_states.size() + snaps.size(), [&](std::size_t i) {
    IntegratorConfig ic{cfg.dt, cfg.record_stride};
    if (i < cfg.initial_states.size()) {
      const StateVector psi0 = detail::named_state(problem.space, cfg.initial_states[i], alpha);
      trajectories[i] = evolve_state(problem, pulse, psi0, ic).second;
      return;
    }
    const auto& [name, t] = snaps[i - cfg.initial_states.size()];
    StateVector psi = detail::named_state(problem.space, name, alpha);
    if (t > 0.0) {
      ic.record_stride = 0;
      psi = evolve_state(problem, TruncatedPulse<AnyPulse>{pulse, t}, psi, ic).first;
    }
    grids[i - cfg.initial_states.size()] = wigner(psi, detail::axis(cfg.wigner_x), detail::axis(cfg.wigner_y));
  });

  for (std::size_t k = 0; k < cfg.initial_states.size(); ++k) {
    const auto& name = cfg.initial_states[k];
    CsvWriter csv(dir / ("trajectory_" + detail::file_tag(name) + ".csv"), cfg,
                  "observables during the gate from initial state " + name, {});
    write_trajectory_csv(csv.stream(), trajectories[k]);
    res.outputs.push_back(csv.path());
    const auto& tr = trajectories[k];
    const auto& n = tr.mean_photon.front();
    res.summary["states"][name] = {{"min_mean_photon", *std::min_element(n.begin(), n.end())},
                                   {"max_mean_photon", *std::max_element(n.begin(), n.end())},
                                   {"min_qubit_population",
                                    *std::min_element(tr.qubit_population.begin(), tr.qubit_population.end())},
                                   {"max_norm_drift", tr.max_norm_drift}};
  }
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%.4f", snaps[k].second);
    CsvWriter csv(dir / ("wigner_" + detail::file_tag(snaps[k].first) + "_t" + tag + ".csv"), cfg,
                  "Wigner function at Kt=" + std::string(tag) + " from " + snaps[k].first, {});
    write_wigner_csv(csv.stream(), grids[k]);
    res.outputs.push_back(csv.path());
  }
  return res;
}

inline CommandResult cmd_angle_sweep(const ExperimentConfig& cfg) {
  const PulseDocument doc = load_pulses(cfg).front();
  const fs::path dir = prepare_output(cfg);
  const GateProblem problem = problem_for(cfg, cfg.cutoff);
  std::vector<ScaledAngleResult> out(cfg.lambdas.size());
  parallel_for(cfg.lambdas.size(), [&](std::size_t i) {
    out[i] = calibrate_scaled_angle(problem, doc.coefficients, cfg.lambdas[i], IntegratorConfig{cfg.dt});
  });
  CommandResult res;
  CsvWriter csv(dir / "angle_sweep.csv", cfg, "scaled pulses: calibrated angle and infidelity",
                {"lambda", "angle", "infidelity"});
  double worst = 0.0;
  for (const auto& r : out) {
    csv.row({fmt(r.scale), fmt(r.angle), fmt(r.infidelity())});
    worst = std::max(worst, r.infidelity());
  }
  res.outputs.push_back(csv.path());
  res.summary = {{"max_infidelity", worst}, {"all_below_threshold", worst < cfg.threshold}};
  return res;
}

struct ContourPoint {
  double delta0;
  double delta1;
};

/// Threshold crossings along grid rows and columns (linear interpolation).
inline std::vector<ContourPoint> threshold_contour(const std::vector<double>& d0, const std::vector<double>& d1,
                                                   const Eigen::MatrixXd& f, double level) {
  std::vector<ContourPoint> pts;
  for (Index i = 0; i < f.rows(); ++i) {
    for (Index j = 0; j + 1 < f.cols(); ++j) {
      const double a = f(i, j) - level;
      const double b = f(i, j + 1) - level;
      if ((a < 0) != (b < 0)) {
        const double s = a / (a - b);
        pts.push_back({d0[static_cast<std::size_t>(i)],
                       d1[static_cast<std::size_t>(j)] + s * (d1[static_cast<std::size_t>(j + 1)] - d1[static_cast<std::size_t>(j)])});
      }
    }
  }
  for (Index j = 0; j < f.cols(); ++j) {
    for (Index i = 0; i + 1 < f.rows(); ++i) {
      const double a = f(i, j) - level;
      const double b = f(i + 1, j) - level;
      if ((a < 0) != (b < 0)) {
        const double s = a / (a - b);
        pts.push_back({d0[static_cast<std::size_t>(i)] + s * (d0[static_cast<std::size_t>(i + 1)] - d0[static_cast<std::size_t>(i)]),
                       d1[static_cast<std::size_t>(j)]});
      }
    }
  }
  std::sort(pts.begin(), pts.end(), [](const ContourPoint& a, const ContourPoint& b) {
    return std::atan2(a.delta1, a.delta0) < std::atan2(b.delta1, b.delta0);
  });
  return pts;
}

/// Central-difference gradient of 1 - F-bar with respect to (delta0, delta1) at the origin.
template <PulseShape P>
std::array<double, 2> robustness_gradient(const GateProblem& problem, const P& pulse, double h,
                                          const IntegratorConfig& config) {
  const HamiltonianKernel kernel(problem);
  auto f = [&](double d0, double d1) {
    const PerturbedPulse<P> q{pulse, PulsePerturbation{1.0, d0, d1}};
    return average_fidelity(propagate_gate(problem, kernel, q, config), problem.target).infidelity;
  };
  return {(f(h, 0.0) - f(-h, 0.0)) / (2.0 * h), (f(0.0, h) - f(0.0, -h)) / (2.0 * h)};
}

inline CommandResult cmd_robustness_grid(const ExperimentConfig& cfg) {
  const PulseDocument doc = load_pulses(cfg).front();
  const fs::path dir = prepare_output(cfg);
  const GateProblem problem = problem_for(cfg, cfg.cutoff);
  const HamiltonianKernel kernel(problem);
  const IntegratorConfig ic{cfg.dt};
  const std::size_t n1 = cfg.delta1s.size();
  Eigen::MatrixXd f(static_cast<Index>(cfg.delta0s.size()), static_cast<Index>(n1));
  parallel_for(cfg.delta0s.size() * n1, [&](std::size_t k) {
    const std::size_t i = k / n1;
    const std::size_t j = k % n1;
    const PerturbedPulse<PulseCoefficients> q{doc.coefficients, PulsePerturbation{1.0, cfg.delta0s[i], cfg.delta1s[j]}};
    f(static_cast<Index>(i), static_cast<Index>(j)) =
        average_fidelity(propagate_gate(problem, kernel, q, ic), problem.target).infidelity;
  });
  CommandResult res;
  {
    CsvWriter csv(dir / "robustness_grid.csv", cfg, "infidelity under relative amplitude errors",
                  {"delta0", "delta1", "infidelity"});
    for (std::size_t i = 0; i < cfg.delta0s.size(); ++i) {
      for (std::size_t j = 0; j < n1; ++j) {
        csv.row({fmt(cfg.delta0s[i]), fmt(cfg.delta1s[j]), fmt(f(static_cast<Index>(i), static_cast<Index>(j)))});
      }
    }
    res.outputs.push_back(csv.path());
  }
  {
    CsvWriter csv(dir / "contour.csv", cfg, "threshold contour", {"delta0", "delta1"});
    for (const auto& p : threshold_contour(cfg.delta0s, cfg.delta1s, f, cfg.threshold)) {
      csv.row({fmt(p.delta0), fmt(p.delta1)});
    }
    res.outputs.push_back(csv.path());
  }
  const auto grad = robustness_gradient(problem, doc.coefficients, cfg.gradient_step, ic);
  res.summary = {{"gradient_delta0", grad[0]},
                 {"gradient_delta1", grad[1]},
                 {"gradient_norm", std::hypot(grad[0], grad[1])},
                 {"config_hash", cfg.hash}};
  write_json(dir / "gradient.json", res.summary);
  res.outputs.push_back(dir / "gradient.json");
  return res;
}

/// 1 - F-bar_loss for the pulse and for no operation over the same time.
struct LossPoint {
  double gate_time = 0.0;
  double kappa = 0.0;
  double gate = std::numeric_limits<double>::quiet_NaN();
  double no_gate = 0.0;
  double estimate = 0.0;
  double convergence_delta = std::numeric_limits<double>::quiet_NaN();
};

inline CommandResult cmd_loss_sweep(const ExperimentConfig& cfg) {
  const std::vector<PulseDocument> docs = load_pulses(cfg);
  const fs::path dir = prepare_output(cfg);
  const int cutoff = cfg.resolved_loss_cutoff();
  const IntegratorConfig ic{cfg.resolved_loss_dt()};
  const int n_kpo = mode_count(cfg.gate);

  // (pulse index or -1 for time-only rows, kappa)
  std::vector<std::pair<int, double>> jobs;
  for (std::size_t p = 0; p < docs.size(); ++p) {
    for (double k : cfg.kappas) jobs.emplace_back(static_cast<int>(p), k);
  }
  if (docs.empty()) {
    for (std::size_t t = 0; t < cfg.gate_times.size(); ++t) {
      for (double k : cfg.kappas) jobs.emplace_back(-1 - static_cast<int>(t), k);
    }
  }
  std::vector<LossPoint> points(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const int idx = jobs[i].first;
    const double kappa = jobs[i].second;
    LossPoint& pt = points[i];
    pt.kappa = kappa;
    auto infidelities = [&](int c) -> std::pair<double, double> {
      const GateProblem problem = problem_for(cfg, c);
      const GateProblem idle = with_angle(problem, 0.0);
      double gate = std::numeric_limits<double>::quiet_NaN();
      if (idx >= 0) gate = 1.0 - average_fidelity_loss(problem, docs[static_cast<std::size_t>(idx)].coefficients, kappa, ic);
      const double no_gate = 1.0 - average_fidelity_loss(idle, ZeroPulse{pt.gate_time}, kappa, ic);
      return {gate, no_gate};
    };
    pt.gate_time = idx >= 0 ? docs[static_cast<std::size_t>(idx)].coefficients.gate_time
                            : cfg.gate_times[static_cast<std::size_t>(-1 - idx)];
    std::tie(pt.gate, pt.no_gate) = infidelities(cutoff);
    pt.estimate = loss_infidelity_estimate(cfg.constants.alpha(), kappa, pt.gate_time, n_kpo);
    if (cfg.convergence_check) {
      const auto [g2, n2] = infidelities(cutoff + 4);
      pt.convergence_delta = idx >= 0 ? std::abs(g2 - pt.gate) : std::abs(n2 - pt.no_gate);
    }
  });
  CommandResult res;
  CsvWriter csv(dir / "loss_sweep.csv", cfg, "infidelity under single-photon loss (cutoff " + std::to_string(cutoff) + ")",
                {"KT", "kappa_K", "gate_infidelity", "no_gate_infidelity", "estimate", "convergence_delta"});
  for (const auto& p : points) {
    csv.row({fmt(p.gate_time), fmt(p.kappa), fmt(p.gate), fmt(p.no_gate), fmt(p.estimate), fmt(p.convergence_delta)});
  }
  res.outputs.push_back(csv.path());
  res.summary = {{"points", points.size()}, {"cutoff", cutoff}};
  return res;
}

inline CommandResult cmd_wigner(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_output(cfg);
  const FockSpace space(cfg.cutoff, 1);
  if (is_two_qubit(cfg.gate)) throw ConfigError("gate", 0, "wigner needs a single-mode gate");
  StateVector psi = detail::named_state(space, cfg.state, cfg.constants.alpha());
  if (cfg.time > 0.0) {
    const AnyPulse pulse = experiment_pulse(cfg);
    if (cfg.time > pulse.duration() + 1e-12) throw ConfigError("time", 0, "beyond the gate time");
    const GateProblem problem = problem_for(cfg, cfg.cutoff);
    psi = evolve_state(problem, TruncatedPulse<AnyPulse>{pulse, cfg.time}, psi, IntegratorConfig{cfg.dt}).first;
  }
  const WignerGrid g = wigner(psi, detail::axis(cfg.wigner_x), detail::axis(cfg.wigner_y));
  CommandResult res;
  CsvWriter csv(dir / "wigner.csv", cfg, "Wigner function of " + cfg.state, {});
  write_wigner_csv(csv.stream(), g);
  res.outputs.push_back(csv.path());
  res.summary = {{"integral", g.integral()},
                 {"min", g.values.minCoeff()},
                 {"max", g.values.maxCoeff()},
                 {"origin", wigner_point(psi, cplx(0.0, 0.0))}};
  return res;
}

inline CommandResult run(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::GateTimeSweep: return cmd_gate_time_sweep(cfg);
    case ExperimentKind::Optimize: return cmd_optimize(cfg);
    case ExperimentKind::Trajectory: return cmd_trajectory(cfg);
    case ExperimentKind::AngleSweep: return cmd_angle_sweep(cfg);
    case ExperimentKind::RobustnessGrid: return cmd_robustness_grid(cfg);
    case ExperimentKind::LossSweep: return cmd_loss_sweep(cfg);
    case ExperimentKind::Wigner: return cmd_wigner(cfg);
  }
  throw std::logic_error("run: unreachable");
}

}  // namespace kpo::experiments
