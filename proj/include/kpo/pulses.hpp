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

#include "kpo/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

/// \file pulses.hpp
/// Gate and counter pulse waveforms: the truncated Fourier parametrization,
/// closed-form adiabatic waveforms, optimizer seeds, and amplitude errors.

namespace kpo {

inline constexpr int kDefaultFrequencyCount = 10;

/// Anything the integrators can query for the two pulse amplitudes.
template <class P>
concept PulseShape = requires(const P& p, double t) {
  { p.g0(t) } -> std::convertible_to<double>;
  { p.g1(t) } -> std::convertible_to<double>;
  { p.duration() } -> std::convertible_to<double>;
};

namespace detail {
inline void check_time(double t, double gate_time) {
  const double slack = 1e-12 * std::max(1.0, gate_time);
  if (!(t >= -slack && t <= gate_time + slack)) {
    throw std::out_of_range("pulse evaluated outside [0, T]: t=" + std::to_string(t));
  }
}
}  // namespace detail

/// Fourier coefficients of the gate pulse g0 and counter pulse g1.
///
/// g0(t) = sum_n [ g_{0,2n-1} sin((2n-1) pi t/T) + g_{0,2n}/2 (1 - cos(2 pi n t/T)) ]
/// g1(t) = sum_n g_{1,n} sin(2 pi n t/T),  n = 1..frequency_count.
///
/// Both vanish at t = 0 and t = T; g0 is symmetric and g1 antisymmetric
/// under t -> T - t for every coefficient choice.
struct PulseCoefficients {
  double gate_time = 1.0;
  int frequency_count = kDefaultFrequencyCount;
  std::vector<double> g0_coeffs;  ///< g_{0,1..2Nf}
  std::vector<double> g1_coeffs;  ///< g_{1,1..Nf}

  static PulseCoefficients zeros(double gate_time, int frequency_count = kDefaultFrequencyCount) {
    if (!(gate_time > 0.0)) throw std::invalid_argument("PulseCoefficients: gate time must be positive");
    if (frequency_count < 1) throw std::invalid_argument("PulseCoefficients: frequency count must be >= 1");
    const auto nf = static_cast<std::size_t>(frequency_count);
    return {gate_time, frequency_count, std::vector<double>(2 * nf, 0.0), std::vector<double>(nf, 0.0)};
  }

  // 1-based accessors matching the g_{j,n} labels.
  double& g0_at(int n) { return g0_coeffs.at(static_cast<std::size_t>(n - 1)); }
  double& g1_at(int n) { return g1_coeffs.at(static_cast<std::size_t>(n - 1)); }
  double g0_at(int n) const { return g0_coeffs.at(static_cast<std::size_t>(n - 1)); }
  double g1_at(int n) const { return g1_coeffs.at(static_cast<std::size_t>(n - 1)); }

  /// Optimizer layout: [g_{0,1..2Nf}, g_{1,1..Nf}], the g1 block only with a counter pulse.
  std::vector<double> to_vector(bool with_counter) const {
    std::vector<double> x = g0_coeffs;
    if (with_counter) x.insert(x.end(), g1_coeffs.begin(), g1_coeffs.end());
    return x;
  }

  static PulseCoefficients from_vector(std::span<const double> x, double gate_time, int frequency_count,
                                       bool with_counter) {
    PulseCoefficients c = zeros(gate_time, frequency_count);
    const std::size_t n0 = c.g0_coeffs.size();
    const std::size_t expected = n0 + (with_counter ? c.g1_coeffs.size() : 0);
    if (x.size() != expected) {
      throw std::invalid_argument("PulseCoefficients::from_vector: expected " + std::to_string(expected) +
                                  " values, got " + std::to_string(x.size()));
    }
    std::copy_n(x.begin(), n0, c.g0_coeffs.begin());
    if (with_counter) std::copy(x.begin() + static_cast<std::ptrdiff_t>(n0), x.end(), c.g1_coeffs.begin());
    return c;
  }

  double duration() const { return gate_time; }
  double g0(double t) const;
  double g1(double t) const;
};

inline double eval_g0(const PulseCoefficients& c, double t) {
  detail::check_time(t, c.gate_time);
  const double w = std::numbers::pi * t / c.gate_time;
  double sum = 0.0;
  for (int n = 1; n <= c.frequency_count; ++n) {
    sum += c.g0_at(2 * n - 1) * std::sin((2 * n - 1) * w) +
           0.5 * c.g0_at(2 * n) * (1.0 - std::cos(2.0 * n * w));
  }
  return sum;
}

inline double eval_g1(const PulseCoefficients& c, double t) {
  detail::check_time(t, c.gate_time);
  const double w = 2.0 * std::numbers::pi * t / c.gate_time;
  double sum = 0.0;
  for (int n = 1; n <= c.frequency_count; ++n) sum += c.g1_at(n) * std::sin(n * w);
  return sum;
}

inline double PulseCoefficients::g0(double t) const { return eval_g0(*this, t); }
inline double PulseCoefficients::g1(double t) const { return eval_g1(*this, t); }

/// Systematic amplitude error and global scaling: g_j -> scale (1 + delta_j) g_j.
struct PulsePerturbation {
  double scale = 1.0;
  double delta0 = 0.0;
  double delta1 = 0.0;

  double factor0() const { return scale * (1.0 + delta0); }
  double factor1() const { return scale * (1.0 + delta1); }
};

inline PulseCoefficients apply_perturbation(PulseCoefficients c, const PulsePerturbation& p) {
  for (double& v : c.g0_coeffs) v *= p.factor0();
  for (double& v : c.g1_coeffs) v *= p.factor1();
  return c;
}

/// A pulse with amplitudes multiplied by a PulsePerturbation.
template <PulseShape P>
struct PerturbedPulse {
  P base;
  PulsePerturbation perturbation;

  double duration() const { return base.duration(); }
  double g0(double t) const { return perturbation.factor0() * base.g0(t); }
  double g1(double t) const { return perturbation.factor1() * base.g1(t); }
};

struct ZeroPulse {
  double gate_time = 1.0;
  double duration() const { return gate_time; }
  double g0(double) const { return 0.0; }
  double g1(double) const { return 0.0; }
};

enum class WaveformVariant { NoCounter, WithCounter };

/// Closed-form adiabatic waveforms, optionally with the approximate counter
/// pulse g1 = dg0/dt / (c K alpha^2), c = 4 for single-qubit gates and 2 for Rzz.
struct AnalyticWaveform {
  GateKind kind = GateKind::Rz;
  WaveformVariant variant = WaveformVariant::NoCounter;
  double angle = std::numbers::pi;
  double gate_time = 1.0;
  PhysicalConstants constants{};
  std::optional<double> detuning;  ///< Rx only: Delta or Delta_count

  double duration() const { return gate_time; }

  double g0(double t) const {
    detail::check_time(t, gate_time);
    const double alpha = constants.alpha();
    const double pi = std::numbers::pi;
    switch (kind) {
      case GateKind::Rz: return pi * angle / (8.0 * gate_time * alpha) * std::sin(pi * t / gate_time);
      case GateKind::RzzTwoModeSqueezing:
      case GateKind::RzzBeamSplitter:
        return pi * angle / (8.0 * gate_time * alpha * alpha) * std::sin(pi * t / gate_time);
      case GateKind::Rx: return 0.5 * rx_detuning() * (1.0 - std::cos(2.0 * pi * t / gate_time));
    }
    return 0.0;
  }

  /// Time derivative of g0.
  double g0_rate(double t) const {
    detail::check_time(t, gate_time);
    const double alpha = constants.alpha();
    const double pi = std::numbers::pi;
    const double w = pi / gate_time;
    switch (kind) {
      case GateKind::Rz: return pi * angle / (8.0 * gate_time * alpha) * w * std::cos(w * t);
      case GateKind::RzzTwoModeSqueezing:
      case GateKind::RzzBeamSplitter:
        return pi * angle / (8.0 * gate_time * alpha * alpha) * w * std::cos(w * t);
      case GateKind::Rx: return 0.5 * rx_detuning() * 2.0 * w * std::sin(2.0 * w * t);
    }
    return 0.0;
  }

  double g1(double t) const {
    if (variant == WaveformVariant::NoCounter) {
      detail::check_time(t, gate_time);
      return 0.0;
    }
    return g0_rate(t) / (counter_denominator() * constants.kerr * constants.alpha_squared());
  }

  double counter_denominator() const { return is_two_qubit(kind) ? 2.0 : 4.0; }

 private:
  double rx_detuning() const {
    if (!detuning) throw std::logic_error("AnalyticWaveform: Rx detuning has not been calibrated");
    return *detuning;
  }
};

inline AnalyticWaveform analytic_pulse(GateKind kind, WaveformVariant variant, double angle, double gate_time,
                                       const PhysicalConstants& constants = {},
                                       std::optional<double> detuning = std::nullopt) {
  if (!(gate_time > 0.0)) throw std::invalid_argument("analytic_pulse: gate time must be positive");
  if (kind == GateKind::Rx && !detuning) {
    throw std::invalid_argument("analytic_pulse: Rx requires a calibrated detuning amplitude");
  }
  return {kind, variant, angle, gate_time, constants, detuning};
}

/// Optimizer starting point: a raised cosine with the pulse area of the
/// analytic waveform. Only g_{0,2} and (with counter) g_{1,1} are nonzero.
inline PulseCoefficients seed_coefficients(GateKind kind, bool with_counter, double angle, double gate_time,
                                           const PhysicalConstants& constants = {},
                                           std::optional<double> detuning = std::nullopt,
                                           int frequency_count = kDefaultFrequencyCount) {
  PulseCoefficients c = PulseCoefficients::zeros(gate_time, frequency_count);
  const double a2 = constants.alpha_squared();
  switch (kind) {
    case GateKind::Rz: c.g0_at(2) = angle / (2.0 * gate_time * constants.alpha()); break;
    case GateKind::RzzTwoModeSqueezing:
    case GateKind::RzzBeamSplitter: c.g0_at(2) = angle / (2.0 * gate_time * a2); break;
    case GateKind::Rx:
      if (!detuning) throw std::invalid_argument("seed_coefficients: Rx requires a calibrated detuning amplitude");
      c.g0_at(2) = *detuning;
      break;
  }
  if (with_counter) {
    const double denom = is_two_qubit(kind) ? 2.0 : 4.0;
    c.g1_at(1) = std::numbers::pi * c.g0_at(2) / (denom * constants.kerr * gate_time * a2);
  }
  return c;
}

struct PeakAmplitudes {
  double g0 = 0.0;
  double g1 = 0.0;
  double max() const { return std::max(g0, g1); }
};

/// max_t |g_j(t)| sampled on a uniform grid.
template <PulseShape P>
PeakAmplitudes peak_amplitudes(const P& pulse, int samples = 2001) {
  PeakAmplitudes peak;
  const double T = pulse.duration();
  for (int k = 0; k < samples; ++k) {
    const double t = T * k / (samples - 1);
    peak.g0 = std::max(peak.g0, std::abs(pulse.g0(t)));
    peak.g1 = std::max(peak.g1, std::abs(pulse.g1(t)));
  }
  return peak;
}

/// Pulse of either representation, as read from files or chosen by presets.
class AnyPulse {
 public:
  AnyPulse(PulseCoefficients c) : pulse_(std::move(c)) {}  // NOLINT(google-explicit-constructor)
  AnyPulse(AnalyticWaveform w) : pulse_(std::move(w)) {}   // NOLINT(google-explicit-constructor)
  AnyPulse(ZeroPulse z) : pulse_(z) {}                     // NOLINT(google-explicit-constructor)

  double duration() const {
    return std::visit([](const auto& p) { return p.duration(); }, pulse_);
  }
  double g0(double t) const {
    return std::visit([t](const auto& p) { return p.g0(t); }, pulse_);
  }
  double g1(double t) const {
    return std::visit([t](const auto& p) { return p.g1(t); }, pulse_);
  }

  const PulseCoefficients* coefficients() const { return std::get_if<PulseCoefficients>(&pulse_); }

 private:
  std::variant<PulseCoefficients, AnalyticWaveform, ZeroPulse> pulse_;
};

// ---------------------------------------------------------------------------
// Pulse file format: {gate, angle, T_K, N_f, g0, g1, meta}

struct PulseDocument {
  GateKind gate = GateKind::Rz;
  double angle = 0.0;
  PulseCoefficients coefficients;
  nlohmann::json meta = nlohmann::json::object();

  bool with_counter() const {
    return meta.contains("counter") ? meta["counter"].get<std::string>() != "none"
                                    : std::any_of(coefficients.g1_coeffs.begin(), coefficients.g1_coeffs.end(),
                                                  [](double v) { return v != 0.0; });
  }
};

inline nlohmann::json to_json(const PulseDocument& doc) {
  return {{"gate", std::string(to_string(doc.gate))},
          {"angle", doc.angle},
          {"T_K", doc.coefficients.gate_time},
          {"N_f", doc.coefficients.frequency_count},
          {"g0", doc.coefficients.g0_coeffs},
          {"g1", doc.coefficients.g1_coeffs},
          {"meta", doc.meta}};
}

inline PulseDocument pulse_document_from_json(const nlohmann::json& j) {
  for (const char* key : {"gate", "angle", "T_K", "N_f", "g0", "g1"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("pulse JSON: missing field '") + key + "'");
  }
  PulseDocument doc;
  doc.gate = parse_gate_kind(j.at("gate").get<std::string>());
  doc.angle = j.at("angle").get<double>();
  doc.coefficients = PulseCoefficients::zeros(j.at("T_K").get<double>(), j.at("N_f").get<int>());
  const auto g0 = j.at("g0").get<std::vector<double>>();
  const auto g1 = j.at("g1").get<std::vector<double>>();
  if (g0.size() != doc.coefficients.g0_coeffs.size() || g1.size() != doc.coefficients.g1_coeffs.size()) {
    throw std::invalid_argument("pulse JSON: coefficient counts do not match N_f");
  }
  doc.coefficients.g0_coeffs = g0;
  doc.coefficients.g1_coeffs = g1;
  if (j.contains("meta")) doc.meta = j.at("meta");
  return doc;
}

}  // namespace kpo
