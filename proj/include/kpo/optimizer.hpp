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

#include "kpo/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/// \file optimizer.hpp
/// BFGS pulse optimization and the one-dimensional calibrations (Rx detuning
/// amplitude, rotation angle of a scaled pulse).

namespace kpo {

struct OptimizerOptions {
  int max_iterations = 300;
  double gradient_step = 1e-6;        ///< central-difference step on the coefficients
  double gradient_tolerance = 1e-9;   ///< stop when max |grad| falls below
  double objective_tolerance = 1e-9;  ///< relative decrease counted as a stall
  int stall_iterations = 4;           ///< consecutive stalls before stopping
  double objective_target = 0.0;      ///< stop as soon as f <= target (0 disables)
  double max_step = 1.0;              ///< cap on the first step length
  int max_line_search = 40;
  int restarts = 3;                   ///< extra runs from perturbed seeds
  double restart_perturbation = 0.1;  ///< relative to the seed norm
  double restart_threshold = 1e-3;    ///< restarts only run while best f exceeds this
  std::uint64_t seed = 20231;
  bool verbose = false;

  void validate() const {
    if (!(gradient_step > 0.0)) throw std::invalid_argument("OptimizerOptions: gradient_step must be > 0");
    if (!(gradient_tolerance > 0.0) || !(objective_tolerance > 0.0)) {
      throw std::invalid_argument("OptimizerOptions: tolerances must be > 0");
    }
    if (max_iterations < 0 || restarts < 0) throw std::invalid_argument("OptimizerOptions: negative counts");
  }
};

struct BfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> trace;  ///< objective after each accepted iterate (trace[0] = f(x0))
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  std::string stop_reason;
};

namespace detail {

template <class F>
Eigen::VectorXd central_gradient(F& f, const Eigen::VectorXd& x, double h, long& evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = f(std::span<const double>(probe.data(), static_cast<std::size_t>(probe.size())));
    probe(i) = x(i) - h;
    const double fm = f(std::span<const double>(probe.data(), static_cast<std::size_t>(probe.size())));
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
    evals += 2;
  }
  return g;
}

}  // namespace detail

/// Quasi-Newton minimization with the BFGS inverse-Hessian update and an
/// Armijo backtracking line search. `objective` maps a span of doubles to a
/// double; gradients are central finite differences.
template <class F>
BfgsResult bfgs_minimize(F&& objective, std::vector<double> x0, const OptimizerOptions& opt = {}) {
  opt.validate();
  auto f = [&](std::span<const double> x) -> double { return objective(x); };
  const Index n = static_cast<Index>(x0.size());
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), n);
  BfgsResult res;
  double fx = f(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
  res.evaluations = 1;
  if (!std::isfinite(fx)) throw std::invalid_argument("bfgs_minimize: objective not finite at x0");
  res.trace.push_back(fx);

  auto finish = [&](bool converged, std::string reason) {
    res.x.assign(x.data(), x.data() + n);
    res.f = fx;
    res.converged = converged;
    res.stop_reason = std::move(reason);
    return res;
  };
  if (n == 0) return finish(true, "no variables");
  if (opt.objective_target > 0.0 && fx <= opt.objective_target) return finish(true, "target reached");

  Eigen::VectorXd g = detail::central_gradient(f, x, opt.gradient_step, res.evaluations);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int stalls = 0;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (g.cwiseAbs().maxCoeff() < opt.gradient_tolerance) return finish(true, "gradient tolerance");
    Eigen::VectorXd p = -hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      scaled = false;
      p = -g;
      slope = g.dot(p);
    }
    double step = 1.0;
    if (!scaled) step = std::min(1.0, opt.max_step / p.norm());

    // Armijo backtracking; non-finite trial values shrink the step as well.
    constexpr double kArmijo = 1e-4;
    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      x_new = x + step * p;
      f_new = f(std::span<const double>(x_new.data(), static_cast<std::size_t>(n)));
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (scaled) {
        // Retry once along steepest descent before giving up.
        hinv.setIdentity();
        scaled = false;
        continue;
      }
      return finish(false, "line search failed");
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd g_new = detail::central_gradient(f, x_new, opt.gradient_step, res.evaluations);
    const Eigen::VectorXd y = g_new - g;
    const double ys = y.dot(s);
    if (ys > 1e-16 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv = Eigen::MatrixXd::Identity(n, n) * (ys / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / ys;
      const Eigen::VectorXd hy = hinv * y;
      hinv += ((ys + y.dot(hy)) * rho * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }

    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    res.trace.push_back(fx);
    res.iterations = iter + 1;
    if (opt.verbose) {
      std::clog << "  bfgs iter " << res.iterations << "  f=" << fx << "  |g|=" << g.cwiseAbs().maxCoeff() << '\n';
    }
    if (opt.objective_target > 0.0 && fx <= opt.objective_target) return finish(true, "target reached");
    stalls = (decrease <= opt.objective_tolerance * std::max(std::abs(fx), 1e-300)) ? stalls + 1 : 0;
    if (stalls >= opt.stall_iterations) return finish(true, "objective stalled");
  }
  return finish(false, "max iterations");
}

// ---------------------------------------------------------------------------

/// 1 - F-bar as a function of the flattened pulse coefficients.
class GateObjective {
 public:
  GateObjective(GateProblem problem, bool with_counter, double gate_time, IntegratorConfig config,
                int frequency_count = kDefaultFrequencyCount)
      : problem_(std::make_shared<const GateProblem>(std::move(problem))),
        kernel_(std::make_shared<const HamiltonianKernel>(*problem_)),
        with_counter_(with_counter),
        gate_time_(gate_time),
        frequency_count_(frequency_count),
        config_(config) {
    config_.record_stride = 0;
    config_.keep_states = false;
  }

  std::size_t dimension() const {
    return static_cast<std::size_t>(frequency_count_) * (with_counter_ ? 3 : 2);
  }

  PulseCoefficients decode(std::span<const double> x) const {
    return PulseCoefficients::from_vector(x, gate_time_, frequency_count_, with_counter_);
  }

  FidelityReport report(std::span<const double> x) const {
    const DenseMatrix u = propagate_gate(*problem_, *kernel_, decode(x), config_);
    return average_fidelity(u, problem_->target);
  }

  /// Propagation failures become a penalty of 1 (zero fidelity).
  double operator()(std::span<const double> x) const {
    try {
      return report(x).infidelity;
    } catch (const std::runtime_error& e) {
      std::clog << "warning: gate objective propagation failed: " << e.what() << '\n';
      return 1.0;
    }
  }

  const GateProblem& problem() const { return *problem_; }
  const IntegratorConfig& config() const { return config_; }
  bool with_counter() const { return with_counter_; }

 private:
  std::shared_ptr<const GateProblem> problem_;
  std::shared_ptr<const HamiltonianKernel> kernel_;
  bool with_counter_;
  double gate_time_;
  int frequency_count_;
  IntegratorConfig config_;
};

inline GateObjective gate_objective(const GateProblem& problem, bool with_counter, double gate_time,
                                    const IntegratorConfig& config = {},
                                    int frequency_count = kDefaultFrequencyCount) {
  return {problem, with_counter, gate_time, config, frequency_count};
}

struct OptimizationResult {
  PulseCoefficients best;
  double seed_infidelity = 1.0;
  double final_infidelity = 1.0;
  std::vector<double> trace;  ///< objective per iteration, concatenated over runs
  PeakAmplitudes peak;
  bool converged = false;
  int runs = 0;
  long evaluations = 0;
};

/// BFGS from `seed`, then up to options.restarts runs from Gaussian-perturbed
/// seeds while the best infidelity stays above options.restart_threshold.
inline OptimizationResult optimize_gate(const GateProblem& problem, bool with_counter, const PulseCoefficients& seed,
                                        const OptimizerOptions& options = {}, const IntegratorConfig& config = {}) {
  if (with_counter && !problem.has_counter()) {
    throw std::invalid_argument("optimize_gate: problem has no counter operator");
  }
  const GateObjective objective(problem, with_counter, seed.gate_time, config, seed.frequency_count);
  const std::vector<double> x_seed = seed.to_vector(with_counter);

  OptimizationResult out;
  out.seed_infidelity = objective(x_seed);
  std::vector<double> best_x = x_seed;
  double best_f = out.seed_infidelity;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double seed_norm = 0.0;
  for (double v : x_seed) seed_norm += v * v;
  seed_norm = std::sqrt(seed_norm);
  const double sigma = options.restart_perturbation * seed_norm / std::sqrt(static_cast<double>(x_seed.size()));

  for (int run = 0; run <= options.restarts; ++run) {
    if (run > 0 && best_f <= options.restart_threshold) break;
    std::vector<double> x0 = x_seed;
    if (run > 0) {
      for (double& v : x0) v += sigma * normal(rng);
    }
    if (options.verbose) std::clog << "optimize_gate run " << run << '\n';
    BfgsResult r = bfgs_minimize(objective, x0, options);
    out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
    out.evaluations += r.evaluations;
    ++out.runs;
    if (r.f < best_f) {
      best_f = r.f;
      best_x = r.x;
      out.converged = r.converged;
    }
  }
  out.best = objective.decode(best_x);
  out.final_infidelity = best_f;
  out.peak = peak_amplitudes(out.best);
  return out;
}

/// Same waveform shape on a new gate time. g0 is scaled by T_old/T_new and
/// g1 (which tracks the rate of g0) by its square.
inline PulseCoefficients rescale_gate_time(const PulseCoefficients& c, double gate_time) {
  if (!(gate_time > 0.0)) throw std::invalid_argument("rescale_gate_time: gate time must be positive");
  const double s = c.gate_time / gate_time;
  PulseCoefficients out = c;
  out.gate_time = gate_time;
  for (double& v : out.g0_coeffs) v *= s;
  for (double& v : out.g1_coeffs) v *= s * s;
  return out;
}

/// Optimizes at each gate time in turn, seeding every stage with the previous
/// optimum rescaled to the new duration. `seed` must be defined on
/// gate_times.front(). Returns the result of the last stage; `stages` (if
/// given) receives all of them.
inline OptimizationResult optimize_gate_continuation(const GateProblem& problem, bool with_counter,
                                                     const PulseCoefficients& seed,
                                                     std::span<const double> gate_times,
                                                     const OptimizerOptions& options = {},
                                                     const IntegratorConfig& config = {},
                                                     std::vector<OptimizationResult>* stages = nullptr) {
  if (gate_times.empty()) throw std::invalid_argument("optimize_gate_continuation: no gate times");
  if (std::abs(seed.gate_time - gate_times.front()) > 1e-12) {
    throw std::invalid_argument("optimize_gate_continuation: seed duration differs from the first gate time");
  }
  PulseCoefficients current = seed;
  OptimizationResult last;
  for (double T : gate_times) {
    last = optimize_gate(problem, with_counter, rescale_gate_time(current, T), options, config);
    if (options.verbose) {
      std::clog << "continuation KT=" << T << "  1-F=" << last.final_infidelity << "  max|g0|=" << last.peak.g0
                << '\n';
    }
    if (stages) stages->push_back(last);
    current = last.best;
  }
  return last;
}

// ---------------------------------------------------------------------------
// One-dimensional maximization

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
inline ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                             double tol = 1e-8) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Grid scan followed by golden-section refinement around the best grid point.
/// Returns nullopt when the best grid point sits on the boundary.
inline std::optional<ScalarOptimum> scan_and_refine(const std::function<double(double)>& f, double lo, double hi,
                                                    int points, double tol) {
  const std::vector<double> grid = linspace(lo, hi, points);
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  if (best == 0 || best + 1 == grid.size()) return std::nullopt;
  return golden_section_maximize(f, grid[best - 1], grid[best + 1], tol);
}

struct DetuningCalibration {
  double detuning = 0.0;  ///< Delta (no counter) or Delta_count (with counter)
  double fbar = 0.0;
};

struct DetuningScan {
  double lo = -20.0;
  double hi = 20.0;
  int points = 161;
  double tolerance = 1e-6;
};

/// Chooses the Rx detuning amplitude of the analytic waveform by maximizing F-bar.
inline DetuningCalibration calibrate_detuning(double gate_time, bool with_counter, double angle = std::numbers::pi / 2,
                                              const PhysicalConstants& constants = {}, int cutoff = kDefaultCutoff,
                                              const IntegratorConfig& config = {}, DetuningScan scan = {}) {
  const GateProblem problem = make_gate_problem(GateKind::Rx, with_counter ? CounterVariant::Standard : CounterVariant::None,
                                                angle, constants, cutoff);
  const HamiltonianKernel kernel(problem);
  const auto variant = with_counter ? WaveformVariant::WithCounter : WaveformVariant::NoCounter;
  auto fbar = [&](double delta) {
    const AnalyticWaveform w = analytic_pulse(GateKind::Rx, variant, angle, gate_time, constants, delta);
    return average_fidelity(propagate_gate(problem, kernel, w, config), problem.target).fbar;
  };
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto opt = scan_and_refine(fbar, scan.lo, scan.hi, scan.points, scan.tolerance)) {
      return {opt->x, opt->value};
    }
    scan.lo *= 2.0;
    scan.hi *= 2.0;
    scan.points = 2 * scan.points - 1;
  }
  throw std::runtime_error("calibrate_detuning: no interior maximum in the scan range");
}

struct ScaledAngleResult {
  double scale = 1.0;
  double angle = 0.0;
  double fbar = 0.0;
  double infidelity() const { return 1.0 - fbar; }
};

/// Propagates the pulse scaled by lambda once, then finds the rotation angle
/// whose ideal gate it best implements.
template <PulseShape P>
ScaledAngleResult calibrate_scaled_angle(const GateProblem& problem, const P& pulse, double lambda,
                                         const IntegratorConfig& config = {}) {
  const PerturbedPulse<P> scaled{pulse, PulsePerturbation{lambda, 0.0, 0.0}};
  const DenseMatrix u = propagate_gate(problem, scaled, config);
  auto fbar = [&](double angle) { return average_fidelity(u, ideal_unitary(problem.kind, angle)).fbar; };
  const double pi = std::numbers::pi;
  // The fidelity is 2 pi periodic in the angle, so the scan window is one period.
  auto opt = scan_and_refine(fbar, -0.5 * pi, 1.5 * pi, 201, 1e-9);
  if (!opt) opt = scan_and_refine(fbar, -pi, pi, 201, 1e-9);
  if (!opt) throw std::runtime_error("calibrate_scaled_angle: no interior maximum");
  return {lambda, opt->x, opt->value};
}

}  // namespace kpo
