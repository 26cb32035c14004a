/*
 * Copyright 2026 The hybridoc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "hybridoc/hybrid_system.hpp"
#include "hybridoc/newton.hpp"
#include "hybridoc/simulator.hpp"

#include <map>
#include <memory>
#include <vector>

namespace hybridoc {

using MinimizerMap = std::map<int, ControlMinimizer>;

/// Optimal control problem on a fixed event sequence.
struct HmpProblem {
  HybridSystem system;
  CostSpec cost;
  MinimizerMap minimizers;  ///< optional closed forms keyed by location id
  Location q0;
  Vec x0;
  double t0 = 0.0;
  double tf = 1.0;
  std::vector<Event> sequence;

  /// Locations visited by the sequence, starting with q0.
  [[nodiscard]] std::vector<Location> locations() const;
};

struct HmpGuess {
  std::vector<double> switch_times;
  std::vector<double> multipliers;  ///< one per autonomous switch; zero if empty
};

struct HmpOptions {
  IntegratorConfig integrator;
  NewtonOptions newton;
  double tolerance = 1e-8;         ///< accepted boundary-value residual
  double consistency_tol = 1e-6;   ///< re-simulation with crossing detection
  /// When the re-simulation crosses a manifold at a different time, restart
  /// the shooting from the re-simulated switch times at most this often.
  int semantic_restarts = 3;
};

/// State, costate and control of a candidate optimum together with the
/// switching data. `input` reproduces `trajectory` under `simulate` with
/// crossing detection disabled.
struct Extremal {
  HybridTrajectory trajectory;
  HybridInput input;
  std::vector<DensePath> adjoint;    ///< per segment, knots carry λ and λ̇
  std::vector<double> multipliers;   ///< p_j per switch, zero at controlled switches
  std::vector<Vec> lambda_minus;     ///< λ(t_j−)
  std::vector<Vec> lambda_plus;      ///< λ(t_j+)
  std::vector<double> hamiltonian_gaps;
  CostBreakdown cost;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  /// Re-simulating `input` with crossing detection reproduces the switches.
  bool semantics_consistent = true;

  [[nodiscard]] std::vector<double> switch_times() const { return trajectory.switch_times(); }
  [[nodiscard]] Vec lambda_at(double t) const;
  [[nodiscard]] Vec control_at(double t) const;
  [[nodiscard]] double max_hamiltonian_gap() const;
};

[[nodiscard]] double hamiltonian(const HybridSystem& sys, const CostSpec& cost, Location q,
                                 const Vec& x, const Vec& lambda, const Vec& u);

/// argmin over the control box of H(q, x, λ, ·). Uses the closed form when one
/// is registered for q (projected onto the box), else golden-section
/// coordinate descent from the box center.
[[nodiscard]] Vec minimize_hamiltonian(const HybridSystem& sys, const CostSpec& cost,
                                       const MinimizerMap& minimizers, Location q, const Vec& x,
                                       const Vec& lambda);

/// Backward RK4 for λ̇ = −∂H/∂x along a stored segment, from λ(end) = lambda_end.
/// `control` is the law that generated the segment.
[[nodiscard]] DensePath adjoint_backward(const HybridSystem& sys, const CostSpec& cost,
                                         const TrajectorySegment& segment, int segment_index,
                                         const ControlLaw& control, const Vec& lambda_end,
                                         const IntegratorConfig& cfg);

/// λ(t_j−) = ∇ξᵀλ(t_j+) + ∇c + p∇m; p must be zero at controlled switches.
[[nodiscard]] Vec adjoint_switch_condition(const HybridSystem& sys, const CostSpec& cost,
                                           const SwitchRecord& sw, const Vec& lambda_plus,
                                           double p);

/// H(t_j−) − H(t_j+) with the minimizing controls on both sides.
[[nodiscard]] double hamiltonian_gap(const HybridSystem& sys, const CostSpec& cost,
                                     const MinimizerMap& minimizers, const SwitchRecord& sw,
                                     const Vec& lambda_minus, const Vec& lambda_plus);

/// Solves the necessary conditions by multiple shooting on the segment
/// initial (x, λ) together with the switch times and autonomous multipliers.
[[nodiscard]] Extremal solve_hmp(const HmpProblem& problem, const HmpGuess& guess,
                                 const HmpOptions& options = {});

}  // namespace hybridoc
