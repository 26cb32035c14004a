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

namespace hybridoc {

struct IntegratorConfig {
  double step = 1e-3;
  double crossing_tol = 1e-10;
  int max_switches = 64;
  double transversality_floor = 1e-8;
  int max_bisections = 80;
  /// When false, manifolds are ignored and every switch, autonomous ones
  /// included, comes from the schedule. Shooting solvers use this to impose
  /// candidate switch times.
  bool detect_crossings = true;
};

/// Time-dependent right-hand side ẏ = F(t, y).
using Rhs = std::function<Vec(double t, const Vec& y)>;

[[nodiscard]] Vec rk4_step(const Rhs& rhs, double t, const Vec& y, double h);

/// Fixed-step RK4 from ta to tb (either direction) with a shortened final
/// step. The returned path is ordered by increasing time.
[[nodiscard]] DensePath integrate_segment(const Rhs& rhs, const Vec& y0, double ta, double tb,
                                          const IntegratorConfig& cfg);

struct Crossing {
  double time = 0.0;
  Vec state;
  double manifold_value = 0.0;
  bool transversal = true;
  int bisections = 0;
};

/// Refines a sign change of m over one step starting at (ta, xa) and ending
/// at tb by bisection on the length of a single RK4 step from (ta, xa).
[[nodiscard]] Crossing locate_crossing(const Rhs& rhs, const ScalarFunction& m,
                                       const ScalarGradient& grad_m, double ta, const Vec& xa,
                                       double tb, const IntegratorConfig& cfg);

[[nodiscard]] HybridTrajectory simulate(const HybridSystem& sys, Location q0, const Vec& x0,
                                        double t0, double tf, const HybridInput& input,
                                        const IntegratorConfig& cfg = {});

struct CostBreakdown {
  double running = 0.0;
  double switching = 0.0;
  double terminal = 0.0;
  [[nodiscard]] double total() const { return running + switching + terminal; }
};

/// Simpson quadrature of the running cost per step (midpoint from the dense
/// output, control re-evaluated there), plus switching and terminal costs.
[[nodiscard]] CostBreakdown evaluate_cost_breakdown(const HybridTrajectory& traj,
                                                    const CostSpec& cost,
                                                    const HybridInput& input);

[[nodiscard]] double evaluate_cost(const HybridTrajectory& traj, const CostSpec& cost, const HybridInput& input);

}  // namespace hybridoc
