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

#include "hybridoc/hmp_solver.hpp"

#include <cstdint>
#include <vector>

namespace hybridoc {

/// Family of inputs searched by the brute-force oracles: piecewise-constant
/// scalar controls on `pieces` equal pieces with `levels` uniform values in
/// [u_min, u_max], and controlled switch times from an interior grid of
/// `switch_grid` points, t0 + (tf − t0) k / (switch_grid + 1).
struct OracleSpec {
  int pieces = 20;
  int levels = 33;
  double u_min = -4.0;
  double u_max = 4.0;
  int switch_grid = 200;
  bool parallel = true;
};

struct OracleCandidate {
  std::vector<double> switch_times;
  std::vector<double> controls;  ///< one value per piece
  double cost = 0.0;
};

struct OracleResult {
  OracleCandidate best;
  double candidates = 0.0;       ///< size of the searched family
  std::uint64_t infeasible = 0;  ///< candidates rejected (wrong switch sequence)
};

/// Example 1 family (ẋ = x(±1 + u), controlled flip x → −x). Flows are exact
/// exponentials, so log|x| lives on a lattice and a dynamic program over it
/// finds the exact family minimum for every switch time.
[[nodiscard]] OracleResult example1_lattice_oracle(double x0, double t0, double tf, const OracleSpec& spec);

/// Example 2 family (oscillator, switch on x2 = 0, double integrator), every
/// candidate propagated in closed form. Switch times are not searched since
/// the switch is autonomous.
[[nodiscard]] OracleResult example2_closed_form_oracle(const Vec& x0, double v_ref, double t0, double tf,
                                                       const OracleSpec& spec);

/// Any problem with scalar control: every candidate is simulated and costed.
/// Throws ErrorKind::config above `max_candidates`.
[[nodiscard]] OracleResult enumerate_oracle(const HmpProblem& problem, const OracleSpec& spec,
                                            const IntegratorConfig& cfg = {},
                                            std::uint64_t max_candidates = 2'000'000);

/// Cost of one candidate, simulated piece by piece with a constant control
/// on each piece so no integration step straddles a control jump. Throws
/// ErrorKind::config when the realized switch sequence differs from the
/// problem's.
[[nodiscard]] double evaluate_candidate(const HmpProblem& problem, const OracleSpec& spec,
                                        const OracleCandidate& c, const IntegratorConfig& cfg = {});

struct ProbeOptions {
  int count = 200;
  std::uint64_t seed = 20260101;
  double max_shift = 0.05;  ///< controlled switch times only
  double max_bump = 0.1;
  IntegratorConfig integrator;
};

struct ProbeResult {
  int evaluated = 0;
  int rejected = 0;          ///< perturbed inputs that failed to simulate
  double min_increase = 0.0; ///< min over probes of J_pert − J_opt
  double max_increase = 0.0;
};

/// Perturbs the extremal's input with seeded random switch-time shifts and
/// smooth control bumps (sin² windows on random subintervals) and reports the
/// cost change.
[[nodiscard]] ProbeResult local_optimality_probe(const HmpProblem& problem, const Extremal& extremal,
                                                 const ProbeOptions& opt = {});

}  // namespace hybridoc
