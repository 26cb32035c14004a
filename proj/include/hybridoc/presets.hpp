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

#include <string>
#include <vector>

namespace hybridoc {

/// A ready-made problem with solver hints and a value-grid domain.
struct Preset {
  std::string name;
  HmpProblem problem;
  HmpGuess guess;
  std::vector<Box> value_boxes;  ///< per location
  double grid_dx = 1e-2;
  double grid_dt = 1e-3;
};

/// Two scalar locations ẋ = ±x + xu, controlled sign-flip jump,
/// cost ∫½u² + 1/(1+x²) at the switch + ½x(tf)². x0 = 1 on [0, 1].
[[nodiscard]] Preset example1();

/// Harmonic oscillator switching to a double integrator when x2 = 0,
/// cost ∫½u² + ½x1² at the switch + ½(x2(tf) − v_ref)². x0 = (0, 1) on [0, 4].
[[nodiscard]] Preset example2(double v_ref = 1.0);

/// Single location ẋ = u, cost ∫½(x² + u²); K(t) = tanh(tf − t).
[[nodiscard]] Preset scalar_lqr(double tf = 1.0);

/// Lookup by name: "example1", "example2", "lqr".
[[nodiscard]] Preset preset_by_name(const std::string& name);

}  // namespace hybridoc
