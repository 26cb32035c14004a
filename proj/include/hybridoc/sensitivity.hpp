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

#include "hybridoc/simulator.hpp"

#include <vector>

namespace hybridoc {

struct SensitivityOptions {
  IntegratorConfig integrator;
  /// Differentiate through the feedback u(t, x). Disable to reproduce the
  /// partial-Jacobian form, which is exact only for open-loop inputs.
  bool closed_loop = true;
};

/// Gradient of the cost-to-go of a fixed input with respect to the state,
/// along the trajectory that input generates.
struct SensitivityTrajectory {
  HybridTrajectory trajectory;
  std::vector<DensePath> gradient;  ///< per segment
  std::vector<double> multipliers;  ///< per switch, 0 at controlled switches
  std::vector<Vec> gradient_minus;  ///< ∇J(t_j−)
  std::vector<Vec> gradient_plus;   ///< ∇J(t_j+)

  [[nodiscard]] Vec gradient_at(double t) const;
  [[nodiscard]] Vec initial_gradient() const { return gradient.front().front_value(); }
};

/// Multiplier of ∇m in the gradient jump at an autonomous switch: chosen so
/// that ∇Jᵀf + l is continuous across the surface, which holds because the
/// surface and switching cost do not depend on time. Throws when ∇mᵀf− is
/// below the transversality floor.
[[nodiscard]] double sensitivity_multiplier(const HybridSystem& sys, const CostSpec& cost,
                                            const SwitchRecord& sw, const Vec& grad_plus,
                                            const Vec& u_minus, const Vec& u_plus,
                                            double transversality_floor);

/// Simulates the input forward, then integrates
///   d∇J/dt = −(∂F/∂x)ᵀ∇J − ∂L/∂x,  ∇J(tf) = ∇g,
/// backward, where F(x) = f(x, u(t, x)) and L(x) = l(x, u(t, x)), applying
///   ∇J(t_j−) = ∇ξᵀ∇J(t_j+) + ∇c + p ∇m
/// at every switch.
[[nodiscard]] SensitivityTrajectory propagate_sensitivity(const HybridSystem& sys,
                                                          const CostSpec& cost, Location q0,
                                                          const Vec& x0, double t0, double tf,
                                                          const HybridInput& input,
                                                          const SensitivityOptions& opt = {});

}  // namespace hybridoc
