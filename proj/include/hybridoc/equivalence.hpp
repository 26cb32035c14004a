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

#include "hybridoc/hdp_solver.hpp"
#include "hybridoc/hmp_solver.hpp"

#include <vector>

namespace hybridoc {

struct EquivalenceOptions {
  int sample_stride = 1;        ///< compare at every stride-th time slice
  double margin_cells = 1.0;    ///< time cells excluded on each side of a switch
  double denominator_floor = 1e-6;
};

struct SegmentComparison {
  int segment = 0;
  std::vector<double> times;
  std::vector<Vec> lambda;
  std::vector<Vec> gradient;
  std::vector<double> error;  ///< ‖λ − ∇V‖∞ per sample
  double max_error = 0.0;
  double max_relative = 0.0;
  double median_relative = 0.0;
};

/// Both sides of the jump relation at one switch. The gradient side uses
/// one-sided limits taken just outside the excluded margin.
struct SwitchComparison {
  double time = 0.0;
  Vec lambda_minus, lambda_plus;
  Vec gradient_minus, gradient_plus;
  Vec lambda_residual;    ///< λ⁻ − (∇ξᵀλ⁺ + ∇c + p∇m) at the switch
  Vec gradient_residual;  ///< the same relation with one-sided ∇V limits
  /// ‖gradient_residual − (relation with λ at the same one-sided points)‖∞
  double mismatch = 0.0;
  bool available = false; ///< false when a stencil left the grid
};

struct EquivalenceReport {
  double dx = 0.0;
  double dt = 0.0;
  double scale = 0.0;     ///< relative-error denominator
  double coverage = 1.0;  ///< fraction of eligible samples inside the grids
  std::vector<SegmentComparison> segments;
  std::vector<SwitchComparison> switches;

  [[nodiscard]] double max_error() const;
  [[nodiscard]] double max_relative() const;
  [[nodiscard]] double median_relative() const;
  [[nodiscard]] std::size_t sample_count() const;
};

/// Pairs the extremal's adjoint with the value-grid gradient along the
/// extremal trajectory. Segment i is compared against stage i. Samples within
/// margin_cells time cells of a switch are skipped, as are samples whose
/// gradient stencil would straddle the switching surface ahead of them.
[[nodiscard]] EquivalenceReport compare(const HmpProblem& problem, const Extremal& extremal,
                                        const ValueStack& stack, const EquivalenceOptions& opt = {});

struct RefinementLevel {
  double dx = 0.0;
  double dt = 0.0;
  double max_relative = 0.0;
  double median_relative = 0.0;
  double coverage = 0.0;
  double seconds = 0.0;
};

struct RefinementStudy {
  std::vector<RefinementLevel> levels;
  /// levels[i].max_relative / levels[i+1].max_relative
  [[nodiscard]] std::vector<double> ratios() const;
};

/// Solves the value grids at `levels` successive halvings of (dx, dt) starting
/// from `base` and compares each against the extremal. Grids are released
/// between levels.
[[nodiscard]] RefinementStudy refinement_study(const HmpProblem& problem, const Extremal& extremal,
                                               const HdpGridSpec& base, int levels,
                                               const EquivalenceOptions& opt = {});

}  // namespace hybridoc
