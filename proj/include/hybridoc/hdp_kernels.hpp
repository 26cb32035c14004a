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

#include <optional>

namespace hybridoc {

/// Switching option available from a stage.
struct StageExit {
  SwitchKind kind = SwitchKind::controlled;
  Event event;
  Location to;
  const ValueGrid* next = nullptr;
  const ManifoldSpec* manifold = nullptr;  ///< set for autonomous exits
};

/// Everything a node update needs; shared read-only across threads. The raw
/// pointers cache lookups into the system and cost for the inner loop.
struct StageContext {
  const HybridSystem* system = nullptr;
  const CostSpec* cost = nullptr;
  Location location;
  std::optional<StageExit> exit;
  std::vector<Vec> control_levels;
  Vec level_spacing;  ///< per control axis
  Box control_box;
  bool refine = true;
  double refine_tol = 1e-6;

  const VectorField* field = nullptr;
  const StageCost* running = nullptr;          ///< null when zero
  const StateMap* jump = nullptr;
  const ScalarFunction* switching = nullptr;   ///< null when zero
  const ScalarFunction* manifold = nullptr;
  const VectorField* next_field = nullptr;
  const StageCost* next_running = nullptr;
  Box next_control_box;
};

[[nodiscard]] StageContext make_stage_context(const HybridSystem& sys, const CostSpec& cost,
                                              Location q, std::optional<StageExit> exit,
                                              int levels, bool refine, double refine_tol);

struct NodeUpdate {
  double value = 0.0;
  Vec control;
  bool switched = false;
  bool clamped = false;
};

/// Dynamic-programming update of one node at slice k from slice k + 1.
[[nodiscard]] NodeUpdate update_node(const StageContext& ctx, const ValueGrid& grid, int k,
                                     std::size_t node);

/// Fills slice k of `grid`. The serial version is the reference; the OpenMP
/// version performs the same per-node arithmetic and is bit-identical.
void sl_step_serial(const StageContext& ctx, ValueGrid& grid, int k);
void sl_step_parallel(const StageContext& ctx, ValueGrid& grid, int k);

}  // namespace hybridoc
