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

/// Values at or above this are treated as "no admissible continuation".
inline constexpr double kInfeasibleValue = 1e12;
inline constexpr double kInfeasibleThreshold = 1e6;

struct GridAxis {
  double lower = 0.0;
  double upper = 1.0;
  int nodes = 2;
  [[nodiscard]] double step() const { return (upper - lower) / (nodes - 1); }
  [[nodiscard]] double coord(int i) const { return lower + (upper - lower) * i / (nodes - 1); }
};

struct HdpGridSpec {
  std::vector<Box> boxes;    ///< state domain per location
  double dx = 1e-2;
  double dt = 1e-3;
  int control_levels = 41;   ///< per control axis, uniform over the box
  bool refine_control = true;
  double refine_tol = 1e-5;
  bool parallel = true;
};

/// Value function V(t, q, x, r) of one (location, remaining switches) stage on
/// a uniform tensor grid, with the minimizing control and the switch decision
/// at every node and time slice.
class ValueGrid {
 public:
  ValueGrid() = default;
  ValueGrid(Location q, int remaining, const Box& box, double dx, double t0, double tf, double dt,
            int control_dim);

  Location location;
  int remaining = 0;
  std::vector<GridAxis> axes;
  double t0 = 0.0;
  double dt = 1e-3;
  int slices = 0;  ///< number of time slices, t0 + k dt for k < slices
  int control_dim = 1;
  std::vector<double> values;         ///< [slice][node]
  std::vector<double> controls;       ///< [slice][node][control]
  std::vector<std::uint8_t> switched; ///< [slice][node], 1 if switching is optimal
  std::size_t clamped_feet = 0;       ///< characteristic feet clamped onto the box

  [[nodiscard]] int dim() const { return static_cast<int>(axes.size()); }
  [[nodiscard]] std::size_t node_count() const { return node_count_; }
  [[nodiscard]] double time(int k) const { return t0 + dt * k; }
  [[nodiscard]] double tf() const { return time(slices - 1); }
  [[nodiscard]] int nearest_slice(double t) const;
  [[nodiscard]] double* slice(int k) { return values.data() + static_cast<std::size_t>(k) * node_count_; }
  [[nodiscard]] const double* slice(int k) const {
    return values.data() + static_cast<std::size_t>(k) * node_count_;
  }
  [[nodiscard]] double value(int k, std::size_t node) const { return slice(k)[node]; }
  [[nodiscard]] Vec node_state(std::size_t node) const;
  [[nodiscard]] std::vector<int> node_index(std::size_t node) const;
  [[nodiscard]] Vec control(int k, std::size_t node) const;
  [[nodiscard]] Box box() const;
  /// True when x lies at least `margin_cells` cells inside the box.
  [[nodiscard]] bool inside(const Vec& x, double margin_cells = 0.0) const;
  /// Multilinear interpolation of slice k; x is clamped onto the box and
  /// `clamped` (when given) reports whether that happened.
  [[nodiscard]] double interpolate(int k, const Vec& x, bool* clamped = nullptr) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<std::size_t> strides_;
};

/// One stage per location of the fixed event sequence, stage j having
/// L − j switches remaining.
struct ValueStack {
  std::vector<ValueGrid> stages;
  std::vector<Event> sequence;
  [[nodiscard]] const ValueGrid& stage(std::size_t j) const { return stages.at(j); }
};

/// Backward semi-Lagrangian solution of the hybrid HJB equation on the
/// problem's event sequence. Controlled switches are taken whenever switching
/// now is cheaper; autonomous switches are forced where the characteristic
/// crosses the manifold.
[[nodiscard]] ValueStack solve_hjb(const HmpProblem& problem, const HdpGridSpec& spec);

/// Central difference of the interpolant with step Δx at the nearest slice.
/// Throws ErrorKind::grid_domain when the stencil leaves the box or touches
/// an infeasible value.
[[nodiscard]] Vec value_gradient(const ValueGrid& grid, double t, const Vec& x);

/// V_t + min_u {l + ∇V·f} from one-sided time and central space differences
/// at slice k (k + 1 < slices) and an interior node. Returns NaN where the
/// stencil touches an infeasible value or a node where switching was taken,
/// since the equation only holds on the continuation set.
[[nodiscard]] double hjb_residual(const HybridSystem& sys, const CostSpec& cost,
                                  const ValueGrid& grid, int k, std::size_t node,
                                  int control_levels = 41);

/// Empirical Lipschitz constant: max |ΔV| / distance over neighbouring node
/// pairs in space (same slice) and in time (same node), restricted to nodes
/// inside `region` and slices with time in [t_begin, t_end].
[[nodiscard]] double estimate_lipschitz(const ValueGrid& grid, const Box& region, double t_begin,
                                        double t_end);

}  // namespace hybridoc
