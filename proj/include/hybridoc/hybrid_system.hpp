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

#include "hybridoc/dense_path.hpp"
#include "hybridoc/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hybridoc {

using VectorField = std::function<Vec(const Vec& x, const Vec& u)>;
using FieldJacobian = std::function<Mat(const Vec& x, const Vec& u)>;
using StateMap = std::function<Vec(const Vec& x)>;
using StateMapJacobian = std::function<Mat(const Vec& x)>;
using ScalarFunction = std::function<double(const Vec& x)>;
using ScalarGradient = std::function<Vec(const Vec& x)>;
using StageCost = std::function<double(const Vec& x, const Vec& u)>;
using StageCostGradient = std::function<Vec(const Vec& x, const Vec& u)>;
/// Pointwise minimizer of λᵀf(x,u) + l(x,u) over the control box.
using ControlMinimizer = std::function<Vec(const Vec& x, const Vec& lambda)>;

struct LocationSpec {
  std::string name;
  int state_dim = 1;
  Box control_box;
  VectorField field;
  FieldJacobian field_jacobian;  ///< optional, finite differences otherwise
};

struct EventSpec {
  std::string name;
  SwitchKind kind = SwitchKind::controlled;
  StateMap jump;                  ///< ξ_σ; may change dimension
  StateMapJacobian jump_jacobian; ///< optional
};

/// Switching manifold m_{from,to}(x) = 0 that triggers `event`.
struct ManifoldSpec {
  Location from;
  Location to;
  Event event;
  ScalarFunction value;
  ScalarGradient gradient;  ///< optional
};

struct Transition {
  Location from;
  Event event;
  Location to;
};

/// Finite automaton, per-location vector fields and control boxes, jump maps
/// and switching manifolds. Populated once through the add_* calls and then
/// passed around by const reference.
class HybridSystem {
 public:
  HybridSystem();

  Location add_location(LocationSpec spec);
  Event add_event(EventSpec spec);
  void add_transition(Location from, Event event, Location to);
  void add_manifold(ManifoldSpec spec);

  [[nodiscard]] int location_count() const { return static_cast<int>(locations_.size()); }
  [[nodiscard]] int event_count() const { return static_cast<int>(events_.size()); }
  [[nodiscard]] const LocationSpec& location(Location q) const;
  [[nodiscard]] const EventSpec& event(Event e) const;
  [[nodiscard]] int state_dim(Location q) const { return location(q).state_dim; }
  [[nodiscard]] int control_dim(Location q) const { return location(q).control_box.dim(); }
  [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }
  [[nodiscard]] const std::vector<ManifoldSpec>& manifolds() const { return manifolds_; }
  [[nodiscard]] std::optional<Location> find_location(const std::string& name) const;
  [[nodiscard]] std::optional<Event> find_event(const std::string& name) const;

  /// Γ(q, σ); the identity event maps every location to itself.
  [[nodiscard]] std::optional<Location> transition(Location q, Event e) const;
  /// Γ(q, σ) or an ErrorKind::transition_undefined error.
  [[nodiscard]] Location next_location(Location q, Event e) const;

  [[nodiscard]] Vec field(Location q, const Vec& x, const Vec& u) const;
  [[nodiscard]] Mat field_jacobian(Location q, const Vec& x, const Vec& u) const;
  [[nodiscard]] Vec jump(Event e, const Vec& x) const;
  [[nodiscard]] Mat jump_jacobian(Event e, const Vec& x) const;

  /// Manifolds leaving q. The returned pointers stay valid while the system lives.
  [[nodiscard]] std::vector<const ManifoldSpec*> manifolds_from(Location q) const;
  [[nodiscard]] const ManifoldSpec* manifold_for(Location q, Event e) const;
  [[nodiscard]] double manifold_value(const ManifoldSpec& m, const Vec& x) const;
  [[nodiscard]] Vec manifold_gradient(const ManifoldSpec& m, const Vec& x) const;

 private:
  std::vector<LocationSpec> locations_;
  std::vector<EventSpec> events_;
  std::vector<Transition> transitions_;
  std::vector<ManifoldSpec> manifolds_;
};

struct RunningCostTerm {
  StageCost value;
  StageCostGradient gradient_x;  ///< optional
};

struct SwitchingCostTerm {
  ScalarFunction value;
  ScalarGradient gradient;  ///< optional
};

struct TerminalCostTerm {
  ScalarFunction value;
  ScalarGradient gradient;  ///< optional
};

/// Bolza cost. Missing terms are zero.
struct CostSpec {
  std::map<int, RunningCostTerm> running;      ///< keyed by location id
  std::map<int, SwitchingCostTerm> switching;  ///< keyed by event id
  TerminalCostTerm terminal;

  [[nodiscard]] double running_value(Location q, const Vec& x, const Vec& u) const;
  [[nodiscard]] Vec running_gradient(Location q, const Vec& x, const Vec& u) const;
  [[nodiscard]] double switching_value(Event e, const Vec& x) const;
  [[nodiscard]] Vec switching_gradient(Event e, const Vec& x) const;
  [[nodiscard]] double terminal_value(const Vec& x) const;
  [[nodiscard]] Vec terminal_gradient(const Vec& x) const;
};

struct ControlContext {
  double t = 0.0;
  Location location;
  int segment = 0;  ///< index of the continuous segment being integrated
};

using ControlLaw = std::function<Vec(const ControlContext& ctx, const Vec& x)>;

struct ScheduledSwitch {
  double time = 0.0;
  Event event;
};

/// Controlled-switch schedule plus a (possibly feedback) control law.
struct HybridInput {
  std::vector<ScheduledSwitch> schedule;
  ControlLaw control;

  static ControlLaw Constant(const Vec& u);
  static ControlLaw OpenLoop(std::function<Vec(double)> u);
};

struct TrajectorySegment {
  Location location;
  DensePath state;          ///< knots of the integrator with f at each knot
  std::vector<Vec> control; ///< control at each knot
  [[nodiscard]] double start() const { return state.front_time(); }
  [[nodiscard]] double end() const { return state.back_time(); }
};

struct SwitchRecord {
  double time = 0.0;
  SwitchKind kind = SwitchKind::controlled;
  Event event;
  Location from;
  Location to;
  Vec pre_state;
  Vec post_state;
};

struct HybridTrajectory {
  std::vector<TrajectorySegment> segments;
  std::vector<SwitchRecord> switches;

  [[nodiscard]] double start_time() const { return segments.front().start(); }
  [[nodiscard]] double end_time() const { return segments.back().end(); }
  [[nodiscard]] const Vec& final_state() const { return segments.back().state.back_value(); }
  [[nodiscard]] std::vector<double> switch_times() const;
  [[nodiscard]] std::vector<Location> discrete_path() const;
  /// Segment active at t (post-switch convention at switch instants).
  [[nodiscard]] std::size_t segment_index(double t) const;
  [[nodiscard]] Vec state_at(double t) const;
};

enum class AssumptionKind { initial_on_manifold, manifold_overlap, lipschitz, cost_sign, automaton };

struct Violation {
  AssumptionKind kind;
  std::string message;
};

struct ValidationOptions {
  std::vector<Box> state_boxes;  ///< per location; default [-2, 2]^n
  int samples = 10000;
  double manifold_band = 2e-2;   ///< relative to the box diameter
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<double> lipschitz_estimates;  ///< per location, on the sample box
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Checks the standing assumptions on sampled points of per-location boxes.
[[nodiscard]] ValidationReport validate_system(const HybridSystem& sys, const CostSpec& cost,
                                               Location q0, const Vec& x0,
                                               const ValidationOptions& options = {});

/// Post-switch state ξ_σ(x) and the destination location.
struct JumpResult {
  Location location;
  Vec state;
};
[[nodiscard]] JumpResult jump(const HybridSystem& sys, Location q, Event e, const Vec& x);

[[nodiscard]] double manifold_value(const HybridSystem& sys, Location from, Location to,
                                    const Vec& x);

/// Mayer form of a Bolza problem: a leading accumulator coordinate z
/// integrates l, jumps by c, and the terminal cost is z + g.
struct MayerProblem {
  HybridSystem system;
  CostSpec cost;
  std::map<int, ControlMinimizer> minimizers;
  /// x ↦ (0, x)
  [[nodiscard]] static Vec Augment(const Vec& x);
};

[[nodiscard]] MayerProblem to_mayer(const HybridSystem& sys, const CostSpec& cost,
                                    const std::map<int, ControlMinimizer>& minimizers = {});

/// Central-difference derivatives with step 1e-6·max(1, |x_i|).
[[nodiscard]] Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x);
[[nodiscard]] Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x);

}  // namespace hybridoc
