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
#include "hybridoc/newton.hpp"

#include <string>
#include <vector>

namespace hybridoc {

using MatFn = std::function<Mat(double t)>;
using VecFn = std::function<Vec(double t)>;

[[nodiscard]] MatFn constant(const Mat& m);
[[nodiscard]] VecFn constant(const Vec& v);

/// ẋ = A(t)x + B(t)u + F(t).
struct LqLocation {
  std::string name;
  MatFn A;
  MatFn B;
  VecFn F;
  [[nodiscard]] int state_dim() const { return static_cast<int>(A(0.0).rows()); }
  [[nodiscard]] int control_dim() const { return static_cast<int>(B(0.0).cols()); }
};

/// x⁺ = P x⁻ + J. Autonomous events fire on the surface m·x + n = 0.
struct LqEvent {
  std::string name;
  SwitchKind kind = SwitchKind::controlled;
  Mat P;
  Vec J;
  Vec m;  ///< row vector of the surface, stored as a column
  double n = 0.0;
};

struct LqHybridSystem {
  std::vector<LqLocation> locations;
  std::vector<LqEvent> events;
  int add_location(LqLocation loc);
  int add_event(LqEvent ev);
};

/// ½(x−r)ᵀL(x−r) + ½uᵀRu per location, ½(x−d)ᵀC(x−d) per event and
/// ½(x−d)ᵀG(x−d) at tf.
struct LqLocationCost {
  MatFn L;
  MatFn R;
  VecFn r;
};

struct LqEventCost {
  Mat C;
  Vec d;
};

struct LqCost {
  std::vector<LqLocationCost> running;  ///< indexed like the locations
  std::vector<LqEventCost> switching;   ///< indexed like the events
  Mat G;
  Vec d;

  /// Symmetry and definiteness at the given sample times: L, C, G ⪰ 0 and
  /// R ≻ 0 with an eigenvalue floor of 1e-12. Throws ErrorKind::config.
  void validate(const std::vector<double>& sample_times) const;
};

struct LqProblem {
  LqHybridSystem system;
  LqCost cost;
  std::vector<int> locations;  ///< q_0 … q_L
  std::vector<int> events;     ///< σ_1 … σ_L
  Vec x0;
  double t0 = 0.0;
  double tf = 1.0;
};

struct RiccatiConfig {
  double step = 1e-3;
  /// A backward-flow norm above this is recorded as a conditioning warning.
  double warn_norm = 1e8;
};

/// Backward solution on one stage: K, s and the value offset w, packed per
/// knot as [K row-major | s | w], with V(t, x) = ½xᵀKx + sᵀx + w.
struct RiccatiStage {
  int location = 0;
  int n = 0;
  DensePath path;
  [[nodiscard]] Mat K(double t) const;
  [[nodiscard]] Vec s(double t) const;
  [[nodiscard]] double w(double t) const;
  [[nodiscard]] double start() const { return path.front_time(); }
  [[nodiscard]] double end() const { return path.back_time(); }
};

struct RiccatiSwitch {
  double time = 0.0;
  double p = 0.0;
  Mat K_minus, K_plus;
  Vec s_minus, s_plus;
  Vec x_minus, x_plus;
};

struct RiccatiSolution {
  LqProblem problem;
  std::vector<RiccatiStage> stages;
  std::vector<RiccatiSwitch> switches;
  HybridTrajectory trajectory;  ///< closed loop under the synthesized feedback
  double cost = 0.0;
  double residual_norm = 0.0;
  std::vector<double> hamiltonian_gaps;
  bool semantics_consistent = true;  ///< no earlier surface crossing on any stage
  std::vector<std::string> warnings;

  [[nodiscard]] std::vector<double> switch_times() const;
  [[nodiscard]] std::size_t stage_index(double t) const;
  /// λ(t) = K(t)x(t) + s(t) along the closed-loop trajectory.
  [[nodiscard]] Vec adjoint_at(double t) const;
  [[nodiscard]] Vec control_at(double t) const;
  /// Largest ‖K‖ seen over all stages.
  [[nodiscard]] double max_gain_norm() const;
};

/// Backward RK4 on [t_begin, t_end] from (K, s, w)(t_end), symmetrizing K
/// after every step. Throws ErrorKind::blow_up with the time on a
/// non-finite K.
[[nodiscard]] RiccatiStage riccati_backward(const LqLocation& loc, const LqLocationCost& cost,
                                            const Mat& K_end, const Vec& s_end, double w_end,
                                            double t_begin, double t_end,
                                            const RiccatiConfig& cfg = {});

struct JumpedRiccati {
  Mat K;
  Vec s;
  double w = 0.0;
};

/// K⁻ = PᵀK⁺P + C, s⁻ = Pᵀs⁺ + p m − C d + PᵀK⁺J. The offset w⁻ is exact for
/// controlled switches only; across a surface V is pinned on the surface alone.
[[nodiscard]] JumpedRiccati switch_jump(const Mat& K_plus, const Vec& s_plus, double w_plus,
                                        const LqEvent& ev, const LqEventCost& cost, double p);

/// u = −R⁻¹Bᵀ(Kx + s), Cholesky solve. Throws when R is not positive definite.
[[nodiscard]] Vec feedback(const Mat& K, const Vec& s, const Vec& x, const Mat& B, const Mat& R);

/// Minimized Hamiltonian ½(x−r)ᵀL(x−r) + (Kx+s)ᵀ(Ax − ½BR⁻¹Bᵀ(Kx+s) + F).
[[nodiscard]] double hamiltonian_min_value(const Vec& x, const Mat& K, const Vec& s, const Mat& A,
                                           const Mat& B, const Mat& R, const Mat& L, const Vec& F,
                                           const Vec& r);

struct TrackingOptions {
  RiccatiConfig riccati;
  NewtonOptions newton;
  double tolerance = 1e-8;
};

/// Synthesis for fixed switch times and multipliers (one p per switch, zero
/// at controlled switches): backward K, s over every stage, then the closed
/// loop forward. Residuals are left to the caller.
[[nodiscard]] RiccatiSolution synthesize(const LqProblem& pb, const std::vector<double>& times,
                                         const std::vector<double>& p, const RiccatiConfig& cfg = {});

/// Newton on the switch times and autonomous multipliers until the
/// minimized-Hamiltonian gaps and surface residuals vanish.
[[nodiscard]] RiccatiSolution solve_tracking(const LqProblem& pb, const std::vector<double>& guess,
                                             const TrackingOptions& opt = {});

struct TrackingRoots {
  std::vector<RiccatiSolution> roots;  ///< distinct converged solutions, by cost
  int attempts = 0;
  int failures = 0;
  [[nodiscard]] bool multiple() const { return roots.size() > 1; }
};

/// solve_tracking from `starts` guesses spread over the horizon, keeping
/// roots that differ in some switch time by more than 1e-6.
[[nodiscard]] TrackingRoots solve_tracking_multistart(const LqProblem& pb, int starts = 5,
                                                      const TrackingOptions& opt = {});

/// The same problem as a general hybrid system, with a closed-form
/// Hamiltonian minimizer and a control box of ±control_bound.
[[nodiscard]] HmpProblem to_hmp_problem(const LqProblem& pb, double control_bound = 1e3);

/// ẋ = u, ½(x² + u²), x(0) = 1 on [0, tf]; K(t) = tanh(tf − t). With
/// reference r the running cost becomes ½((x − r)² + u²).
[[nodiscard]] LqProblem lq_scalar(double tf = 1.0, double reference = 0.0);

/// Oscillator switching to a double integrator on x2 = 0, with switch cost
/// ½x1² and terminal cost ½(x2 − v_ref)².
[[nodiscard]] LqProblem lq_oscillator(double v_ref = 1.0, double tf = 4.0);

}  // namespace hybridoc
