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
#include "hybridoc/sensitivity.hpp"

#include <cmath>

namespace hybridoc {

namespace {

Mat control_jacobian(const ControlLaw& law, const ControlContext& ctx, const Vec& x) {
  return fd_jacobian([&](const Vec& y) { return law(ctx, y); }, x);
}

}  // namespace

Vec SensitivityTrajectory::gradient_at(double t) const {
  return gradient[trajectory.segment_index(t)].at(t);
}

double sensitivity_multiplier(const HybridSystem& sys, const CostSpec& cost, const SwitchRecord& sw,
                              const Vec& grad_plus, const Vec& u_minus, const Vec& u_plus,
                              double transversality_floor) {
  const ManifoldSpec* m = sys.manifold_for(sw.from, sw.event);
  if (m == nullptr) throw Error(ErrorKind::no_autonomous_transition, "autonomous switch without a manifold");
  const Vec& x = sw.pre_state;
  const Vec f_minus = sys.field(sw.from, x, u_minus);
  const double rate = sys.manifold_gradient(*m, x).dot(f_minus);
  if (std::abs(rate) < transversality_floor) {
    throw Error(ErrorKind::manifold_termination, "non-transversal crossing in sensitivity jump");
  }
  const Vec f_plus = sys.field(sw.to, sw.post_state, u_plus);
  const Mat dxi = sys.jump_jacobian(sw.event, x);
  const double num = grad_plus.dot(f_plus - dxi * f_minus) +
                     cost.running_value(sw.to, sw.post_state, u_plus) -
                     cost.running_value(sw.from, x, u_minus) -
                     cost.switching_gradient(sw.event, x).dot(f_minus);
  return num / rate;
}

SensitivityTrajectory propagate_sensitivity(const HybridSystem& sys, const CostSpec& cost,
                                            Location q0, const Vec& x0, double t0, double tf,
                                            const HybridInput& input, const SensitivityOptions& opt) {
  SensitivityTrajectory out;
  out.trajectory = simulate(sys, q0, x0, t0, tf, input, opt.integrator);
  const auto& traj = out.trajectory;
  const std::size_t S = traj.segments.size();
  out.gradient.resize(S);
  out.multipliers.assign(traj.switches.size(), 0.0);
  out.gradient_minus.resize(traj.switches.size());
  out.gradient_plus.resize(traj.switches.size());

  Vec grad_end = cost.terminal_gradient(traj.final_state());
  for (std::size_t i = S; i-- > 0;) {
    const TrajectorySegment& seg = traj.segments[i];
    const Location q = seg.location;
    const int si = static_cast<int>(i);
    Rhs rhs = [&](double t, const Vec& lam) -> Vec {
      const Vec x = seg.state.at(t);
      const ControlContext ctx{t, q, si};
      const Vec u = input.control(ctx, x);
      Mat fx = sys.field_jacobian(q, x, u);
      Vec lx = cost.running_gradient(q, x, u);
      if (opt.closed_loop) {
        const Mat ux = control_jacobian(input.control, ctx, x);
        if (!ux.isZero(0.0)) {
          const Mat fu = fd_jacobian([&](const Vec& v) { return sys.field(q, x, v); }, u);
          const Vec lu = fd_gradient([&](const Vec& v) { return cost.running_value(q, x, v); }, u);
          fx += fu * ux;
          lx += ux.transpose() * lu;
        }
      }
      return -(fx.transpose() * lam) - lx;
    };
    out.gradient[i] = integrate_segment(rhs, grad_end, seg.end(), seg.start(), opt.integrator);
    if (!out.gradient[i].back_value().allFinite() || !out.gradient[i].front_value().allFinite()) {
      throw Error(ErrorKind::blow_up, "sensitivity blew up on segment " + std::to_string(i));
    }
    if (i == 0) break;

    const std::size_t j = i - 1;
    const SwitchRecord& sw = traj.switches[j];
    const Vec& grad_plus = out.gradient[i].front_value();
    double p = 0.0;
    if (sw.kind == SwitchKind::autonomous) {
      const Vec u_minus = input.control({sw.time, sw.from, si - 1}, sw.pre_state);
      const Vec u_plus = input.control({sw.time, sw.to, si}, sw.post_state);
      p = sensitivity_multiplier(sys, cost, sw, grad_plus, u_minus, u_plus,
                                 opt.integrator.transversality_floor);
    }
    Vec grad_minus = sys.jump_jacobian(sw.event, sw.pre_state).transpose() * grad_plus +
                     cost.switching_gradient(sw.event, sw.pre_state);
    if (p != 0.0) grad_minus += p * sys.manifold_gradient(*sys.manifold_for(sw.from, sw.event), sw.pre_state);
    out.multipliers[j] = p;
    out.gradient_plus[j] = grad_plus;
    out.gradient_minus[j] = grad_minus;
    grad_end = grad_minus;
  }
  return out;
}

}  // namespace hybridoc
