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
#include "hybridoc/presets.hpp"

#include <cmath>
#include <numbers>

namespace hybridoc {

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }
Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

RunningCostTerm half_control_energy() {
  return {[](const Vec&, const Vec& u) { return 0.5 * u.squaredNorm(); },
          [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); }};
}

}  // namespace

Preset example1() {
  Preset p;
  p.name = "example1";
  HmpProblem& pb = p.problem;
  const Box u_box = Box::Uniform(1, -4.0, 4.0);
  const Location q1 = pb.system.add_location(
      {"q1", 1, u_box, [](const Vec& x, const Vec& u) { return scalar(x(0) * (1.0 + u(0))); },
       [](const Vec&, const Vec& u) { return scalar_mat(1.0 + u(0)); }});
  const Location q2 = pb.system.add_location(
      {"q2", 1, u_box, [](const Vec& x, const Vec& u) { return scalar(x(0) * (u(0) - 1.0)); },
       [](const Vec&, const Vec& u) { return scalar_mat(u(0) - 1.0); }});
  const Event flip = pb.system.add_event({"flip", SwitchKind::controlled,
                                          [](const Vec& x) { return Vec(-x); },
                                          [](const Vec&) { return scalar_mat(-1.0); }});
  pb.system.add_transition(q1, flip, q2);

  pb.cost.running[q1.id] = half_control_energy();
  pb.cost.running[q2.id] = half_control_energy();
  pb.cost.switching[flip.id] = {
      [](const Vec& x) { return 1.0 / (1.0 + x(0) * x(0)); },
      [](const Vec& x) {
        const double d = 1.0 + x(0) * x(0);
        return scalar(-2.0 * x(0) / (d * d));
      }};
  pb.cost.terminal = {[](const Vec& x) { return 0.5 * x(0) * x(0); },
                      [](const Vec& x) { return x; }};
  // λ x u + ½u² is minimized by u = −λx in both locations.
  const ControlMinimizer um = [](const Vec& x, const Vec& lam) { return scalar(-lam(0) * x(0)); };
  pb.minimizers[q1.id] = um;
  pb.minimizers[q2.id] = um;

  pb.q0 = q1;
  pb.x0 = scalar(1.0);
  pb.t0 = 0.0;
  pb.tf = 1.0;
  pb.sequence = {flip};
  p.guess.switch_times = {0.5};
  p.value_boxes = {Box::Uniform(1, -2.5, 2.5), Box::Uniform(1, -2.5, 2.5)};
  p.grid_dx = 1e-2;
  p.grid_dt = 1e-3;
  return p;
}

Preset example2(double v_ref) {
  Preset p;
  p.name = "example2";
  HmpProblem& pb = p.problem;
  const Box u_box = Box::Uniform(1, -4.0, 4.0);
  const Location q1 = pb.system.add_location(
      {"q1", 2, u_box, [](const Vec& x, const Vec& u) { return vec2(x(1), -x(0) + u(0)); },
       [](const Vec&, const Vec&) { return mat2(0, 1, -1, 0); }});
  const Location q2 = pb.system.add_location(
      {"q2", 2, u_box, [](const Vec& x, const Vec& u) { return vec2(x(1), u(0)); },
       [](const Vec&, const Vec&) { return mat2(0, 1, 0, 0); }});
  const Event hit = pb.system.add_event({"x2_zero", SwitchKind::autonomous,
                                         [](const Vec& x) { return x; },
                                         [](const Vec&) { return mat2(1, 0, 0, 1); }});
  pb.system.add_transition(q1, hit, q2);
  pb.system.add_manifold({q1, q2, hit, [](const Vec& x) { return x(1); },
                          [](const Vec&) { return vec2(0.0, 1.0); }});

  pb.cost.running[q1.id] = half_control_energy();
  pb.cost.running[q2.id] = half_control_energy();
  pb.cost.switching[hit.id] = {[](const Vec& x) { return 0.5 * x(0) * x(0); },
                               [](const Vec& x) { return vec2(x(0), 0.0); }};
  pb.cost.terminal = {[v_ref](const Vec& x) { return 0.5 * (x(1) - v_ref) * (x(1) - v_ref); },
                      [v_ref](const Vec& x) { return vec2(0.0, x(1) - v_ref); }};
  const ControlMinimizer um = [](const Vec&, const Vec& lam) { return scalar(-lam(1)); };
  pb.minimizers[q1.id] = um;
  pb.minimizers[q2.id] = um;

  pb.q0 = q1;
  pb.x0 = vec2(0.0, 1.0);
  pb.t0 = 0.0;
  pb.tf = 4.0;
  pb.sequence = {hit};
  // Uncontrolled crossing time of x2 = cos t.
  p.guess.switch_times = {std::numbers::pi / 2};
  p.guess.multipliers = {0.0};
  p.value_boxes = {Box(vec2(-0.25, -0.25), vec2(1.0, 1.25)), Box(vec2(-0.25, -0.25), vec2(2.0, 1.0))};
  p.grid_dx = 2.5e-2;
  p.grid_dt = 2.5e-3;
  return p;
}

Preset scalar_lqr(double tf) {
  Preset p;
  p.name = "lqr";
  HmpProblem& pb = p.problem;
  const Location q = pb.system.add_location(
      {"q", 1, Box::Uniform(1, -10.0, 10.0), [](const Vec&, const Vec& u) { return u; },
       [](const Vec&, const Vec&) { return scalar_mat(0.0); }});
  pb.cost.running[q.id] = {
      [](const Vec& x, const Vec& u) { return 0.5 * (x.squaredNorm() + u.squaredNorm()); },
      [](const Vec& x, const Vec&) { return x; }};
  pb.minimizers[q.id] = [](const Vec&, const Vec& lam) { return Vec(-lam); };
  pb.q0 = q;
  pb.x0 = scalar(1.0);
  pb.t0 = 0.0;
  pb.tf = tf;
  p.value_boxes = {Box::Uniform(1, -2.0, 2.0)};
  return p;
}

Preset preset_by_name(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "lqr") return scalar_lqr();
  throw Error(ErrorKind::config, "unknown preset '" + name + "'");
}

}  // namespace hybridoc
