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
#include "hybridoc/equivalence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hybridoc {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

Vec jump_residual(const HybridSystem& sys, const CostSpec& cost, const SwitchRecord& sw,
                  const Vec& minus, const Vec& plus, double p) {
  Vec r = minus - sys.jump_jacobian(sw.event, sw.pre_state).transpose() * plus -
          cost.switching_gradient(sw.event, sw.pre_state);
  if (p != 0.0) r -= p * sys.manifold_gradient(*sys.manifold_for(sw.from, sw.event), sw.pre_state);
  return r;
}

}  // namespace

double EquivalenceReport::max_error() const {
  double m = 0.0;
  for (const auto& s : segments) m = std::max(m, s.max_error);
  return m;
}

double EquivalenceReport::max_relative() const {
  double m = 0.0;
  for (const auto& s : segments) m = std::max(m, s.max_relative);
  return m;
}

double EquivalenceReport::median_relative() const {
  std::vector<double> all;
  for (const auto& s : segments) {
    for (double e : s.error) all.push_back(e / scale);
  }
  return median(all);
}

std::size_t EquivalenceReport::sample_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.times.size();
  return n;
}

EquivalenceReport compare(const HmpProblem& problem, const Extremal& extremal, const ValueStack& stack,
                          const EquivalenceOptions& opt) {
  const auto& traj = extremal.trajectory;
  if (stack.stages.size() != traj.segments.size()) {
    throw Error(ErrorKind::config, "value stack and extremal have different segment counts");
  }
  const ValueGrid& g0 = stack.stage(0);
  EquivalenceReport rep;
  rep.dx = g0.axes.front().step();
  rep.dt = g0.dt;
  const double margin = opt.margin_cells * rep.dt;
  const std::vector<double> ts = extremal.switch_times();
  auto near_switch = [&](double t) {
    return std::any_of(ts.begin(), ts.end(), [&](double s) { return std::abs(t - s) <= margin + 1e-12; });
  };

  double lam_max = 0.0;
  for (const auto& path : extremal.adjoint) {
    for (const Vec& v : path.values()) lam_max = std::max(lam_max, v.cwiseAbs().maxCoeff());
  }
  rep.scale = std::max(lam_max, opt.denominator_floor);

  // The gradient stencil must not straddle a switching surface: V is only
  // differentiable on each side of it.
  const std::size_t L = traj.switches.size();
  std::vector<const ManifoldSpec*> surface(traj.segments.size(), nullptr);
  for (std::size_t j = 0; j < L; ++j) {
    const SwitchRecord& sw = traj.switches[j];
    if (sw.kind == SwitchKind::autonomous) surface[j] = problem.system.manifold_for(sw.from, sw.event);
  }
  auto straddles = [&](std::size_t i, const Vec& x) {
    if (surface[i] == nullptr) return false;
    const ValueGrid& g = stack.stage(i);
    const Vec grad_m = problem.system.manifold_gradient(*surface[i], x);
    double reach = 0.0;
    for (int a = 0; a < g.dim(); ++a) reach = std::max(reach, g.axes[static_cast<std::size_t>(a)].step() * std::abs(grad_m(a)));
    return std::abs(problem.system.manifold_value(*surface[i], x)) <= opt.margin_cells * reach;
  };

  std::size_t eligible = 0;
  std::size_t covered = 0;
  rep.segments.resize(traj.segments.size());
  for (std::size_t i = 0; i < traj.segments.size(); ++i) rep.segments[i].segment = static_cast<int>(i);
  for (int k = 0; k < g0.slices; k += std::max(1, opt.sample_stride)) {
    const double t = g0.time(k);
    if (near_switch(t)) continue;
    const std::size_t i = traj.segment_index(t);
    const Vec x = traj.segments[i].state.at(t);
    if (straddles(i, x)) continue;
    ++eligible;
    Vec grad;
    try {
      grad = value_gradient(stack.stage(i), t, x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::grid_domain) throw;
      continue;
    }
    ++covered;
    const Vec lam = extremal.adjoint[i].at(t);
    auto& seg = rep.segments[i];
    seg.times.push_back(t);
    seg.lambda.push_back(lam);
    seg.gradient.push_back(grad);
    seg.error.push_back((lam - grad).cwiseAbs().maxCoeff());
  }
  rep.coverage = eligible ? static_cast<double>(covered) / static_cast<double>(eligible) : 0.0;
  for (auto& seg : rep.segments) {
    std::vector<double> rel;
    for (double e : seg.error) {
      seg.max_error = std::max(seg.max_error, e);
      rel.push_back(e / rep.scale);
    }
    seg.max_relative = seg.max_error / rep.scale;
    seg.median_relative = median(rel);
  }

  for (std::size_t j = 0; j < L; ++j) {
    const SwitchRecord& sw = traj.switches[j];
    SwitchComparison sc;
    sc.time = sw.time;
    sc.lambda_minus = extremal.lambda_minus[j];
    sc.lambda_plus = extremal.lambda_plus[j];
    const double p = extremal.multipliers[j];
    sc.lambda_residual = jump_residual(problem.system, problem.cost, sw, sc.lambda_minus, sc.lambda_plus, p);
    // One-sided limits at the nearest eligible points on either side; the
    // adjoint relation is re-evaluated at the same points so the mismatch
    // isolates the grid error.
    const auto& before = traj.segments[j];
    const auto& after = traj.segments[j + 1];
    double tm = sw.time - margin - 0.5 * rep.dt;
    while (tm > before.start() && straddles(j, before.state.at(tm))) tm -= rep.dt;
    const double tp = std::min(sw.time + margin + 0.5 * rep.dt, after.end());
    if (tm > before.start()) {
      try {
        sc.gradient_minus = value_gradient(stack.stage(j), tm, before.state.at(tm));
        sc.gradient_plus = value_gradient(stack.stage(j + 1), tp, after.state.at(tp));
        sc.gradient_residual =
            jump_residual(problem.system, problem.cost, sw, sc.gradient_minus, sc.gradient_plus, p);
        const Vec lambda_offset = jump_residual(problem.system, problem.cost, sw, extremal.adjoint[j].at(tm),
                                                extremal.adjoint[j + 1].at(tp), p);
        sc.mismatch = (sc.gradient_residual - lambda_offset).cwiseAbs().maxCoeff();
        sc.available = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::grid_domain) throw;
      }
    }
    rep.switches.push_back(std::move(sc));
  }
  return rep;
}

std::vector<double> RefinementStudy::ratios() const {
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    r.push_back(levels[i].max_relative / levels[i + 1].max_relative);
  }
  return r;
}

RefinementStudy refinement_study(const HmpProblem& problem, const Extremal& extremal, const HdpGridSpec& base,
                                 int levels, const EquivalenceOptions& opt) {
  RefinementStudy study;
  HdpGridSpec spec = base;
  for (int l = 0; l < levels; ++l) {
    const auto start = std::chrono::steady_clock::now();
    const EquivalenceReport rep = compare(problem, extremal, solve_hjb(problem, spec), opt);
    RefinementLevel lv;
    lv.dx = spec.dx;
    lv.dt = spec.dt;
    lv.max_relative = rep.max_relative();
    lv.median_relative = rep.median_relative();
    lv.coverage = rep.coverage;
    lv.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    study.levels.push_back(lv);
    spec.dx *= 0.5;
    spec.dt *= 0.5;
  }
  return study;
}

}  // namespace hybridoc
