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
#include "hybridoc/hdp_solver.hpp"

#include "hybridoc/golden.hpp"
#include "hybridoc/hdp_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridoc {

namespace {

void fill_terminal_slice(const HmpProblem& pb, const StageContext& ctx, ValueGrid& grid) {
  const int k = grid.slices - 1;
  const auto& sys = pb.system;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Vec x = grid.node_state(node);
    double v;
    bool sw = false;
    if (!ctx.exit) {
      v = pb.cost.terminal_value(x);
    } else {
      const StageExit& ex = *ctx.exit;
      const bool allowed = ex.kind == SwitchKind::controlled ||
                           sys.manifold_value(*ex.manifold, x) == 0.0;
      if (allowed) {
        v = pb.cost.switching_value(ex.event, x) + ex.next->interpolate(k, sys.jump(ex.event, x));
        sw = true;
      } else {
        v = kInfeasibleValue;
      }
    }
    const std::size_t idx = static_cast<std::size_t>(k) * grid.node_count() + node;
    grid.values[idx] = std::min(v, kInfeasibleValue);
    grid.switched[idx] = sw ? 1 : 0;
    const Vec u = sys.location(grid.location).control_box.center();
    for (int i = 0; i < grid.control_dim; ++i) {
      grid.controls[idx * static_cast<std::size_t>(grid.control_dim) + static_cast<std::size_t>(i)] = u(i);
    }
  }
}

}  // namespace

ValueStack solve_hjb(const HmpProblem& problem, const HdpGridSpec& spec) {
  const auto locs = problem.locations();
  const auto& sys = problem.system;
  if (static_cast<int>(spec.boxes.size()) < sys.location_count()) {
    throw Error(ErrorKind::config, "value grid needs a state box for every location");
  }
  const std::size_t L = problem.sequence.size();
  ValueStack stack;
  stack.sequence = problem.sequence;
  stack.stages.resize(L + 1);
  for (std::size_t jj = L + 1; jj-- > 0;) {
    const Location q = locs[jj];
    const Box& box = spec.boxes[static_cast<std::size_t>(q.id)];
    if (box.dim() != sys.state_dim(q)) {
      throw Error(ErrorKind::dimension_mismatch, "value grid box dimension for '" +
                                                     sys.location(q).name + "'");
    }
    ValueGrid& grid = stack.stages[jj];
    grid = ValueGrid(q, static_cast<int>(L - jj), box, spec.dx, problem.t0, problem.tf, spec.dt,
                     sys.control_dim(q));
    std::optional<StageExit> exit;
    if (jj < L) {
      StageExit ex;
      ex.event = problem.sequence[jj];
      ex.kind = sys.event(ex.event).kind;
      ex.to = locs[jj + 1];
      ex.next = &stack.stages[jj + 1];
      if (ex.kind == SwitchKind::autonomous) {
        ex.manifold = sys.manifold_for(q, ex.event);
        if (!ex.manifold) {
          throw Error(ErrorKind::no_autonomous_transition, "autonomous event without a manifold");
        }
      }
      exit = ex;
    }
    const StageContext ctx = make_stage_context(sys, problem.cost, q, exit, spec.control_levels,
                                                spec.refine_control, spec.refine_tol);
    fill_terminal_slice(problem, ctx, grid);
    for (int k = grid.slices - 2; k >= 0; --k) {
      if (spec.parallel) sl_step_parallel(ctx, grid, k);
      else sl_step_serial(ctx, grid, k);
    }
  }
  return stack;
}

Vec value_gradient(const ValueGrid& grid, double t, const Vec& x) {
  const int k = grid.nearest_slice(t);
  Vec g(grid.dim());
  for (int i = 0; i < grid.dim(); ++i) {
    const double h = grid.axes[static_cast<std::size_t>(i)].step();
    Vec xp = x;
    Vec xm = x;
    xp(i) += h;
    xm(i) -= h;
    if (!grid.inside(xp) || !grid.inside(xm)) {
      throw Error(ErrorKind::grid_domain, "gradient stencil leaves the value grid");
    }
    const double vp = grid.interpolate(k, xp);
    const double vm = grid.interpolate(k, xm);
    if (vp >= kInfeasibleThreshold || vm >= kInfeasibleThreshold) {
      throw Error(ErrorKind::grid_domain, "gradient stencil touches the infeasible region");
    }
    g(i) = (vp - vm) / (2.0 * h);
  }
  return g;
}

double hjb_residual(const HybridSystem& sys, const CostSpec& cost, const ValueGrid& grid, int k,
                    std::size_t node, int control_levels) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (k + 1 >= grid.slices) throw Error(ErrorKind::grid_domain, "residual needs slice k + 1");
  const auto idx = grid.node_index(node);
  const int d = grid.dim();
  Vec grad(d);
  std::size_t stride = 1;
  std::vector<std::size_t> strides(static_cast<std::size_t>(d));
  for (int i = d - 1; i >= 0; --i) {
    strides[static_cast<std::size_t>(i)] = stride;
    stride *= static_cast<std::size_t>(grid.axes[static_cast<std::size_t>(i)].nodes);
  }
  const double v0 = grid.value(k, node);
  const double v1 = grid.value(k + 1, node);
  if (v0 >= kInfeasibleThreshold || v1 >= kInfeasibleThreshold) return nan;
  const std::size_t n_nodes = grid.node_count();
  auto switched_at = [&](std::size_t n) {
    return grid.switched[static_cast<std::size_t>(k) * n_nodes + n] != 0 ||
           grid.switched[static_cast<std::size_t>(k + 1) * n_nodes + n] != 0;
  };
  if (switched_at(node)) return nan;
  for (int i = 0; i < d; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (idx[iu] <= 0 || idx[iu] >= grid.axes[iu].nodes - 1) {
      throw Error(ErrorKind::grid_domain, "residual needs an interior node");
    }
    const double vp = grid.value(k, node + strides[iu]);
    const double vm = grid.value(k, node - strides[iu]);
    if (vp >= kInfeasibleThreshold || vm >= kInfeasibleThreshold) return nan;
    if (switched_at(node + strides[iu]) || switched_at(node - strides[iu])) return nan;
    grad(i) = (vp - vm) / (2.0 * grid.axes[iu].step());
  }
  const Vec x = grid.node_state(node);
  const Location q = grid.location;
  const Box& box = sys.location(q).control_box;
  auto h = [&](const Vec& u) { return cost.running_value(q, x, u) + grad.dot(sys.field(q, x, u)); };
  double best = std::numeric_limits<double>::infinity();
  Vec u_best = box.center();
  const StageContext levels = make_stage_context(sys, cost, q, std::nullopt, control_levels, false, 0.0);
  for (const Vec& u : levels.control_levels) {
    const double v = h(u);
    if (v < best) {
      best = v;
      u_best = u;
    }
  }
  for (int i = 0; i < u_best.size(); ++i) {
    Vec trial = u_best;
    auto g = [&](double s) {
      trial(i) = s;
      return h(trial);
    };
    const double lo = std::max(box.lower(i), u_best(i) - levels.level_spacing(i));
    const double hi = std::min(box.upper(i), u_best(i) + levels.level_spacing(i));
    best = std::min(best, golden_minimize(g, lo, hi, 1e-9).second);
  }
  return (v1 - v0) / grid.dt + best;
}

double estimate_lipschitz(const ValueGrid& grid, const Box& region, double t_begin, double t_end) {
  const int d = grid.dim();
  std::vector<std::size_t> strides(static_cast<std::size_t>(d));
  std::size_t stride = 1;
  for (int i = d - 1; i >= 0; --i) {
    strides[static_cast<std::size_t>(i)] = stride;
    stride *= static_cast<std::size_t>(grid.axes[static_cast<std::size_t>(i)].nodes);
  }
  std::vector<std::uint8_t> in_region(grid.node_count());
  for (std::size_t n = 0; n < grid.node_count(); ++n) in_region[n] = region.contains(grid.node_state(n), 1e-12);

  double lip = 0.0;
  for (int k = 0; k < grid.slices; ++k) {
    const double t = grid.time(k);
    if (t < t_begin - 1e-12 || t > t_end + 1e-12) continue;
    const bool next_in = k + 1 < grid.slices && grid.time(k + 1) <= t_end + 1e-12;
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      if (!in_region[n]) continue;
      const double v = grid.value(k, n);
      if (v >= kInfeasibleThreshold) continue;
      const auto idx = grid.node_index(n);
      for (int i = 0; i < d; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        if (idx[iu] + 1 >= grid.axes[iu].nodes) continue;
        const std::size_t m = n + strides[iu];
        if (!in_region[m]) continue;
        const double w = grid.value(k, m);
        if (w >= kInfeasibleThreshold) continue;
        lip = std::max(lip, std::abs(w - v) / grid.axes[iu].step());
      }
      if (next_in) {
        const double w = grid.value(k + 1, n);
        if (w < kInfeasibleThreshold) lip = std::max(lip, std::abs(w - v) / grid.dt);
      }
    }
  }
  return lip;
}

}  // namespace hybridoc
