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
#include "hybridoc/hdp_kernels.hpp"

#include "hybridoc/golden.hpp"

#include <cmath>
#include <exception>
#include <limits>

namespace hybridoc {

StageContext make_stage_context(const HybridSystem& sys, const CostSpec& cost, Location q,
                                std::optional<StageExit> exit, int levels, bool refine,
                                double refine_tol) {
  if (levels < 2) throw Error(ErrorKind::config, "need at least two control levels");
  StageContext ctx;
  ctx.system = &sys;
  ctx.cost = &cost;
  ctx.location = q;
  ctx.exit = exit;
  ctx.refine = refine;
  ctx.refine_tol = refine_tol;
  const Box& box = sys.location(q).control_box;
  const int m = box.dim();
  ctx.control_box = box;
  auto running_of = [&cost](Location l) -> const StageCost* {
    auto it = cost.running.find(l.id);
    return it != cost.running.end() && it->second.value ? &it->second.value : nullptr;
  };
  ctx.field = &sys.location(q).field;
  ctx.running = running_of(q);
  if (exit) {
    ctx.jump = &sys.event(exit->event).jump;
    auto it = cost.switching.find(exit->event.id);
    ctx.switching = it != cost.switching.end() && it->second.value ? &it->second.value : nullptr;
    if (exit->manifold) ctx.manifold = &exit->manifold->value;
    ctx.next_field = &sys.location(exit->to).field;
    ctx.next_running = running_of(exit->to);
    ctx.next_control_box = sys.location(exit->to).control_box;
  }
  ctx.level_spacing = (box.upper - box.lower) / (levels - 1);
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(levels);
  ctx.control_levels.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vec u(m);
    std::size_t rest = idx;
    for (int i = m - 1; i >= 0; --i) {
      const auto j = static_cast<int>(rest % static_cast<std::size_t>(levels));
      rest /= static_cast<std::size_t>(levels);
      u(i) = box.lower(i) + (box.upper(i) - box.lower(i)) * j / (levels - 1);
    }
    ctx.control_levels.push_back(u);
  }
  return ctx;
}

namespace {

bool crosses(double m0, double m1) { return (m0 > 0 && m1 <= 0) || (m0 < 0 && m1 >= 0); }

}  // namespace

NodeUpdate update_node(const StageContext& ctx, const ValueGrid& grid, int k, std::size_t node) {
  const Vec x = grid.node_state(node);
  const double dt = grid.dt;
  const StageExit* exit = ctx.exit ? &*ctx.exit : nullptr;
  const bool autonomous = exit && exit->kind == SwitchKind::autonomous;
  auto running = [](const StageCost* l, const Vec& y, const Vec& u) { return l ? (*l)(y, u) : 0.0; };
  auto switching = [&ctx](const Vec& y) { return ctx.switching ? (*ctx.switching)(y) : 0.0; };

  NodeUpdate out;
  const double m0 = autonomous ? (*ctx.manifold)(x) : 0.0;
  if (autonomous && m0 == 0.0) {
    out.value = switching(x) + exit->next->interpolate(k, (*ctx.jump)(x), &out.clamped);
    out.control = ctx.control_box.center();
    out.switched = true;
    return out;
  }

  bool any_clamped = false;
  auto objective = [&](const Vec& u) {
    const Vec f = (*ctx.field)(x, u);
    const Vec foot = x + dt * f;
    bool clamped = false;
    double val;
    if (autonomous) {
      const double m1 = (*ctx.manifold)(foot);
      if (crosses(m0, m1)) {
        // Switch inside the step at the linearly interpolated crossing.
        const double theta = m0 / (m0 - m1);
        const Vec xc = x + theta * dt * f;
        const Vec y = (*ctx.jump)(xc);
        const Vec u2 = ctx.next_control_box.dim() == u.size() ? ctx.next_control_box.project(u)
                                                              : ctx.next_control_box.center();
        const Vec foot2 = y + (1.0 - theta) * dt * (*ctx.next_field)(y, u2);
        val = theta * dt * running(ctx.running, x, u) + switching(xc) +
              (1.0 - theta) * dt * running(ctx.next_running, y, u2) +
              exit->next->interpolate(k + 1, foot2, &clamped);
        any_clamped |= clamped;
        return val;
      }
    }
    val = dt * running(ctx.running, x, u) + grid.interpolate(k + 1, foot, &clamped);
    any_clamped |= clamped;
    return val;
  };

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < ctx.control_levels.size(); ++i) {
    const double v = objective(ctx.control_levels[i]);
    if (v < best) {
      best = v;
      best_idx = i;
    }
  }
  Vec u_best = ctx.control_levels[best_idx];
  if (ctx.refine) {
    const Box& box = ctx.control_box;
    Vec u = u_best;
    for (int i = 0; i < u.size(); ++i) {
      const double lo = std::max(box.lower(i), u_best(i) - ctx.level_spacing(i));
      const double hi = std::min(box.upper(i), u_best(i) + ctx.level_spacing(i));
      Vec trial = u;
      auto g = [&](double s) {
        trial(i) = s;
        return objective(trial);
      };
      const auto [s, v] = golden_minimize(g, lo, hi, ctx.refine_tol);
      if (v < best) {
        best = v;
        u(i) = s;
        u_best = u;
      }
    }
  }
  out.value = best;
  out.control = u_best;
  out.clamped = any_clamped;

  if (exit && exit->kind == SwitchKind::controlled) {
    bool clamped = false;
    const double now = switching(x) + exit->next->interpolate(k, (*ctx.jump)(x), &clamped);
    if (now < out.value) {
      out.value = now;
      out.switched = true;
      out.clamped = clamped;
    }
  }
  return out;
}

namespace {

void store(ValueGrid& grid, int k, std::size_t node, const NodeUpdate& up) {
  const std::size_t idx = static_cast<std::size_t>(k) * grid.node_count() + node;
  grid.values[idx] = std::min(up.value, kInfeasibleValue);
  grid.switched[idx] = up.switched ? 1 : 0;
  const auto m = static_cast<std::size_t>(grid.control_dim);
  for (std::size_t i = 0; i < m; ++i) {
    grid.controls[idx * m + i] = up.control(static_cast<Eigen::Index>(i));
  }
}

}  // namespace

void sl_step_serial(const StageContext& ctx, ValueGrid& grid, int k) {
  std::size_t clamped = 0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const NodeUpdate up = update_node(ctx, grid, k, node);
    clamped += up.clamped ? 1 : 0;
    store(grid, k, node, up);
  }
  grid.clamped_feet += clamped;
}

void sl_step_parallel(const StageContext& ctx, ValueGrid& grid, int k) {
  const auto n = static_cast<long>(grid.node_count());
  std::size_t clamped = 0;
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) reduction(+ : clamped)
  for (long node = 0; node < n; ++node) {
    try {
      const NodeUpdate up = update_node(ctx, grid, k, static_cast<std::size_t>(node));
      clamped += up.clamped ? 1 : 0;
      store(grid, k, static_cast<std::size_t>(node), up);
    } catch (...) {
#pragma omp critical(hybridoc_sl_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  grid.clamped_feet += clamped;
}

}  // namespace hybridoc
