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
#include "hybridoc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybridoc {

Vec rk4_step(const Rhs& rhs, double t, const Vec& y, double h) {
  const Vec k1 = rhs(t, y);
  const Vec k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = rhs(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

bool finite(const Vec& v) { return v.allFinite(); }

void require_finite(const Vec& v, double t) {
  if (!finite(v)) {
    std::ostringstream os;
    os << "state became non-finite near t = " << t;
    throw Error(ErrorKind::blow_up, os.str());
  }
}

/// Knot k of a fixed-step grid from ta towards tb, snapped to tb at the end.
double knot_time(double ta, double tb, double h, long k) {
  const double t = ta + static_cast<double>(k) * h * (tb >= ta ? 1.0 : -1.0);
  return tb >= ta ? std::min(t, tb) : std::max(t, tb);
}

bool reached(double t, double tb, double ta) {
  return tb >= ta ? t >= tb : t <= tb;
}

}  // namespace

DensePath integrate_segment(const Rhs& rhs, const Vec& y0, double ta, double tb,
                            const IntegratorConfig& cfg) {
  if (!(cfg.step > 0.0)) throw Error(ErrorKind::config, "integration step must be positive");
  DensePath path;
  path.reserve(static_cast<std::size_t>(std::abs(tb - ta) / cfg.step) + 2);
  Vec y = y0;
  double t = ta;
  path.push_back(t, y, rhs(t, y));
  for (long k = 1; !reached(t, tb, ta); ++k) {
    const double tn = knot_time(ta, tb, cfg.step, k);
    y = rk4_step(rhs, t, y, tn - t);
    require_finite(y, tn);
    t = tn;
    path.push_back(t, y, rhs(t, y));
  }
  if (tb < ta) path.reverse();
  return path;
}

Crossing locate_crossing(const Rhs& rhs, const ScalarFunction& m, const ScalarGradient& grad_m,
                         double ta, const Vec& xa, double tb, const IntegratorConfig& cfg) {
  const double ma = m(xa);
  double lo = 0.0;
  double hi = tb - ta;
  Crossing out;
  out.time = tb;
  out.state = rk4_step(rhs, ta, xa, hi);
  out.manifold_value = m(out.state);
  for (int it = 0; it < cfg.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vec xm = rk4_step(rhs, ta, xa, mid);
    const double mm = m(xm);
    out.time = ta + mid;
    out.state = xm;
    out.manifold_value = mm;
    out.bisections = it + 1;
    if (std::abs(mm) <= cfg.crossing_tol) break;
    if ((mm > 0) == (ma > 0)) lo = mid;
    else hi = mid;
  }
  const Vec f = rhs(out.time, out.state);
  const Vec g = grad_m ? grad_m(out.state) : fd_gradient(m, out.state);
  out.transversal = std::abs(g.dot(f)) >= cfg.transversality_floor;
  return out;
}

namespace {

Vec checked_control(const HybridSystem& sys, const ControlLaw& law, const ControlContext& ctx,
                    const Vec& x) {
  Vec u = law(ctx, x);
  const Box& box = sys.location(ctx.location).control_box;
  if (u.size() != box.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "control dimension does not match the location");
  }
  const double tol = 1e-9 * (1.0 + std::max(box.lower.cwiseAbs().maxCoeff(),
                                            box.upper.cwiseAbs().maxCoeff()));
  if (!box.contains(u, tol)) {
    std::ostringstream os;
    os << "control leaves the admissible box at t = " << ctx.t;
    throw Error(ErrorKind::control_out_of_bounds, os.str());
  }
  return u;
}

}  // namespace

HybridTrajectory simulate(const HybridSystem& sys, Location q0, const Vec& x0, double t0,
                          double tf, const HybridInput& input, const IntegratorConfig& cfg) {
  if (!(tf >= t0)) throw Error(ErrorKind::config, "final time precedes initial time");
  if (!input.control) throw Error(ErrorKind::config, "input has no control law");
  if (!(cfg.step > 0.0)) throw Error(ErrorKind::config, "integration step must be positive");
  if (x0.size() != sys.state_dim(q0)) {
    throw Error(ErrorKind::dimension_mismatch, "initial state dimension");
  }
  const auto& schedule = input.schedule;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double ts = schedule[i].time;
    if (ts < t0 || ts > tf || (i > 0 && ts < schedule[i - 1].time)) {
      throw Error(ErrorKind::switch_order, "scheduled switch times must be ordered in [t0, tf]");
    }
    if (cfg.detect_crossings && sys.event(schedule[i].event).kind == SwitchKind::autonomous) {
      throw Error(ErrorKind::config,
                  "autonomous events cannot be scheduled while crossings are detected");
    }
  }

  HybridTrajectory traj;
  Location q = q0;
  Vec x = x0;
  double t = t0;
  std::size_t next_sched = 0;

  auto do_switch = [&](Event e, SwitchKind kind) {
    if (static_cast<int>(traj.switches.size()) >= cfg.max_switches) {
      throw Error(ErrorKind::switch_budget_exhausted,
                  "more than " + std::to_string(cfg.max_switches) + " switches");
    }
    const JumpResult jr = jump(sys, q, e, x);
    traj.switches.push_back({t, kind, e, q, jr.location, x, jr.state});
    q = jr.location;
    x = jr.state;
  };

  while (true) {
    const int seg_index = static_cast<int>(traj.segments.size());
    TrajectorySegment seg;
    seg.location = q;
    const Location qs = q;
    Rhs rhs = [&sys, &input, qs, seg_index](double tt, const Vec& y) {
      return sys.field(qs, y, checked_control(sys, input.control, {tt, qs, seg_index}, y));
    };
    auto push_knot = [&](double tt, const Vec& y) {
      const Vec u = checked_control(sys, input.control, {tt, qs, seg_index}, y);
      seg.state.push_back(tt, y, sys.field(qs, y, u));
      seg.control.push_back(u);
    };

    const double t_stop = next_sched < schedule.size() ? schedule[next_sched].time : tf;
    const auto manifolds =
        cfg.detect_crossings ? sys.manifolds_from(q) : std::vector<const ManifoldSpec*>{};
    push_knot(t, x);
    const double seg_start = t;
    bool crossed = false;
    Event crossing_event;
    for (long k = 1; t < t_stop; ++k) {
      const double tn = knot_time(seg_start, t_stop, cfg.step, k);
      const Vec xn = rk4_step(rhs, t, x, tn - t);
      require_finite(xn, tn);

      const ManifoldSpec* hit = nullptr;
      Crossing best;
      for (const auto* m : manifolds) {
        const double m0 = m->value(x);
        const double m1 = m->value(xn);
        if (m0 == 0.0 || !((m0 > 0 && m1 <= 0) || (m0 < 0 && m1 >= 0))) continue;
        Crossing c = locate_crossing(rhs, m->value, m->gradient, t, x, tn, cfg);
        if (!hit || c.time < best.time) {
          hit = m;
          best = std::move(c);
        }
      }
      if (hit) {
        if (!best.transversal) {
          std::ostringstream os;
          os << "tangential contact with the manifold at t = " << best.time;
          throw Error(ErrorKind::manifold_termination, os.str());
        }
        if (next_sched < schedule.size() && schedule[next_sched].time - best.time < cfg.step) {
          std::ostringstream os;
          os << "autonomous crossing at t = " << best.time
             << " coincides with a scheduled switch at t = " << schedule[next_sched].time;
          throw Error(ErrorKind::ambiguous_switch, os.str());
        }
        t = best.time;
        x = best.state;
        push_knot(t, x);
        crossed = true;
        crossing_event = hit->event;
        break;
      }
      t = tn;
      x = xn;
      push_knot(t, x);
    }
    traj.segments.push_back(std::move(seg));

    if (crossed) {
      do_switch(crossing_event, SwitchKind::autonomous);
      continue;
    }
    if (next_sched < schedule.size()) {
      const Event e = schedule[next_sched].event;
      ++next_sched;
      do_switch(e, sys.event(e).kind);
      continue;
    }
    break;
  }
  return traj;
}

CostBreakdown evaluate_cost_breakdown(const HybridTrajectory& traj, const CostSpec& cost,
                                      const HybridInput& input) {
  CostBreakdown out;
  for (std::size_t s = 0; s < traj.segments.size(); ++s) {
    const auto& seg = traj.segments[s];
    const auto& ts = seg.state.times();
    const auto& xs = seg.state.values();
    const Location q = seg.location;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double h = ts[k + 1] - ts[k];
      if (h <= 0.0) continue;
      const double tm = ts[k] + 0.5 * h;
      const Vec xm = seg.state.at(tm);
      const Vec um = input.control({tm, q, static_cast<int>(s)}, xm);
      out.running += h / 6.0 *
                     (cost.running_value(q, xs[k], seg.control[k]) +
                      4.0 * cost.running_value(q, xm, um) +
                      cost.running_value(q, xs[k + 1], seg.control[k + 1]));
    }
  }
  for (const auto& sw : traj.switches) out.switching += cost.switching_value(sw.event, sw.pre_state);
  out.terminal = cost.terminal_value(traj.final_state());
  return out;
}

double evaluate_cost(const HybridTrajectory& traj, const CostSpec& cost, const HybridInput& input) {
  return evaluate_cost_breakdown(traj, cost, input).total();
}

}  // namespace hybridoc
