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
#include "hybridoc/hmp_solver.hpp"

#include "hybridoc/golden.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace hybridoc {

std::vector<Location> HmpProblem::locations() const {
  std::vector<Location> out{q0};
  for (const Event e : sequence) out.push_back(system.next_location(out.back(), e));
  return out;
}

double hamiltonian(const HybridSystem& sys, const CostSpec& cost, Location q, const Vec& x,
                   const Vec& lambda, const Vec& u) {
  return lambda.dot(sys.field(q, x, u)) + cost.running_value(q, x, u);
}

Vec minimize_hamiltonian(const HybridSystem& sys, const CostSpec& cost,
                         const MinimizerMap& minimizers, Location q, const Vec& x,
                         const Vec& lambda) {
  const Box& box = sys.location(q).control_box;
  if (auto it = minimizers.find(q.id); it != minimizers.end() && it->second) {
    return box.project(it->second(x, lambda));
  }
  Vec u = box.center();
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int i = 0; i < u.size(); ++i) {
      Vec trial = u;
      auto h = [&](double s) {
        trial(i) = s;
        return hamiltonian(sys, cost, q, x, lambda, trial);
      };
      u(i) = golden_minimize(h, box.lower(i), box.upper(i), 1e-10).first;
    }
  }
  return u;
}

DensePath adjoint_backward(const HybridSystem& sys, const CostSpec& cost,
                           const TrajectorySegment& segment, int segment_index,
                           const ControlLaw& control, const Vec& lambda_end,
                           const IntegratorConfig& cfg) {
  const Location q = segment.location;
  Rhs rhs = [&](double t, const Vec& lam) -> Vec {
    const Vec x = segment.state.at(t);
    const Vec u = control({t, q, segment_index}, x);
    return -(sys.field_jacobian(q, x, u).transpose() * lam) - cost.running_gradient(q, x, u);
  };
  return integrate_segment(rhs, lambda_end, segment.end(), segment.start(), cfg);
}

Vec adjoint_switch_condition(const HybridSystem& sys, const CostSpec& cost, const SwitchRecord& sw,
                             const Vec& lambda_plus, double p) {
  Vec lam = sys.jump_jacobian(sw.event, sw.pre_state).transpose() * lambda_plus +
            cost.switching_gradient(sw.event, sw.pre_state);
  if (p != 0.0) {
    const ManifoldSpec* m = sys.manifold_for(sw.from, sw.event);
    if (sw.kind == SwitchKind::controlled || m == nullptr) {
      throw Error(ErrorKind::config, "nonzero multiplier at a controlled switch");
    }
    lam += p * sys.manifold_gradient(*m, sw.pre_state);
  }
  return lam;
}

double hamiltonian_gap(const HybridSystem& sys, const CostSpec& cost,
                       const MinimizerMap& minimizers, const SwitchRecord& sw,
                       const Vec& lambda_minus, const Vec& lambda_plus) {
  const Vec um = minimize_hamiltonian(sys, cost, minimizers, sw.from, sw.pre_state, lambda_minus);
  const Vec up = minimize_hamiltonian(sys, cost, minimizers, sw.to, sw.post_state, lambda_plus);
  return hamiltonian(sys, cost, sw.from, sw.pre_state, lambda_minus, um) -
         hamiltonian(sys, cost, sw.to, sw.post_state, lambda_plus, up);
}

Vec Extremal::lambda_at(double t) const { return adjoint[trajectory.segment_index(t)].at(t); }

Vec Extremal::control_at(double t) const {
  const std::size_t k = trajectory.segment_index(t);
  const auto& seg = trajectory.segments[k];
  return input.control({t, seg.location, static_cast<int>(k)}, seg.state.at(t));
}

double Extremal::max_hamiltonian_gap() const {
  double g = 0.0;
  for (double v : hamiltonian_gaps) g = std::max(g, std::abs(v));
  return g;
}

namespace {

/// Unknown vector layout:
///   λ_0 | (x_i, λ_i) for i = 1..L | t_1..t_L | p for autonomous switches.
struct Layout {
  std::vector<Location> locs;
  std::vector<int> dims;
  std::vector<int> x_off;    ///< per segment, -1 for segment 0
  std::vector<int> lam_off;
  std::vector<int> p_index;  ///< per switch, -1 when controlled
  int t_off = 0;
  int p_off = 0;
  int size = 0;
  int switches = 0;
};

Layout make_layout(const HmpProblem& pb) {
  Layout lay;
  lay.locs = pb.locations();
  lay.switches = static_cast<int>(pb.sequence.size());
  for (const Location q : lay.locs) lay.dims.push_back(pb.system.state_dim(q));
  int off = 0;
  for (std::size_t i = 0; i < lay.locs.size(); ++i) {
    if (i == 0) {
      lay.x_off.push_back(-1);
    } else {
      lay.x_off.push_back(off);
      off += lay.dims[i];
    }
    lay.lam_off.push_back(off);
    off += lay.dims[i];
  }
  lay.t_off = off;
  off += lay.switches;
  lay.p_off = off;
  for (const Event e : pb.sequence) {
    if (pb.system.event(e).kind == SwitchKind::autonomous) {
      lay.p_index.push_back(off - lay.p_off);
      ++off;
    } else {
      lay.p_index.push_back(-1);
    }
  }
  lay.size = off;
  return lay;
}

Vec stacked(const Vec& a, const Vec& b) {
  Vec y(a.size() + b.size());
  y << a, b;
  return y;
}

/// Joint (x, λ) flow with the control minimizing H pointwise.
DensePath integrate_coupled(const HmpProblem& pb, Location q, const Vec& x, const Vec& lam,
                            double ta, double tb, const IntegratorConfig& cfg) {
  const auto n = x.size();
  Rhs rhs = [&pb, q, n](double, const Vec& y) -> Vec {
    const Vec xs = y.head(n);
    const Vec ls = y.tail(n);
    const Vec u = minimize_hamiltonian(pb.system, pb.cost, pb.minimizers, q, xs, ls);
    Vec dy(2 * n);
    dy.head(n) = pb.system.field(q, xs, u);
    dy.tail(n) = -(pb.system.field_jacobian(q, xs, u).transpose() * ls) -
                 pb.cost.running_gradient(q, xs, u);
    return dy;
  };
  return integrate_segment(rhs, stacked(x, lam), ta, tb, cfg);
}

std::vector<double> switch_times_of(const Layout& lay, const DynVec& z) {
  std::vector<double> t(static_cast<std::size_t>(lay.switches));
  for (int j = 0; j < lay.switches; ++j) t[static_cast<std::size_t>(j)] = z(lay.t_off + j);
  return t;
}

struct ShootingPass {
  std::vector<DensePath> paths;
  DynVec residual;
};

ShootingPass shoot(const HmpProblem& pb, const Layout& lay, const DynVec& z,
                   const IntegratorConfig& cfg) {
  const auto times = switch_times_of(lay, z);
  double prev = pb.t0;
  for (double t : times) {
    if (!(t > prev) || !(t < pb.tf)) {
      throw Error(ErrorKind::switch_order, "switch times left the open horizon or lost order");
    }
    prev = t;
  }

  ShootingPass out;
  out.residual.resize(lay.size);
  int r = 0;
  const int L = lay.switches;
  for (int i = 0; i <= L; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const int n = lay.dims[iu];
    const Location q = lay.locs[iu];
    const Vec xa = i == 0 ? pb.x0 : Vec(z.segment(lay.x_off[iu], n));
    const Vec la = z.segment(lay.lam_off[iu], n);
    const double ta = i == 0 ? pb.t0 : times[iu - 1];
    const double tb = i == L ? pb.tf : times[iu];
    out.paths.push_back(integrate_coupled(pb, q, xa, la, ta, tb, cfg));
    const Vec ye = out.paths.back().back_value();
    const Vec xe = ye.head(n);
    const Vec le = ye.tail(n);
    if (i == L) {
      out.residual.segment(r, n) = le - pb.cost.terminal_gradient(xe);
      r += n;
      break;
    }
    const Event e = pb.sequence[iu];
    const int np = lay.dims[iu + 1];
    const Vec xp = z.segment(lay.x_off[iu + 1], np);
    const Vec lp = z.segment(lay.lam_off[iu + 1], np);
    const int pi = lay.p_index[iu];
    const double p = pi >= 0 ? z(lay.p_off + pi) : 0.0;
    SwitchRecord sw{tb, pb.system.event(e).kind, e, q, lay.locs[iu + 1], xe, pb.system.jump(e, xe)};
    out.residual.segment(r, np) = xp - sw.post_state;
    r += np;
    out.residual.segment(r, n) = le - adjoint_switch_condition(pb.system, pb.cost, sw, lp, p);
    r += n;
    sw.post_state = xp;
    out.residual(r++) = hamiltonian_gap(pb.system, pb.cost, pb.minimizers, sw, le, lp);
    if (pi >= 0) {
      out.residual(r++) = pb.system.manifold_value(*pb.system.manifold_for(q, e), xe);
    }
  }
  return out;
}

/// Costate-only part of a coupled path.
DensePath costate_part(const DensePath& coupled, int n) {
  DensePath out;
  out.reserve(coupled.size());
  for (std::size_t k = 0; k < coupled.size(); ++k) {
    out.push_back(coupled.times()[k], coupled.values()[k].tail(n), coupled.derivatives()[k].tail(n));
  }
  return out;
}

DynVec initial_unknowns(const HmpProblem& pb, const Layout& lay, const HmpGuess& guess,
                        const IntegratorConfig& cfg) {
  const int L = lay.switches;
  std::vector<double> times = guess.switch_times;
  if (times.empty() && L > 0) {
    for (int j = 1; j <= L; ++j) times.push_back(pb.t0 + (pb.tf - pb.t0) * j / (L + 1));
  }
  if (static_cast<int>(times.size()) != L) {
    throw Error(ErrorKind::config, "switch-time guess does not match the event sequence");
  }
  HybridInput input;
  for (int j = 0; j < L; ++j) input.schedule.push_back({times[static_cast<std::size_t>(j)], pb.sequence[static_cast<std::size_t>(j)]});
  input.control = [&pb](const ControlContext& ctx, const Vec&) {
    return pb.system.location(ctx.location).control_box.center();
  };
  IntegratorConfig fwd = cfg;
  fwd.detect_crossings = false;
  const HybridTrajectory traj = simulate(pb.system, pb.q0, pb.x0, pb.t0, pb.tf, input, fwd);

  DynVec z = DynVec::Zero(lay.size);
  Vec lam_end = pb.cost.terminal_gradient(traj.final_state());
  for (int i = L; i >= 0; --i) {
    const auto iu = static_cast<std::size_t>(i);
    const DensePath lam =
        adjoint_backward(pb.system, pb.cost, traj.segments[iu], i, input.control, lam_end, cfg);
    z.segment(lay.lam_off[iu], lay.dims[iu]) = lam.front_value();
    if (i == 0) break;
    z.segment(lay.x_off[iu], lay.dims[iu]) = traj.segments[iu].state.front_value();
    z(lay.t_off + i - 1) = times[iu - 1];
    double p = 0.0;
    if (lay.p_index[iu - 1] >= 0) {
      const auto k = static_cast<std::size_t>(lay.p_index[iu - 1]);
      p = k < guess.multipliers.size() ? guess.multipliers[k] : 0.0;
      z(lay.p_off + lay.p_index[iu - 1]) = p;
    }
    lam_end = adjoint_switch_condition(pb.system, pb.cost, traj.switches[iu - 1],
                                       lam.front_value(), p);
  }
  return z;
}

}  // namespace

namespace {

/// Re-simulates the extremal's control with crossing detection. Returns the
/// re-simulated trajectory when it visits the same locations.
std::optional<HybridTrajectory> resimulate(const HmpProblem& problem, const Extremal& ex,
                                           const IntegratorConfig& cfg) {
  HybridInput check;
  check.control = ex.input.control;
  for (const auto& s : ex.input.schedule) {
    if (problem.system.event(s.event).kind == SwitchKind::controlled) check.schedule.push_back(s);
  }
  try {
    HybridTrajectory re =
        simulate(problem.system, problem.q0, problem.x0, problem.t0, problem.tf, check, cfg);
    if (re.discrete_path() != ex.trajectory.discrete_path()) return std::nullopt;
    return re;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Extremal solve_once(const HmpProblem& problem, const HmpGuess& guess, const HmpOptions& options) {
  if (problem.x0.size() != problem.system.state_dim(problem.q0)) {
    throw Error(ErrorKind::dimension_mismatch, "initial state dimension");
  }
  const Layout lay = make_layout(problem);
  const IntegratorConfig& cfg = options.integrator;

  DynVec z0 = initial_unknowns(problem, lay, guess, cfg);
  const double gap = std::max(1e-9, 1e-9 * (problem.tf - problem.t0));
  Projection project = [&](const DynVec& z) {
    DynVec out = z;
    for (int j = 0; j < lay.switches; ++j) {
      out(lay.t_off + j) = std::clamp(out(lay.t_off + j), problem.t0 + gap, problem.tf - gap);
    }
    return out;
  };
  ResidualFunction residual = [&](const DynVec& z) { return shoot(problem, lay, z, cfg).residual; };
  const NewtonResult nr = damped_newton(residual, z0, options.newton, project);
  if (!nr.converged) {
    std::ostringstream os;
    os << "shooting residual " << nr.residual_norm << " after " << nr.iterations << " iterations";
    throw Error(ErrorKind::newton_nonconvergence, os.str());
  }

  // Final pass: forward simulation under the minimizing control of the
  // shooting costate, then an independent backward costate sweep.
  auto pb = std::make_shared<const HmpProblem>(problem);
  const ShootingPass pass = shoot(problem, lay, nr.solution, cfg);
  auto shooting_costate = std::make_shared<std::vector<DensePath>>();
  for (std::size_t i = 0; i < pass.paths.size(); ++i) {
    shooting_costate->push_back(costate_part(pass.paths[i], lay.dims[i]));
  }
  const auto times = switch_times_of(lay, nr.solution);

  Extremal ex;
  for (int j = 0; j < lay.switches; ++j) {
    ex.input.schedule.push_back({times[static_cast<std::size_t>(j)], problem.sequence[static_cast<std::size_t>(j)]});
  }
  ex.input.control = [pb, shooting_costate](const ControlContext& ctx, const Vec& x) {
    const auto k = std::min(static_cast<std::size_t>(std::max(ctx.segment, 0)),
                            shooting_costate->size() - 1);
    return minimize_hamiltonian(pb->system, pb->cost, pb->minimizers, ctx.location, x,
                                (*shooting_costate)[k].at(ctx.t));
  };
  IntegratorConfig fwd = cfg;
  fwd.detect_crossings = false;
  ex.trajectory = simulate(problem.system, problem.q0, problem.x0, problem.t0, problem.tf,
                           ex.input, fwd);

  const int L = lay.switches;
  ex.adjoint.resize(static_cast<std::size_t>(L + 1));
  ex.multipliers.assign(static_cast<std::size_t>(L), 0.0);
  ex.lambda_minus.resize(static_cast<std::size_t>(L));
  ex.lambda_plus.resize(static_cast<std::size_t>(L));
  Vec lam_end = problem.cost.terminal_gradient(ex.trajectory.final_state());
  for (int i = L; i >= 0; --i) {
    const auto iu = static_cast<std::size_t>(i);
    ex.adjoint[iu] = adjoint_backward(problem.system, problem.cost, ex.trajectory.segments[iu], i,
                                      ex.input.control, lam_end, cfg);
    if (i == 0) break;
    const int pi = lay.p_index[iu - 1];
    const double p = pi >= 0 ? nr.solution(lay.p_off + pi) : 0.0;
    ex.multipliers[iu - 1] = p;
    ex.lambda_plus[iu - 1] = ex.adjoint[iu].front_value();
    lam_end = adjoint_switch_condition(problem.system, problem.cost, ex.trajectory.switches[iu - 1],
                                       ex.lambda_plus[iu - 1], p);
    ex.lambda_minus[iu - 1] = lam_end;
  }

  double res = 0.0;
  for (int j = 0; j < L; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const auto& sw = ex.trajectory.switches[ju];
    ex.hamiltonian_gaps.push_back(hamiltonian_gap(problem.system, problem.cost, problem.minimizers,
                                                  sw, ex.lambda_minus[ju], ex.lambda_plus[ju]));
    res = std::max(res, std::abs(ex.hamiltonian_gaps.back()));
    if (sw.kind == SwitchKind::autonomous) {
      res = std::max(res, std::abs(problem.system.manifold_value(
                              *problem.system.manifold_for(sw.from, sw.event), sw.pre_state)));
    }
  }
  for (std::size_t i = 0; i < ex.adjoint.size(); ++i) {
    const auto& path = ex.adjoint[i];
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double d = (path.values()[k] - (*shooting_costate)[i].at(path.times()[k]))
                           .cwiseAbs().maxCoeff();
      res = std::max(res, d);
    }
  }
  ex.residual_norm = res;
  ex.newton_iterations = nr.iterations;
  ex.cost = evaluate_cost_breakdown(ex.trajectory, problem.cost, ex.input);
  if (!(res <= options.tolerance)) {
    std::ostringstream os;
    os << "extremal residual " << res << " exceeds tolerance " << options.tolerance;
    throw Error(ErrorKind::newton_nonconvergence, os.str());
  }

  if (!problem.system.manifolds().empty()) {
    const auto re = resimulate(problem, ex, cfg);
    bool same = re.has_value();
    for (std::size_t j = 0; same && j < re->switches.size(); ++j) {
      same = std::abs(re->switches[j].time - ex.trajectory.switches[j].time) <=
             options.consistency_tol;
    }
    ex.semantics_consistent = same;
  }
  return ex;
}

}  // namespace

Extremal solve_hmp(const HmpProblem& problem, const HmpGuess& guess, const HmpOptions& options) {
  Extremal ex = solve_once(problem, guess, options);
  HmpGuess next = guess;
  for (int r = 0; r < options.semantic_restarts && !ex.semantics_consistent; ++r) {
    const auto re = resimulate(problem, ex, options.integrator);
    if (!re) break;
    next.switch_times = re->switch_times();
    next.multipliers.clear();
    for (std::size_t j = 0; j < ex.multipliers.size(); ++j) {
      if (re->switches[j].kind == SwitchKind::autonomous) next.multipliers.push_back(ex.multipliers[j]);
    }
    ex = solve_once(problem, next, options);
  }
  return ex;
}

}  // namespace hybridoc
