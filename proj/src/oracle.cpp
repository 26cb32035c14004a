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
#include "hybridoc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <random>

namespace hybridoc {

namespace {

constexpr double kNone = std::numeric_limits<double>::infinity();

double level(const OracleSpec& s, int j) {
  return s.u_min + (s.u_max - s.u_min) * j / (s.levels - 1);
}

void check_spec(const OracleSpec& s) {
  if (s.pieces < 1 || s.levels < 2 || s.switch_grid < 1 || !(s.u_max > s.u_min)) {
    throw Error(ErrorKind::config, "oracle needs pieces >= 1, levels >= 2, a switch grid and u_max > u_min");
  }
}

/// Lexicographic (cost, index) minimum, so the winner does not depend on how
/// work was split across threads.
struct Best {
  double cost = kNone;
  std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
  void offer(double c, std::uint64_t i) {
    if (c < cost || (c == cost && i < index)) {
      cost = c;
      index = i;
    }
  }
};

/// Exact DP over log|x| for one switch time.
OracleCandidate example1_for_switch(double y0, double t0, double tf, double ts, const OracleSpec& s) {
  const int N = s.pieces;
  const int J = s.levels;
  const double h = (tf - t0) / N;
  const double du = (s.u_max - s.u_min) / (J - 1);
  const double delta = du * h;
  const int ps = std::min(N - 1, static_cast<int>(std::floor((ts - t0) / h)));
  const double a = ts - (t0 + ps * h);
  const int M = N * (J - 1) + 1;

  std::vector<double> cost(static_cast<std::size_t>(M), kNone);
  std::vector<double> next(static_cast<std::size_t>(M));
  std::vector<std::vector<std::int16_t>> choice(static_cast<std::size_t>(N),
                                                std::vector<std::int16_t>(static_cast<std::size_t>(M), -1));
  cost[0] = 0.0;
  double base = y0;
  for (int p = 0; p < N; ++p) {
    std::fill(next.begin(), next.end(), kNone);
    const int reach = p * (J - 1);
    double shift;
    if (p < ps) shift = (1.0 + s.u_min) * h;
    else if (p == ps) shift = s.u_min * h + 2.0 * a - h;
    else shift = (s.u_min - 1.0) * h;
    auto& ch = choice[static_cast<std::size_t>(p)];
    for (int m = 0; m <= reach; ++m) {
      const double c0 = cost[static_cast<std::size_t>(m)];
      if (c0 == kNone) continue;
      const double y = base + m * delta;
      for (int j = 0; j < J; ++j) {
        const double u = level(s, j);
        double c = c0 + 0.5 * u * u * h;
        if (p == ps) {
          const double x_mid = std::exp(y + (1.0 + u) * a);
          c += 1.0 / (1.0 + x_mid * x_mid);
        }
        const auto k = static_cast<std::size_t>(m + j);
        if (c < next[k]) {
          next[k] = c;
          ch[k] = static_cast<std::int16_t>(j);
        }
      }
    }
    std::swap(cost, next);
    base += shift;
  }
  OracleCandidate best;
  best.cost = kNone;
  int m_best = -1;
  for (int m = 0; m < M; ++m) {
    const double c = cost[static_cast<std::size_t>(m)];
    if (c == kNone) continue;
    const double x = std::exp(base + m * delta);
    const double total = c + 0.5 * x * x;
    if (total < best.cost) {
      best.cost = total;
      m_best = m;
    }
  }
  best.switch_times = {ts};
  best.controls.assign(static_cast<std::size_t>(N), 0.0);
  for (int p = N - 1, m = m_best; p >= 0; --p) {
    const int j = choice[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)];
    best.controls[static_cast<std::size_t>(p)] = level(s, j);
    m -= j;
  }
  return best;
}

}  // namespace

OracleResult example1_lattice_oracle(double x0, double t0, double tf, const OracleSpec& spec) {
  check_spec(spec);
  if (x0 == 0.0) throw Error(ErrorKind::config, "lattice oracle needs x0 != 0");
  if (spec.levels > std::numeric_limits<std::int16_t>::max()) throw Error(ErrorKind::config, "too many levels");
  const int S = spec.switch_grid;
  const double y0 = std::log(std::abs(x0));
  std::vector<OracleCandidate> per_switch(static_cast<std::size_t>(S));
  auto run = [&](int k) {
    const double ts = t0 + (tf - t0) * (k + 1) / (S + 1);
    per_switch[static_cast<std::size_t>(k)] = example1_for_switch(y0, t0, tf, ts, spec);
  };
  if (spec.parallel) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < S; ++k) {
      try {
        run(k);
      } catch (...) {
#pragma omp critical
        err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (int k = 0; k < S; ++k) run(k);
  }
  OracleResult out;
  out.candidates = S * std::pow(static_cast<double>(spec.levels), spec.pieces);
  Best best;
  for (int k = 0; k < S; ++k) best.offer(per_switch[static_cast<std::size_t>(k)].cost, static_cast<std::uint64_t>(k));
  out.best = per_switch[best.index];
  return out;
}

namespace {

/// Closed-form flow of one Example 2 candidate; returns +inf when it never
/// reaches the surface.
double example2_cost(const Vec& x0, double v_ref, double h, const std::vector<double>& u, double* switch_time,
                     double t0) {
  double x1 = x0(0);
  double x2 = x0(1);
  bool switched = false;
  double cost = 0.0;
  double t = t0;
  for (double uk : u) {
    double rest = h;
    if (!switched) {
      const double A = x2;
      const double B = -(x1 - uk);
      const double R = std::hypot(A, B);
      double tstar = kNone;
      if (R > 0.0 && x2 != 0.0) {
        const double psi = std::atan2(B, A);
        tstar = std::fmod(psi + std::numbers::pi / 2, std::numbers::pi);
        if (tstar < 0.0) tstar += std::numbers::pi;
      }
      const double tau = std::min(rest, tstar);
      const double z = x1 - uk;
      const double c = std::cos(tau);
      const double s = std::sin(tau);
      x1 = uk + z * c + x2 * s;
      x2 = tstar <= rest ? 0.0 : -z * s + x2 * c;
      cost += 0.5 * uk * uk * tau;
      if (tstar <= rest) {
        switched = true;
        cost += 0.5 * x1 * x1;
        if (switch_time) *switch_time = t + tau;
        rest -= tau;
      } else {
        rest = 0.0;
      }
    }
    if (switched && rest > 0.0) {
      x1 += x2 * rest + 0.5 * uk * rest * rest;
      x2 += uk * rest;
      cost += 0.5 * uk * uk * rest;
    }
    t += h;
  }
  if (!switched) return kNone;
  return cost + 0.5 * (x2 - v_ref) * (x2 - v_ref);
}

std::vector<double> decode(std::uint64_t idx, const OracleSpec& s) {
  std::vector<double> u(static_cast<std::size_t>(s.pieces));
  for (int p = s.pieces - 1; p >= 0; --p) {
    u[static_cast<std::size_t>(p)] = level(s, static_cast<int>(idx % static_cast<std::uint64_t>(s.levels)));
    idx /= static_cast<std::uint64_t>(s.levels);
  }
  return u;
}

std::uint64_t family_size(const OracleSpec& s, std::uint64_t cap) {
  std::uint64_t n = 1;
  for (int p = 0; p < s.pieces; ++p) {
    if (n > cap / static_cast<std::uint64_t>(s.levels)) {
      throw Error(ErrorKind::config, "oracle family too large for enumeration");
    }
    n *= static_cast<std::uint64_t>(s.levels);
  }
  return n;
}

}  // namespace

OracleResult example2_closed_form_oracle(const Vec& x0, double v_ref, double t0, double tf, const OracleSpec& spec) {
  check_spec(spec);
  if (x0.size() != 2) throw Error(ErrorKind::dimension_mismatch, "Example 2 oracle needs a 2-D state");
  const std::uint64_t n = family_size(spec, std::uint64_t{1} << 40);
  const double h = (tf - t0) / spec.pieces;
  Best best;
  std::uint64_t infeasible = 0;
  auto scan = [&](std::uint64_t lo, std::uint64_t hi, Best& local, std::uint64_t& bad) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double c = example2_cost(x0, v_ref, h, decode(i, spec), nullptr, t0);
      if (c == kNone) ++bad;
      else local.offer(c, i);
    }
  };
  if (spec.parallel) {
#pragma omp parallel
    {
      Best local;
      std::uint64_t bad = 0;
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        scan(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i) + 1, local, bad);
      }
#pragma omp critical
      {
        best.offer(local.cost, local.index);
        infeasible += bad;
      }
    }
  } else {
    scan(0, n, best, infeasible);
  }
  OracleResult out;
  out.candidates = static_cast<double>(n);
  out.infeasible = infeasible;
  if (best.cost == kNone) throw Error(ErrorKind::config, "no candidate reaches the switching surface");
  out.best.controls = decode(best.index, spec);
  double ts = 0.0;
  out.best.cost = example2_cost(x0, v_ref, h, out.best.controls, &ts, t0);
  out.best.switch_times = {ts};
  return out;
}

double evaluate_candidate(const HmpProblem& problem, const OracleSpec& spec, const OracleCandidate& c,
                          const IntegratorConfig& cfg) {
  const auto& sys = problem.system;
  const double h = (problem.tf - problem.t0) / spec.pieces;
  std::vector<ScheduledSwitch> schedule;
  {
    std::size_t k = 0;
    for (const Event& e : problem.sequence) {
      if (sys.event(e).kind == SwitchKind::controlled) {
        if (k >= c.switch_times.size()) throw Error(ErrorKind::config, "candidate lacks a switch time");
        schedule.push_back({c.switch_times[k++], e});
      }
    }
  }
  Location q = problem.q0;
  Vec x = problem.x0;
  std::vector<Event> realized;
  double total = 0.0;
  std::size_t next = 0;
  for (int p = 0; p < spec.pieces; ++p) {
    const double ta = problem.t0 + h * p;
    const double tb = p + 1 == spec.pieces ? problem.tf : problem.t0 + h * (p + 1);
    HybridInput in;
    while (next < schedule.size() && schedule[next].time <= tb && (schedule[next].time < tb || p + 1 == spec.pieces)) {
      in.schedule.push_back(schedule[next++]);
    }
    in.control = HybridInput::Constant(Vec::Constant(1, c.controls[static_cast<std::size_t>(p)]));
    const HybridTrajectory traj = simulate(sys, q, x, ta, tb, in, cfg);
    const CostBreakdown b = evaluate_cost_breakdown(traj, problem.cost, in);
    total += b.running + b.switching;
    for (const auto& sw : traj.switches) realized.push_back(sw.event);
    q = traj.segments.back().location;
    x = traj.final_state();
  }
  if (realized != problem.sequence) throw Error(ErrorKind::config, "candidate realizes a different switch sequence");
  return total + problem.cost.terminal_value(x);
}

OracleResult enumerate_oracle(const HmpProblem& problem, const OracleSpec& spec, const IntegratorConfig& cfg,
                              std::uint64_t max_candidates) {
  check_spec(spec);
  for (int q = 0; q < problem.system.location_count(); ++q) {
    if (problem.system.control_dim(Location{q}) != 1) {
      throw Error(ErrorKind::config, "enumeration oracle supports scalar controls only");
    }
  }
  int controlled = 0;
  for (const Event& e : problem.sequence) controlled += problem.system.event(e).kind == SwitchKind::controlled;
  // Increasing tuples of grid indices for the controlled switches.
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur;
  auto grow = [&](auto&& self, int from) -> void {
    if (static_cast<int>(cur.size()) == controlled) {
      tuples.push_back(cur);
      if (tuples.size() > max_candidates) throw Error(ErrorKind::config, "oracle family too large for enumeration");
      return;
    }
    for (int k = from; k < spec.switch_grid; ++k) {
      cur.push_back(k);
      self(self, k + 1);
      cur.pop_back();
    }
  };
  grow(grow, 0);
  const std::uint64_t per = family_size(spec, max_candidates);
  const std::uint64_t n = per * tuples.size();
  if (n > max_candidates) throw Error(ErrorKind::config, "oracle family too large for enumeration");

  auto candidate = [&](std::uint64_t i) {
    OracleCandidate c;
    c.controls = decode(i % per, spec);
    for (int k : tuples[i / per]) {
      c.switch_times.push_back(problem.t0 + (problem.tf - problem.t0) * (k + 1) / (spec.switch_grid + 1));
    }
    return c;
  };
  Best best;
  std::uint64_t infeasible = 0;
  auto one = [&](std::uint64_t i, Best& local, std::uint64_t& bad) {
    try {
      local.offer(evaluate_candidate(problem, spec, candidate(i), cfg), i);
    } catch (const Error&) {
      ++bad;
    }
  };
  if (spec.parallel) {
#pragma omp parallel
    {
      Best local;
      std::uint64_t bad = 0;
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) one(static_cast<std::uint64_t>(i), local, bad);
#pragma omp critical
      {
        best.offer(local.cost, local.index);
        infeasible += bad;
      }
    }
  } else {
    for (std::uint64_t i = 0; i < n; ++i) one(i, best, infeasible);
  }
  if (best.cost == kNone) throw Error(ErrorKind::config, "no candidate realizes the switch sequence");
  OracleResult out;
  out.candidates = static_cast<double>(n);
  out.infeasible = infeasible;
  out.best = candidate(best.index);
  out.best.cost = best.cost;
  return out;
}

ProbeResult local_optimality_probe(const HmpProblem& problem, const Extremal& extremal, const ProbeOptions& opt) {
  const auto& sys = problem.system;
  const double j_opt = extremal.cost.total();
  const double span = problem.tf - problem.t0;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProbeResult out;
  out.min_increase = kNone;
  out.max_increase = -kNone;
  for (int n = 0; n < opt.count; ++n) {
    HybridInput in;
    for (const ScheduledSwitch& s : extremal.input.schedule) {
      ScheduledSwitch moved = s;
      if (sys.event(s.event).kind == SwitchKind::controlled) {
        moved.time += opt.max_shift * (2.0 * unit(rng) - 1.0);
      }
      in.schedule.push_back(moved);
    }
    // Autonomous switches come from crossing detection, not the schedule.
    std::erase_if(in.schedule, [&](const ScheduledSwitch& s) { return sys.event(s.event).kind == SwitchKind::autonomous; });
    const double amp = opt.max_bump * (2.0 * unit(rng) - 1.0);
    const double width = span * (0.05 + 0.45 * unit(rng));
    const double start = problem.t0 + (span - width) * unit(rng);
    const ControlLaw base = extremal.input.control;
    in.control = [&sys, base, amp, width, start](const ControlContext& ctx, const Vec& x) {
      Vec u = base(ctx, x);
      if (ctx.t > start && ctx.t < start + width) {
        const double s = std::sin(std::numbers::pi * (ctx.t - start) / width);
        u.array() += amp * s * s;
      }
      return sys.location(ctx.location).control_box.project(u);
    };
    try {
      const HybridTrajectory traj = simulate(sys, problem.q0, problem.x0, problem.t0, problem.tf, in, opt.integrator);
      std::vector<Event> path;
      for (const auto& sw : traj.switches) path.push_back(sw.event);
      if (path != problem.sequence) {
        ++out.rejected;
        continue;
      }
      const double d = evaluate_cost(traj, problem.cost, in) - j_opt;
      out.min_increase = std::min(out.min_increase, d);
      out.max_increase = std::max(out.max_increase, d);
      ++out.evaluated;
    } catch (const Error&) {
      ++out.rejected;
    }
  }
  return out;
}

}  // namespace hybridoc
