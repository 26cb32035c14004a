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
#include "hybridoc/riccati.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace hybridoc {

MatFn constant(const Mat& m) {
  return [m](double) { return m; };
}

VecFn constant(const Vec& v) {
  return [v](double) { return v; };
}

int LqHybridSystem::add_location(LqLocation loc) {
  locations.push_back(std::move(loc));
  return static_cast<int>(locations.size()) - 1;
}

int LqHybridSystem::add_event(LqEvent ev) {
  events.push_back(std::move(ev));
  return static_cast<int>(events.size()) - 1;
}

namespace {

constexpr double kEigenFloor = 1e-12;

void check_symmetric_psd(const Mat& m, const std::string& what, bool strict) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::dimension_mismatch, what + " is not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::config, what + " is not symmetric");
  }
  const double lo = Eigen::SelfAdjointEigenSolver<DynMat>(DynMat(m)).eigenvalues().minCoeff();
  if (strict ? lo < kEigenFloor : lo < -kEigenFloor) {
    throw Error(ErrorKind::config, what + (strict ? " is not positive definite" : " is not positive semidefinite"));
  }
}

/// R⁻¹Bᵀ by Cholesky.
Mat rinv_bt(const Mat& B, const Mat& R) {
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::config, "control weight R is not positive definite");
  return llt.solve(Mat(B.transpose()));
}

Vec pack(const Mat& K, const Vec& s, double w) {
  const int n = static_cast<int>(K.rows());
  Vec y(n * n + n + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) y(i * n + j) = K(i, j);
  }
  y.segment(n * n, n) = s;
  y(n * n + n) = w;
  return y;
}

Mat unpack_K(const Vec& y, int n) {
  Mat K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = y(i * n + j);
  }
  return K;
}

int packed_dim(int n) {
  const int d = n * n + n + 1;
  if (d > kMaxDim) throw Error(ErrorKind::config, "Riccati state dimension above 5 is not supported");
  return d;
}

}  // namespace

void LqCost::validate(const std::vector<double>& sample_times) const {
  for (std::size_t q = 0; q < running.size(); ++q) {
    for (double t : sample_times) {
      check_symmetric_psd(running[q].L(t), "L of location " + std::to_string(q), false);
      check_symmetric_psd(running[q].R(t), "R of location " + std::to_string(q), true);
    }
  }
  for (std::size_t e = 0; e < switching.size(); ++e) {
    check_symmetric_psd(switching[e].C, "C of event " + std::to_string(e), false);
  }
  check_symmetric_psd(G, "G", false);
}

Mat RiccatiStage::K(double t) const { return unpack_K(path.at(t), n); }
Vec RiccatiStage::s(double t) const { return path.at(t).segment(n * n, n); }
double RiccatiStage::w(double t) const { return path.at(t)(n * n + n); }

RiccatiStage riccati_backward(const LqLocation& loc, const LqLocationCost& cost, const Mat& K_end,
                              const Vec& s_end, double w_end, double t_begin, double t_end,
                              const RiccatiConfig& cfg) {
  const int n = static_cast<int>(K_end.rows());
  packed_dim(n);
  if (!(t_end > t_begin)) throw Error(ErrorKind::config, "empty Riccati span");
  auto rhs = [&](double t, const Vec& y) -> Vec {
    const Mat K = unpack_K(y, n);
    const Vec s = y.segment(n * n, n);
    const Mat A = loc.A(t);
    const Mat B = loc.B(t);
    const Mat L = cost.L(t);
    const Vec F = loc.F(t);
    const Vec r = cost.r(t);
    const Mat S = B * rinv_bt(B, cost.R(t));
    const Mat dK = -L - K * A - A.transpose() * K + K * S * K;
    const Vec ds = -(A.transpose() - K * S) * s - K * F + L * r;
    const double dw = -(0.5 * r.dot(L * r) + s.dot(F) - 0.5 * s.dot(S * s));
    return pack(dK, ds, dw);
  };
  auto symmetrize = [n](Vec& y) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double a = 0.5 * (y(i * n + j) + y(j * n + i));
        y(i * n + j) = a;
        y(j * n + i) = a;
      }
    }
  };

  const auto steps = std::max<long>(1, std::lround(std::ceil((t_end - t_begin) / cfg.step - 1e-9)));
  const double h = (t_end - t_begin) / static_cast<double>(steps);
  RiccatiStage st;
  st.n = n;
  st.path.reserve(static_cast<std::size_t>(steps) + 1);
  Vec y = pack(K_end, s_end, w_end);
  symmetrize(y);
  st.path.push_back(t_end, y, rhs(t_end, y));
  for (long k = steps; k > 0; --k) {
    const double t = t_begin + h * static_cast<double>(k);
    const double tn = k == 1 ? t_begin : t_begin + h * static_cast<double>(k - 1);
    y = rk4_step(rhs, t, y, tn - t);
    symmetrize(y);
    if (!y.allFinite()) {
      throw Error(ErrorKind::blow_up, "Riccati solution escaped at t = " + std::to_string(tn));
    }
    st.path.push_back(tn, y, rhs(tn, y));
  }
  st.path.reverse();
  return st;
}

JumpedRiccati switch_jump(const Mat& K_plus, const Vec& s_plus, double w_plus, const LqEvent& ev,
                          const LqEventCost& cost, double p) {
  const Mat& P = ev.P;
  JumpedRiccati out;
  out.K = P.transpose() * K_plus * P + cost.C;
  out.s = P.transpose() * s_plus - cost.C * cost.d + P.transpose() * K_plus * ev.J;
  if (p != 0.0) out.s += p * ev.m;
  out.w = w_plus + 0.5 * cost.d.dot(cost.C * cost.d) + s_plus.dot(ev.J) + 0.5 * ev.J.dot(K_plus * ev.J);
  return out;
}

Vec feedback(const Mat& K, const Vec& s, const Vec& x, const Mat& B, const Mat& R) {
  return -(rinv_bt(B, R) * (K * x + s));
}

double hamiltonian_min_value(const Vec& x, const Mat& K, const Vec& s, const Mat& A, const Mat& B,
                             const Mat& R, const Mat& L, const Vec& F, const Vec& r) {
  const Vec lam = K * x + s;
  const Vec e = x - r;
  return 0.5 * e.dot(L * e) + lam.dot(A * x - 0.5 * B * (rinv_bt(B, R) * lam) + F);
}

std::vector<double> RiccatiSolution::switch_times() const {
  std::vector<double> t;
  for (const auto& sw : switches) t.push_back(sw.time);
  return t;
}

std::size_t RiccatiSolution::stage_index(double t) const { return trajectory.segment_index(t); }

Vec RiccatiSolution::adjoint_at(double t) const {
  const std::size_t i = stage_index(t);
  const Vec x = trajectory.segments[i].state.at(t);
  return stages[i].K(t) * x + stages[i].s(t);
}

Vec RiccatiSolution::control_at(double t) const {
  const std::size_t i = stage_index(t);
  const auto& loc = problem.system.locations[static_cast<std::size_t>(stages[i].location)];
  const auto& c = problem.cost.running[static_cast<std::size_t>(stages[i].location)];
  const Vec x = trajectory.segments[i].state.at(t);
  return feedback(stages[i].K(t), stages[i].s(t), x, loc.B(t), c.R(t));
}

double RiccatiSolution::max_gain_norm() const {
  double m = 0.0;
  for (const auto& st : stages) {
    for (const Vec& y : st.path.values()) m = std::max(m, unpack_K(y, st.n).norm());
  }
  return m;
}

namespace {

void check_problem(const LqProblem& pb) {
  if (pb.locations.size() != pb.events.size() + 1) {
    throw Error(ErrorKind::config, "LQ sequence needs one more location than events");
  }
  for (int q : pb.locations) {
    if (q < 0 || q >= static_cast<int>(pb.system.locations.size()) ||
        q >= static_cast<int>(pb.cost.running.size())) {
      throw Error(ErrorKind::config, "LQ sequence names an unknown location");
    }
  }
  for (int e : pb.events) {
    if (e < 0 || e >= static_cast<int>(pb.system.events.size()) ||
        e >= static_cast<int>(pb.cost.switching.size())) {
      throw Error(ErrorKind::config, "LQ sequence names an unknown event");
    }
  }
  if (pb.x0.size() != pb.system.locations[static_cast<std::size_t>(pb.locations[0])].state_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "x0 does not match the initial location");
  }
}

double surface(const LqEvent& ev, const Vec& x) { return ev.m.dot(x) + ev.n; }

}  // namespace

RiccatiSolution synthesize(const LqProblem& pb, const std::vector<double>& times,
                           const std::vector<double>& p, const RiccatiConfig& cfg) {
  check_problem(pb);
  const std::size_t L = pb.events.size();
  if (times.size() != L || p.size() != L) {
    throw Error(ErrorKind::config, "need one switch time and one multiplier per event");
  }
  std::vector<double> bounds{pb.t0};
  bounds.insert(bounds.end(), times.begin(), times.end());
  bounds.push_back(pb.tf);
  for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
    if (!(bounds[j + 1] > bounds[j])) throw Error(ErrorKind::switch_order, "switch times must increase inside the horizon");
  }
  auto location = [&](std::size_t i) -> const LqLocation& {
    return pb.system.locations[static_cast<std::size_t>(pb.locations[i])];
  };
  auto running = [&](std::size_t i) -> const LqLocationCost& {
    return pb.cost.running[static_cast<std::size_t>(pb.locations[i])];
  };
  auto event = [&](std::size_t j) -> const LqEvent& { return pb.system.events[static_cast<std::size_t>(pb.events[j])]; };
  auto event_cost = [&](std::size_t j) -> const LqEventCost& {
    return pb.cost.switching[static_cast<std::size_t>(pb.events[j])];
  };

  RiccatiSolution sol;
  sol.problem = pb;
  sol.stages.resize(L + 1);
  sol.switches.resize(L);
  Mat K = pb.cost.G;
  Vec s = -(pb.cost.G * pb.cost.d);
  double w = 0.5 * pb.cost.d.dot(pb.cost.G * pb.cost.d);
  for (std::size_t i = L + 1; i-- > 0;) {
    sol.stages[i] = riccati_backward(location(i), running(i), K, s, w, bounds[i], bounds[i + 1], cfg);
    sol.stages[i].location = pb.locations[i];
    if (i == 0) break;
    const std::size_t j = i - 1;
    if (event(j).kind == SwitchKind::controlled && p[j] != 0.0) {
      throw Error(ErrorKind::config, "nonzero multiplier at a controlled switch");
    }
    const Mat Kp = sol.stages[i].K(bounds[i]);
    const Vec sp = sol.stages[i].s(bounds[i]);
    const JumpedRiccati jr = switch_jump(Kp, sp, sol.stages[i].w(bounds[i]), event(j), event_cost(j), p[j]);
    sol.switches[j].time = times[j];
    sol.switches[j].p = p[j];
    sol.switches[j].K_plus = Kp;
    sol.switches[j].s_plus = sp;
    sol.switches[j].K_minus = jr.K;
    sol.switches[j].s_minus = jr.s;
    K = jr.K;
    s = jr.s;
    w = jr.w;
  }

  // Closed loop forward, stage by stage.
  IntegratorConfig icfg;
  icfg.step = cfg.step;
  Vec x = pb.x0;
  sol.cost = 0.0;
  for (std::size_t i = 0; i <= L; ++i) {
    const LqLocation& loc = location(i);
    const LqLocationCost& c = running(i);
    const RiccatiStage& st = sol.stages[i];
    auto control = [&](double t, const Vec& y) { return feedback(st.K(t), st.s(t), y, loc.B(t), c.R(t)); };
    Rhs rhs = [&](double t, const Vec& y) -> Vec { return loc.A(t) * y + loc.B(t) * control(t, y) + loc.F(t); };
    TrajectorySegment seg;
    seg.location = Location{pb.locations[i]};
    seg.state = integrate_segment(rhs, x, bounds[i], bounds[i + 1], icfg);
    if (!seg.state.back_value().allFinite()) throw Error(ErrorKind::blow_up, "closed loop blew up");
    const auto& ts = seg.state.times();
    for (std::size_t k = 0; k < ts.size(); ++k) seg.control.push_back(control(ts[k], seg.state.values()[k]));
    auto running_value = [&](double t, const Vec& y) {
      const Vec u = control(t, y);
      const Vec e = y - c.r(t);
      return 0.5 * e.dot(c.L(t) * e) + 0.5 * u.dot(c.R(t) * u);
    };
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double a = ts[k];
      const double b = ts[k + 1];
      const double m = 0.5 * (a + b);
      sol.cost += (b - a) / 6.0 *
                  (running_value(a, seg.state.values()[k]) + 4.0 * running_value(m, seg.state.at(m)) +
                   running_value(b, seg.state.values()[k + 1]));
    }
    x = seg.state.back_value();
    if (i < L) {
      const LqEvent& ev = event(i);
      const LqEventCost& ec = event_cost(i);
      SwitchRecord rec;
      rec.time = bounds[i + 1];
      rec.kind = ev.kind;
      rec.event = Event{pb.events[i] + 1};
      rec.from = Location{pb.locations[i]};
      rec.to = Location{pb.locations[i + 1]};
      rec.pre_state = x;
      if (ev.kind == SwitchKind::autonomous) {
        // The surface must not be crossed earlier on this stage.
        const auto& vals = seg.state.values();
        const double sign = surface(ev, vals.front());
        for (std::size_t k = 1; k + 1 < vals.size(); ++k) {
          if (sign != 0.0 && surface(ev, vals[k]) * sign < 0.0) sol.semantics_consistent = false;
        }
      }
      const Vec e = x - ec.d;
      sol.cost += 0.5 * e.dot(ec.C * e);
      x = ev.P * x + ev.J;
      rec.post_state = x;
      sol.switches[i].x_minus = rec.pre_state;
      sol.switches[i].x_plus = x;
      sol.trajectory.switches.push_back(rec);
    }
    sol.trajectory.segments.push_back(std::move(seg));
  }
  const Vec e = x - pb.cost.d;
  sol.cost += 0.5 * e.dot(pb.cost.G * e);

  // Hamiltonian gaps with the jumped K, s on both sides.
  for (std::size_t j = 0; j < L; ++j) {
    const auto& sw = sol.switches[j];
    const double t = sw.time;
    const auto& a = location(j);
    const auto& b = location(j + 1);
    const auto& ca = running(j);
    const auto& cb = running(j + 1);
    const double hm = hamiltonian_min_value(sw.x_minus, sw.K_minus, sw.s_minus, a.A(t), a.B(t), ca.R(t), ca.L(t), a.F(t), ca.r(t));
    const double hp = hamiltonian_min_value(sw.x_plus, sw.K_plus, sw.s_plus, b.A(t), b.B(t), cb.R(t), cb.L(t), b.F(t), cb.r(t));
    sol.hamiltonian_gaps.push_back(hm - hp);
  }
  const double gain = sol.max_gain_norm();
  if (gain > cfg.warn_norm) {
    sol.warnings.push_back("Riccati gain norm " + std::to_string(gain) + " exceeds the conditioning threshold");
  }
  return sol;
}

namespace {

struct Unknowns {
  std::vector<int> p_index;  ///< per switch, position of p in z or -1
  int size = 0;
};

Unknowns layout(const LqProblem& pb) {
  Unknowns u;
  u.size = static_cast<int>(pb.events.size());
  for (int e : pb.events) {
    const bool autonomous = pb.system.events[static_cast<std::size_t>(e)].kind == SwitchKind::autonomous;
    u.p_index.push_back(autonomous ? u.size++ : -1);
  }
  return u;
}

void split(const Unknowns& lay, const DynVec& z, std::vector<double>& times, std::vector<double>& p) {
  const std::size_t L = lay.p_index.size();
  times.assign(L, 0.0);
  p.assign(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    times[j] = z(static_cast<Eigen::Index>(j));
    if (lay.p_index[j] >= 0) p[j] = z(lay.p_index[j]);
  }
}

DynVec residual_of(const LqProblem& pb, const RiccatiSolution& sol, const Unknowns& lay) {
  DynVec r(lay.size);
  int k = static_cast<int>(pb.events.size());
  for (std::size_t j = 0; j < pb.events.size(); ++j) {
    r(static_cast<Eigen::Index>(j)) = sol.hamiltonian_gaps[j];
    if (lay.p_index[j] >= 0) {
      r(k++) = surface(pb.system.events[static_cast<std::size_t>(pb.events[j])], sol.switches[j].x_minus);
    }
  }
  return r;
}

}  // namespace

RiccatiSolution solve_tracking(const LqProblem& pb, const std::vector<double>& guess,
                               const TrackingOptions& opt) {
  check_problem(pb);
  const Unknowns lay = layout(pb);
  if (guess.size() != pb.events.size()) throw Error(ErrorKind::config, "one guess time per switch");
  if (pb.events.empty()) {
    RiccatiSolution sol = synthesize(pb, {}, {}, opt.riccati);
    return sol;
  }
  DynVec z0 = DynVec::Zero(lay.size);
  for (std::size_t j = 0; j < guess.size(); ++j) z0(static_cast<Eigen::Index>(j)) = guess[j];
  const double gap = 1e-3 * (pb.tf - pb.t0);
  auto eval = [&](const DynVec& z) {
    std::vector<double> times;
    std::vector<double> p;
    split(lay, z, times, p);
    return residual_of(pb, synthesize(pb, times, p, opt.riccati), lay);
  };
  auto project = [&](const DynVec& z) {
    DynVec y = z;
    double lo = pb.t0 + gap;
    for (std::size_t j = 0; j < pb.events.size(); ++j) {
      auto jj = static_cast<Eigen::Index>(j);
      y(jj) = std::clamp(y(jj), lo, pb.tf - gap);
      lo = y(jj) + gap;
    }
    return y;
  };
  const NewtonResult nr = damped_newton(eval, project(z0), opt.newton, project);
  std::vector<double> times;
  std::vector<double> p;
  split(lay, nr.solution, times, p);
  RiccatiSolution sol = synthesize(pb, times, p, opt.riccati);
  sol.residual_norm = residual_of(pb, sol, lay).cwiseAbs().maxCoeff();
  if (!(sol.residual_norm <= opt.tolerance)) {
    throw Error(ErrorKind::newton_nonconvergence,
                "tracking switch conditions not met, residual " + std::to_string(sol.residual_norm));
  }
  return sol;
}

TrackingRoots solve_tracking_multistart(const LqProblem& pb, int starts, const TrackingOptions& opt) {
  TrackingRoots out;
  const std::size_t L = pb.events.size();
  for (int k = 1; k <= starts; ++k) {
    const double frac = static_cast<double>(k) / (starts + 1);
    std::vector<double> guess;
    for (std::size_t j = 0; j < L; ++j) {
      guess.push_back(pb.t0 + (pb.tf - pb.t0) * (static_cast<double>(j) + frac) / static_cast<double>(L));
    }
    ++out.attempts;
    try {
      RiccatiSolution sol = solve_tracking(pb, guess, opt);
      const bool seen = std::any_of(out.roots.begin(), out.roots.end(), [&](const RiccatiSolution& r) {
        for (std::size_t j = 0; j < L; ++j) {
          if (std::abs(r.switches[j].time - sol.switches[j].time) > 1e-6) return false;
        }
        return true;
      });
      if (!seen) out.roots.push_back(std::move(sol));
    } catch (const Error&) {
      ++out.failures;
    }
    if (L == 0) break;
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const RiccatiSolution& a, const RiccatiSolution& b) { return a.cost < b.cost; });
  return out;
}

HmpProblem to_hmp_problem(const LqProblem& pb, double control_bound) {
  check_problem(pb);
  const double mid = 0.5 * (pb.t0 + pb.tf);
  auto same = [&](auto&& fn) {
    const auto a = fn(pb.t0);
    return (fn(mid) - a).cwiseAbs().maxCoeff() == 0.0 && (fn(pb.tf) - a).cwiseAbs().maxCoeff() == 0.0;
  };
  HmpProblem hp;
  for (std::size_t q = 0; q < pb.system.locations.size(); ++q) {
    const LqLocation& loc = pb.system.locations[q];
    const LqLocationCost& c = pb.cost.running[q];
    if (!same(loc.A) || !same(loc.B) || !same(loc.F) || !same(c.L) || !same(c.R) || !same(c.r)) {
      throw Error(ErrorKind::config, "only time-invariant LQ data maps onto a hybrid system");
    }
    const Mat A = loc.A(pb.t0);
    const Mat B = loc.B(pb.t0);
    const Vec F = loc.F(pb.t0);
    const Mat Lw = c.L(pb.t0);
    const Mat R = c.R(pb.t0);
    const Vec r = c.r(pb.t0);
    const Location id = hp.system.add_location(
        {loc.name, static_cast<int>(A.rows()), Box::Uniform(static_cast<int>(B.cols()), -control_bound, control_bound),
         [A, B, F](const Vec& x, const Vec& u) { return Vec(A * x + B * u + F); },
         [A](const Vec&, const Vec&) { return A; }});
    hp.cost.running[id.id] = {
        [Lw, R, r](const Vec& x, const Vec& u) {
          const Vec e = x - r;
          return 0.5 * e.dot(Lw * e) + 0.5 * u.dot(R * u);
        },
        [Lw, r](const Vec& x, const Vec&) { return Vec(Lw * (x - r)); }};
    const Mat gain = rinv_bt(B, R);
    hp.minimizers[id.id] = [gain](const Vec&, const Vec& lam) { return Vec(-(gain * lam)); };
  }
  for (std::size_t e = 0; e < pb.system.events.size(); ++e) {
    const LqEvent& ev = pb.system.events[e];
    const LqEventCost& c = pb.cost.switching[e];
    const Mat P = ev.P;
    const Vec J = ev.J;
    const Event id = hp.system.add_event({ev.name, ev.kind, [P, J](const Vec& x) { return Vec(P * x + J); },
                                          [P](const Vec&) { return P; }});
    const Mat C = c.C;
    const Vec d = c.d;
    hp.cost.switching[id.id] = {[C, d](const Vec& x) {
                                  const Vec e = x - d;
                                  return 0.5 * e.dot(C * e);
                                },
                                [C, d](const Vec& x) { return Vec(C * (x - d)); }};
  }
  for (std::size_t j = 0; j < pb.events.size(); ++j) {
    const Location from{pb.locations[j]};
    const Location to{pb.locations[j + 1]};
    const Event ev{pb.events[j] + 1};
    bool known = false;
    try {
      known = hp.system.next_location(from, ev) == to;
    } catch (const Error&) {
    }
    if (known) continue;
    hp.system.add_transition(from, ev, to);
    const LqEvent& le = pb.system.events[static_cast<std::size_t>(pb.events[j])];
    if (le.kind == SwitchKind::autonomous) {
      const Vec m = le.m;
      const double n = le.n;
      hp.system.add_manifold({from, to, ev, [m, n](const Vec& x) { return m.dot(x) + n; },
                              [m](const Vec&) { return m; }});
    }
  }
  const Mat G = pb.cost.G;
  const Vec d = pb.cost.d;
  hp.cost.terminal = {[G, d](const Vec& x) {
                        const Vec e = x - d;
                        return 0.5 * e.dot(G * e);
                      },
                      [G, d](const Vec& x) { return Vec(G * (x - d)); }};
  hp.q0 = Location{pb.locations[0]};
  hp.x0 = pb.x0;
  hp.t0 = pb.t0;
  hp.tf = pb.tf;
  for (int e : pb.events) hp.sequence.push_back(Event{e + 1});
  return hp;
}

namespace {

Mat mat(int r, int c, std::initializer_list<double> v) {
  Mat m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  }
  return m;
}

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

}  // namespace

LqProblem lq_scalar(double tf, double reference) {
  LqProblem pb;
  pb.system.add_location({"q", constant(mat(1, 1, {0.0})), constant(mat(1, 1, {1.0})), constant(vec({0.0}))});
  pb.cost.running.push_back({constant(mat(1, 1, {1.0})), constant(mat(1, 1, {1.0})), constant(vec({reference}))});
  pb.cost.G = mat(1, 1, {0.0});
  pb.cost.d = vec({0.0});
  pb.locations = {0};
  pb.x0 = vec({1.0});
  pb.tf = tf;
  return pb;
}

LqProblem lq_oscillator(double v_ref, double tf) {
  LqProblem pb;
  const VecFn zero = constant(vec({0.0, 0.0}));
  pb.system.add_location({"q1", constant(mat(2, 2, {0, 1, -1, 0})), constant(mat(2, 1, {0, 1})), zero});
  pb.system.add_location({"q2", constant(mat(2, 2, {0, 1, 0, 0})), constant(mat(2, 1, {0, 1})), zero});
  pb.system.add_event({"x2_zero", SwitchKind::autonomous, mat(2, 2, {1, 0, 0, 1}), vec({0, 0}), vec({0, 1}), 0.0});
  const LqLocationCost effort{constant(mat(2, 2, {0, 0, 0, 0})), constant(mat(1, 1, {1.0})), zero};
  pb.cost.running = {effort, effort};
  pb.cost.switching = {{mat(2, 2, {1, 0, 0, 0}), vec({0, 0})}};
  pb.cost.G = mat(2, 2, {0, 0, 0, 1});
  pb.cost.d = vec({0.0, v_ref});
  pb.locations = {0, 1};
  pb.events = {0};
  pb.x0 = vec({0.0, 1.0});
  pb.tf = tf;
  return pb;
}

}  // namespace hybridoc
