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
#include "hybridoc/cli.hpp"

#include "CLI11.hpp"
#include "hybridoc/equivalence.hpp"
#include "hybridoc/io.hpp"
#include "hybridoc/oracle.hpp"
#include "hybridoc/problem_config.hpp"
#include "hybridoc/riccati.hpp"
#include "hybridoc/sensitivity.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

namespace hybridoc {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) { return format_double(v); }

std::string fmt(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v(i));
  return s + ")";
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// Collects emitted files and writes them together with the manifest.
class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, const std::string& source_text) : cfg_(cfg) {
    manifest_.subcommand = cfg.subcommand;
    manifest_.problem = cfg.problem;
    std::ostringstream canon;
    canon << cfg.subcommand << '\n' << cfg.problem << '\n' << source_text << '\n';
    canon << "tol=" << (cfg.tol ? fmt(*cfg.tol) : "default") << '\n';
    canon << "grid=" << (cfg.grid ? fmt(cfg.grid->first) + "," + fmt(cfg.grid->second) : "default") << '\n';
    canon << "box=";
    for (double b : cfg.box) canon << fmt(b) << ',';
    canon << "\nseed=" << cfg.seed << "\nu=" << (cfg.u ? fmt(*cfg.u) : "default") << "\nno_switch=" << cfg.no_switch
          << "\nenumerate=" << cfg.enumerate_sequences << "\nmax_switches=" << cfg.max_switches
          << "\noracle=" << cfg.pieces << ',' << cfg.levels << ',' << cfg.switch_grid << '\n';
    manifest_.config_hash = hex64(fnv1a(canon.str()));
    manifest_.settings["seed"] = std::to_string(cfg.seed);
  }

  void setting(const std::string& key, const std::string& value) { manifest_.settings[key] = value; }
  void add(const std::string& name, std::string contents) { manifest_.files.emplace_back(name, std::move(contents)); }

  void flush() {
    for (const auto& [name, contents] : manifest_.files) write_file(path(name), contents);
    write_file(path("manifest.json"), manifest_.json());
  }

 private:
  [[nodiscard]] std::string path(const std::string& name) const {
    return (std::filesystem::path(cfg_.out_dir) / name).string();
  }
  const RunConfig& cfg_;
  Manifest manifest_;
};

std::string source_text(const std::string& problem) {
  if (problem.ends_with(".json")) return read_file(problem);
  return problem;
}

void record_preset(Artifacts& a, const Preset& p) {
  a.setting("t0", fmt(p.problem.t0));
  a.setting("tf", fmt(p.problem.tf));
  a.setting("x0", fmt(p.problem.x0));
  a.setting("location0", p.problem.system.location(p.problem.q0).name);
}

HybridInput scheduled_input(const Preset& p, const Vec& u, bool with_switches) {
  HybridInput in;
  in.control = HybridInput::Constant(u);
  if (!with_switches) return in;
  for (std::size_t i = 0; i < p.problem.sequence.size(); ++i) {
    const Event e = p.problem.sequence[i];
    if (p.problem.system.event(e).kind == SwitchKind::controlled && i < p.guess.switch_times.size()) {
      in.schedule.push_back({p.guess.switch_times[i], e});
    }
  }
  return in;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Preset p = resolve_problem(cfg.problem);
  const auto& pb = p.problem;
  const int m = pb.system.control_dim(pb.q0);
  const Vec u = Vec::Constant(m, cfg.u.value_or(0.0));
  const HybridInput in = scheduled_input(p, u, !cfg.no_switch);
  IntegratorConfig ic;
  if (cfg.tol) ic.crossing_tol = *cfg.tol;
  const HybridTrajectory traj = simulate(pb.system, pb.q0, pb.x0, pb.t0, pb.tf, in, ic);
  const CostBreakdown cost = evaluate_cost_breakdown(traj, pb.cost, in);

  out << "cost " << fmt(cost.total()) << "\n";
  for (const auto& sw : traj.switches) {
    out << "switch " << ToString(sw.kind) << ' ' << pb.system.event(sw.event).name << " t=" << fmt(sw.time)
        << " pre=" << fmt(sw.pre_state) << " post=" << fmt(sw.post_state) << "\n";
  }
  out << "final " << fmt(traj.final_state()) << "\n";

  Artifacts a(cfg, source_text(cfg.problem));
  record_preset(a, p);
  a.setting("u", fmt(u(0)));
  a.setting("step", fmt(ic.step));
  a.setting("crossing_tol", fmt(ic.crossing_tol));
  a.add("trajectory.csv", trajectory_csv(traj));
  a.add("switches.csv", switches_csv(pb.system, traj));
  ojson s;
  s["cost"] = {{"running", cost.running}, {"switching", cost.switching}, {"terminal", cost.terminal},
               {"total", cost.total()}};
  s["switch_times"] = traj.switch_times();
  s["final_state"] = to_std(traj.final_state());
  a.add("summary.json", s.dump(2) + "\n");
  a.add("plot.gp", gnuplot_script({"trajectory.csv"}, pb.system.state_dim(pb.q0)));
  a.flush();
  return kExitOk;
}

/// Event paths from q0 through the automaton with at most `max_len` switches.
std::vector<std::vector<Event>> event_paths(const HybridSystem& sys, Location q0, int max_len) {
  std::vector<std::vector<Event>> paths;
  std::vector<Event> cur;
  auto walk = [&](auto&& self, Location q) -> void {
    paths.push_back(cur);
    if (static_cast<int>(cur.size()) == max_len) return;
    for (const Transition& t : sys.transitions()) {
      if (t.from != q || t.event == kIdentityEvent) continue;
      cur.push_back(t.event);
      self(self, t.to);
      cur.pop_back();
      if (paths.size() > 8) return;
    }
  };
  walk(walk, q0);
  return paths;
}

ojson extremal_summary(const HybridSystem& sys, const Extremal& ex) {
  ojson s;
  s["cost"] = ex.cost.total();
  s["residual_norm"] = ex.residual_norm;
  s["newton_iterations"] = ex.newton_iterations;
  s["semantics_consistent"] = ex.semantics_consistent;
  ojson sw = ojson::array();
  for (std::size_t i = 0; i < ex.trajectory.switches.size(); ++i) {
    const auto& r = ex.trajectory.switches[i];
    sw.push_back({{"time", r.time},
                  {"event", sys.event(r.event).name},
                  {"kind", ToString(r.kind)},
                  {"p", ex.multipliers[i]},
                  {"hamiltonian_gap", ex.hamiltonian_gaps[i]},
                  {"lambda_minus", to_std(ex.lambda_minus[i])},
                  {"lambda_plus", to_std(ex.lambda_plus[i])}});
  }
  s["switches"] = sw;
  s["lambda0"] = to_std(ex.lambda_at(ex.trajectory.start_time()));
  return s;
}

void print_extremal(std::ostream& out, const HybridSystem& sys, const Extremal& ex) {
  out << "cost " << fmt(ex.cost.total()) << "\n";
  out << "residual " << fmt(ex.residual_norm) << " iterations " << ex.newton_iterations << "\n";
  for (std::size_t i = 0; i < ex.trajectory.switches.size(); ++i) {
    const auto& r = ex.trajectory.switches[i];
    out << "switch " << ToString(r.kind) << ' ' << sys.event(r.event).name << " t=" << fmt(r.time)
        << " p=" << fmt(ex.multipliers[i]) << " gap=" << fmt(ex.hamiltonian_gaps[i]) << "\n";
  }
}

HmpOptions hmp_options(const RunConfig& cfg) {
  HmpOptions o;
  if (cfg.tol) o.tolerance = *cfg.tol;
  return o;
}

int cmd_hmp(const RunConfig& cfg, std::ostream& out) {
  Preset p = resolve_problem(cfg.problem);
  const HmpOptions opt = hmp_options(cfg);
  Artifacts a(cfg, source_text(cfg.problem));
  record_preset(a, p);
  a.setting("tolerance", fmt(opt.tolerance));

  if (cfg.enumerate_sequences) {
    const int max_len = cfg.max_switches >= 0 ? cfg.max_switches : static_cast<int>(p.problem.sequence.size());
    const auto paths = event_paths(p.problem.system, p.problem.q0, max_len);
    if (paths.size() > 8) throw Error(ErrorKind::config, "more than 8 event sequences; lower --max-switches");
    std::optional<Extremal> best;
    std::vector<Event> best_seq;
    ojson table = ojson::array();
    for (const auto& seq : paths) {
      HmpProblem pb = p.problem;
      pb.sequence = seq;
      HmpGuess g;
      for (std::size_t i = 1; i <= seq.size(); ++i) g.switch_times.push_back(pb.t0 + (pb.tf - pb.t0) * i / (seq.size() + 1));
      if (seq == p.problem.sequence) g = p.guess;
      std::string names;
      for (const Event e : seq) names += (names.empty() ? "" : ">") + pb.system.event(e).name;
      if (names.empty()) names = "(none)";
      try {
        Extremal ex = solve_hmp(pb, g, opt);
        out << "sequence " << names << " cost " << fmt(ex.cost.total()) << "\n";
        table.push_back({{"sequence", names}, {"cost", ex.cost.total()}});
        if (!best || ex.cost.total() < best->cost.total()) {
          best = std::move(ex);
          best_seq = seq;
        }
      } catch (const Error& e) {
        out << "sequence " << names << " failed: " << e.what() << "\n";
        table.push_back({{"sequence", names}, {"error", e.what()}});
      }
    }
    if (!best) throw Error(ErrorKind::newton_nonconvergence, "no event sequence converged");
    p.problem.sequence = best_seq;
    a.add("sequences.json", table.dump(2) + "\n");
    print_extremal(out, p.problem.system, *best);
    a.add("extremal.csv", extremal_csv(p.problem, *best));
    a.add("switches.csv", switches_csv(p.problem.system, best->trajectory));
    a.add("summary.json", extremal_summary(p.problem.system, *best).dump(2) + "\n");
  } else {
    const Extremal ex = solve_hmp(p.problem, p.guess, opt);
    print_extremal(out, p.problem.system, ex);
    a.add("extremal.csv", extremal_csv(p.problem, ex));
    a.add("switches.csv", switches_csv(p.problem.system, ex.trajectory));
    a.add("summary.json", extremal_summary(p.problem.system, ex).dump(2) + "\n");
  }
  a.add("plot.gp", gnuplot_script({"extremal.csv"}, p.problem.system.state_dim(p.problem.q0)));
  a.flush();
  return kExitOk;
}

HdpGridSpec grid_spec(const RunConfig& cfg, const Preset& p) {
  HdpGridSpec spec;
  spec.boxes = p.value_boxes;
  spec.dx = cfg.grid ? cfg.grid->first : p.grid_dx;
  spec.dt = cfg.grid ? cfg.grid->second : p.grid_dt;
  if (!cfg.box.empty()) {
    if (cfg.box.size() % 2 != 0) throw Error(ErrorKind::config, "--box takes lo,hi pairs");
    const int d = static_cast<int>(cfg.box.size() / 2);
    Vec lo(d);
    Vec hi(d);
    for (int i = 0; i < d; ++i) {
      lo(i) = cfg.box[static_cast<std::size_t>(2 * i)];
      hi(i) = cfg.box[static_cast<std::size_t>(2 * i + 1)];
    }
    for (auto& b : spec.boxes) {
      if (b.dim() != d) throw Error(ErrorKind::config, "--box dimension does not match every location");
      b = Box(lo, hi);
    }
  }
  return spec;
}

int cmd_hdp(const RunConfig& cfg, std::ostream& out) {
  const Preset p = resolve_problem(cfg.problem);
  const HdpGridSpec spec = grid_spec(cfg, p);
  const ValueStack stack = solve_hjb(p.problem, spec);
  const double v0 = stack.stages.front().interpolate(0, p.problem.x0);
  out << "V0 " << fmt(v0) << "\n";
  Artifacts a(cfg, source_text(cfg.problem));
  record_preset(a, p);
  a.setting("dx", fmt(spec.dx));
  a.setting("dt", fmt(spec.dt));
  a.setting("control_levels", std::to_string(spec.control_levels));
  for (std::size_t j = 0; j < stack.stages.size(); ++j) {
    const ValueGrid& g = stack.stages[j];
    const int stride = std::max(1, (g.slices - 1) / 100);
    out << "stage " << j << " location " << p.problem.system.location(g.location).name << " nodes " << g.node_count()
        << " slices " << g.slices << " clamped_feet " << g.clamped_feet << "\n";
    a.add("value_" + std::to_string(j) + ".csv", value_grid_csv(g, stride));
    a.add("value_" + std::to_string(j) + ".bin", value_grid_binary(g));
  }
  ojson s;
  s["V0"] = v0;
  s["stages"] = stack.stages.size();
  a.add("summary.json", s.dump(2) + "\n");
  a.flush();
  return kExitOk;
}

int cmd_riccati(const RunConfig& cfg, std::ostream& out) {
  LqProblem pb;
  if (cfg.problem == "lq") pb = cfg.no_switch ? lq_scalar() : lq_oscillator();
  else if (cfg.problem == "lqr") pb = lq_scalar();
  else throw Error(ErrorKind::config, "riccati runs on the LQ presets 'lq' and 'lqr'");
  TrackingOptions opt;
  if (cfg.tol) opt.tolerance = *cfg.tol;
  RiccatiSolution sol;
  int roots = 1;
  if (pb.events.empty()) {
    sol = synthesize(pb, {}, {}, opt.riccati);
  } else {
    TrackingRoots r = solve_tracking_multistart(pb, 5, opt);
    if (r.roots.empty()) throw Error(ErrorKind::newton_nonconvergence, "no tracking root found");
    roots = static_cast<int>(r.roots.size());
    for (const auto& root : r.roots) {
      out << "root";
      for (double t : root.switch_times()) out << " t=" << fmt(t);
      out << " cost " << fmt(root.cost) << (root.semantics_consistent ? "" : " (inconsistent)") << "\n";
    }
    sol = std::move(r.roots.front());
  }
  const auto& st0 = sol.stages.front();
  out << "K0 " << fmt(st0.K(pb.t0)(0, 0)) << "\n";
  out << "s0 " << fmt(st0.s(pb.t0)) << "\n";
  out << "cost " << fmt(sol.cost) << "\n";
  for (const auto& w : sol.warnings) out << "warning " << w << "\n";

  Artifacts a(cfg, source_text(cfg.problem));
  a.setting("step", fmt(opt.riccati.step));
  a.setting("tolerance", fmt(opt.tolerance));
  a.add("riccati.csv", riccati_csv(sol));
  a.add("trajectory.csv", trajectory_csv(sol.trajectory));
  ojson s;
  s["cost"] = sol.cost;
  s["switch_times"] = sol.switch_times();
  s["roots"] = roots;
  s["K0"] = st0.K(pb.t0)(0, 0);
  s["max_gain_norm"] = sol.max_gain_norm();
  s["hamiltonian_gaps"] = sol.hamiltonian_gaps;
  a.add("summary.json", s.dump(2) + "\n");
  a.flush();
  return kExitOk;
}

/// ‖∇J(t0) − FD‖ / ‖FD‖ for a seeded random affine feedback.
double sensitivity_check(const HmpProblem& pb, const Extremal& ex, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  const double a = coef(rng);
  const double b = coef(rng);
  HybridInput in;
  for (const auto& s : ex.input.schedule) {
    if (pb.system.event(s.event).kind == SwitchKind::controlled) in.schedule.push_back(s);
  }
  const HybridSystem* sys = &pb.system;
  in.control = [sys, a, b](const ControlContext& ctx, const Vec& x) {
    const Box& box = sys->location(ctx.location).control_box;
    return box.project(Vec::Constant(box.dim(), a + b * x(0)));
  };
  IntegratorConfig ic;
  const auto s = propagate_sensitivity(pb.system, pb.cost, pb.q0, pb.x0, pb.t0, pb.tf, in, {ic, true});
  Vec fd(pb.x0.size());
  const double h = 1e-5;
  for (int i = 0; i < pb.x0.size(); ++i) {
    Vec xp = pb.x0;
    Vec xm = pb.x0;
    xp(i) += h;
    xm(i) -= h;
    const double jp = evaluate_cost(simulate(pb.system, pb.q0, xp, pb.t0, pb.tf, in, ic), pb.cost, in);
    const double jm = evaluate_cost(simulate(pb.system, pb.q0, xm, pb.t0, pb.tf, in, ic), pb.cost, in);
    fd(i) = (jp - jm) / (2 * h);
  }
  return (s.initial_gradient() - fd).norm() / std::max(fd.norm(), 1e-12);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Preset p = resolve_problem(cfg.problem);
  const auto& pb = p.problem;
  const Extremal ex = solve_hmp(pb, p.guess, hmp_options(cfg));
  const HdpGridSpec spec = grid_spec(cfg, p);
  const ValueStack stack = solve_hjb(pb, spec);
  const EquivalenceReport rep = compare(pb, ex, stack);
  const double sens = sensitivity_check(pb, ex, cfg.seed);

  const bool eq_ok = rep.max_relative() <= 2e-2 && rep.sample_count() > 0;
  const bool gap_ok = ex.max_hamiltonian_gap() <= 1e-6;
  const bool sens_ok = sens <= 1e-3;
  out << "cost " << fmt(ex.cost.total()) << " V0 " << fmt(stack.stages.front().interpolate(0, pb.x0)) << "\n";
  out << "max_relative_error " << fmt(rep.max_relative()) << " median " << fmt(rep.median_relative()) << " samples "
      << rep.sample_count() << " coverage " << fmt(rep.coverage) << (eq_ok ? " ok" : " FAIL") << "\n";
  out << "max_hamiltonian_gap " << fmt(ex.max_hamiltonian_gap()) << (gap_ok ? " ok" : " FAIL") << "\n";
  for (const auto& sw : rep.switches) {
    out << "switch t=" << fmt(sw.time) << " mismatch " << (sw.available ? fmt(sw.mismatch) : "n/a") << "\n";
  }
  out << "sensitivity_relative_error " << fmt(sens) << (sens_ok ? " ok" : " FAIL") << "\n";

  Artifacts a(cfg, source_text(cfg.problem));
  record_preset(a, p);
  a.setting("dx", fmt(spec.dx));
  a.setting("dt", fmt(spec.dt));
  a.add("equivalence.csv", equivalence_csv(rep));
  a.add("extremal.csv", extremal_csv(pb, ex));
  ojson s;
  s["dx"] = rep.dx;
  s["dt"] = rep.dt;
  s["scale"] = rep.scale;
  s["coverage"] = rep.coverage;
  s["samples"] = rep.sample_count();
  s["max_error"] = rep.max_error();
  s["max_relative"] = rep.max_relative();
  s["median_relative"] = rep.median_relative();
  ojson sw = ojson::array();
  for (const auto& c : rep.switches) sw.push_back({{"time", c.time}, {"available", c.available}, {"mismatch", c.mismatch}});
  s["switches"] = sw;
  s["max_hamiltonian_gap"] = ex.max_hamiltonian_gap();
  s["sensitivity_relative_error"] = sens;
  s["passed"] = eq_ok && gap_ok && sens_ok;
  a.add("report.json", s.dump(2) + "\n");
  a.flush();
  return eq_ok && gap_ok && sens_ok ? kExitOk : kExitSolverFailure;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const Preset p = resolve_problem(cfg.problem);
  const auto& pb = p.problem;
  OracleSpec spec;
  OracleResult r;
  if (p.name == "example1") {
    if (cfg.pieces) spec.pieces = cfg.pieces;
    if (cfg.levels) spec.levels = cfg.levels;
    if (cfg.switch_grid) spec.switch_grid = cfg.switch_grid;
    r = example1_lattice_oracle(pb.x0(0), pb.t0, pb.tf, spec);
  } else if (p.name == "example2") {
    spec.pieces = cfg.pieces ? cfg.pieces : 8;
    spec.levels = cfg.levels ? cfg.levels : 7;
    spec.u_min = -1.5;
    spec.u_max = 1.5;
    // The terminal target is the only v_ref dependence.
    const double v_ref = std::sqrt(2.0 * pb.cost.terminal_value(Vec::Zero(2)));
    r = example2_closed_form_oracle(pb.x0, v_ref, pb.t0, pb.tf, spec);
  } else {
    spec.pieces = cfg.pieces ? cfg.pieces : 4;
    spec.levels = cfg.levels ? cfg.levels : 5;
    spec.switch_grid = cfg.switch_grid ? cfg.switch_grid : 20;
    r = enumerate_oracle(pb, spec);
  }
  const Extremal ex = solve_hmp(pb, p.guess, hmp_options(cfg));
  ProbeOptions po;
  po.seed = cfg.seed;
  const ProbeResult probe = local_optimality_probe(pb, ex, po);

  out << "oracle_min " << fmt(r.best.cost) << " candidates " << fmt(r.candidates) << " infeasible " << r.infeasible
      << "\n";
  out << "oracle_switch_times";
  for (double t : r.best.switch_times) out << ' ' << fmt(t);
  out << "\nextremal_cost " << fmt(ex.cost.total()) << "\n";
  out << "probe evaluated " << probe.evaluated << " rejected " << probe.rejected << " min_increase "
      << fmt(probe.min_increase) << "\n";

  Artifacts a(cfg, source_text(cfg.problem));
  record_preset(a, p);
  a.setting("pieces", std::to_string(spec.pieces));
  a.setting("levels", std::to_string(spec.levels));
  a.setting("u_range", fmt(spec.u_min) + "," + fmt(spec.u_max));
  a.setting("switch_grid", std::to_string(spec.switch_grid));
  ojson s;
  s["oracle_min"] = r.best.cost;
  s["oracle_switch_times"] = r.best.switch_times;
  s["oracle_controls"] = r.best.controls;
  s["candidates"] = r.candidates;
  s["infeasible"] = r.infeasible;
  s["extremal_cost"] = ex.cost.total();
  s["probe"] = {{"evaluated", probe.evaluated},
                {"rejected", probe.rejected},
                {"min_increase", probe.min_increase},
                {"max_increase", probe.max_increase}};
  a.add("oracle.json", s.dump(2) + "\n");
  a.flush();
  return kExitOk;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::transition_undefined:
    case ErrorKind::no_autonomous_transition:
    case ErrorKind::control_out_of_bounds:
    case ErrorKind::io:
      return kExitConfigError;
    default:
      return kExitSolverFailure;
  }
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.subcommand == "simulate") return cmd_simulate(cfg, out);
    if (cfg.subcommand == "hmp") return cmd_hmp(cfg, out);
    if (cfg.subcommand == "hdp") return cmd_hdp(cfg, out);
    if (cfg.subcommand == "riccati") return cmd_riccati(cfg, out);
    if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
    if (cfg.subcommand == "oracle") return cmd_oracle(cfg, out);
    err << "unknown subcommand '" << cfg.subcommand << "'\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of hybrid systems: simulation, minimum principle, dynamic programming"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string grid;
  std::string box;
  double tol = 0.0;
  double u = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", cfg.problem, "preset name or JSON problem file")->required();
    sub->add_option("--tol", tol, "solver tolerance");
    sub->add_option("--grid", grid, "value grid spacing dx,dt");
    sub->add_option("--box", box, "state box lo,hi[,lo,hi]");
    sub->add_option("--seed", cfg.seed, "seed for randomized checks");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--u", u, "constant control");
    sub->add_flag("--no-switch", cfg.no_switch, "drop switching");
  };
  for (const char* name : {"simulate", "hmp", "hdp", "riccati", "verify", "oracle"}) common(app.add_subcommand(name));
  CLI::App* hmp = app.get_subcommand("hmp");
  hmp->add_flag("--enumerate", cfg.enumerate_sequences, "solve every event sequence up to --max-switches (at most 8)");
  hmp->add_option("--max-switches", cfg.max_switches, "longest sequence to enumerate");
  CLI::App* oracle = app.get_subcommand("oracle");
  oracle->add_option("--pieces", cfg.pieces, "piecewise-constant control pieces");
  oracle->add_option("--levels", cfg.levels, "control levels per piece");
  oracle->add_option("--switch-grid", cfg.switch_grid, "candidate switch times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    cfg.subcommand = sub->get_name();
    if (sub->count("--tol")) cfg.tol = tol;
    if (sub->count("--u")) cfg.u = u;
  }
  auto numbers = [](const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
  };
  try {
    if (!grid.empty()) {
      const auto g = numbers(grid);
      if (g.size() != 2 || !(g[0] > 0) || !(g[1] > 0)) throw std::invalid_argument("grid");
      cfg.grid = std::make_pair(g[0], g[1]);
    }
    if (!box.empty()) {
      cfg.box = numbers(box);
      if (cfg.box.size() % 2 != 0) throw std::invalid_argument("box");
    }
  } catch (const std::exception&) {
    err << "error: --grid takes dx,dt and --box takes lo,hi pairs\n";
    return kExitConfigError;
  }
  return run(cfg, out, err);
}

}  // namespace hybridoc
