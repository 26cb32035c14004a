#include "doctest.h"
#include "hybridoc/hdp_solver.hpp"
#include "hybridoc/presets.hpp"
#include "hybridoc/riccati.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace hybridoc;
using hybridoc::test::v1;
using hybridoc::test::v2;

namespace {

Mat m1(double a) { return Mat::Constant(1, 1, a); }

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

LqLocation scalar_location(double a, double b) { return {"q", constant(m1(a)), constant(m1(b)), constant(v1(0.0))}; }

LqLocationCost scalar_cost(double l, double r, double ref) { return {constant(m1(l)), constant(m1(r)), constant(v1(ref))}; }

}  // namespace

TEST_CASE("scalar Riccati equation reproduces tanh") {
  const double tf = 1.0;
  const RiccatiStage st = riccati_backward(scalar_location(0, 1), scalar_cost(1, 1, 0), m1(0), v1(0), 0.0, 0.0, tf);
  double worst = 0.0;
  for (std::size_t k = 0; k < st.path.size(); ++k) {
    const double t = st.path.times()[k];
    worst = std::max(worst, std::abs(st.K(t)(0, 0) - std::tanh(tf - t)));
  }
  CHECK(worst <= 1e-8);
  // Between knots the Hermite interpolant is still accurate.
  CHECK(std::abs(st.K(0.12345)(0, 0) - std::tanh(tf - 0.12345)) <= 1e-8);
}

TEST_CASE("zero data gives zero K and s") {
  const RiccatiStage st = riccati_backward(scalar_location(0.7, 1), scalar_cost(0, 2, 0), m1(0), v1(0), 0.0, 0.0, 2.0);
  for (const Vec& y : st.path.values()) CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tracking offset s agrees with a ten times finer integration") {
  RiccatiConfig coarse;
  RiccatiConfig fine;
  fine.step = 1e-4;
  const auto a = riccati_backward(scalar_location(0, 1), scalar_cost(1, 1, 1.0), m1(0), v1(0), 0, 0.0, 1.0, coarse);
  const auto b = riccati_backward(scalar_location(0, 1), scalar_cost(1, 1, 1.0), m1(0), v1(0), 0, 0.0, 1.0, fine);
  double worst = 0.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) worst = std::max(worst, std::abs(a.s(t)(0) - b.s(t)(0)));
  CHECK(worst <= 1e-8);
  CHECK(std::abs(a.s(0.0)(0)) > 0.1);
}

TEST_CASE("switch_jump arithmetic") {
  SUBCASE("identity jump") {
    const LqEvent ev{"id", SwitchKind::controlled, m2(1, 0, 0, 1), v2(0, 0), v2(0, 0), 0.0};
    const auto j = switch_jump(m2(2, 1, 1, 3), v2(0.5, -0.5), 0.1, ev, {m2(0, 0, 0, 0), v2(0, 0)}, 0.0);
    CHECK(j.K == m2(2, 1, 1, 3));
    CHECK(j.s == v2(0.5, -0.5));
    CHECK(j.w == 0.1);
  }
  SUBCASE("scalar sign flip") {
    const LqEvent ev{"flip", SwitchKind::controlled, m1(-1), v1(0), v1(0), 0.0};
    const auto j = switch_jump(m1(1.7), v1(0.4), 0.0, ev, {m1(0), v1(0)}, 0.0);
    CHECK(j.K(0, 0) == 1.7);
    CHECK(j.s(0) == -0.4);
  }
  SUBCASE("switch cost and surface multiplier") {
    const LqEvent ev{"hit", SwitchKind::autonomous, m2(1, 0, 0, 1), v2(0, 0), v2(0, 1), 0.0};
    const Mat Kp = m2(0.5, 0.2, 0.2, 0.8);
    const auto j = switch_jump(Kp, v2(0.1, 0.2), 0.0, ev, {m2(1, 0, 0, 0), v2(0, 0)}, 0.3);
    CHECK(j.K == Kp + m2(1, 0, 0, 0));
    CHECK((j.s - v2(0.1, 0.5)).norm() <= 1e-15);
  }
}

TEST_CASE("feedback and minimized Hamiltonian values") {
  CHECK(feedback(m1(2), v1(1), v1(3), m1(1), m1(1))(0) == -7.0);
  CHECK(feedback(m1(2), v1(0), v1(0), m1(1), m1(1))(0) == 0.0);
  CHECK_THROWS_AS((void)feedback(m1(2), v1(0), v1(1), m1(1), m1(-1)), Error);
  CHECK(hamiltonian_min_value(v1(0.3), m1(0), v1(0), m1(1), m1(1), m1(1), m1(1), v1(0), v1(0.3)) == 0.0);
  // Oracle: H = ½x² + ½u² + λu at λ = Kx = 2 and u = −λ gives ½ + 2 − 4.
  const double lam = 2.0;
  const double u = -lam;
  const double direct = 0.5 * 1.0 + 0.5 * u * u + lam * u;
  CHECK(hamiltonian_min_value(v1(1), m1(2), v1(0), m1(0), m1(1), m1(1), m1(1), v1(0), v1(0)) == doctest::Approx(direct));
  CHECK(direct == -1.5);
}

TEST_CASE("K stays symmetric and positive semidefinite on a time-varying 2-D problem") {
  LqLocation loc{"tv", [](double t) { return m2(0, 1, -1 - 0.5 * std::sin(t), -0.1); },
                 [](double t) { Mat b(2, 1); b << 0, 1 + 0.2 * t; return b; }, constant(v2(0.1, 0))};
  LqLocationCost c{[](double t) { return m2(1 + t, 0.3, 0.3, 0.5); }, constant(m1(0.5)),
                   [](double t) { return v2(std::cos(t), 0); }};
  LqCost cost;
  cost.running = {c};
  cost.G = m2(1, 0, 0, 0);
  cost.validate({0.0, 1.0, 2.0});
  const auto st = riccati_backward(loc, c, cost.G, v2(0, 0), 0.0, 0.0, 2.0);
  for (const Vec& y : st.path.values()) {
    Mat K(2, 2);
    K << y(0), y(1), y(2), y(3);
    CHECK(std::abs(K(0, 1) - K(1, 0)) <= 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<DynMat>(DynMat(K)).eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("cost validation rejects bad weights") {
  LqCost cost = lq_scalar().cost;
  cost.running[0].R = constant(m1(0.0));
  CHECK_THROWS_AS(cost.validate({0.0}), Error);
  cost = lq_oscillator().cost;
  cost.switching[0].C = m2(1, 1, 0, 1);
  CHECK_THROWS_AS(cost.validate({0.0}), Error);
  cost = lq_oscillator().cost;
  cost.G = m2(-1, 0, 0, 1);
  CHECK_THROWS_AS(cost.validate({0.0}), Error);
}

TEST_CASE("escape to infinity is reported as blow-up") {
  // K̇ = 1 + K² backward from 0 has a pole at tf − t = π/2.
  try {
    (void)riccati_backward(scalar_location(0, 1), scalar_cost(-1, 1, 0), m1(0), v1(0), 0.0, 0.0, 3.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::blow_up);
  }
}

TEST_CASE("scalar regulator agrees with the shooting solver") {
  const LqProblem lq = lq_scalar(1.0);
  const RiccatiSolution sol = solve_tracking(lq, {});
  CHECK(std::abs(sol.stages[0].K(0.0)(0, 0) - std::tanh(1.0)) <= 1e-8);
  HmpProblem hp = to_hmp_problem(lq);
  const Extremal ex = solve_hmp(hp, {});
  double worst = 0.0;
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    const double x = ex.trajectory.state_at(t)(0);
    worst = std::max(worst, std::abs(ex.control_at(t)(0) + std::tanh(1.0 - t) * x));
    worst = std::max(worst, std::abs(sol.control_at(t)(0) - ex.control_at(t)(0)));
  }
  CHECK(worst <= 1e-6);
  // Value at the start equals the closed-loop cost.
  CHECK(std::abs(0.5 * sol.stages[0].K(0)(0, 0) + sol.stages[0].w(0) - sol.cost) <= 1e-9);
}

TEST_CASE("tracking feedback beats random open-loop perturbations") {
  const LqProblem lq = lq_scalar(1.0, 1.0);
  const RiccatiSolution sol = solve_tracking(lq, {});
  // V(t0, x0) reproduces the closed-loop cost, offset included.
  const auto& st = sol.stages[0];
  CHECK(std::abs(0.5 * st.K(0)(0, 0) + st.s(0)(0) + st.w(0) - sol.cost) <= 1e-9);

  const HmpProblem hp = to_hmp_problem(lq, 10.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-0.1, 0.1);
  std::uniform_real_distribution<double> freq(0.5, 6.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = amp(rng);
    const double w = freq(rng);
    const double b = amp(rng);
    HybridInput in;
    in.control = HybridInput::OpenLoop([&, a, w, b](double t) {
      return v1(sol.control_at(t)(0) + a * std::sin(w * t) + b);
    });
    const double j = evaluate_cost(simulate(hp.system, hp.q0, hp.x0, hp.t0, hp.tf, in), hp.cost, in);
    CHECK(j >= sol.cost - 1e-10);
  }
}

TEST_CASE("oscillator tracking matches the shooting solver's adjoint") {
  const LqProblem lq = lq_oscillator();
  const RiccatiSolution sol = solve_tracking(lq, {1.5});
  REQUIRE(sol.switches.size() == 1);
  CHECK(sol.residual_norm <= 1e-8);
  CHECK(std::abs(sol.hamiltonian_gaps[0]) <= 1e-6);
  CHECK(std::abs(sol.switches[0].x_minus(1)) <= 1e-8);
  CHECK(sol.semantics_consistent);
  CHECK(sol.warnings.empty());

  const Preset p = example2();
  const Extremal ex = solve_hmp(p.problem, p.guess);
  CHECK(std::abs(ex.switch_times()[0] - sol.switches[0].time) <= 1e-8);
  double worst = 0.0;
  for (double t = 0.0; t <= 4.0; t += 0.01) {
    if (std::abs(t - sol.switches[0].time) < 1e-3) continue;
    worst = std::max(worst, (ex.lambda_at(t) - sol.adjoint_at(t)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-6);

  // Full costate jump with λ = Kx + s on both sides.
  const auto& sw = sol.switches[0];
  const Vec lm = sw.K_minus * sw.x_minus + sw.s_minus;
  const Vec lp = sw.K_plus * sw.x_plus + sw.s_plus;
  const Vec rhs = lp + m2(1, 0, 0, 0) * sw.x_minus + sw.p * v2(0, 1);
  CHECK((lm - rhs).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(sw.p == doctest::Approx(ex.multipliers[0]).epsilon(1e-7));
}

TEST_CASE("multistart reports every root and flags the inadmissible one") {
  const TrackingRoots roots = solve_tracking_multistart(lq_oscillator());
  CHECK(roots.attempts == 5);
  REQUIRE(!roots.roots.empty());
  CHECK(roots.roots[0].semantics_consistent);
  CHECK(std::abs(roots.roots[0].switches[0].time - 1.2417863372) <= 1e-8);
  for (std::size_t i = 1; i < roots.roots.size(); ++i) {
    CHECK(roots.roots[i].cost >= roots.roots[0].cost);
    CHECK(std::abs(roots.roots[i].switches[0].time - roots.roots[0].switches[0].time) > 1e-6);
  }
  CHECK(roots.multiple() == (roots.roots.size() > 1));
}

TEST_CASE("an invisible switch leaves the solution unchanged") {
  LqProblem single = lq_scalar(1.0, 0.5);
  LqProblem split = single;
  split.system.add_location(split.system.locations[0]);
  split.cost.running.push_back(split.cost.running[0]);
  split.system.add_event({"noop", SwitchKind::controlled, m1(1), v1(0), v1(0), 0.0});
  split.cost.switching.push_back({m1(0), v1(0)});
  split.locations = {0, 1};
  split.events = {0};
  const RiccatiSolution a = solve_tracking(single, {});
  const RiccatiSolution b = synthesize(split, {0.5}, {0.0});
  CHECK(std::abs(b.hamiltonian_gaps[0]) <= 1e-12);
  CHECK(std::abs(a.cost - b.cost) <= 1e-12);
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(std::abs(a.adjoint_at(t)(0) - b.adjoint_at(t)(0)) <= 1e-12);
  }
}

TEST_CASE("quadratic value gradient matches the value grid") {
  const LqProblem lq = lq_scalar(1.0, 0.5);
  const RiccatiSolution sol = solve_tracking(lq, {});
  const HmpProblem hp = to_hmp_problem(lq, 5.0);
  HdpGridSpec spec;
  spec.boxes = {Box::Uniform(1, -3.0, 3.0)};
  spec.dx = 2e-2;
  spec.dt = 1e-2;
  const ValueGrid g = solve_hjb(hp, spec).stage(0);
  double worst = 0.0;
  for (double t : {0.0, 0.25, 0.5, 0.75}) {
    for (double x : {-1.0, -0.4, 0.2, 0.9, 1.5}) {
      const auto& st = sol.stages[0];
      const double exact = st.K(t)(0, 0) * x + st.s(t)(0);
      worst = std::max(worst, std::abs(value_gradient(g, t, v1(x))(0) - exact));
    }
  }
  CHECK(worst <= 5 * (spec.dx + spec.dt));
}

TEST_CASE("time-varying data cannot be mapped to a time-invariant system") {
  LqProblem lq = lq_scalar();
  lq.system.locations[0].A = [](double t) { return m1(t); };
  CHECK_THROWS_AS((void)to_hmp_problem(lq), Error);
}
