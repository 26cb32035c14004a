#include "doctest.h"
#include "hybridoc/hmp_solver.hpp"
#include "hybridoc/presets.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace hybridoc;
using hybridoc::test::v1;
using hybridoc::test::v2;

TEST_CASE("Hamiltonian minimizer: closed form, projection and golden search agree") {
  const Preset p = example1();
  const auto& pb = p.problem;
  const Vec x = v1(1.3);
  const Vec lam = v1(0.4);
  const Vec closed = minimize_hamiltonian(pb.system, pb.cost, pb.minimizers, Location{0}, x, lam);
  CHECK(closed(0) == doctest::Approx(-0.52));
  const Vec numeric = minimize_hamiltonian(pb.system, pb.cost, {}, Location{0}, x, lam);
  // Comparison-based search resolves a smooth minimum to about sqrt(eps).
  CHECK(std::abs(numeric(0) - closed(0)) <= 1e-7);
  // Large costates push the minimizer onto the box.
  const Vec clipped = minimize_hamiltonian(pb.system, pb.cost, pb.minimizers, Location{0}, x, v1(10.0));
  CHECK(clipped(0) == -4.0);
  const Vec clipped_numeric = minimize_hamiltonian(pb.system, pb.cost, {}, Location{0}, x, v1(10.0));
  CHECK(std::abs(clipped_numeric(0) + 4.0) <= 1e-8);
}

TEST_CASE("hamiltonian is λᵀf + l") {
  const Preset p = example2();
  const double h = hamiltonian(p.problem.system, p.problem.cost, Location{0}, v2(0.5, 0.25),
                               v2(2.0, -1.0), v1(0.3));
  CHECK(h == doctest::Approx(2.0 * 0.25 - 1.0 * (-0.5 + 0.3) + 0.5 * 0.09));
}

TEST_CASE("Example 1 extremal matches the closed-form oracle") {
  const auto oracle = test::example1_extremal();
  const Preset p = example1();
  const Extremal ex = solve_hmp(p.problem, p.guess);
  REQUIRE(ex.switch_times().size() == 1);
  CHECK(std::abs(ex.switch_times()[0] - oracle.ts) <= 1e-7);
  CHECK(std::abs(ex.lambda_at(0.0)(0) - oracle.mu1) <= 1e-7);
  CHECK(std::abs(ex.cost.total() - oracle.cost) <= 1e-8);
  CHECK(std::abs(ex.trajectory.final_state()(0) - oracle.x_final) <= 1e-8);
  CHECK(ex.max_hamiltonian_gap() <= 1e-8);
  CHECK(ex.residual_norm <= 1e-8);
  CHECK(ex.multipliers[0] == 0.0);
  CHECK(ex.semantics_consistent);
  // Terminal costate equals ∇g(x(tf)) = x(tf).
  CHECK(std::abs(ex.lambda_at(1.0)(0) - ex.trajectory.final_state()(0)) <= 1e-12);
  // Jump condition λ(ts−) = −λ(ts+) − 2x/(1+x²)².
  const double xm = ex.trajectory.switches[0].pre_state(0);
  const double d = 1.0 + xm * xm;
  CHECK(std::abs(ex.lambda_minus[0](0) - (-ex.lambda_plus[0](0) - 2.0 * xm / (d * d))) <= 1e-12);
}

TEST_CASE("Example 2 extremal matches the closed-form oracle") {
  const auto oracle = test::example2_extremal();
  const Preset p = example2();
  const Extremal ex = solve_hmp(p.problem, p.guess);
  REQUIRE(ex.switch_times().size() == 1);
  CHECK(ex.trajectory.switches[0].kind == SwitchKind::autonomous);
  CHECK(std::abs(ex.switch_times()[0] - oracle.ts) <= 1e-7);
  CHECK(std::abs(ex.multipliers[0] - oracle.p) <= 1e-7);
  CHECK(std::abs(ex.lambda_at(0.0)(0) - oracle.a) <= 1e-7);
  CHECK(std::abs(ex.lambda_at(0.0)(1) - oracle.b) <= 1e-7);
  CHECK(std::abs(ex.cost.total() - oracle.cost) <= 1e-8);
  CHECK(std::abs(ex.trajectory.switches[0].pre_state(1)) <= 1e-8);
  CHECK(ex.max_hamiltonian_gap() <= 1e-6);
  CHECK(ex.semantics_consistent);
  // λ1 ≡ 0 after the switch.
  CHECK(std::abs(ex.lambda_at(3.0)(0)) <= 1e-10);
}

TEST_CASE("Example 2 late root violates autonomous semantics") {
  const Preset p = example2();
  HmpOptions no_repair;
  no_repair.semantic_restarts = 0;
  const Extremal ex = solve_hmp(p.problem, {{2.43}, {-0.47}}, no_repair);
  CHECK(ex.switch_times()[0] > 2.0);
  CHECK_FALSE(ex.semantics_consistent);
}

TEST_CASE("restarting from the re-simulated crossing recovers the admissible root") {
  const auto oracle = test::example2_extremal();
  const Preset p = example2();
  const Extremal ex = solve_hmp(p.problem, {{2.43}, {-0.47}});
  CHECK(ex.semantics_consistent);
  CHECK(std::abs(ex.switch_times()[0] - oracle.ts) <= 1e-7);
}

TEST_CASE("Hamiltonian is constant along each segment of a time-invariant problem") {
  for (const Preset& p : {example1(), example2()}) {
    const Extremal ex = solve_hmp(p.problem, p.guess);
    for (std::size_t s = 0; s < ex.trajectory.segments.size(); ++s) {
      const auto& seg = ex.trajectory.segments[s];
      const auto h_at = [&](std::size_t k) {
        const double t = seg.state.times()[k];
        return hamiltonian(p.problem.system, p.problem.cost, seg.location, seg.state.values()[k],
                           ex.adjoint[s].at(t), seg.control[k]);
      };
      const double h0 = h_at(0);
      double worst = 0.0;
      for (std::size_t k = 0; k < seg.state.size(); ++k) worst = std::max(worst, std::abs(h_at(k) - h0));
      CHECK_MESSAGE(worst <= 1e-6, p.name);
    }
  }
}

TEST_CASE("switch-free LQR extremal matches the Riccati closed form") {
  const Preset p = scalar_lqr(1.0);
  const Extremal ex = solve_hmp(p.problem, p.guess);
  CHECK(ex.trajectory.switches.empty());
  CHECK(std::abs(ex.lambda_at(0.0)(0) - std::tanh(1.0)) <= 1e-9);
  for (double t : {0.25, 0.5, 0.75}) {
    CHECK(std::abs(ex.lambda_at(t)(0) - std::tanh(1.0 - t) * ex.trajectory.state_at(t)(0)) <= 1e-9);
  }
}

TEST_CASE("Mayer form keeps the leading costate at one") {
  const Preset p = example1();
  const MayerProblem mp = to_mayer(p.problem.system, p.problem.cost, p.problem.minimizers);
  HmpProblem pb;
  pb.system = mp.system;
  pb.cost = mp.cost;
  pb.minimizers = mp.minimizers;
  pb.q0 = p.problem.q0;
  pb.x0 = MayerProblem::Augment(p.problem.x0);
  pb.t0 = p.problem.t0;
  pb.tf = p.problem.tf;
  pb.sequence = p.problem.sequence;
  const Extremal mayer = solve_hmp(pb, p.guess);
  const Extremal bolza = solve_hmp(p.problem, p.guess);
  double worst = 0.0;
  for (const auto& path : mayer.adjoint) {
    for (const auto& lam : path.values()) worst = std::max(worst, std::abs(lam(0) - 1.0));
  }
  CHECK(worst <= 1e-9);
  CHECK(std::abs(mayer.switch_times()[0] - bolza.switch_times()[0]) <= 1e-8);
  CHECK(std::abs(mayer.cost.total() - bolza.cost.total()) <= 1e-8);
  CHECK(std::abs(mayer.lambda_at(0.3)(1) - bolza.lambda_at(0.3)(0)) <= 1e-8);
}

TEST_CASE("sequence mismatch in the guess is a config error") {
  const Preset p = example1();
  try {
    (void)solve_hmp(p.problem, {{0.2, 0.5}, {}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}
