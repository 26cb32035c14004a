#include "doctest.h"
#include "hybridoc/newton.hpp"

#include <cmath>

using namespace hybridoc;

TEST_CASE("Newton finds sqrt(2)") {
  ResidualFunction r = [](const DynVec& z) {
    DynVec out(1);
    out(0) = z(0) * z(0) - 2.0;
    return out;
  };
  const NewtonResult res = damped_newton(r, DynVec::Constant(1, 3.0));
  CHECK(res.converged);
  CHECK(std::abs(res.solution(0) - std::sqrt(2.0)) <= 1e-10);
  CHECK(res.iterations <= 10);
}

TEST_CASE("damping recovers from a poor start on a coupled system") {
  ResidualFunction r = [](const DynVec& z) {
    DynVec out(2);
    out(0) = std::exp(z(0)) - 2.0 - z(1);
    out(1) = z(0) + z(1) * z(1) * z(1) - 1.0;
    return out;
  };
  DynVec z0(2);
  z0 << 5.0, -3.0;
  const NewtonResult res = damped_newton(r, z0);
  REQUIRE(res.converged);
  CHECK(r(res.solution).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("projection keeps iterates admissible") {
  ResidualFunction r = [](const DynVec& z) {
    if (z(0) < 0.0) throw Error(ErrorKind::switch_order, "negative");
    DynVec out(1);
    out(0) = std::sqrt(z(0)) - 0.5;
    return out;
  };
  Projection clamp = [](const DynVec& z) {
    DynVec out = z;
    out(0) = std::max(out(0), 0.01);
    return out;
  };
  const NewtonResult res = damped_newton(r, DynVec::Constant(1, 4.0), {}, clamp);
  CHECK(res.converged);
  CHECK(res.solution(0) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("rank-deficient Jacobian is reported") {
  ResidualFunction r = [](const DynVec& z) {
    DynVec out(2);
    out(0) = z(0) + z(1) - 1.0;
    out(1) = 2.0 * (z(0) + z(1)) - 3.0;
    return out;
  };
  try {
    (void)damped_newton(r, DynVec::Zero(2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singular_jacobian);
  }
}
