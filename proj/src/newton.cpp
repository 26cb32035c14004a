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
#include "hybridoc/newton.hpp"

#include <cmath>
#include <optional>

namespace hybridoc {

namespace {

double max_norm(const DynVec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::optional<DynVec> try_residual(const ResidualFunction& residual, const DynVec& z) {
  try {
    DynVec r = residual(z);
    if (!r.allFinite()) return std::nullopt;
    return r;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

DynMat fd_jacobian(const ResidualFunction& residual, const DynVec& z, double step) {
  DynMat jac;
  DynVec zp = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(z(i)));
    zp(i) = z(i) + h;
    const DynVec rp = residual(zp);
    zp(i) = z(i) - h;
    const DynVec rm = residual(zp);
    zp(i) = z(i);
    if (i == 0) jac.resize(rp.size(), z.size());
    jac.col(i) = (rp - rm) / (2 * h);
  }
  return jac;
}

NewtonResult damped_newton(const ResidualFunction& residual, DynVec z0,
                           const NewtonOptions& options, const Projection& project) {
  NewtonResult out;
  out.solution = project ? project(z0) : std::move(z0);
  out.residual = residual(out.solution);
  out.residual_norm = max_norm(out.residual);
  if (!out.residual.allFinite()) {
    throw Error(ErrorKind::newton_nonconvergence, "residual is not finite at the initial guess");
  }

  for (int it = 0; it < options.max_iterations; ++it) {
    if (out.residual_norm <= options.tolerance) {
      out.converged = true;
      return out;
    }
    const DynMat jac = fd_jacobian(residual, out.solution, options.fd_step);
    Eigen::ColPivHouseholderQR<DynMat> qr(jac);
    if (qr.rank() < jac.cols()) {
      throw Error(ErrorKind::singular_jacobian,
                  "jacobian rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(jac.cols()));
    }
    const DynVec dz = qr.solve(-out.residual);

    double alpha = 1.0;
    bool accepted = false;
    for (int b = 0; b < options.max_backtracks; ++b, alpha *= 0.5) {
      DynVec trial = out.solution + alpha * dz;
      if (project) trial = project(trial);
      auto r = try_residual(residual, trial);
      if (!r) continue;
      const double norm = max_norm(*r);
      if (norm < (1.0 - 1e-4 * alpha) * out.residual_norm) {
        out.solution = std::move(trial);
        out.residual = std::move(*r);
        out.residual_norm = norm;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.converged = out.residual_norm <= options.tolerance;
  return out;
}

}  // namespace hybridoc
