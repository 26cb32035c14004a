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
#pragma once

#include "hybridoc/types.hpp"

#include <functional>

namespace hybridoc {

struct NewtonOptions {
  double tolerance = 1e-10;   ///< on the max-norm of the residual
  int max_iterations = 100;
  double fd_step = 1e-6;      ///< central differences, scaled by max(1, |z_i|)
  int max_backtracks = 40;
};

struct NewtonResult {
  DynVec solution;
  DynVec residual;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFunction = std::function<DynVec(const DynVec&)>;
/// Maps a trial iterate back into the admissible set (e.g. ordered times).
using Projection = std::function<DynVec(const DynVec&)>;

[[nodiscard]] DynMat fd_jacobian(const ResidualFunction& residual, const DynVec& z, double step);

/// Newton's method with a finite-difference Jacobian and backtracking on the
/// residual norm. Trial points whose residual throws are treated as rejected
/// steps. Throws ErrorKind::singular_jacobian on a rank-deficient Jacobian.
[[nodiscard]] NewtonResult damped_newton(const ResidualFunction& residual, DynVec z0,
                                         const NewtonOptions& options = {},
                                         const Projection& project = {});

}  // namespace hybridoc
