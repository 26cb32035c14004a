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
#include "hybridoc/types.hpp"

namespace hybridoc {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::transition_undefined: return "transition undefined";
    case ErrorKind::no_autonomous_transition: return "no autonomous transition";
    case ErrorKind::control_out_of_bounds: return "control out of bounds";
    case ErrorKind::blow_up: return "finite-time blow-up";
    case ErrorKind::manifold_termination: return "manifold termination instant";
    case ErrorKind::switch_budget_exhausted: return "switch budget exhausted";
    case ErrorKind::ambiguous_switch: return "ambiguous switch";
    case ErrorKind::switch_order: return "switch order violated";
    case ErrorKind::newton_nonconvergence: return "newton did not converge";
    case ErrorKind::singular_jacobian: return "singular jacobian";
    case ErrorKind::grid_domain: return "outside grid domain";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw Error(ErrorKind::dimension_mismatch, "box bounds differ in size");
  }
  for (int i = 0; i < lower.size(); ++i) {
    if (!(lower(i) <= upper(i))) {
      throw Error(ErrorKind::config, "box lower bound exceeds upper bound");
    }
  }
}

Box Box::Uniform(int dim, double lo, double hi) {
  return Box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

bool Box::contains(const Vec& v, double tol) const {
  if (v.size() != lower.size()) return false;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < lower(i) - tol || v(i) > upper(i) + tol) return false;
  }
  return true;
}

Vec Box::project(const Vec& v) const { return v.cwiseMax(lower).cwiseMin(upper); }

}  // namespace hybridoc
