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

#include <Eigen/Dense>

#include <compare>
#include <stdexcept>
#include <string>

namespace hybridoc {

/// Storage capacity of the bounded vectors below. Field evaluations on them
/// never allocate. The capacity also has to hold a state stacked with its
/// costate, so a location state is limited to kMaxDim / 2 coordinates.
inline constexpr int kMaxDim = 32;
inline constexpr int kMaxLocationDim = kMaxDim / 2;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Unbounded vectors for solver unknowns (shooting variables, grids).
using DynVec = Eigen::VectorXd;
using DynMat = Eigen::MatrixXd;

/// Discrete state (location) index.
struct Location {
  int id = 0;
  constexpr auto operator<=>(const Location&) const = default;
};

/// Event (switch label) index. Event 0 is always the identity event.
struct Event {
  int id = 0;
  constexpr auto operator<=>(const Event&) const = default;
};

inline constexpr Event kIdentityEvent{0};

enum class SwitchKind { autonomous, controlled };

[[nodiscard]] inline const char* ToString(SwitchKind kind) {
  return kind == SwitchKind::autonomous ? "autonomous" : "controlled";
}

enum class ErrorKind {
  config,
  dimension_mismatch,
  transition_undefined,
  no_autonomous_transition,
  control_out_of_bounds,
  blow_up,
  manifold_termination,
  switch_budget_exhausted,
  ambiguous_switch,
  switch_order,
  newton_nonconvergence,
  singular_jacobian,
  grid_domain,
  io,
};

[[nodiscard]] const char* ToString(ErrorKind kind);

/// All recoverable failures raised by the library carry a kind so callers
/// (and the CLI exit code mapping) can dispatch on them.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ToString(kind)) + ": " + what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Axis-aligned box [lower, upper].
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi);
  static Box Uniform(int dim, double lo, double hi);

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] Vec center() const { return 0.5 * (lower + upper); }
  [[nodiscard]] bool contains(const Vec& v, double tol = 0.0) const;
  [[nodiscard]] Vec project(const Vec& v) const;
};

}  // namespace hybridoc
