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

#include "hybridoc/presets.hpp"

#include <string>
#include <vector>

namespace hybridoc {

/// c · Π x_i^{a_i} · Π u_j^{b_j}
struct Monomial {
  double coef = 0.0;
  std::vector<int> x_pow;
  std::vector<int> u_pow;
};

/// Sparse polynomial in (x, u) with analytic x-derivatives.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int state_dim, int control_dim, std::vector<Monomial> terms);

  [[nodiscard]] double operator()(const Vec& x, const Vec& u) const;
  [[nodiscard]] Vec gradient_x(const Vec& x, const Vec& u) const;
  [[nodiscard]] int state_dim() const { return nx_; }
  [[nodiscard]] int control_dim() const { return nu_; }
  [[nodiscard]] const std::vector<Monomial>& terms() const { return terms_; }

 private:
  int nx_ = 0;
  int nu_ = 0;
  std::vector<Monomial> terms_;
};

/// Builds a problem from JSON text. Either {"preset": name, ...overrides} or a
/// full description; the schema is documented in README.md. Malformed input
/// raises ErrorKind::config.
[[nodiscard]] Preset load_problem_json(const std::string& text);
[[nodiscard]] Preset load_problem_file(const std::string& path);

/// A preset name or a path to a JSON file.
[[nodiscard]] Preset resolve_problem(const std::string& source);

}  // namespace hybridoc
