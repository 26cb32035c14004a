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

#include <vector>

namespace hybridoc {

/// Samples (t_k, y_k, y'_k) on an increasing time grid with cubic Hermite
/// interpolation between knots. Queries outside [front, back] clamp to the
/// nearest end value.
class DensePath {
 public:
  void push_back(double t, const Vec& y, const Vec& dy);
  void reserve(std::size_t n);
  /// Reverses knot order; used by backward integrators that fill from the end.
  void reverse();

  [[nodiscard]] std::size_t size() const { return t_.size(); }
  [[nodiscard]] bool empty() const { return t_.empty(); }
  [[nodiscard]] double front_time() const { return t_.front(); }
  [[nodiscard]] double back_time() const { return t_.back(); }
  [[nodiscard]] const std::vector<double>& times() const { return t_; }
  [[nodiscard]] const std::vector<Vec>& values() const { return y_; }
  [[nodiscard]] const std::vector<Vec>& derivatives() const { return dy_; }
  [[nodiscard]] const Vec& front_value() const { return y_.front(); }
  [[nodiscard]] const Vec& back_value() const { return y_.back(); }

  [[nodiscard]] Vec at(double t) const;
  [[nodiscard]] Vec derivative_at(double t) const;

 private:
  [[nodiscard]] std::size_t interval(double t) const;

  std::vector<double> t_;
  std::vector<Vec> y_;
  std::vector<Vec> dy_;
};

}  // namespace hybridoc
