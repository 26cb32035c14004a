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
#include "hybridoc/dense_path.hpp"

#include <algorithm>

namespace hybridoc {

void DensePath::push_back(double t, const Vec& y, const Vec& dy) {
  t_.push_back(t);
  y_.push_back(y);
  dy_.push_back(dy);
}

void DensePath::reserve(std::size_t n) {
  t_.reserve(n);
  y_.reserve(n);
  dy_.reserve(n);
}

void DensePath::reverse() {
  std::reverse(t_.begin(), t_.end());
  std::reverse(y_.begin(), y_.end());
  std::reverse(dy_.begin(), dy_.end());
}

std::size_t DensePath::interval(double t) const {
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  return std::min(k, t_.size() - 2);
}

Vec DensePath::at(double t) const {
  if (t_.size() == 1 || t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  const std::size_t k = interval(t);
  const double h = t_[k + 1] - t_[k];
  if (h <= 0.0) return y_[k + 1];
  const double s = (t - t_[k]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[k] + h10 * h * dy_[k] + h01 * y_[k + 1] + h11 * h * dy_[k + 1];
}

Vec DensePath::derivative_at(double t) const {
  if (t_.size() == 1 || t <= t_.front()) return dy_.front();
  if (t >= t_.back()) return dy_.back();
  const std::size_t k = interval(t);
  const double h = t_[k + 1] - t_[k];
  if (h <= 0.0) return dy_[k + 1];
  const double s = (t - t_[k]) / h;
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h;
  const double d11 = 3 * s2 - 2 * s;
  return d00 * y_[k] + d10 * dy_[k] + d01 * y_[k + 1] + d11 * dy_[k + 1];
}

}  // namespace hybridoc
