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
#include "hybridoc/hdp_solver.hpp"

#include <algorithm>
#include <cmath>

namespace hybridoc {

ValueGrid::ValueGrid(Location q, int remaining_switches, const Box& box, double dx, double t_begin,
                     double t_end, double step_t, int controls_per_node)
    : location(q), remaining(remaining_switches), t0(t_begin), control_dim(controls_per_node) {
  if (!(dx > 0.0) || !(step_t > 0.0) || !(t_end > t_begin)) {
    throw Error(ErrorKind::config, "grid steps and horizon must be positive");
  }
  node_count_ = 1;
  for (int i = 0; i < box.dim(); ++i) {
    GridAxis ax;
    ax.lower = box.lower(i);
    ax.upper = box.upper(i);
    ax.nodes = std::max(2, static_cast<int>(std::lround((ax.upper - ax.lower) / dx)) + 1);
    axes.push_back(ax);
  }
  // Last axis varies fastest.
  strides_.assign(axes.size(), 1);
  for (int i = dim() - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = node_count_;
    node_count_ *= static_cast<std::size_t>(axes[static_cast<std::size_t>(i)].nodes);
  }
  const long nt = std::max(1L, std::lround((t_end - t_begin) / step_t));
  slices = static_cast<int>(nt) + 1;
  dt = (t_end - t_begin) / static_cast<double>(nt);
  const std::size_t total = node_count_ * static_cast<std::size_t>(slices);
  const double bytes = static_cast<double>(total) * (8.0 * (1 + control_dim) + 1.0);
  if (bytes > 6e9) throw Error(ErrorKind::config, "value grid would exceed 6 GB");
  values.assign(total, 0.0);
  controls.assign(total * static_cast<std::size_t>(control_dim), 0.0);
  switched.assign(total, 0);
}

int ValueGrid::nearest_slice(double t) const {
  const long k = std::lround((t - t0) / dt);
  return static_cast<int>(std::clamp(k, 0L, static_cast<long>(slices - 1)));
}

std::vector<int> ValueGrid::node_index(std::size_t node) const {
  std::vector<int> idx(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    idx[i] = static_cast<int>((node / strides_[i]) % static_cast<std::size_t>(axes[i].nodes));
  }
  return idx;
}

Vec ValueGrid::node_state(std::size_t node) const {
  Vec x(dim());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto j = static_cast<int>((node / strides_[i]) % static_cast<std::size_t>(axes[i].nodes));
    x(static_cast<Eigen::Index>(i)) = axes[i].coord(j);
  }
  return x;
}

Vec ValueGrid::control(int k, std::size_t node) const {
  Vec u(control_dim);
  const std::size_t base =
      (static_cast<std::size_t>(k) * node_count_ + node) * static_cast<std::size_t>(control_dim);
  for (int i = 0; i < control_dim; ++i) u(i) = controls[base + static_cast<std::size_t>(i)];
  return u;
}

Box ValueGrid::box() const {
  Vec lo(dim());
  Vec hi(dim());
  for (int i = 0; i < dim(); ++i) {
    lo(i) = axes[static_cast<std::size_t>(i)].lower;
    hi(i) = axes[static_cast<std::size_t>(i)].upper;
  }
  return Box(lo, hi);
}

bool ValueGrid::inside(const Vec& x, double margin_cells) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const auto& ax = axes[static_cast<std::size_t>(i)];
    const double m = margin_cells * ax.step();
    if (x(i) < ax.lower + m || x(i) > ax.upper - m) return false;
  }
  return true;
}

double ValueGrid::interpolate(int k, const Vec& x, bool* clamped) const {
  const double* v = slice(k);
  const int d = dim();
  std::size_t base = 0;
  double w[kMaxDim];
  std::size_t stride[kMaxDim];
  bool clipped = false;
  for (int i = 0; i < d; ++i) {
    const auto& ax = axes[static_cast<std::size_t>(i)];
    const double h = ax.step();
    double s = (x(i) - ax.lower) / h;
    if (s < 0.0) {
      s = 0.0;
      clipped = true;
    } else if (s > ax.nodes - 1) {
      s = ax.nodes - 1;
      clipped = true;
    }
    int j = static_cast<int>(s);
    if (j >= ax.nodes - 1) j = ax.nodes - 2;
    w[i] = s - j;
    stride[i] = strides_[static_cast<std::size_t>(i)];
    base += static_cast<std::size_t>(j) * stride[i];
  }
  if (clamped) *clamped = clipped;
  if (d == 1) return (1.0 - w[0]) * v[base] + w[0] * v[base + stride[0]];
  if (d == 2) {
    const double a = (1.0 - w[1]) * v[base] + w[1] * v[base + stride[1]];
    const double b = (1.0 - w[1]) * v[base + stride[0]] + w[1] * v[base + stride[0] + stride[1]];
    return (1.0 - w[0]) * a + w[0] * b;
  }
  double acc = 0.0;
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    double weight = 1.0;
    std::size_t off = base;
    for (int i = 0; i < d; ++i) {
      if (corner & (1u << i)) {
        weight *= w[i];
        off += stride[i];
      } else {
        weight *= 1.0 - w[i];
      }
    }
    if (weight != 0.0) acc += weight * v[off];
  }
  return acc;
}

}  // namespace hybridoc
