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

#include "hybridoc/equivalence.hpp"
#include "hybridoc/hdp_solver.hpp"
#include "hybridoc/riccati.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hybridoc {

/// Round-trip formatting (%.17g), so equal runs give byte-identical files.
[[nodiscard]] std::string format_double(double v);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t v);

/// t,segment,location,x1..xn,u1..um. Rows of lower-dimensional segments leave
/// the surplus columns empty.
[[nodiscard]] std::string trajectory_csv(const HybridTrajectory& traj);

/// time,kind,event,from,to,pre1..,post1..
[[nodiscard]] std::string switches_csv(const HybridSystem& sys, const HybridTrajectory& traj);

/// t,segment,location,x..,lambda..,u..,H at every integrator knot.
[[nodiscard]] std::string extremal_csv(const HmpProblem& problem, const Extremal& extremal);

/// t,stage,location,K11..Knn (row-major),s1..sn,w sampled `per_stage` times per stage.
[[nodiscard]] std::string riccati_csv(const RiccatiSolution& sol, int per_stage = 201);

/// t,x1..xn,V,u1..um,switched for every node of every `slice_stride`-th
/// slice (the final slice is always included).
[[nodiscard]] std::string value_grid_csv(const ValueGrid& grid, int slice_stride = 1);

/// segment,t,error,lambda..,gradient.. per compared sample.
[[nodiscard]] std::string equivalence_csv(const EquivalenceReport& report);

/// Binary value grid, all fields little-endian IEEE-754 doubles after an
/// 8-byte magic "HYOCVG01":
///   dim, control_dim, slices, location, remaining, t0, dt,
///   dim × (lower, upper, nodes),
///   values[slice][node], controls[slice][node][control], switched[slice][node].
[[nodiscard]] std::string value_grid_binary(const ValueGrid& grid);

struct ValueGridFile {
  int location = 0;
  int remaining = 0;
  int control_dim = 0;
  int slices = 0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<GridAxis> axes;
  std::vector<double> values;
  std::vector<double> controls;
  std::vector<double> switched;
};

/// Inverse of value_grid_binary; throws ErrorKind::io on a bad layout.
[[nodiscard]] ValueGridFile read_value_grid_binary(std::string_view bytes);

/// Gnuplot script drawing the state (and adjoint, when present) columns of
/// the given CSV files against time.
[[nodiscard]] std::string gnuplot_script(const std::vector<std::string>& csv_files, int state_dim);

/// Run record: scalar settings plus name, size and hash of every emitted file.
struct Manifest {
  std::string subcommand;
  std::string problem;
  std::string config_hash;
  std::map<std::string, std::string> settings;
  std::vector<std::pair<std::string, std::string>> files;  ///< name, contents

  [[nodiscard]] std::string json() const;
};

/// Writes `contents` to `path`, creating parent directories; ErrorKind::io on failure.
void write_file(const std::string& path, std::string_view contents);
[[nodiscard]] std::string read_file(const std::string& path);

}  // namespace hybridoc
