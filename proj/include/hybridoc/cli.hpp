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

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hybridoc {

/// Parsed command line of one run.
struct RunConfig {
  std::string subcommand;
  std::string problem;  ///< preset name or path to a JSON problem file
  std::optional<double> tol;
  std::optional<std::pair<double, double>> grid;  ///< dx, dt
  std::vector<double> box;                        ///< lo, hi pairs per axis
  std::uint64_t seed = 20260101;
  std::string out_dir = "hybridoc_out";
  std::optional<double> u;
  bool no_switch = false;
  bool enumerate_sequences = false;
  int max_switches = -1;
  int pieces = 0;        ///< oracle; 0 picks a per-problem default
  int levels = 0;
  int switch_grid = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point of the `hybridoc` tool. Artifacts go under cfg.out_dir and a
/// human-readable summary to `out`; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace hybridoc
