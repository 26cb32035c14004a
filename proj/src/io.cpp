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
#include "hybridoc/io.hpp"

#include "json.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hybridoc {

static_assert(std::endian::native == std::endian::little, "binary grid layout assumes a little-endian host");

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

void put(std::string& out, double v) {
  out += format_double(v);
}

void put_vec(std::string& out, const Vec& v, int width) {
  for (int i = 0; i < width; ++i) {
    out += ',';
    if (i < v.size()) put(out, v(i));
  }
}

void header_cols(std::string& out, const char* prefix, int n) {
  for (int i = 1; i <= n; ++i) out += ',' + std::string(prefix) + std::to_string(i);
}

int max_state_dim(const HybridTrajectory& traj) {
  int n = 0;
  for (const auto& s : traj.segments) n = std::max(n, static_cast<int>(s.state.front_value().size()));
  return n;
}

int max_control_dim(const HybridTrajectory& traj) {
  int m = 0;
  for (const auto& s : traj.segments) {
    if (!s.control.empty()) m = std::max(m, static_cast<int>(s.control.front().size()));
  }
  return m;
}

}  // namespace

std::string trajectory_csv(const HybridTrajectory& traj) {
  const int n = max_state_dim(traj);
  const int m = max_control_dim(traj);
  std::string out = "t,segment,location";
  header_cols(out, "x", n);
  header_cols(out, "u", m);
  out += '\n';
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& seg = traj.segments[i];
    const auto& ts = seg.state.times();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      put(out, ts[k]);
      out += ',' + std::to_string(i) + ',' + std::to_string(seg.location.id);
      put_vec(out, seg.state.values()[k], n);
      put_vec(out, k < seg.control.size() ? seg.control[k] : Vec(0), m);
      out += '\n';
    }
  }
  return out;
}

std::string switches_csv(const HybridSystem& sys, const HybridTrajectory& traj) {
  int n_pre = 0;
  int n_post = 0;
  for (const auto& s : traj.switches) {
    n_pre = std::max(n_pre, static_cast<int>(s.pre_state.size()));
    n_post = std::max(n_post, static_cast<int>(s.post_state.size()));
  }
  std::string out = "time,kind,event,from,to";
  header_cols(out, "pre", n_pre);
  header_cols(out, "post", n_post);
  out += '\n';
  for (const auto& s : traj.switches) {
    put(out, s.time);
    out += ',' + std::string(ToString(s.kind)) + ',' + sys.event(s.event).name + ',' + sys.location(s.from).name + ',' +
           sys.location(s.to).name;
    put_vec(out, s.pre_state, n_pre);
    put_vec(out, s.post_state, n_post);
    out += '\n';
  }
  return out;
}

std::string extremal_csv(const HmpProblem& problem, const Extremal& extremal) {
  const auto& traj = extremal.trajectory;
  const int n = max_state_dim(traj);
  const int m = max_control_dim(traj);
  std::string out = "t,segment,location";
  header_cols(out, "x", n);
  header_cols(out, "lambda", n);
  header_cols(out, "u", m);
  out += ",H\n";
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& seg = traj.segments[i];
    const auto& ts = seg.state.times();
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const Vec& x = seg.state.values()[k];
      const Vec lam = extremal.adjoint[i].at(ts[k]);
      const Vec& u = seg.control[k];
      put(out, ts[k]);
      out += ',' + std::to_string(i) + ',' + std::to_string(seg.location.id);
      put_vec(out, x, n);
      put_vec(out, lam, n);
      put_vec(out, u, m);
      out += ',';
      put(out, hamiltonian(problem.system, problem.cost, seg.location, x, lam, u));
      out += '\n';
    }
  }
  return out;
}

std::string riccati_csv(const RiccatiSolution& sol, int per_stage) {
  int n = 0;
  for (const auto& st : sol.stages) n = std::max(n, st.n);
  std::string out = "t,stage,location";
  for (int r = 1; r <= n; ++r) {
    for (int c = 1; c <= n; ++c) out += ",K" + std::to_string(r) + std::to_string(c);
  }
  header_cols(out, "s", n);
  out += ",w\n";
  for (std::size_t i = 0; i < sol.stages.size(); ++i) {
    const auto& st = sol.stages[i];
    for (int k = 0; k < per_stage; ++k) {
      const double t = st.start() + (st.end() - st.start()) * k / std::max(1, per_stage - 1);
      const Mat K = st.K(t);
      put(out, t);
      out += ',' + std::to_string(i) + ',' + std::to_string(st.location);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          out += ',';
          if (r < st.n && c < st.n) put(out, K(r, c));
        }
      }
      put_vec(out, st.s(t), n);
      out += ',';
      put(out, st.w(t));
      out += '\n';
    }
  }
  return out;
}

std::string value_grid_csv(const ValueGrid& grid, int slice_stride) {
  if (slice_stride < 1) throw Error(ErrorKind::config, "slice stride must be positive");
  std::string out = "t";
  header_cols(out, "x", grid.dim());
  out += ",V";
  header_cols(out, "u", grid.control_dim);
  out += ",switched\n";
  for (int k = 0; k < grid.slices; ++k) {
    if (k % slice_stride != 0 && k + 1 != grid.slices) continue;
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      put(out, grid.time(k));
      put_vec(out, grid.node_state(node), grid.dim());
      out += ',';
      put(out, grid.value(k, node));
      put_vec(out, grid.control(k, node), grid.control_dim);
      out += grid.switched[static_cast<std::size_t>(k) * grid.node_count() + node] ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string equivalence_csv(const EquivalenceReport& report) {
  int n = 0;
  for (const auto& s : report.segments) {
    if (!s.lambda.empty()) n = std::max(n, static_cast<int>(s.lambda.front().size()));
  }
  std::string out = "segment,t,error";
  header_cols(out, "lambda", n);
  header_cols(out, "grad", n);
  out += '\n';
  for (const auto& s : report.segments) {
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      out += std::to_string(s.segment) + ',';
      put(out, s.times[k]);
      out += ',';
      put(out, s.error[k]);
      put_vec(out, s.lambda[k], n);
      put_vec(out, s.gradient[k], n);
      out += '\n';
    }
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'O', 'C', 'V', 'G', '0', '1'};

void raw(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

}  // namespace

std::string value_grid_binary(const ValueGrid& grid) {
  std::string out(kMagic, 8);
  const std::size_t cells = grid.node_count() * static_cast<std::size_t>(grid.slices);
  out.reserve(8 * (16 + cells * static_cast<std::size_t>(2 + grid.control_dim)));
  for (double v : {static_cast<double>(grid.dim()), static_cast<double>(grid.control_dim),
                   static_cast<double>(grid.slices), static_cast<double>(grid.location.id),
                   static_cast<double>(grid.remaining), grid.t0, grid.dt}) {
    raw(out, v);
  }
  for (const auto& ax : grid.axes) {
    raw(out, ax.lower);
    raw(out, ax.upper);
    raw(out, ax.nodes);
  }
  for (double v : grid.values) raw(out, v);
  for (double v : grid.controls) raw(out, v);
  for (auto s : grid.switched) raw(out, s);
  return out;
}

ValueGridFile read_value_grid_binary(std::string_view bytes) {
  std::size_t pos = 8;
  auto next = [&]() {
    if (pos + 8 > bytes.size()) throw Error(ErrorKind::io, "value grid file truncated");
    double v;
    std::memcpy(&v, bytes.data() + pos, 8);
    pos += 8;
    return v;
  };
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw Error(ErrorKind::io, "not a value grid file");
  }
  ValueGridFile f;
  const int dim = static_cast<int>(next());
  f.control_dim = static_cast<int>(next());
  f.slices = static_cast<int>(next());
  f.location = static_cast<int>(next());
  f.remaining = static_cast<int>(next());
  f.t0 = next();
  f.dt = next();
  if (dim < 1 || dim > kMaxLocationDim || f.control_dim < 0 || f.slices < 1) {
    throw Error(ErrorKind::io, "value grid header out of range");
  }
  std::size_t nodes = 1;
  for (int i = 0; i < dim; ++i) {
    GridAxis ax;
    ax.lower = next();
    ax.upper = next();
    ax.nodes = static_cast<int>(next());
    if (ax.nodes < 2) throw Error(ErrorKind::io, "value grid axis has fewer than two nodes");
    nodes *= static_cast<std::size_t>(ax.nodes);
    f.axes.push_back(ax);
  }
  const std::size_t cells = nodes * static_cast<std::size_t>(f.slices);
  const std::size_t expect = pos + 8 * cells * static_cast<std::size_t>(2 + f.control_dim);
  if (bytes.size() != expect) throw Error(ErrorKind::io, "value grid payload has the wrong size");
  f.values.resize(cells);
  for (auto& v : f.values) v = next();
  f.controls.resize(cells * static_cast<std::size_t>(f.control_dim));
  for (auto& v : f.controls) v = next();
  f.switched.resize(cells);
  for (auto& v : f.switched) v = next();
  return f;
}

std::string gnuplot_script(const std::vector<std::string>& csv_files, int state_dim) {
  std::ostringstream s;
  s << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n";
  for (const auto& f : csv_files) {
    s << "set title '" << f << "'\nplot";
    for (int i = 0; i < state_dim; ++i) {
      s << (i ? "," : "") << " '" << f << "' using 1:" << 4 + i << " with lines";
    }
    s << "\npause -1\n";
  }
  return s.str();
}

std::string Manifest::json() const {
  nlohmann::ordered_json j;
  j["tool"] = "hybridoc";
  j["version"] = "1.0.0";
  j["subcommand"] = subcommand;
  j["problem"] = problem;
  j["config_hash"] = config_hash;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : settings) s[k] = v;
  j["settings"] = s;
  nlohmann::ordered_json fs = nlohmann::ordered_json::array();
  for (const auto& [name, contents] : files) {
    fs.push_back({{"name", name}, {"bytes", contents.size()}, {"fnv1a", hex64(fnv1a(contents))}});
  }
  j["files"] = fs;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, std::string_view contents) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hybridoc
