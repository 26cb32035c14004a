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
#include "hybridoc/problem_config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridoc {

Polynomial::Polynomial(int state_dim, int control_dim, std::vector<Monomial> terms)
    : nx_(state_dim), nu_(control_dim), terms_(std::move(terms)) {
  for (auto& t : terms_) {
    if (t.x_pow.empty()) t.x_pow.assign(static_cast<std::size_t>(nx_), 0);
    if (t.u_pow.empty()) t.u_pow.assign(static_cast<std::size_t>(nu_), 0);
    if (static_cast<int>(t.x_pow.size()) != nx_ || static_cast<int>(t.u_pow.size()) != nu_) {
      throw Error(ErrorKind::config, "monomial exponent count does not match the dimensions");
    }
    for (int p : t.x_pow) if (p < 0) throw Error(ErrorKind::config, "negative exponent");
    for (int p : t.u_pow) if (p < 0) throw Error(ErrorKind::config, "negative exponent");
  }
}

namespace {

double ipow(double v, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= v;
  return r;
}

double control_factor(const Monomial& t, const Vec& u) {
  double r = 1.0;
  for (std::size_t j = 0; j < t.u_pow.size(); ++j) r *= ipow(u(static_cast<Eigen::Index>(j)), t.u_pow[j]);
  return r;
}

}  // namespace

double Polynomial::operator()(const Vec& x, const Vec& u) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double r = t.coef * control_factor(t, u);
    for (std::size_t i = 0; i < t.x_pow.size(); ++i) r *= ipow(x(static_cast<Eigen::Index>(i)), t.x_pow[i]);
    acc += r;
  }
  return acc;
}

Vec Polynomial::gradient_x(const Vec& x, const Vec& u) const {
  Vec g = Vec::Zero(nx_);
  for (const auto& t : terms_) {
    const double cu = t.coef * control_factor(t, u);
    for (int k = 0; k < nx_; ++k) {
      const int pk = t.x_pow[static_cast<std::size_t>(k)];
      if (pk == 0) continue;
      double r = cu * pk;
      for (int i = 0; i < nx_; ++i) {
        const int p = t.x_pow[static_cast<std::size_t>(i)];
        r *= ipow(x(i), i == k ? p - 1 : p);
      }
      g(k) += r;
    }
  }
  return g;
}

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::config, what); }

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing key '") + key + "'");
  return j.at(key);
}

Vec to_vec(const json& j, int expect = -1) {
  if (!j.is_array()) bad("expected a number array");
  if (expect >= 0 && static_cast<int>(j.size()) != expect) bad("array has the wrong length");
  if (j.size() > static_cast<std::size_t>(kMaxLocationDim)) bad("array longer than the dimension limit");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Polynomial to_poly(const json& j, int nx, int nu) {
  if (!j.is_array()) bad("a polynomial is an array of monomials");
  std::vector<Monomial> terms;
  for (const auto& m : j) {
    Monomial t;
    t.coef = need(m, "c").get<double>();
    if (m.contains("x")) t.x_pow = m.at("x").get<std::vector<int>>();
    if (m.contains("u")) t.u_pow = m.at("u").get<std::vector<int>>();
    terms.push_back(std::move(t));
  }
  return Polynomial(nx, nu, std::move(terms));
}

std::vector<Polynomial> to_poly_list(const json& j, int count, int nx, int nu) {
  if (!j.is_array() || static_cast<int>(j.size()) != count) bad("need one polynomial per output component");
  std::vector<Polynomial> out;
  for (const auto& p : j) out.push_back(to_poly(p, nx, nu));
  return out;
}

Box to_box(const json& j, int dim) {
  const Vec lo = to_vec(need(j, "lower"), dim);
  const Vec hi = to_vec(need(j, "upper"), dim);
  if ((lo.array() > hi.array()).any()) bad("box lower bound above upper bound");
  return Box(lo, hi);
}

Preset builtin(const json& j) {
  const std::string name = need(j, "preset").get<std::string>();
  if (name == "example2") return example2(j.value("v_ref", 1.0));
  if (name == "lqr") return scalar_lqr(j.value("tf", 1.0));
  return preset_by_name(name);
}

Preset custom(const json& j) {
  Preset p;
  p.name = j.value("name", std::string("config"));
  HmpProblem& pb = p.problem;
  pb.t0 = j.value("t0", 0.0);
  pb.tf = need(j, "tf").get<double>();
  if (!(pb.tf > pb.t0)) bad("tf must exceed t0");

  const json& locs = need(j, "locations");
  if (!locs.is_array() || locs.empty()) bad("need at least one location");
  std::vector<int> dims;
  for (const auto& l : locs) {
    const int n = need(l, "state_dim").get<int>();
    if (n < 1 || n > kMaxLocationDim) bad("state_dim out of range");
    const Box ubox = to_box(need(l, "control"), -1);
    const int m = ubox.dim();
    const auto field = to_poly_list(need(l, "field"), n, n, m);
    LocationSpec spec;
    spec.name = need(l, "name").get<std::string>();
    spec.state_dim = n;
    spec.control_box = ubox;
    spec.field = [field](const Vec& x, const Vec& u) {
      Vec f(static_cast<Eigen::Index>(field.size()));
      for (std::size_t i = 0; i < field.size(); ++i) f(static_cast<Eigen::Index>(i)) = field[i](x, u);
      return f;
    };
    spec.field_jacobian = [field](const Vec& x, const Vec& u) {
      Mat a(static_cast<Eigen::Index>(field.size()), x.size());
      for (std::size_t i = 0; i < field.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = field[i].gradient_x(x, u).transpose();
      return a;
    };
    if (pb.system.find_location(spec.name)) bad("duplicate location name " + spec.name);
    const Location q = pb.system.add_location(std::move(spec));
    dims.push_back(n);
    if (l.contains("running")) {
      const Polynomial lq = to_poly(l.at("running"), n, m);
      pb.cost.running[q.id] = {[lq](const Vec& x, const Vec& u) { return lq(x, u); },
                               [lq](const Vec& x, const Vec& u) { return lq.gradient_x(x, u); }};
    }
  }
  auto location_named = [&](const json& v) {
    const auto q = pb.system.find_location(v.get<std::string>());
    if (!q) bad("unknown location " + v.get<std::string>());
    return *q;
  };

  if (j.contains("events")) {
    for (const auto& e : j.at("events")) {
      const Location from = location_named(need(e, "from"));
      const Location to = location_named(need(e, "to"));
      const int n = dims[static_cast<std::size_t>(from.id)];
      const int n2 = dims[static_cast<std::size_t>(to.id)];
      const std::string kind = e.value("kind", std::string("controlled"));
      if (kind != "controlled" && kind != "autonomous") bad("event kind must be controlled or autonomous");
      EventSpec spec;
      spec.name = need(e, "name").get<std::string>();
      spec.kind = kind == "autonomous" ? SwitchKind::autonomous : SwitchKind::controlled;
      const Vec none(0);
      if (e.contains("jump")) {
        const auto jm = to_poly_list(e.at("jump"), n2, n, 0);
        spec.jump = [jm, none](const Vec& x) {
          Vec y(static_cast<Eigen::Index>(jm.size()));
          for (std::size_t i = 0; i < jm.size(); ++i) y(static_cast<Eigen::Index>(i)) = jm[i](x, none);
          return y;
        };
        spec.jump_jacobian = [jm, none](const Vec& x) {
          Mat a(static_cast<Eigen::Index>(jm.size()), x.size());
          for (std::size_t i = 0; i < jm.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = jm[i].gradient_x(x, none).transpose();
          return a;
        };
      } else {
        if (n != n2) bad("a dimension-changing event needs an explicit jump");
        spec.jump = [](const Vec& x) { return x; };
        spec.jump_jacobian = [](const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); };
      }
      if (pb.system.find_event(spec.name)) bad("duplicate event name " + spec.name);
      const Event ev = pb.system.add_event(std::move(spec));
      pb.system.add_transition(from, ev, to);
      if (kind == "autonomous") {
        const Polynomial mp = to_poly(need(e, "manifold"), n, 0);
        pb.system.add_manifold({from, to, ev, [mp, none](const Vec& x) { return mp(x, none); },
                                [mp, none](const Vec& x) { return mp.gradient_x(x, none); }});
      } else if (e.contains("manifold")) {
        bad("only autonomous events carry a manifold");
      }
      if (e.contains("switching")) {
        const Polynomial c = to_poly(e.at("switching"), n, 0);
        pb.cost.switching[ev.id] = {[c, none](const Vec& x) { return c(x, none); },
                                    [c, none](const Vec& x) { return c.gradient_x(x, none); }};
      }
    }
  }

  const json& init = need(j, "initial");
  pb.q0 = location_named(need(init, "location"));
  pb.x0 = to_vec(need(init, "x"), dims[static_cast<std::size_t>(pb.q0.id)]);

  int n_final = dims[static_cast<std::size_t>(pb.q0.id)];
  Location q = pb.q0;
  if (j.contains("sequence")) {
    for (const auto& name : j.at("sequence")) {
      const auto ev = pb.system.find_event(name.get<std::string>());
      if (!ev) bad("unknown event " + name.get<std::string>());
      q = pb.system.next_location(q, *ev);
      pb.sequence.push_back(*ev);
    }
    n_final = dims[static_cast<std::size_t>(q.id)];
  }
  if (j.contains("terminal")) {
    const Polynomial g = to_poly(j.at("terminal"), n_final, 0);
    const Vec none(0);
    pb.cost.terminal = {[g, none](const Vec& x) { return g(x, none); },
                        [g, none](const Vec& x) { return g.gradient_x(x, none); }};
  }

  const std::size_t L = pb.sequence.size();
  if (j.contains("guess")) {
    const json& g = j.at("guess");
    p.guess.switch_times = g.value("switch_times", std::vector<double>{});
    p.guess.multipliers = g.value("multipliers", std::vector<double>{});
    if (p.guess.switch_times.size() != L) bad("guess needs one switch time per sequence event");
  } else {
    for (std::size_t i = 1; i <= L; ++i) p.guess.switch_times.push_back(pb.t0 + (pb.tf - pb.t0) * i / (L + 1));
  }

  if (j.contains("value_boxes")) {
    const json& vb = j.at("value_boxes");
    if (!vb.is_array() || vb.size() != locs.size()) bad("value_boxes needs one box per location");
    for (std::size_t i = 0; i < vb.size(); ++i) p.value_boxes.push_back(to_box(vb[i], dims[i]));
  } else {
    for (int n : dims) p.value_boxes.push_back(Box::Uniform(n, -2.0, 2.0));
  }
  const bool planar = *std::max_element(dims.begin(), dims.end()) > 1;
  p.grid_dx = planar ? 2.5e-2 : 1e-2;
  p.grid_dt = planar ? 2.5e-3 : 1e-3;
  if (j.contains("grid")) {
    p.grid_dx = j.at("grid").value("dx", p.grid_dx);
    p.grid_dt = j.at("grid").value("dt", p.grid_dt);
  }
  return p;
}

}  // namespace

Preset load_problem_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  try {
    return j.contains("preset") ? builtin(j) : custom(j);
  } catch (const json::exception& e) {
    bad(std::string("bad problem description: ") + e.what());
  }
}

Preset load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_problem_json(ss.str());
}

Preset resolve_problem(const std::string& source) {
  if (source.size() > 5 && source.ends_with(".json")) return load_problem_file(source);
  return preset_by_name(source);
}

}  // namespace hybridoc
