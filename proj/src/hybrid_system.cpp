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
#include "hybridoc/hybrid_system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace hybridoc {

namespace {

double fd_step(double xi) { return 1e-6 * std::max(1.0, std::abs(xi)); }

void check_dim(const Vec& x, int expected, const char* what) {
  if (x.size() != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << x.size();
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x) {
  Vec g(x.size());
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = fd_step(x(i));
    xp(i) = x(i) + h;
    const double fp = fn(xp);
    xp(i) = x(i) - h;
    const double fm = fn(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x) {
  Mat jac;
  Vec xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = fd_step(x(i));
    xp(i) = x(i) + h;
    const Vec fp = fn(xp);
    xp(i) = x(i) - h;
    const Vec fm = fn(xp);
    xp(i) = x(i);
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2 * h);
  }
  return jac;
}

HybridSystem::HybridSystem() {
  events_.push_back(EventSpec{"id", SwitchKind::controlled, [](const Vec& x) { return x; },
                              [](const Vec& x) -> Mat {
                                return Mat::Identity(x.size(), x.size());
                              }});
}

Location HybridSystem::add_location(LocationSpec spec) {
  if (spec.state_dim < 1 || spec.state_dim > kMaxLocationDim) {
    throw Error(ErrorKind::dimension_mismatch, "location state dimension out of range");
  }
  if (spec.control_box.dim() < 1 || spec.control_box.dim() > kMaxLocationDim) {
    throw Error(ErrorKind::dimension_mismatch, "location control dimension out of range");
  }
  if (!spec.field) throw Error(ErrorKind::config, "location '" + spec.name + "' has no field");
  locations_.push_back(std::move(spec));
  return Location{static_cast<int>(locations_.size()) - 1};
}

Event HybridSystem::add_event(EventSpec spec) {
  if (!spec.jump) throw Error(ErrorKind::config, "event '" + spec.name + "' has no jump map");
  events_.push_back(std::move(spec));
  return Event{static_cast<int>(events_.size()) - 1};
}

void HybridSystem::add_transition(Location from, Event event, Location to) {
  (void)location(from);
  (void)location(to);
  (void)this->event(event);
  if (event == kIdentityEvent) {
    throw Error(ErrorKind::config, "the identity event cannot be redefined");
  }
  for (const auto& tr : transitions_) {
    if (tr.from == from && tr.event == event) {
      throw Error(ErrorKind::config, "duplicate transition for (location, event)");
    }
  }
  transitions_.push_back({from, event, to});
}

void HybridSystem::add_manifold(ManifoldSpec spec) {
  if (!spec.value) throw Error(ErrorKind::config, "manifold without value function");
  (void)location(spec.from);
  (void)location(spec.to);
  (void)event(spec.event);
  manifolds_.push_back(std::move(spec));
}

const LocationSpec& HybridSystem::location(Location q) const {
  if (q.id < 0 || q.id >= location_count()) {
    throw Error(ErrorKind::config, "unknown location id " + std::to_string(q.id));
  }
  return locations_[static_cast<std::size_t>(q.id)];
}

const EventSpec& HybridSystem::event(Event e) const {
  if (e.id < 0 || e.id >= event_count()) {
    throw Error(ErrorKind::config, "unknown event id " + std::to_string(e.id));
  }
  return events_[static_cast<std::size_t>(e.id)];
}

std::optional<Location> HybridSystem::find_location(const std::string& name) const {
  for (int i = 0; i < location_count(); ++i) {
    if (locations_[static_cast<std::size_t>(i)].name == name) return Location{i};
  }
  return std::nullopt;
}

std::optional<Event> HybridSystem::find_event(const std::string& name) const {
  for (int i = 0; i < event_count(); ++i) {
    if (events_[static_cast<std::size_t>(i)].name == name) return Event{i};
  }
  return std::nullopt;
}

std::optional<Location> HybridSystem::transition(Location q, Event e) const {
  if (e == kIdentityEvent) return q;
  for (const auto& tr : transitions_) {
    if (tr.from == q && tr.event == e) return tr.to;
  }
  return std::nullopt;
}

Location HybridSystem::next_location(Location q, Event e) const {
  auto to = transition(q, e);
  if (!to) {
    throw Error(ErrorKind::transition_undefined,
                "no transition from '" + location(q).name + "' on '" + event(e).name + "'");
  }
  return *to;
}

Vec HybridSystem::field(Location q, const Vec& x, const Vec& u) const {
  return location(q).field(x, u);
}

Mat HybridSystem::field_jacobian(Location q, const Vec& x, const Vec& u) const {
  const auto& loc = location(q);
  if (loc.field_jacobian) return loc.field_jacobian(x, u);
  return fd_jacobian([&](const Vec& y) { return loc.field(y, u); }, x);
}

Vec HybridSystem::jump(Event e, const Vec& x) const { return event(e).jump(x); }

Mat HybridSystem::jump_jacobian(Event e, const Vec& x) const {
  const auto& ev = event(e);
  if (ev.jump_jacobian) return ev.jump_jacobian(x);
  return fd_jacobian(ev.jump, x);
}

std::vector<const ManifoldSpec*> HybridSystem::manifolds_from(Location q) const {
  std::vector<const ManifoldSpec*> out;
  for (const auto& m : manifolds_) {
    if (m.from == q) out.push_back(&m);
  }
  return out;
}

const ManifoldSpec* HybridSystem::manifold_for(Location q, Event e) const {
  for (const auto& m : manifolds_) {
    if (m.from == q && m.event == e) return &m;
  }
  return nullptr;
}

double HybridSystem::manifold_value(const ManifoldSpec& m, const Vec& x) const {
  return m.value(x);
}

Vec HybridSystem::manifold_gradient(const ManifoldSpec& m, const Vec& x) const {
  if (m.gradient) return m.gradient(x);
  return fd_gradient(m.value, x);
}

double CostSpec::running_value(Location q, const Vec& x, const Vec& u) const {
  auto it = running.find(q.id);
  if (it == running.end() || !it->second.value) return 0.0;
  return it->second.value(x, u);
}

Vec CostSpec::running_gradient(Location q, const Vec& x, const Vec& u) const {
  auto it = running.find(q.id);
  if (it == running.end() || !it->second.value) return Vec::Zero(x.size());
  if (it->second.gradient_x) return it->second.gradient_x(x, u);
  const auto& fn = it->second.value;
  return fd_gradient([&](const Vec& y) { return fn(y, u); }, x);
}

double CostSpec::switching_value(Event e, const Vec& x) const {
  auto it = switching.find(e.id);
  if (it == switching.end() || !it->second.value) return 0.0;
  return it->second.value(x);
}

Vec CostSpec::switching_gradient(Event e, const Vec& x) const {
  auto it = switching.find(e.id);
  if (it == switching.end() || !it->second.value) return Vec::Zero(x.size());
  if (it->second.gradient) return it->second.gradient(x);
  return fd_gradient(it->second.value, x);
}

double CostSpec::terminal_value(const Vec& x) const {
  return terminal.value ? terminal.value(x) : 0.0;
}

Vec CostSpec::terminal_gradient(const Vec& x) const {
  if (!terminal.value) return Vec::Zero(x.size());
  if (terminal.gradient) return terminal.gradient(x);
  return fd_gradient(terminal.value, x);
}

ControlLaw HybridInput::Constant(const Vec& u) {
  return [u](const ControlContext&, const Vec&) { return u; };
}

ControlLaw HybridInput::OpenLoop(std::function<Vec(double)> u) {
  return [u = std::move(u)](const ControlContext& ctx, const Vec&) { return u(ctx.t); };
}

std::vector<double> HybridTrajectory::switch_times() const {
  std::vector<double> out;
  out.reserve(switches.size());
  for (const auto& s : switches) out.push_back(s.time);
  return out;
}

std::vector<Location> HybridTrajectory::discrete_path() const {
  std::vector<Location> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.location);
  return out;
}

std::size_t HybridTrajectory::segment_index(double t) const {
  std::size_t k = 0;
  while (k + 1 < segments.size() && t >= segments[k + 1].start()) ++k;
  return k;
}

Vec HybridTrajectory::state_at(double t) const { return segments[segment_index(t)].state.at(t); }

JumpResult jump(const HybridSystem& sys, Location q, Event e, const Vec& x) {
  check_dim(x, sys.state_dim(q), "jump pre-state");
  const Location to = sys.next_location(q, e);
  Vec y = sys.jump(e, x);
  check_dim(y, sys.state_dim(to), "jump post-state");
  return {to, std::move(y)};
}

double manifold_value(const HybridSystem& sys, Location from, Location to, const Vec& x) {
  check_dim(x, sys.state_dim(from), "manifold argument");
  for (const auto& m : sys.manifolds()) {
    if (m.from == from && m.to == to) return m.value(x);
  }
  throw Error(ErrorKind::transition_undefined, "no manifold between the given locations");
}

namespace {

/// Radical inverse in base b; deterministic low-discrepancy sampling.
double halton(std::uint64_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return r;
}

constexpr std::array<int, 32> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                      37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                      83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

Vec sample_box(const Box& box, std::uint64_t index, int prime_offset) {
  Vec v(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    const double s = halton(index + 1, kPrimes[static_cast<std::size_t>(prime_offset + i)]);
    v(i) = box.lower(i) + s * (box.upper(i) - box.lower(i));
  }
  return v;
}

}  // namespace

ValidationReport validate_system(const HybridSystem& sys, const CostSpec& cost, Location q0,
                                 const Vec& x0, const ValidationOptions& options) {
  ValidationReport report;
  auto violate = [&](AssumptionKind kind, std::string msg) {
    report.violations.push_back({kind, std::move(msg)});
  };

  check_dim(x0, sys.state_dim(q0), "initial state");

  std::vector<Box> boxes = options.state_boxes;
  for (int q = static_cast<int>(boxes.size()); q < sys.location_count(); ++q) {
    boxes.push_back(Box::Uniform(sys.state_dim(Location{q}), -2.0, 2.0));
  }

  for (const auto& tr : sys.transitions()) {
    const auto& ev = sys.event(tr.event);
    if (ev.kind == SwitchKind::autonomous && sys.manifold_for(tr.from, tr.event) == nullptr) {
      violate(AssumptionKind::automaton, "autonomous event '" + ev.name + "' from '" +
                                             sys.location(tr.from).name + "' has no manifold");
    }
  }
  for (const auto& m : sys.manifolds()) {
    auto to = sys.transition(m.from, m.event);
    if (!to || *to != m.to) {
      violate(AssumptionKind::automaton,
              "manifold event '" + sys.event(m.event).name + "' disagrees with the automaton");
    }
  }

  for (const auto* m : sys.manifolds_from(q0)) {
    if (std::abs(m->value(x0)) <= 1e-12) {
      violate(AssumptionKind::initial_on_manifold,
              "initial state lies on the manifold to '" + sys.location(m->to).name + "'");
    }
  }

  const auto samples = static_cast<std::uint64_t>(std::max(1, options.samples));
  report.lipschitz_estimates.assign(static_cast<std::size_t>(sys.location_count()), 0.0);
  for (int qi = 0; qi < sys.location_count(); ++qi) {
    const Location q{qi};
    const auto& loc = sys.location(q);
    const Box& box = boxes[static_cast<std::size_t>(qi)];
    const int n = loc.state_dim;
    const int m = loc.control_box.dim();
    const double diam = (box.upper - box.lower).norm();
    const double band = options.manifold_band * diam;
    const auto manifolds = sys.manifolds_from(q);

    double lip = 0.0;
    double worst_running = 0.0;
    double worst_terminal = 0.0;
    bool overlap = false;
    for (std::uint64_t k = 0; k < samples; ++k) {
      const Vec x = sample_box(box, k, 0);
      const Vec u = sample_box(loc.control_box, k, n);
      // Partner point along a low-discrepancy direction at a small radius.
      Vec dx(n);
      Vec du(m);
      for (int i = 0; i < n; ++i) dx(i) = halton(k + 7, kPrimes[static_cast<std::size_t>(n + m + i)]) - 0.5;
      for (int i = 0; i < m; ++i) du(i) = halton(k + 7, kPrimes[static_cast<std::size_t>(2 * n + m + i)]) - 0.5;
      const double scale = 1e-4 * std::max(diam, 1e-12);
      const double dnorm = std::sqrt(dx.squaredNorm() + du.squaredNorm());
      if (dnorm > 0) {
        dx *= scale / dnorm;
        du *= scale / dnorm;
        const Vec f1 = loc.field(x, u);
        const Vec f2 = loc.field(x + dx, loc.control_box.project(u + du));
        const Vec du_eff = loc.control_box.project(u + du) - u;
        const double denom = std::sqrt(dx.squaredNorm() + du_eff.squaredNorm());
        const double ratio = (f2 - f1).norm() / denom;
        lip = std::isfinite(ratio) ? std::max(lip, ratio) : std::numeric_limits<double>::infinity();
      }
      const double lr = cost.running_value(q, x, u);
      if (!std::isfinite(lr)) worst_running = -std::numeric_limits<double>::infinity();
      else worst_running = std::min(worst_running, lr);
      const double gt = cost.terminal_value(x);
      if (!std::isfinite(gt)) worst_terminal = -std::numeric_limits<double>::infinity();
      else worst_terminal = std::min(worst_terminal, gt);

      for (const auto& tr : sys.transitions()) {
        if (tr.from != q) continue;
        const double c = cost.switching_value(tr.event, x);
        if (!std::isfinite(c) || c < -1e-12) {
          violate(AssumptionKind::cost_sign, "switching cost of '" + sys.event(tr.event).name +
                                                 "' negative or non-finite on the sample box");
          break;
        }
      }
      for (std::size_t a = 0; a < manifolds.size() && !overlap; ++a) {
        for (std::size_t b = a + 1; b < manifolds.size(); ++b) {
          if (manifolds[a]->to == manifolds[b]->to) continue;
          if (std::abs(manifolds[a]->value(x)) <= band && std::abs(manifolds[b]->value(x)) <= band) {
            overlap = true;
            violate(AssumptionKind::manifold_overlap,
                    "manifolds to '" + sys.location(manifolds[a]->to).name + "' and '" +
                        sys.location(manifolds[b]->to).name + "' intersect near a sample");
            break;
          }
        }
      }
    }
    report.lipschitz_estimates[static_cast<std::size_t>(qi)] = lip;
    if (!std::isfinite(lip)) {
      violate(AssumptionKind::lipschitz, "field of '" + loc.name + "' is not Lipschitz on the box");
    }
    if (worst_running < -1e-12) {
      violate(AssumptionKind::cost_sign, "running cost of '" + loc.name + "' negative or non-finite");
    }
    if (worst_terminal < -1e-12) {
      violate(AssumptionKind::cost_sign, "terminal cost negative or non-finite on '" + loc.name + "'");
    }
  }
  // Switching-cost violations are reported once per event.
  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) { return a.message < b.message; });
  report.violations.erase(
      std::unique(report.violations.begin(), report.violations.end(),
                  [](const Violation& a, const Violation& b) { return a.message == b.message; }),
      report.violations.end());
  return report;
}

Vec MayerProblem::Augment(const Vec& x) {
  Vec y(x.size() + 1);
  y(0) = 0.0;
  y.tail(x.size()) = x;
  return y;
}

MayerProblem to_mayer(const HybridSystem& sys, const CostSpec& cost,
                      const std::map<int, ControlMinimizer>& minimizers) {
  auto base = std::make_shared<const HybridSystem>(sys);
  auto bolza = std::make_shared<const CostSpec>(cost);
  MayerProblem out;

  for (int qi = 0; qi < sys.location_count(); ++qi) {
    const Location q{qi};
    const auto& loc = sys.location(q);
    if (loc.state_dim + 1 > kMaxLocationDim) {
      throw Error(ErrorKind::dimension_mismatch, "augmented state exceeds the dimension limit");
    }
    LocationSpec spec;
    spec.name = loc.name;
    spec.state_dim = loc.state_dim + 1;
    spec.control_box = loc.control_box;
    spec.field = [base, bolza, q](const Vec& xh, const Vec& u) {
      const Vec x = xh.tail(xh.size() - 1);
      Vec out(xh.size());
      out(0) = bolza->running_value(q, x, u);
      out.tail(x.size()) = base->field(q, x, u);
      return out;
    };
    spec.field_jacobian = [base, bolza, q](const Vec& xh, const Vec& u) {
      const Vec x = xh.tail(xh.size() - 1);
      const auto n = x.size();
      Mat jac = Mat::Zero(n + 1, n + 1);
      jac.block(0, 1, 1, n) = bolza->running_gradient(q, x, u).transpose();
      jac.block(1, 1, n, n) = base->field_jacobian(q, x, u);
      return jac;
    };
    out.system.add_location(std::move(spec));
  }

  for (int ei = 1; ei < sys.event_count(); ++ei) {
    const Event e{ei};
    EventSpec spec;
    spec.name = sys.event(e).name;
    spec.kind = sys.event(e).kind;
    spec.jump = [base, bolza, e](const Vec& xh) {
      const Vec x = xh.tail(xh.size() - 1);
      const Vec y = base->jump(e, x);
      Vec out(y.size() + 1);
      out(0) = xh(0) + bolza->switching_value(e, x);
      out.tail(y.size()) = y;
      return out;
    };
    spec.jump_jacobian = [base, bolza, e](const Vec& xh) {
      const Vec x = xh.tail(xh.size() - 1);
      const Mat jx = base->jump_jacobian(e, x);
      Mat jac = Mat::Zero(jx.rows() + 1, x.size() + 1);
      jac(0, 0) = 1.0;
      jac.block(0, 1, 1, x.size()) = bolza->switching_gradient(e, x).transpose();
      jac.block(1, 1, jx.rows(), x.size()) = jx;
      return jac;
    };
    out.system.add_event(std::move(spec));
  }

  for (const auto& tr : sys.transitions()) out.system.add_transition(tr.from, tr.event, tr.to);

  for (const auto& m : sys.manifolds()) {
    ManifoldSpec spec;
    spec.from = m.from;
    spec.to = m.to;
    spec.event = m.event;
    const ManifoldSpec* orig = base->manifold_for(m.from, m.event);
    spec.value = [base, orig](const Vec& xh) { return orig->value(xh.tail(xh.size() - 1)); };
    spec.gradient = [base, orig](const Vec& xh) {
      Vec g = Vec::Zero(xh.size());
      g.tail(xh.size() - 1) = base->manifold_gradient(*orig, xh.tail(xh.size() - 1));
      return g;
    };
    out.system.add_manifold(std::move(spec));
  }

  out.cost.terminal.value = [bolza](const Vec& xh) {
    return xh(0) + bolza->terminal_value(xh.tail(xh.size() - 1));
  };
  out.cost.terminal.gradient = [bolza](const Vec& xh) {
    Vec g(xh.size());
    g(0) = 1.0;
    g.tail(xh.size() - 1) = bolza->terminal_gradient(xh.tail(xh.size() - 1));
    return g;
  };

  for (const auto& [qid, minimizer] : minimizers) {
    out.minimizers[qid] = [minimizer](const Vec& xh, const Vec& lh) {
      if (!(lh(0) > 0.0)) {
        throw Error(ErrorKind::config, "Mayer costate component must be positive");
      }
      return minimizer(xh.tail(xh.size() - 1), lh.tail(lh.size() - 1) / lh(0));
    };
  }
  return out;
}

}  // namespace hybridoc
