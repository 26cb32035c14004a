#pragma once

#include "hybridoc/hybrid_system.hpp"

#include <cmath>

namespace hybridoc::test {

inline Vec v1(double a) { return Vec::Constant(1, a); }

inline Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// One-dimensional root bracketed by [a, b].
template <class F>
double bisect(F&& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace hybridoc::test
