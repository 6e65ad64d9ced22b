#pragma once

#include <cmath>
#include <complex>

// Reference integrators for tests: recursive adaptive Simpson, deliberately
// unrelated to the Gauss–Legendre machinery under test.
namespace oracle {

template <class F, class T>
T simpson_step(F& f, double a, double b, T fa, T fm, T fb, T whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson on [a, b], pre-split into `pieces` equal parts.
template <class F>
auto integrate(F f, double a, double b, double tol = 1e-12, int pieces = 64) {
  using T = decltype(f(a));
  T total{};
  const double h = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == pieces) ? b : lo + h;
    const T fa = f(lo);
    const T fm = f(0.5 * (lo + hi));
    const T fb = f(hi);
    const T whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(f, lo, hi, fa, fm, fb, whole, tol / pieces, 40);
  }
  return total;
}

}  // namespace oracle
