#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "backflow/errors.hpp"

// Fresnel integrals in the normalization
//   C(u) = sqrt(2/pi) * int_0^u cos(x^2) dx,   S(u) = sqrt(2/pi) * int_0^u sin(x^2) dx,
// so that C, S -> 1/2 as u -> infinity, plus the exponential integral E1 for
// complex argument. Both feed the analytic tails of half-line transforms.

namespace backflow::numerics {

using cplx = std::complex<double>;

namespace detail {

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
inline constexpr double kFresnelSeriesLimit = 2.0;
inline constexpr double kFresnelAsymptoticLimit = 6.0;

// int_0^u exp(i x^2) dx by its Maclaurin series; |u| <= 2 keeps the largest
// term below ~5 so cancellation costs at most one digit.
inline cplx fresnel_raw_series(double u) {
  const double u2 = u * u;
  const double u4 = u2 * u2;
  double c = 0.0;
  double s = 0.0;
  double term = u;  // u^{4n+1} / (2n)! with alternating sign
  for (int n = 0; n < 60; ++n) {
    const double cn = term / (4.0 * n + 1.0);
    const double sterm = term * u2 / (2.0 * n + 1.0);  // u^{4n+3} / (2n+1)!
    const double sn = sterm / (4.0 * n + 3.0);
    c += cn;
    s += sn;
    if (std::abs(cn) < 1e-18 * std::abs(c) && std::abs(sn) < 1e-18 * (std::abs(s) + 1e-300)) break;
    term *= -u4 / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
  }
  return {c, s};
}

// Tail int_u^inf exp(i x^2) dx = (1/2) e^{i pi/4} e^{i u^2} / K(z), z = e^{-i pi/4} u,
// with K(z) = z + (1/2)/(z + 1/(z + (3/2)/(z + ...))), evaluated by modified Lentz.
inline cplx fresnel_tail_continued_fraction(double u) {
  const cplx eip4 = std::polar(1.0, std::numbers::pi / 4.0);
  const cplx z = u * std::conj(eip4);
  constexpr double tiny = 1e-300;
  cplx f = z;
  cplx c = f;
  cplx d = 0.0;
  for (int k = 1; k < 5000; ++k) {
    const double a = 0.5 * k;
    d = z + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = z + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const cplx delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) {
      return 0.5 * eip4 * std::polar(1.0, u * u) / f;
    }
  }
  throw ConvergenceFailure("fresnel continued fraction did not converge");
}

// Same tail from the asymptotic series sum_k (-1)^k (2k-1)!! / (2 z^2)^k; the
// magnitude of the first omitted term bounds the remainder.
inline cplx fresnel_tail_asymptotic(double u, double* remainder = nullptr) {
  const cplx eip4 = std::polar(1.0, std::numbers::pi / 4.0);
  const cplx z = u * std::conj(eip4);
  const cplx inv2z2 = 1.0 / (2.0 * z * z);
  cplx sum = 1.0;
  cplx term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const cplx next = term * (-(2.0 * k - 1.0)) * inv2z2;
    const double mag = std::abs(next);
    if (mag > last) break;  // series has started to diverge
    term = next;
    last = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  if (remainder) *remainder = last * 0.5 / u;
  return 0.5 * eip4 * std::polar(1.0, u * u) * sum / z;
}

}  // namespace detail

/// int_u^inf exp(i x^2) dx for u >= 0.
inline cplx fresnel_tail(double u) {
  require(u >= 0.0 && std::isfinite(u), "fresnel_tail: u must be finite and >= 0");
  if (u <= detail::kFresnelSeriesLimit) {
    const cplx full = 0.5 * std::sqrt(std::numbers::pi) * std::polar(1.0, std::numbers::pi / 4.0);
    return full - detail::fresnel_raw_series(u);
  }
  if (u <= detail::kFresnelAsymptoticLimit) return detail::fresnel_tail_continued_fraction(u);
  return detail::fresnel_tail_asymptotic(u);
}

/// C(u) + i S(u) in the sqrt(2/pi) normalization; odd in u.
inline cplx fresnel_cs(double u) {
  if (!std::isfinite(u)) throw DomainError("fresnel: non-finite argument");
  const double a = std::abs(u);
  cplx v;
  if (a <= detail::kFresnelSeriesLimit) {
    v = detail::kSqrt2OverPi * detail::fresnel_raw_series(a);
  } else {
    v = cplx(0.5, 0.5) - detail::kSqrt2OverPi * fresnel_tail(a);
  }
  return u < 0.0 ? -v : v;
}

inline double fresnel_c(double u) { return fresnel_cs(u).real(); }
inline double fresnel_s(double u) { return fresnel_cs(u).imag(); }

/// Exponential integral E1(z) = int_1^inf e^{-z t} / t dt for Re z >= 0, z != 0.
inline cplx expint_e1(cplx z) {
  if (z == cplx(0.0) || z.real() < 0.0) throw DomainError("expint_e1: requires Re z >= 0 and z != 0");
  constexpr double euler_gamma = 0.57721566490153286061;
  if (std::abs(z) <= 2.0) {
    cplx sum = 0.0;
    cplx term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -z / static_cast<double>(k);
      const cplx add = term / static_cast<double>(k);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -euler_gamma - std::log(z) - sum;
  }
  // E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...)))
  constexpr double tiny = 1e-300;
  cplx b = z + 1.0;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const cplx del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-z);
  }
  throw ConvergenceFailure("expint_e1: continued fraction did not converge");
}

}  // namespace backflow::numerics
