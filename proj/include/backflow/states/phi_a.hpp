#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/numerics/special.hpp"
#include "backflow/numerics/transform.hpp"

// Closed-form transforms for the analytic trial state
//   phi_A(u) = N [ a e^{-b u} + (1/2 - C(u)) ].
// With h(u) = 1/2 - C(u) = sqrt(2/pi) int_u^inf cos(x^2) dx, swapping the order
// of integration (with an Abel convergence factor) gives
//   int_0^inf   h(u) e^{-i s u^2} du = sqrt(2/pi) (i/4) D(s),
//   D(s) = int_0^1 [1/(1 - s t^2 + i0) - 1/(1 + s t^2 - i0)] dt,
//   int_0^inf u h(u) e^{-i s u^2} du = -sqrt(2/pi) g(s) / (2 i s),
//   g(s) = (I(1 - s) + I(-1 - s))/2 - sqrt(pi/8),  I(k) = int_0^inf e^{i k x^2} dx.
// Both diverge at s = +-1, where the current of phi_A is singular.

namespace backflow::states::phi_a {

using numerics::cplx;

namespace detail {

inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

inline void check_time(double s) {
  if (!std::isfinite(s)) throw DomainError("phi_A transform: non-finite time");
  if (std::abs(std::abs(s) - 1.0) < 1e-13)
    throw DomainError("phi_A transform: diverges at |s| = 1");
}

// I(k) = int_0^inf exp(i k x^2) dx = (1/2) sqrt(pi/|k|) exp(i sgn(k) pi/4)
inline cplx fresnel_full(double k) {
  return 0.5 * std::sqrt(std::numbers::pi / std::abs(k)) *
         std::polar(1.0, (k > 0.0 ? 1.0 : -1.0) * std::numbers::pi / 4.0);
}

inline cplx kernel_d(double s) {
  const double as = std::abs(s);
  if (as < 0.5) {
    double sum = 0.0;
    double p = s;
    const double s2 = s * s;
    for (int j = 0; j < 200; ++j) {
      const double term = p / (4.0 * j + 3.0);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      p *= s2;
    }
    return 2.0 * sum;
  }
  const double r = std::sqrt(as);
  cplx d;
  if (as < 1.0) {
    d = (std::atanh(r) - std::atan(r)) / r;
  } else {
    const double pv = std::log((r + 1.0) / (r - 1.0)) / (2.0 * r);
    d = cplx(pv - std::atan(r) / r, -std::numbers::pi / (2.0 * r));
  }
  return s > 0.0 ? d : -std::conj(d);
}

}  // namespace detail

/// int_0^inf (1/2 - C(u)) e^{-i s u^2} du
inline cplx fresnel_part_m0(double s) {
  detail::check_time(s);
  return detail::kSqrt2OverPi * cplx(0.0, 0.25) * detail::kernel_d(s);
}

/// int_0^inf u (1/2 - C(u)) e^{-i s u^2} du
inline cplx fresnel_part_m1(double s) {
  detail::check_time(s);
  const cplx eip4 = std::polar(1.0, std::numbers::pi / 4.0);
  cplx g_over_s;
  if (std::abs(s) < 0.5) {
    // (1 + x)^{-1/2} - 1, divided by x, without cancellation
    auto q_over = [](double x) {
      if (x == 0.0) return -0.5;
      return std::expm1(-0.5 * std::log1p(x)) / x;
    };
    g_over_s = 0.25 * detail::kSqrtPi * (-eip4 * q_over(-s) + std::conj(eip4) * q_over(s));
  } else {
    const cplx g = 0.5 * (detail::fresnel_full(1.0 - s) + detail::fresnel_full(-1.0 - s)) -
                   std::sqrt(std::numbers::pi / 8.0);
    g_over_s = g / s;
  }
  return -detail::kSqrt2OverPi * g_over_s / cplx(0.0, 2.0);
}

/// int_0^inf u^m e^{-b u} e^{-i s u^2} du, evaluated on the ray u = r e^{-i sgn(s) pi/4}
/// where the integrand decays like exp(-|s| r^2 - b r / sqrt 2) without oscillating in s.
inline cplx exponential_part(double b, double s, int moment) {
  require(b > 0.0, "exponential_part: b must be > 0");
  require(moment == 0 || moment == 1, "exponential_part: moment must be 0 or 1");
  const double sigma = s >= 0.0 ? 1.0 : -1.0;
  const cplx dir = std::polar(1.0, -sigma * std::numbers::pi / 4.0);
  const double decay = b / std::numbers::sqrt2;
  double r_max = 45.0 / decay;
  if (s != 0.0) r_max = std::min(r_max, std::sqrt(45.0 / std::abs(s)));
  // Coarse panels near r = 0 dominate; 48 x 16 Gauss points resolve the
  // residual oscillation exp(-i b r sin(pi/4)) across the whole range.
  static thread_local numerics::QuadratureRule unit = numerics::composite_uniform(0.0, 1.0, 48, 16);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < unit.size(); ++k) {
    const double r = unit.nodes[k] * r_max;
    const cplx u = r * dir;
    cplx f = std::exp(-b * u - std::abs(s) * r * r);
    if (moment == 1) f *= u;
    sum += unit.weights[k] * f;
  }
  return sum * r_max * dir;
}

/// Unnormalized squared norm of a e^{-bu} + (1/2 - C(u)) on (0, inf).
inline double squared_norm(double a, double b) {
  // int (1/2 - C)^2 du = 1/(4 sqrt(pi)); the cross term follows by parts from
  // h(0) = 1/2 and h'(u) = -sqrt(2/pi) cos(u^2).
  const double cos_moment = exponential_part(b, 1.0, 0).real();
  const double cross = 0.5 / b - detail::kSqrt2OverPi * cos_moment / b;
  return a * a / (2.0 * b) + 2.0 * a * cross + 1.0 / (4.0 * detail::kSqrtPi);
}

/// Unnormalized value a e^{-bu} + (1/2 - C(u)).
inline double raw_value(double a, double b, double u) {
  return a * std::exp(-b * u) + 0.5 - numerics::fresnel_c(u);
}

/// Leading large-u behaviour of the unnormalized state, for tail corrections.
inline numerics::TailLaw raw_tail_law() {
  // 1/2 - C(u) ~ sqrt(2/pi) [ -sin(u^2)/(2u) + cos(u^2)/(4u^3) ]
  return {0.0, -0.5 * detail::kSqrt2OverPi, 0.25 * detail::kSqrt2OverPi, 0.0};
}

}  // namespace backflow::states::phi_a
