#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/numerics/special.hpp"

namespace backflow::numerics {

enum class TailMode { truncate, asymptotic_correction };

/// Large-u decay law  phi(u) ~ (c1 cos u^2 + d1 sin u^2)/u + (c3 cos u^2 + d3 sin u^2)/u^3.
struct TailLaw {
  double cos1 = 0.0;
  double sin1 = 0.0;
  double cos3 = 0.0;
  double sin3 = 0.0;
};

struct TailSpec {
  TailMode mode = TailMode::truncate;
  double u_max = 20.0;
  TailLaw law{};
};

namespace detail {

// int_U^inf exp(i k u^2) du, Abel-regularized.
inline cplx oscillatory_tail_0(double kappa, double U) {
  const double r = std::sqrt(std::abs(kappa));
  const cplx h = fresnel_tail(r * U) / r;
  return kappa > 0.0 ? h : std::conj(h);
}

// int_U^inf u^{p} exp(i k u^2) du for p in {0, -1, -2, -3}.
inline cplx oscillatory_tail(int power, double kappa, double U) {
  if (std::abs(kappa) * U * U < 1e-12)
    throw DomainError("half_line_transform: tail integral diverges at this time (|s| = 1)");
  const double Y = U * U;
  const cplx boundary = std::polar(1.0, kappa * Y);
  switch (power) {
    case 0:
      return oscillatory_tail_0(kappa, U);
    case -1:
      return 0.5 * expint_e1(cplx(0.0, -kappa * Y));
    case -2:
      return boundary / U + cplx(0.0, 2.0 * kappa) * oscillatory_tail_0(kappa, U);
    case -3:
      return 0.5 * (boundary / Y + cplx(0.0, kappa) * expint_e1(cplx(0.0, -kappa * Y)));
    default:
      throw InvalidArgument("oscillatory_tail: unsupported power " + std::to_string(power));
  }
}

}  // namespace detail

/// Analytic value of int_U^inf u^m phi_tail(u) e^{-i u^2 s} du for the decay law.
inline cplx asymptotic_tail(const TailLaw& law, double s, double U, int moment) {
  // cos u^2 e^{-isu^2} and sin u^2 e^{-isu^2} split into frequencies 1-s and -1-s.
  const double kp = 1.0 - s;
  const double km = -1.0 - s;
  const cplx i(0.0, 1.0);
  const cplx a1p = 0.5 * (law.cos1 - i * law.sin1);
  const cplx a1m = 0.5 * (law.cos1 + i * law.sin1);
  const cplx a3p = 0.5 * (law.cos3 - i * law.sin3);
  const cplx a3m = 0.5 * (law.cos3 + i * law.sin3);
  cplx total = 0.0;
  if (law.cos1 != 0.0 || law.sin1 != 0.0)
    total += a1p * detail::oscillatory_tail(moment - 1, kp, U) +
             a1m * detail::oscillatory_tail(moment - 1, km, U);
  if (law.cos3 != 0.0 || law.sin3 != 0.0)
    total += a3p * detail::oscillatory_tail(moment - 3, kp, U) +
             a3m * detail::oscillatory_tail(moment - 3, km, U);
  return total;
}

/// G_m(s) = int_0^inf u^m phi(u) exp(-i u^2 s) du by quadrature on `grid`,
/// optionally with the analytic tail beyond the grid's truncation point.
template <class Phi>
cplx half_line_transform(Phi&& phi, double s, const MomentumGrid& grid, const TailSpec& tail,
                         int moment) {
  require(moment == 0 || moment == 1, "half_line_transform: moment must be 0 or 1");
  require(std::isfinite(s), "half_line_transform: s must be finite");
  const auto u = grid.nodes();
  const auto w = grid.weights();
  cplx sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double value = phi(u[k]);
    if (!std::isfinite(value))
      throw DomainError("half_line_transform: state undefined at u = " + std::to_string(u[k]));
    const double weight = moment == 1 ? w[k] * u[k] : w[k];
    sum += weight * value * std::polar(1.0, -u[k] * u[k] * s);
  }
  if (tail.mode == TailMode::asymptotic_correction) sum += asymptotic_tail(tail.law, s, grid.u_max(), moment);
  return sum;
}

}  // namespace backflow::numerics
