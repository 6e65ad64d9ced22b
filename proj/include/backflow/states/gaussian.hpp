#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"

namespace backflow::states {

using gcplx = std::complex<double>;

/// How the plane-wave phase of each packet depends on time.
///   printed:           i p (x - p t)
///   schrodinger_exact: i (p x - p^2 t / 2), the free evolution with hbar = m = 1
enum class PhaseConvention { printed, schrodinger_exact };

struct GaussianComponent {
  double amplitude = 1.0;
  double momentum = 0.0;
};

/// Superposition of gaussian packets sharing the spatial width sigma:
///   psi(x, t) = N sum_k A_k (4 sigma^2 + 2 i t)^{-1/2} exp(phase_k - (x - p_k t)^2 / (4 sigma^2 + 2 i t)).
/// N is fixed numerically so that the state has unit norm at t = 0.
class GaussianSuperposition {
 public:
  GaussianSuperposition(std::vector<GaussianComponent> components, double sigma,
                        PhaseConvention convention = PhaseConvention::schrodinger_exact)
      : components_(std::move(components)), sigma_(sigma), convention_(convention) {
    require(!components_.empty(), "GaussianSuperposition: at least one component required");
    require(std::isfinite(sigma_) && sigma_ > 0.0, "GaussianSuperposition: sigma must be > 0");
    for (const auto& c : components_)
      require(std::isfinite(c.amplitude) && std::isfinite(c.momentum),
                      "GaussianSuperposition: non-finite amplitude or momentum");
    const double n2 = integrate_density(-14.0 * sigma_, 14.0 * sigma_, 0.0);
    if (!(n2 > 0.0)) throw InvalidArgument("GaussianSuperposition: state has zero norm");
    norm_ = 1.0 / std::sqrt(n2);
  }

  [[nodiscard]] const std::vector<GaussianComponent>& components() const { return components_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] PhaseConvention convention() const { return convention_; }
  [[nodiscard]] double norm_constant() const { return norm_; }

  /// Same amplitudes and width under another phase convention.
  [[nodiscard]] GaussianSuperposition with_convention(PhaseConvention c) const {
    return GaussianSuperposition(components_, sigma_, c);
  }

  /// Normalized psi(x, t) and d psi / dx, both in closed form.
  [[nodiscard]] std::pair<gcplx, gcplx> value_and_derivative(double x, double t) const {
    const gcplx q(4.0 * sigma_ * sigma_, 2.0 * t);
    const gcplx inv_sqrt_q = 1.0 / std::sqrt(q);
    gcplx psi = 0.0;
    gcplx dpsi = 0.0;
    for (const auto& c : components_) {
      const double p = c.momentum;
      const double X = x - p * t;
      const double phase = convention_ == PhaseConvention::printed ? p * X : p * x - 0.5 * p * p * t;
      const gcplx term = c.amplitude * inv_sqrt_q * std::exp(gcplx(0.0, phase) - X * X / q);
      psi += term;
      dpsi += term * (gcplx(0.0, p) - 2.0 * X / q);
    }
    return {norm_ * psi, norm_ * dpsi};
  }

  /// Width of each packet's density at time t.
  [[nodiscard]] double spread(double t) const {
    return std::sqrt(sigma_ * sigma_ + t * t / (4.0 * sigma_ * sigma_));
  }

  /// int_{lo}^{hi} |psi(x, t)|^2 dx (unnormalized when called before norm_ is set).
  [[nodiscard]] double integrate_density(double lo, double hi, double t) const {
    return integrate(lo, hi, t, [](gcplx psi, gcplx) { return std::norm(psi); });
  }

  /// int_{lo}^{hi} f(psi, d psi/dx) dx on panels that resolve the local wavenumber.
  template <class F>
  [[nodiscard]] double integrate(double lo, double hi, double t, F&& f) const {
    if (!(hi > lo)) return 0.0;
    double pmax = 0.0;
    for (const auto& c : components_) pmax = std::max(pmax, std::abs(c.momentum));
    // Local wavenumber grows linearly with distance through the chirp t / (4 sigma^4 + t^2).
    const double chirp = std::abs(t) / (4.0 * std::pow(sigma_, 4) + t * t);
    const double reach = std::max(std::abs(lo), std::abs(hi)) + pmax * std::abs(t);
    const double kmax = pmax + chirp * reach + 1.0;
    const double width = std::min(0.25 * spread(t), 1.0 / kmax);
    const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    const auto rule = numerics::composite_uniform(lo, hi, std::max<std::size_t>(panels, 1), 16);
    return rule.integrate([&](double x) {
      const auto [psi, dpsi] = value_and_derivative(x, t);
      return f(psi, dpsi);
    });
  }

 private:
  std::vector<GaussianComponent> components_;
  double sigma_;
  PhaseConvention convention_;
  double norm_ = 1.0;
};

inline gcplx gaussian_wavefunction(const GaussianSuperposition& g, double x, double t) {
  return g.value_and_derivative(x, t).first;
}

/// J(t) = Im[ conj(psi) d psi/dx ] at x = 0 (hbar = m = 1).
inline double gaussian_current(const GaussianSuperposition& g, double t) {
  const auto [psi, dpsi] = g.value_and_derivative(0.0, t);
  return (std::conj(psi) * dpsi).imag();
}

/// Mean kinetic energy <p^2/2> = (1/2) int |d psi/dx|^2 dx, conserved by free evolution.
inline double mean_energy(const GaussianSuperposition& g) {
  const double half = 14.0 * g.sigma();
  return 0.5 * g.integrate(-half, half, 0.0, [](gcplx, gcplx dpsi) { return std::norm(dpsi); });
}

/// Number of packet widths beyond the outermost centre where the density is
/// cut off; the neglected mass is below erfc(kTailWidths / sqrt 2) ~ 1e-32.
inline constexpr double kTailWidths = 12.0;

/// Probability of x < 0 at time t.
inline double prob_left(const GaussianSuperposition& g, double t) {
  require(std::isfinite(t), "prob_left: t must be finite");
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& c : g.components()) lowest = std::min(lowest, c.momentum * t);
  const double lo = lowest - kTailWidths * g.spread(t);
  if (lo >= 0.0) return 0.0;
  return std::clamp(g.integrate_density(lo, 0.0, t), 0.0, 1.0);
}

/// Probability that a momentum measurement gives p < 0. Each packet is a
/// gaussian exp(-sigma^2 (p - p_k)^2) in momentum; pair products are gaussians
/// centred on (p_k + p_l)/2 whose negative-p mass is an erfc.
inline double neg_momentum_prob(const GaussianSuperposition& g) {
  const double s = g.sigma();
  const auto& c = g.components();
  double total = 0.0;
  double negative = 0.0;
  for (const auto& k : c) {
    for (const auto& l : c) {
      const double d = k.momentum - l.momentum;
      const double m = 0.5 * (k.momentum + l.momentum);
      const double w = k.amplitude * l.amplitude * std::exp(-0.5 * s * s * d * d);
      total += w;
      negative += w * 0.5 * std::erfc(std::numbers::sqrt2 * s * m);
    }
  }
  return negative / total;
}

}  // namespace backflow::states
