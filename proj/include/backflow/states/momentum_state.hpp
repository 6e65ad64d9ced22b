#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/numerics/transform.hpp"
#include "backflow/states/phi_a.hpp"

namespace backflow::states {

using numerics::cplx;
using numerics::MomentumGrid;

/// Analytic trial state a e^{-bu} + (1/2 - C(u)).
struct AnalyticA {
  double a = 0.0;
  double b = 1.0;
};

/// Samples on a quadrature grid; the state is the grid-weighted point set, so
/// transforms are the grid sums and the norm is the grid norm.
struct Tabulated {
  MomentumGrid grid;
  std::vector<double> values;
};

/// Arbitrary real sampler, integrated on `grid` with the given tail treatment.
struct Custom {
  std::function<double(double)> sampler;
  MomentumGrid grid;
  numerics::TailSpec tail;
};

/// Real positive-momentum wavefunction phi(u) in the rescaled momentum u,
/// normalized so that int_0^inf phi^2 du = 1.
class MomentumState {
 public:
  using Form = std::variant<AnalyticA, Tabulated, Custom>;

  [[nodiscard]] const Form& form() const { return form_; }
  [[nodiscard]] double norm_constant() const { return norm_; }

  /// Normalized value at u > 0. Tabulated states interpolate linearly between
  /// nodes and vanish beyond the last node.
  [[nodiscard]] double operator()(double u) const {
    return std::visit([&](const auto& f) { return norm_ * raw(f, u); }, form_);
  }

  /// G_m(s) = int_0^inf u^m phi(u) e^{-i u^2 s} du for m in {0, 1}.
  [[nodiscard]] cplx transform(double s, int moment) const {
    return std::visit([&](const auto& f) { return norm_ * raw_transform(f, s, moment); }, form_);
  }

  /// Unit-norm check under the state's own evaluation rule.
  [[nodiscard]] double squared_norm() const {
    return std::visit([&](const auto& f) { return norm_ * norm_ * raw_squared_norm(f); }, form_);
  }

  [[nodiscard]] bool is_analytic() const { return std::holds_alternative<AnalyticA>(form_); }

  friend MomentumState make_phi_A(double a, double b);
  friend MomentumState make_tabulated(MomentumGrid grid, std::vector<double> values);
  friend MomentumState make_custom(std::function<double(double)> sampler, MomentumGrid grid,
                                   numerics::TailSpec tail);

 private:
  explicit MomentumState(Form form) : form_(std::move(form)) {
    const double n2 = std::visit([](const auto& f) { return raw_squared_norm(f); }, form_);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw InvalidArgument("MomentumState: state has zero or undefined norm");
    norm_ = 1.0 / std::sqrt(n2);
  }

  static double raw(const AnalyticA& f, double u) { return phi_a::raw_value(f.a, f.b, u); }
  static double raw(const Tabulated& f, double u) {
    const auto x = f.grid.nodes();
    if (u <= x.front()) return f.values.front();
    if (u > x.back()) return 0.0;
    const auto it = std::lower_bound(x.begin(), x.end(), u);
    const auto i = static_cast<std::size_t>(std::distance(x.begin(), it));
    const double t = (u - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - t) * f.values[i - 1] + t * f.values[i];
  }
  static double raw(const Custom& f, double u) { return f.sampler(u); }

  static cplx raw_transform(const AnalyticA& f, double s, int moment) {
    const cplx smooth = phi_a::exponential_part(f.b, s, moment);
    const cplx fres = moment == 0 ? phi_a::fresnel_part_m0(s) : phi_a::fresnel_part_m1(s);
    return f.a * smooth + fres;
  }
  static cplx raw_transform(const Tabulated& f, double s, int moment) {
    const auto u = f.grid.nodes();
    const auto w = f.grid.weights();
    cplx sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double wk = moment == 1 ? w[k] * u[k] : w[k];
      sum += wk * f.values[k] * std::polar(1.0, -u[k] * u[k] * s);
    }
    return sum;
  }
  static cplx raw_transform(const Custom& f, double s, int moment) {
    return numerics::half_line_transform(f.sampler, s, f.grid, f.tail, moment);
  }

  static double raw_squared_norm(const AnalyticA& f) { return phi_a::squared_norm(f.a, f.b); }
  static double raw_squared_norm(const Tabulated& f) {
    const auto w = f.grid.weights();
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * f.values[k] * f.values[k];
    return sum;
  }
  static double raw_squared_norm(const Custom& f) {
    double sum = f.grid.integrate([&](double u) {
      const double v = f.sampler(u);
      if (!std::isfinite(v)) throw DomainError("MomentumState: sampler undefined at u = " + std::to_string(u));
      return v * v;
    });
    if (f.tail.mode == numerics::TailMode::asymptotic_correction) {
      // Square of the decay law beyond the grid: the mean part, the
      // double-frequency part, and the 1/u^4 cross term's mean.
      const auto& l = f.tail.law;
      const double U = f.grid.u_max();
      const cplx osc = numerics::detail::oscillatory_tail(-2, 2.0, U);
      sum += 0.5 * (l.cos1 * l.cos1 + l.sin1 * l.sin1) / U;
      sum += 0.5 * ((l.cos1 * l.cos1 - l.sin1 * l.sin1) * osc.real() + 2.0 * l.cos1 * l.sin1 * osc.imag());
      sum += (l.cos1 * l.cos3 + l.sin1 * l.sin3) / (3.0 * U * U * U);
    }
    return sum;
  }

  Form form_;
  double norm_ = 1.0;
};

/// phi_A(u) = N [ a e^{-b u} + (1/2 - C(u)) ], normalized analytically.
inline MomentumState make_phi_A(double a, double b) {
  require(std::isfinite(a) && a >= 0.0, "make_phi_A: a must be >= 0");
  require(std::isfinite(b) && b > 0.0, "make_phi_A: b must be > 0");
  return MomentumState(AnalyticA{a, b});
}

/// Samples on `grid`, renormalized under the grid quadrature.
inline MomentumState make_tabulated(MomentumGrid grid, std::vector<double> values) {
  require(values.size() == grid.size(), "make_tabulated: one value per grid node required");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("make_tabulated: non-finite sample");
  return MomentumState(Tabulated{std::move(grid), std::move(values)});
}

inline MomentumState make_custom(std::function<double(double)> sampler, MomentumGrid grid,
                                 numerics::TailSpec tail = {}) {
  require(static_cast<bool>(sampler), "make_custom: sampler required");
  tail.u_max = grid.u_max();
  return MomentumState(Custom{std::move(sampler), std::move(grid), tail});
}

/// phi_A represented through its sampler on a grid, with the analytic
/// 1/u, 1/u^3 tail added beyond the grid. Independent of the closed forms.
inline MomentumState make_phi_A_sampled(double a, double b, MomentumGrid grid,
                                        numerics::TailMode mode = numerics::TailMode::asymptotic_correction) {
  require(a >= 0.0 && b > 0.0, "make_phi_A_sampled: requires a >= 0, b > 0");
  numerics::TailSpec tail{mode, grid.u_max(), phi_a::raw_tail_law()};
  return make_custom([a, b](double u) { return phi_a::raw_value(a, b, u); }, std::move(grid), tail);
}

}  // namespace backflow::states
