#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/states/momentum_state.hpp"

namespace backflow::states {

enum class TimeUnits { dimensionless_s, natural_t };

/// Sampled current at the origin.
struct CurrentTrace {
  std::vector<double> times;
  std::vector<double> values;
  TimeUnits units = TimeUnits::dimensionless_s;

  void validate() const {
    require(times.size() == values.size(), "CurrentTrace: times and values differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
      require(times[i] > times[i - 1], "CurrentTrace: times must be strictly ascending");
  }
};

/// Probability crossing the origin during [t1, t2].
struct FluxWindow {
  double t1 = 0.0;
  double t2 = 0.0;
  double flux = 0.0;
};

inline constexpr double kDefaultSMax = 3.0;

/// Current at the origin for the rescaled state at rescaled time s, with the
/// interval [-T/2, T/2] mapped to s in [-1, 1]:
///   j(s) = (1/pi) Re[ conj(G_0(s)) G_1(s) ].
inline double dimensionless_current(const MomentumState& state, double s, double s_max = kDefaultSMax) {
  require(std::isfinite(s) && std::abs(s) <= s_max,
                  "dimensionless_current: |s| exceeds the configured s_max");
  const cplx g0 = state.transform(s, 0);
  const cplx g1 = state.transform(s, 1);
  return (std::conj(g0) * g1).real() / std::numbers::pi;
}

inline CurrentTrace sample_current(const MomentumState& state, std::span<const double> times,
                                   double s_max = kDefaultSMax) {
  CurrentTrace trace;
  trace.units = TimeUnits::dimensionless_s;
  trace.times.assign(times.begin(), times.end());
  trace.values.reserve(times.size());
  for (double s : times) trace.values.push_back(dimensionless_current(state, s, s_max));
  trace.validate();
  return trace;
}

/// Highest angular frequency present in j(s): the square of the largest
/// momentum the state carries on its evaluation grid.
inline double current_bandwidth(const MomentumState& state) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AnalyticA>) {
          return 0.0;
        } else {
          return f.grid.u_max() * f.grid.u_max();
        }
      },
      state.form());
}

/// Panel edges on [s1, s2]: uniform panels no wider than `width`, plus
/// geometric grading toward s = +-1 where extremal currents are singular.
inline std::vector<double> flux_panel_edges(double s1, double s2, double width) {
  std::vector<double> pts{s1, s2};
  const auto panels = static_cast<std::size_t>(std::ceil((s2 - s1) / width));
  for (std::size_t i = 1; i < panels; ++i) pts.push_back(s1 + (s2 - s1) * static_cast<double>(i) / static_cast<double>(panels));
  for (double c : {-1.0, 1.0}) {
    for (int k = 0; k <= 30; ++k) {
      const double d = 0.05 * std::ldexp(1.0, -k);
      for (double p : {c - d, c + d, c})
        if (p > s1 && p < s2) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// F(s1, s2) = int_{s1}^{s2} j(s) ds by composite Gauss–Legendre with at
/// least 200 effective nodes per unit s, refined near |s| = 1.
inline FluxWindow flux(const MomentumState& state, double s1, double s2, double s_max = kDefaultSMax) {
  require(std::isfinite(s1) && std::isfinite(s2) && s1 <= s2, "flux: requires s1 <= s2");
  if (s1 == s2) return {s1, s2, 0.0};
  constexpr std::size_t points = 8;
  double width = 8.0 / 200.0;
  const double band = current_bandwidth(state);
  if (band > 0.0) width = std::min(width, 3.0 / band);
  const auto edges = flux_panel_edges(s1, s2, width);
  const auto rule = numerics::composite_rule(edges, points);
  const double f = rule.integrate([&](double s) { return dimensionless_current(state, s, s_max); });
  return {s1, s2, f};
}

namespace detail {

inline double bisect_zero(const std::function<double(double)>& f, double lo, double hi, double flo) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Every maximal interval on which the sampled current is negative. With a
/// callable current, crossings are refined by bisection and the flux is
/// integrated by Gauss–Legendre; otherwise the linear interpolant is used.
inline std::vector<FluxWindow> negative_windows(const CurrentTrace& trace,
                                                const std::function<double(double)>& current = {}) {
  trace.validate();
  require(!trace.times.empty(), "negative_windows: empty trace");
  const auto& t = trace.times;
  const auto& j = trace.values;
  const std::size_t n = t.size();
  std::vector<FluxWindow> out;

  std::size_t i = 0;
  while (i < n) {
    if (!(j[i] < 0.0)) {
      ++i;
      continue;
    }
    std::size_t k = i;
    while (k + 1 < n && j[k + 1] < 0.0) ++k;

    double left = t[i];
    double right = t[k];
    if (i > 0) {
      left = current ? detail::bisect_zero(current, t[i - 1], t[i], j[i - 1])
                     : t[i - 1] + (t[i] - t[i - 1]) * j[i - 1] / (j[i - 1] - j[i]);
    }
    if (k + 1 < n) {
      right = current ? detail::bisect_zero(current, t[k], t[k + 1], j[k])
                      : t[k] + (t[k + 1] - t[k]) * j[k] / (j[k] - j[k + 1]);
    }

    double f = 0.0;
    if (right > left) {
      if (current) {
        const auto panels = std::max<std::size_t>(4, k - i + 2);
        f = numerics::composite_uniform(left, right, panels, 16).integrate(current);
      } else {
        // Trapezoid on the linear interpolant, crossings included.
        double prev_t = left;
        double prev_j = i > 0 ? 0.0 : j[i];
        for (std::size_t m = i; m <= k; ++m) {
          if (t[m] > prev_t) f += 0.5 * (prev_j + j[m]) * (t[m] - prev_t);
          prev_t = t[m];
          prev_j = j[m];
        }
        if (right > prev_t) f += 0.5 * prev_j * (right - prev_t);
      }
      out.push_back({left, right, f});
    }
    i = k + 1;
  }
  return out;
}

/// Negative-current window with the most negative integrated flux, or nothing
/// when the current is nowhere negative.
inline std::optional<FluxWindow> most_negative_window(const CurrentTrace& trace,
                                                      const std::function<double(double)>& current = {}) {
  const auto windows = negative_windows(trace, current);
  if (windows.empty()) return std::nullopt;
  return *std::min_element(windows.begin(), windows.end(),
                           [](const FluxWindow& a, const FluxWindow& b) { return a.flux < b.flux; });
}

}  // namespace backflow::states
