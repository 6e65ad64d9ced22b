#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/states/current.hpp"

namespace backflow::measure {

using cplx = std::complex<double>;

/// Uniform periodic grid x_i = x_min + i dx, i < n, with dx = (x_max - x_min)/n.
struct SpatialGrid {
  double x_min = -100.0;
  double x_max = 100.0;
  std::size_t n = 1024;

  [[nodiscard]] double dx() const { return (x_max - x_min) / static_cast<double>(n); }
  [[nodiscard]] double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }

  void validate() const {
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < 0.0 && x_max > 0.0,
            "SpatialGrid: requires x_min < 0 < x_max");
    require(n >= 16, "SpatialGrid: n must be >= 16");
  }

  /// Angular wavenumber of FFT bin j.
  [[nodiscard]] double wavenumber(std::size_t j) const {
    const double dk = 2.0 * std::numbers::pi / (x_max - x_min);
    const auto half = n / 2;
    return j < half ? dk * static_cast<double>(j) : -dk * static_cast<double>(n - j);
  }

  [[nodiscard]] double nyquist() const { return std::numbers::pi / dx(); }
};

template <class F>
std::vector<cplx> sample_on_grid(F&& psi, const SpatialGrid& grid) {
  grid.validate();
  std::vector<cplx> out(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = psi(grid.x(i));
  return out;
}

/// Measured arrival-time density Pi(tau).
struct ArrivalDistribution {
  std::vector<double> times;
  std::vector<double> values;

  void validate() const {
    require(times.size() == values.size(), "ArrivalDistribution: times and values differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
      require(times[i] > times[i - 1], "ArrivalDistribution: times must be strictly ascending");
  }

  /// Trapezoid integral over the sampled range.
  [[nodiscard]] double integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) s += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    return s;
  }
};

struct EvolutionOptions {
  double start_time = 0.0;
  std::size_t record_every = 1;
  std::size_t cross_check_samples = 10;
  double aliasing_tolerance = 1e-6;
  double growth_tolerance = 1e-8;
  double support_tolerance = 1e-8;
};

struct MeasurementRun {
  double V0 = 0.0;
  double dt = 0.0;
  double t_final = 0.0;
  double start_time = 0.0;
  std::vector<double> times;
  std::vector<double> survival;
  ArrivalDistribution arrival;
  /// Largest |Pi_fd - 2 V0 <theta>| over the sampled cross-check times, relative to max Pi.
  double expectation_deviation = 0.0;
  /// Largest probability found in the outer 2% of the box on the left.
  double boundary_mass = 0.0;
};

namespace detail {

inline double mass(const std::vector<cplx>& psi, double dx) {
  double s = 0.0;
  for (const auto& z : psi) s += std::norm(z);
  return s * dx;
}

// Absorber profile theta(x) with theta(0) = 1/2.
inline double step(double x) { return x > 0.0 ? 1.0 : (x == 0.0 ? 0.5 : 0.0); }

inline double absorber_weight(const std::vector<cplx>& psi, const SpatialGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += step(grid.x(i)) * std::norm(psi[i]);
  return s * grid.dx();
}

// Fraction of spectral mass above `fraction` of the Nyquist wavenumber.
inline double high_k_fraction(const std::vector<cplx>& spec, const SpatialGrid& grid, double fraction) {
  double total = 0.0;
  double high = 0.0;
  const double cut = fraction * grid.nyquist();
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    total += w;
    if (std::abs(grid.wavenumber(j)) >= cut) high += w;
  }
  return total > 0.0 ? high / total : 0.0;
}

// Smallest K such that spectral mass at |k| > K is below `tail` of the total.
inline double momentum_extent(const std::vector<cplx>& spec, const SpatialGrid& grid, double tail) {
  std::vector<std::pair<double, double>> bins(spec.size());
  double total = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    bins[j] = {std::abs(grid.wavenumber(j)), std::norm(spec[j])};
    total += bins[j].second;
  }
  std::sort(bins.begin(), bins.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double acc = 0.0;
  for (const auto& [k, w] : bins) {
    acc += w;
    if (acc > tail * total) return k;
  }
  return 0.0;
}

// Centered differences on a possibly nonuniform grid, second-order one-sided at the ends.
inline std::vector<double> derivative(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (t[1] - t[0]);
    return d;
  }
  auto three = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t at) {
    // Derivative at t[at] of the quadratic through (a, b, c).
    const double ta = t[a], tb = t[b], tc = t[c], x = t[at];
    return y[a] * ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc)) +
           y[b] * ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc)) +
           y[c] * ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
  };
  d[0] = three(0, 1, 2, 0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three(i - 1, i, i + 1, i);
  d[n - 1] = three(n - 3, n - 2, n - 1, n - 1);
  return d;
}

}  // namespace detail

/// Evolves psi0 under H0 - i V0 theta(x) (hbar = m = 1) by Strang splitting:
/// half-step absorber decay, exact kinetic phase in Fourier space, half-step
/// decay. Records N(tau) = ||psi||^2 and Pi = -dN/dtau by centered differences.
inline MeasurementRun evolve_complex_potential(std::vector<cplx> psi, const SpatialGrid& grid, double V0,
                                               double dt, double t_final, const EvolutionOptions& opt = {}) {
  grid.validate();
  require(psi.size() == grid.n, "evolve_complex_potential: psi0 must have one sample per grid point");
  require(std::isfinite(V0) && V0 >= 0.0, "evolve_complex_potential: V0 must be >= 0");
  require(std::isfinite(dt) && dt > 0.0, "evolve_complex_potential: dt must be > 0");
  require(std::isfinite(t_final) && t_final >= dt, "evolve_complex_potential: t_final must be >= dt");
  require(opt.record_every >= 1, "evolve_complex_potential: record_every must be >= 1");

  const std::size_t n = grid.n;
  const double dx = grid.dx();
  const double n0 = detail::mass(psi, dx);
  require(n0 > 0.0, "evolve_complex_potential: psi0 has zero norm");
  for (auto& z : psi) z /= std::sqrt(n0);

  const auto edge = std::max<std::size_t>(1, n / 50);
  auto edge_mass = [&](bool left) {
    double s = 0.0;
    for (std::size_t i = 0; i < edge; ++i) s += std::norm(psi[left ? i : n - 1 - i]);
    return s * dx;
  };
  if (edge_mass(true) > opt.support_tolerance || edge_mass(false) > opt.support_tolerance)
    throw InvalidArgument("evolve_complex_potential: initial state is not contained in the grid");

  Eigen::FFT<double> fft;
  std::vector<cplx> spec(n);
  fft.fwd(spec, psi);
  if (detail::high_k_fraction(spec, grid, 0.75) > opt.aliasing_tolerance)
    throw AliasingError("evolve_complex_potential: initial state has momentum content near the Nyquist limit");
  const double p_max = detail::momentum_extent(spec, grid, 1e-8);
  if (p_max > 0.0 && dt > dx / (4.0 * p_max))
    throw InvalidArgument("evolve_complex_potential: dt = " + std::to_string(dt) +
                          " exceeds dx/(4 p_max) = " + std::to_string(dx / (4.0 * p_max)));

  std::vector<cplx> kinetic(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.wavenumber(j);
    kinetic[j] = std::polar(1.0, -0.5 * k * k * dt);
  }
  std::vector<double> decay(n);
  for (std::size_t i = 0; i < n; ++i) decay[i] = std::exp(-0.5 * V0 * detail::step(grid.x(i)) * dt);

  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  MeasurementRun run;
  run.V0 = V0;
  run.dt = dt;
  run.t_final = static_cast<double>(steps) * dt;
  run.start_time = opt.start_time;
  run.times.push_back(opt.start_time);
  run.survival.push_back(1.0);

  const std::size_t check_stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, opt.cross_check_samples));
  std::vector<std::pair<std::size_t, double>> expectation;  // record index, 2 V0 <theta>
  expectation.emplace_back(0, 2.0 * V0 * detail::absorber_weight(psi, grid));

  double previous = 1.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) psi[i] *= decay[i];
    fft.fwd(spec, psi);
    if (s % 200 == 0 && detail::high_k_fraction(spec, grid, 0.75) > opt.aliasing_tolerance)
      throw AliasingError("evolve_complex_potential: momentum content reached the Nyquist limit at step " +
                          std::to_string(s));
    for (std::size_t j = 0; j < n; ++j) spec[j] *= kinetic[j];
    fft.inv(psi, spec);
    for (std::size_t i = 0; i < n; ++i) psi[i] *= decay[i];

    const double current = detail::mass(psi, dx);
    if (current > previous + opt.growth_tolerance)
      throw UnstableConfiguration("evolve_complex_potential: norm grew by " + std::to_string(current - previous) +
                                  " at step " + std::to_string(s));
    previous = current;
    run.boundary_mass = std::max(run.boundary_mass, edge_mass(true));

    if (s % opt.record_every == 0) {
      run.times.push_back(opt.start_time + static_cast<double>(s) * dt);
      run.survival.push_back(current);
      if (s % check_stride == 0)
        expectation.emplace_back(run.times.size() - 1, 2.0 * V0 * detail::absorber_weight(psi, grid));
    }
  }
  require(run.times.size() >= 3, "evolve_complex_potential: fewer than three recorded samples");

  const auto d = detail::derivative(run.times, run.survival);
  run.arrival.times = run.times;
  run.arrival.values.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) run.arrival.values[i] = -d[i];

  const double peak = *std::max_element(run.arrival.values.begin(), run.arrival.values.end());
  double dev = 0.0;
  for (const auto& [idx, pi] : expectation) dev = std::max(dev, std::abs(run.arrival.values[idx] - pi));
  run.expectation_deviation = peak > 0.0 ? dev / peak : dev;
  return run;
}

/// Pi(tau) = 2 V0 int_{-inf}^{tau} e^{-2 V0 (tau - t)} J(t) dt for the
/// piecewise-linear interpolant of the trace. Before the first sample the
/// current is held at its first value, so a constant J maps to itself.
inline ArrivalDistribution smeared_current(const states::CurrentTrace& trace, double V0) {
  trace.validate();
  require(std::isfinite(V0) && V0 > 0.0, "smeared_current: V0 must be > 0");
  require(!trace.times.empty(), "smeared_current: empty trace");
  const double span = trace.times.back() - trace.times.front();
  if (std::exp(-2.0 * V0 * span) > 1e-8)
    throw InsufficientHistory("smeared_current: trace spans " + std::to_string(span) + " but V0 = " +
                              std::to_string(V0) + " needs at least " +
                              std::to_string(std::log(1e8) / (2.0 * V0)));
  const double alpha = 2.0 * V0;
  ArrivalDistribution out;
  out.times = trace.times;
  out.values.resize(trace.times.size());
  double s = trace.values.front();
  out.values[0] = s;
  for (std::size_t i = 1; i < trace.times.size(); ++i) {
    const double x = alpha * (trace.times[i] - trace.times[i - 1]);
    const double one_minus_e = -std::expm1(-x);
    // 1 - (1 - e^{-x})/x, by series when x is small
    const double ramp = x < 1e-4 ? x / 2.0 - x * x / 6.0 + x * x * x / 24.0 : 1.0 - one_minus_e / x;
    const double j0 = trace.values[i - 1];
    const double j1 = trace.values[i];
    s = (1.0 - one_minus_e) * s + j0 * one_minus_e + (j1 - j0) * ramp;
    out.values[i] = s;
  }
  return out;
}

struct DeconvolutionResult {
  states::CurrentTrace current;
  /// Nyquist-band amplitude of Pi relative to its peak magnitude.
  double high_frequency_ratio = 0.0;
  bool noise_warning = false;
};

/// Inverts the exponential smearing: J = Pi + (1/(2 V0)) dPi/dtau.
inline DeconvolutionResult deconvolve(const ArrivalDistribution& arrival, double V0, double noise_threshold = 1e-3) {
  arrival.validate();
  require(std::isfinite(V0) && V0 > 0.0, "deconvolve: V0 must be > 0");
  require(arrival.times.size() >= 3, "deconvolve: need at least three samples");
  const auto& t = arrival.times;
  const auto& p = arrival.values;
  const auto d = detail::derivative(t, p);

  DeconvolutionResult out;
  out.current.units = states::TimeUnits::natural_t;
  out.current.times = t;
  out.current.values.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out.current.values[i] = p[i] + d[i] / (2.0 * V0);

  double hf = 0.0;
  double peak = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double second = p[i + 1] - 2.0 * p[i] + p[i - 1];
    hf += second * second;
    peak = std::max(peak, std::abs(p[i]));
  }
  hf = 0.25 * std::sqrt(hf / static_cast<double>(p.size() - 2));
  out.high_frequency_ratio = peak > 0.0 ? hf / peak : 0.0;
  out.noise_warning = out.high_frequency_ratio > noise_threshold;
  return out;
}

struct DeviationReport {
  double max_deviation = 0.0;
  double rms_deviation = 0.0;
  double peak = 0.0;

  [[nodiscard]] double max_relative() const { return peak > 0.0 ? max_deviation / peak : max_deviation; }
  [[nodiscard]] double rms_relative() const { return peak > 0.0 ? rms_deviation / peak : rms_deviation; }
};

/// Pointwise deviation of `b` from `a`, with `b` linearly interpolated onto a's times.
inline DeviationReport compare(const ArrivalDistribution& a, const ArrivalDistribution& b) {
  a.validate();
  b.validate();
  require(!a.times.empty() && !b.times.empty(), "compare: empty distribution");
  DeviationReport r;
  std::size_t count = 0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double t = a.times[i];
    if (t < b.times.front() || t > b.times.back()) continue;
    const auto it = std::lower_bound(b.times.begin(), b.times.end(), t);
    const auto k = static_cast<std::size_t>(std::distance(b.times.begin(), it));
    double v = b.values[k];
    if (b.times[k] != t) {
      const double w = (t - b.times[k - 1]) / (b.times[k] - b.times[k - 1]);
      v = (1.0 - w) * b.values[k - 1] + w * b.values[k];
    }
    const double d = a.values[i] - v;
    r.max_deviation = std::max(r.max_deviation, std::abs(d));
    sum2 += d * d;
    r.peak = std::max(r.peak, std::abs(a.values[i]));
    ++count;
  }
  require(count > 0, "compare: distributions do not overlap in time");
  r.rms_deviation = std::sqrt(sum2 / static_cast<double>(count));
  return r;
}

/// Deviation between the grid-evolved Pi and the weak-measurement smearing of the
/// free current sampled on the same times.
inline DeviationReport weak_limit_compare(const MeasurementRun& run, const states::CurrentTrace& trace, double V0) {
  return compare(run.arrival, smeared_current(trace, V0));
}

}  // namespace backflow::measure
