#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "backflow/cli/config.hpp"
#include "backflow/cli/io.hpp"
#include "backflow/measure/measure.hpp"
#include "backflow/spectral/spectral.hpp"
#include "backflow/states/current.hpp"
#include "backflow/states/gaussian.hpp"
#include "backflow/states/momentum_state.hpp"
#include "backflow/version.hpp"

namespace backflow::cli {

namespace fs = std::filesystem;

namespace detail {

inline json window_json(const std::optional<states::FluxWindow>& w) {
  if (!w) return nullptr;
  return json{{"t1", w->t1}, {"t2", w->t2}, {"flux", w->flux}};
}

/// n + 1 points a, a + h, ..., b with n = round((b - a)/h).
inline std::vector<double> linspace_step(double a, double b, double h) {
  const auto n = static_cast<std::size_t>(std::llround((b - a) / h));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
  return out;
}

/// Cell midpoints of a uniform partition of [a, b]; points within 1e-9 of
/// s = +-1, where phi_A's current diverges, are dropped.
inline std::vector<double> midpoints_avoiding_unit(double a, double b, double h) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round((b - a) / h)));
  const double step = (b - a) / static_cast<double>(n);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = a + (static_cast<double>(i) + 0.5) * step;
    if (std::abs(std::abs(s) - 1.0) > 1e-9) out.push_back(s);
  }
  return out;
}

/// u_max at which the grid of `base` reaches `target` nodes, by bisection.
inline double u_max_for_nodes(GridConfig base, std::size_t target) {
  double lo = base.u_max;
  double hi = base.u_max;
  while (base.u_max = hi, base.build().size() < target) hi *= 1.5;
  for (int it = 0; it < 60; ++it) {
    base.u_max = 0.5 * (lo + hi);
    if (base.build().size() < target)
      lo = base.u_max;
    else
      hi = base.u_max;
  }
  return hi;
}

}  // namespace detail

inline json cmd_spectrum(const SpectrumConfig& c, const fs::path& out) {
  const auto grid = c.grid.build();
  const auto op = spectral::build_operator(grid, spectral::FluxKernel{c.a});
  const auto result = spectral::eigen_decompose(op);

  CsvTable ev({"index[count]", "lambda[dimensionless]"});
  for (std::size_t i = 0; i < result.eigenvalues.size(); ++i) ev.add_row({static_cast<double>(i), result.eigenvalues[i]});
  ev.write(out / "eigenvalues.csv");

  CsvTable phi({"u[dimensionless]", "phi[dimensionless]"});
  const auto u = grid.nodes();
  for (double x : u) phi.add_row({x, result.phi_max(x)});
  phi.write(out / "phi_max.csv");

  const auto bounds = spectral::spectrum_bounds_check(result, c.bounds_tolerance);
  json violations = json::array();
  for (const auto& v : bounds.violations) violations.push_back({{"index", v.index}, {"lambda", v.value}});

  json r;
  r["lambda_min"] = result.lowest;
  r["a"] = c.a;
  r["resolution"] = {{"nodes", grid.size()}, {"grid", c.grid.to_json()}};
  r["bounds"] = {{"lower", bounds.lower}, {"upper", bounds.upper}, {"tolerance", bounds.tolerance},
                 {"ok", bounds.ok()}, {"violations", violations}};
  r["eigen_residual"] = spectral::eigen_residual(op, result.phi_max, result.lowest);
  r["c_bm"] = spectral::kBrackenMelloy;

  if (c.flux_identity) {
    const double f = states::flux(result.phi_max, -1.0, 1.0).flux;
    r["flux_identity"] = {{"flux", f}, {"difference", f - result.lowest}};
  }

  if (c.refinement) {
    GridConfig base = c.grid;
    base.u_max = c.refinement->base_u_max;
    const std::size_t n0 = base.build().size();
    json levels = json::array();
    std::vector<double> lam;
    std::vector<double> umax;
    for (std::size_t k = 0; k < c.refinement->levels; ++k) {
      GridConfig g = base;
      if (k > 0) g.u_max = detail::u_max_for_nodes(base, n0 << k);
      const auto gk = g.build();
      const double l = spectral::lowest_eigenvalue(spectral::build_operator(gk, spectral::FluxKernel{c.a}));
      lam.push_back(l);
      umax.push_back(g.u_max);
      levels.push_back({{"nodes", gk.size()}, {"u_max", g.u_max}, {"lambda_min", l}});
    }
    bool monotone = true;
    for (std::size_t k = 1; k < lam.size(); ++k) {
      const double before = std::abs(lam[k - 1] + spectral::kBrackenMelloy);
      const double after = std::abs(lam[k] + spectral::kBrackenMelloy);
      monotone = monotone && lam[k] <= lam[k - 1] && after < before;
    }
    // Truncation error falls off like 1/u_max.
    const std::size_t m = lam.size();
    const double extrapolated = (umax[m - 1] * lam[m - 1] - umax[m - 2] * lam[m - 2]) / (umax[m - 1] - umax[m - 2]);
    r["refinement"] = {{"levels", levels}, {"monotone_toward_bound", monotone}, {"extrapolated_lambda_min", extrapolated}};
  }
  return r;
}

inline json cmd_sweep_smearing(const SweepConfig& c, const fs::path& out) {
  const auto grid = c.grid.build();
  const auto sweep = spectral::lambda_sweep(c.a_values, grid, c.threads);
  CsvTable t({"a[dimensionless]", "lambda_min[dimensionless]", "a_squared_times_lambda[dimensionless]"});
  json rows = json::array();
  bool monotone = true;
  bool bounded = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& p = sweep[i];
    t.add_row({p.a, p.lambda_min, p.a * p.a * p.lambda_min});
    rows.push_back({{"a", p.a}, {"lambda_min", p.lambda_min}, {"a_squared_times_lambda", p.a * p.a * p.lambda_min}});
    if (i > 0 && p.lambda_min < sweep[i - 1].lambda_min) monotone = false;
    if (p.lambda_min < -spectral::kBrackenMelloy - 2e-3) bounded = false;
  }
  t.write(out / "lambda_a.csv");
  return {{"points", rows}, {"nodes", grid.size()}, {"grid", c.grid.to_json()}, {"monotone_non_decreasing", monotone},
          {"above_bound", bounded}};
}

/// Largest rise of a sampled P over ordered pairs of samples.
struct Gain {
  double gain = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

inline Gain max_gain(const std::vector<double>& t, const std::vector<double>& p) {
  Gain g;
  if (t.empty()) return g;
  std::size_t low = 0;
  g.t1 = g.t2 = t.front();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (p[i] - p[low] > g.gain) g = {p[i] - p[low], t[low], t[i]};
    if (p[i] < p[low]) low = i;
  }
  return g;
}

inline json cmd_gaussian(const GaussianConfig& c, const fs::path& out) {
  const auto g = c.state();
  const auto times = detail::linspace_step(c.t_min, c.t_max, c.dt);
  states::CurrentTrace trace;
  trace.units = states::TimeUnits::natural_t;
  trace.times = times;
  CsvTable cur({"t[natural]", "J[1/time]"});
  for (double t : times) {
    trace.values.push_back(states::gaussian_current(g, t));
    cur.add_row({t, trace.values.back()});
  }
  cur.write(out / "current.csv");

  CsvTable pl({"t[natural]", "P_left[probability]"});
  for (double t : detail::linspace_step(c.t_min, c.t_max, c.prob_left_dt)) pl.add_row({t, states::prob_left(g, t)});
  pl.write(out / "prob_left.csv");

  const auto fn = [&g](double t) { return states::gaussian_current(g, t); };
  const auto windows = states::negative_windows(trace, fn);
  CsvTable wt({"t1[natural]", "t2[natural]", "flux[probability]"});
  for (const auto& w : windows) wt.add_row({w.t1, w.t2, w.flux});
  wt.write(out / "windows.csv");
  const auto worst = states::most_negative_window(trace, fn);

  std::vector<double> gt;
  std::vector<double> gp;
  for (double t : detail::linspace_step(c.gain_window.first, c.gain_window.second, c.dt)) {
    gt.push_back(t);
    gp.push_back(states::prob_left(g, t));
  }
  const auto gain = max_gain(gt, gp);

  return {{"phase_convention", c.convention == states::PhaseConvention::printed ? "paper-literal" : "schrodinger-exact"},
          {"most_negative_window", detail::window_json(worst)},
          {"window_count", windows.size()},
          {"neg_momentum_prob", states::neg_momentum_prob(g)},
          {"prob_left_gain", {{"window", {c.gain_window.first, c.gain_window.second}}, {"gain", gain.gain}, {"t1", gain.t1}, {"t2", gain.t2}}},
          {"norm_constant", g.norm_constant()}};
}

/// Window flux of phi_A(a, b) on midpoint samples of [-s_max, s_max], refined by bisection.
inline std::optional<states::FluxWindow> phi_a_window(const states::MomentumState& phi, double s_max, double ds,
                                                      states::CurrentTrace* trace_out = nullptr) {
  states::CurrentTrace trace;
  trace.times = detail::midpoints_avoiding_unit(-s_max, s_max, ds);
  for (double s : trace.times) trace.values.push_back(states::dimensionless_current(phi, s, s_max));
  const auto w = states::most_negative_window(trace, [&](double s) { return states::dimensionless_current(phi, s, s_max); });
  if (trace_out) *trace_out = std::move(trace);
  return w;
}

inline json cmd_analytic_state(const AnalyticConfig& c, const fs::path& out) {
  const auto phi = states::make_phi_A(c.a, c.b);
  CsvTable pt({"u[dimensionless]", "phi[dimensionless]"});
  for (double u : detail::linspace_step(c.du, c.u_plot_max, c.du)) pt.add_row({u, phi(u)});
  pt.write(out / "phi.csv");

  states::CurrentTrace trace;
  const auto worst = phi_a_window(phi, c.s_max, c.ds, &trace);
  CsvTable ct({"s[dimensionless]", "j[dimensionless]"});
  for (std::size_t i = 0; i < trace.times.size(); ++i) ct.add_row({trace.times[i], trace.values[i]});
  ct.write(out / "current.csv");

  const auto f = states::flux(phi, c.flux_window.first, c.flux_window.second, c.s_max);
  json r{{"a", c.a},
         {"b", c.b},
         {"norm_constant", phi.norm_constant()},
         {"flux", {{"s1", f.t1}, {"s2", f.t2}, {"flux", f.flux}}},
         {"most_negative_window", detail::window_json(worst)},
         {"fraction_of_c_bm", worst ? -worst->flux / spectral::kBrackenMelloy : 0.0}};

  if (c.landscape) {
    CsvTable lt({"a[dimensionless]", "b[dimensionless]", "window_flux[probability]", "s1[dimensionless]", "s2[dimensionless]"});
    double best = std::numeric_limits<double>::infinity();
    double best_a = 0.0;
    double best_b = 0.0;
    for (double a : c.landscape->a_values) {
      for (double b : c.landscape->b_values) {
        const auto w = phi_a_window(states::make_phi_A(a, b), c.s_max, c.ds);
        const double fl = w ? w->flux : 0.0;
        lt.add_row({a, b, fl, w ? w->t1 : 0.0, w ? w->t2 : 0.0});
        if (fl < best) {
          best = fl;
          best_a = a;
          best_b = b;
        }
      }
    }
    lt.write(out / "flux_landscape.csv");
    r["landscape_minimum"] = {{"a", best_a}, {"b", best_b}, {"window_flux", best}};
  }
  return r;
}

inline json cmd_measure(const MeasureConfig& c, const fs::path& out) {
  const states::GaussianSuperposition g(c.components, c.sigma, states::PhaseConvention::schrodinger_exact);
  const measure::SpatialGrid grid{c.x_min, c.x_max, c.n};
  const auto psi0 = measure::sample_on_grid(
      [&](double x) { return states::gaussian_wavefunction(g, x - c.center, c.start_time); }, grid);
  const auto free_current = [&](double t) {
    const auto [p, d] = g.value_and_derivative(-c.center, t);
    return (std::conj(p) * d).imag();
  };

  CsvTable st({"V0[1/time]", "t[natural]", "N[probability]"});
  CsvTable at({"V0[1/time]", "t[natural]", "Pi[1/time]"});
  CsvTable dc({"V0[1/time]", "t[natural]", "J_deconvolved[1/time]", "J_free[1/time]"});
  json runs = json::array();
  for (double V0 : c.V0) {
    measure::EvolutionOptions opt;
    opt.start_time = c.start_time;
    opt.record_every = c.record_every;
    const auto run = measure::evolve_complex_potential(psi0, grid, V0, c.dt, c.t_final, opt);
    const auto dec = measure::deconvolve(run.arrival, V0);

    states::CurrentTrace free;
    free.units = states::TimeUnits::natural_t;
    free.times = run.times;
    for (double t : run.times) free.values.push_back(free_current(t));

    double min_dec = std::numeric_limits<double>::infinity();
    double min_dec_t = 0.0;
    double min_free = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const double t = run.times[i];
      st.add_row({V0, t, run.survival[i]});
      at.add_row({V0, t, run.arrival.values[i]});
      dc.add_row({V0, t, dec.current.values[i], free.values[i]});
      if (t >= c.report_window.first && t <= c.report_window.second) {
        if (dec.current.values[i] < min_dec) {
          min_dec = dec.current.values[i];
          min_dec_t = t;
        }
        min_free = std::min(min_free, free.values[i]);
      }
    }

    json weak = nullptr;
    try {
      const auto rep = measure::weak_limit_compare(run, free, V0);
      weak = {{"rms_relative", rep.rms_relative()}, {"max_relative", rep.max_relative()}, {"peak", rep.peak}};
    } catch (const InsufficientHistory& e) {
      weak = {{"skipped", e.what()}};
    }
    const double absorbed = 1.0 - run.survival.back();
    runs.push_back({{"V0", V0},
                    {"absorbed", absorbed},
                    {"arrival_integral", run.arrival.integral()},
                    {"norm_bookkeeping_error", absorbed - run.arrival.integral()},
                    {"min_arrival", *std::min_element(run.arrival.values.begin(), run.arrival.values.end())},
                    {"min_deconvolved_current", min_dec},
                    {"min_deconvolved_time", min_dec_t},
                    {"min_free_current", min_free},
                    {"weak_limit", weak},
                    {"expectation_deviation", run.expectation_deviation},
                    {"boundary_mass", run.boundary_mass},
                    {"noise_warning", dec.noise_warning},
                    {"high_frequency_ratio", dec.high_frequency_ratio}});
  }
  st.write(out / "survival.csv");
  at.write(out / "arrival.csv");
  dc.write(out / "deconvolved.csv");
  json r{{"runs", runs},
         {"mean_energy", states::mean_energy(g)},
         {"report_window", {c.report_window.first, c.report_window.second}}};

  if (c.extremal) {
    const auto& e = *c.extremal;
    const auto phi = states::make_phi_A(e.a, e.b);
    const double s_lim = std::max(std::abs(e.s_min), std::abs(e.s_max));
    states::CurrentTrace trace;
    trace.times = detail::midpoints_avoiding_unit(e.s_min, e.s_max, e.ds);
    for (double s : trace.times) trace.values.push_back(states::dimensionless_current(phi, s, s_lim));
    CsvTable et({"V0[1/time]", "s[dimensionless]", "j[dimensionless]", "Pi[dimensionless]", "J_recovered[dimensionless]"});
    json demo = json::array();
    for (double V0 : e.V0) {
      const auto pi = measure::smeared_current(trace, V0);
      const auto rec = measure::deconvolve(pi, V0);
      double min_pi_neg = std::numeric_limits<double>::infinity();
      double min_rec = std::numeric_limits<double>::infinity();
      std::size_t negative = 0;
      for (std::size_t i = 0; i < trace.times.size(); ++i) {
        et.add_row({V0, trace.times[i], trace.values[i], pi.values[i], rec.current.values[i]});
        if (trace.values[i] < 0.0 && std::abs(trace.times[i]) < 1.0) {
          ++negative;
          min_pi_neg = std::min(min_pi_neg, pi.values[i]);
          min_rec = std::min(min_rec, rec.current.values[i]);
        }
      }
      demo.push_back({{"V0", V0},
                      {"negative_current_samples", negative},
                      {"min_smeared_where_current_negative", negative ? min_pi_neg : 0.0},
                      {"min_recovered_where_current_negative", negative ? min_rec : 0.0}});
    }
    et.write(out / "extremal_smearing.csv");
    r["extremal_smearing"] = {{"a", e.a}, {"b", e.b}, {"runs", demo}};
  }
  return r;
}

/// Runs one parsed command, writing its datasets and summary.json into `out`.
inline json run_command(const std::string& name, const CommandConfig& config, const json& echo, const fs::path& out) {
  fs::create_directories(out);
  const auto start = std::chrono::steady_clock::now();
  json results = std::visit(
      [&](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SpectrumConfig>) return cmd_spectrum(c, out);
        if constexpr (std::is_same_v<T, SweepConfig>) return cmd_sweep_smearing(c, out);
        if constexpr (std::is_same_v<T, GaussianConfig>) return cmd_gaussian(c, out);
        if constexpr (std::is_same_v<T, AnalyticConfig>) return cmd_analytic_state(c, out);
        if constexpr (std::is_same_v<T, MeasureConfig>) return cmd_measure(c, out);
      },
      config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json summary{{"command", name},
                     {"config", echo},
                     {"version", kVersion},
                     {"wall_clock_seconds", seconds},
                     {"results", results}};
  write_json(out / "summary.json", summary);
  return summary;
}

}  // namespace backflow::cli
