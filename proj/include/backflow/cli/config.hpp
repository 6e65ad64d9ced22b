#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/states/gaussian.hpp"

namespace backflow::cli {

using json = nlohmann::json;

/// View of one JSON object that records which keys were read, so that
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + " must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_->contains(key) && !(*j_)[key].is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T required(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(where() + ": missing required key '" + key + "'");
    return convert<T>(key);
  }

  Section child(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(where() + ": missing required section '" + key + "'");
    return Section((*j_)[key], path_ + "." + key);
  }

  std::vector<Section> children(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(where() + ": missing required list '" + key + "'");
    const json& arr = (*j_)[key];
    if (!arr.is_array()) throw ConfigError(where() + ": '" + key + "' must be a list");
    std::vector<Section> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.emplace_back(arr[i], path_ + "." + key + "[" + std::to_string(i) + "]");
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, value] : j_->items())
      if (!used_.count(key)) throw ConfigError(where() + ": unknown key '" + key + "'");
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

  template <class T>
  T convert(const std::string& key) const {
    try {
      return (*j_)[key].template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where() + ": key '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

/// Momentum grid either by explicit panel count or by phase resolution.
struct GridConfig {
  double u_max = 30.0;
  std::optional<std::size_t> panels;
  double panel_width_u2 = 4.0;
  std::size_t points_per_panel = 8;
  double u_split = 8.0;

  [[nodiscard]] numerics::MomentumGrid build() const {
    if (panels) return numerics::composite_grid(*panels, points_per_panel, u_max, u_split);
    return numerics::phase_uniform_grid(u_max, panel_width_u2, points_per_panel, u_split);
  }

  [[nodiscard]] json to_json() const {
    json j{{"u_max", u_max}, {"points_per_panel", points_per_panel}, {"u_split", u_split}};
    if (panels)
      j["panels"] = *panels;
    else
      j["panel_width_u2"] = panel_width_u2;
    return j;
  }
};

inline GridConfig parse_grid(Section s) {
  GridConfig g;
  g.u_max = s.get("u_max", g.u_max);
  g.points_per_panel = s.get("points_per_panel", g.points_per_panel);
  g.u_split = s.get("u_split", g.u_split);
  if (s.has("panels")) {
    check(!s.has("panel_width_u2"), "grid: give either 'panels' or 'panel_width_u2', not both");
    g.panels = s.get<std::size_t>("panels", 1);
    check(*g.panels >= 1, "grid.panels must be >= 1");
  }
  g.panel_width_u2 = s.get("panel_width_u2", g.panel_width_u2);
  s.finish();
  check(std::isfinite(g.u_max) && g.u_max > 0.0, "grid.u_max must be > 0");
  check(g.points_per_panel >= 1, "grid.points_per_panel must be >= 1");
  check(g.panel_width_u2 > 0.0, "grid.panel_width_u2 must be > 0");
  check(g.u_split > 0.0, "grid.u_split must be > 0");
  return g;
}

struct RefinementConfig {
  double base_u_max = 20.0;
  std::size_t levels = 3;
};

struct SpectrumConfig {
  GridConfig grid;
  double a = 0.0;
  std::optional<RefinementConfig> refinement;
  bool flux_identity = true;
  double bounds_tolerance = 2e-3;
};

struct SweepConfig {
  GridConfig grid;
  std::vector<double> a_values{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  unsigned threads = 1;
};

struct GaussianConfig {
  std::vector<states::GaussianComponent> components;
  double sigma = 10.0;
  states::PhaseConvention convention = states::PhaseConvention::schrodinger_exact;
  double t_min = 0.0;
  double t_max = 40.0;
  double dt = 0.01;
  double prob_left_dt = 0.05;
  std::pair<double, double> gain_window{2.0, 4.0};

  [[nodiscard]] states::GaussianSuperposition state() const {
    return states::GaussianSuperposition(components, sigma, convention);
  }
};

struct LandscapeConfig {
  std::vector<double> a_values{0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<double> b_values{2.4, 2.6, 2.8, 3.0, 3.2};
};

struct AnalyticConfig {
  double a = 0.6;
  double b = 2.8;
  double s_max = 3.0;
  double ds = 0.005;
  std::pair<double, double> flux_window{-1.0, 1.0};
  double u_plot_max = 20.0;
  double du = 0.01;
  std::optional<LandscapeConfig> landscape;
};

struct ExtremalSmearingConfig {
  double a = 0.6;
  double b = 2.8;
  std::vector<double> V0{0.5, 0.1};
  double s_min = -100.0;
  double s_max = 3.0;
  double ds = 0.002;
};

struct MeasureConfig {
  std::vector<states::GaussianComponent> components;
  double sigma = 10.0;
  double center = 0.0;
  double x_min = -500.0;
  double x_max = 250.0;
  std::size_t n = 8192;
  double start_time = -200.0;
  double dt = 0.01;
  double t_final = 210.0;
  std::vector<double> V0{0.1};
  std::pair<double, double> report_window{1.0, 6.0};
  std::size_t record_every = 1;
  std::optional<ExtremalSmearingConfig> extremal;
};

using CommandConfig = std::variant<SpectrumConfig, SweepConfig, GaussianConfig, AnalyticConfig, MeasureConfig>;

inline std::vector<std::string> command_names() {
  return {"spectrum", "sweep-smearing", "gaussian", "analytic-state", "measure"};
}

namespace detail {

inline std::pair<double, double> parse_pair(Section& s, const std::string& key, std::pair<double, double> fallback) {
  const auto v = s.get<std::vector<double>>(key, {fallback.first, fallback.second});
  check(v.size() == 2, key + " must have two entries");
  check(std::isfinite(v[0]) && std::isfinite(v[1]) && v[0] <= v[1], key + " must be an ordered pair");
  return {v[0], v[1]};
}

inline std::vector<states::GaussianComponent> parse_components(Section& s) {
  std::vector<states::GaussianComponent> out;
  for (auto c : s.children("components")) {
    states::GaussianComponent g;
    g.amplitude = c.required<double>("amplitude");
    g.momentum = c.required<double>("momentum");
    c.finish();
    check(std::isfinite(g.amplitude) && std::isfinite(g.momentum), "components: values must be finite");
    out.push_back(g);
  }
  check(!out.empty(), "components: at least one component required");
  return out;
}

inline states::PhaseConvention parse_convention(const std::string& name) {
  if (name == "paper-literal") return states::PhaseConvention::printed;
  if (name == "schrodinger-exact") return states::PhaseConvention::schrodinger_exact;
  throw ConfigError("phase_convention must be 'paper-literal' or 'schrodinger-exact', got '" + name + "'");
}

inline void check_values(const std::vector<double>& v, const std::string& what, bool allow_zero) {
  check(!v.empty(), what + " must not be empty");
  for (double x : v) check(std::isfinite(x) && (allow_zero ? x >= 0.0 : x > 0.0), what + (allow_zero ? " must be >= 0" : " must be > 0"));
}

}  // namespace detail

inline SpectrumConfig parse_spectrum(Section& s) {
  SpectrumConfig c;
  if (s.has("grid")) c.grid = parse_grid(s.child("grid"));
  c.a = s.get("a", c.a);
  c.flux_identity = s.get("flux_identity", c.flux_identity);
  c.bounds_tolerance = s.get("bounds_tolerance", c.bounds_tolerance);
  if (s.has("refinement")) {
    auto r = s.child("refinement");
    RefinementConfig rc;
    rc.base_u_max = r.get("base_u_max", rc.base_u_max);
    rc.levels = r.get("levels", rc.levels);
    r.finish();
    check(rc.base_u_max > 0.0 && rc.levels >= 2, "refinement needs base_u_max > 0 and levels >= 2");
    c.refinement = rc;
  } else {
    s.get<json>("refinement", json());
  }
  check(std::isfinite(c.a) && c.a >= 0.0, "a must be >= 0");
  check(c.bounds_tolerance >= 0.0, "bounds_tolerance must be >= 0");
  return c;
}

inline SweepConfig parse_sweep(Section& s) {
  SweepConfig c;
  if (s.has("grid")) c.grid = parse_grid(s.child("grid"));
  c.a_values = s.get("a_values", c.a_values);
  c.threads = s.get("threads", c.threads);
  detail::check_values(c.a_values, "a_values", true);
  check(c.threads >= 1, "threads must be >= 1");
  return c;
}

inline GaussianConfig parse_gaussian(Section& s) {
  GaussianConfig c;
  c.components = detail::parse_components(s);
  c.sigma = s.get("sigma", c.sigma);
  c.convention = detail::parse_convention(s.get<std::string>("phase_convention", "schrodinger-exact"));
  c.t_min = s.get("t_min", c.t_min);
  c.t_max = s.get("t_max", c.t_max);
  c.dt = s.get("dt", c.dt);
  c.prob_left_dt = s.get("prob_left_dt", c.prob_left_dt);
  c.gain_window = detail::parse_pair(s, "gain_window", c.gain_window);
  check(c.sigma > 0.0, "sigma must be > 0");
  check(c.t_min < c.t_max, "t_min must be < t_max");
  check(c.dt > 0.0 && c.prob_left_dt > 0.0, "dt and prob_left_dt must be > 0");
  return c;
}

inline AnalyticConfig parse_analytic(Section& s) {
  AnalyticConfig c;
  c.a = s.get("a", c.a);
  c.b = s.get("b", c.b);
  c.s_max = s.get("s_max", c.s_max);
  c.ds = s.get("ds", c.ds);
  c.flux_window = detail::parse_pair(s, "flux_window", c.flux_window);
  c.u_plot_max = s.get("u_plot_max", c.u_plot_max);
  c.du = s.get("du", c.du);
  if (s.has("landscape")) {
    auto l = s.child("landscape");
    LandscapeConfig lc;
    lc.a_values = l.get("a_values", lc.a_values);
    lc.b_values = l.get("b_values", lc.b_values);
    l.finish();
    detail::check_values(lc.a_values, "landscape.a_values", true);
    detail::check_values(lc.b_values, "landscape.b_values", false);
    c.landscape = lc;
  } else {
    s.get<json>("landscape", json());
  }
  check(c.a >= 0.0, "a must be >= 0");
  check(c.b > 0.0, "b must be > 0");
  check(c.s_max >= 1.0, "s_max must be >= 1");
  check(c.ds > 0.0 && c.du > 0.0 && c.u_plot_max > 0.0, "ds, du and u_plot_max must be > 0");
  check(std::abs(c.flux_window.first) <= c.s_max && std::abs(c.flux_window.second) <= c.s_max,
        "flux_window must lie inside [-s_max, s_max]");
  return c;
}

inline MeasureConfig parse_measure(Section& s) {
  MeasureConfig c;
  {
    auto st = s.child("state");
    c.components = detail::parse_components(st);
    c.sigma = st.get("sigma", c.sigma);
    c.center = st.get("center", c.center);
    st.finish();
  }
  if (s.has("grid")) {
    auto g = s.child("grid");
    c.x_min = g.get("x_min", c.x_min);
    c.x_max = g.get("x_max", c.x_max);
    c.n = g.get("n", c.n);
    g.finish();
  }
  c.start_time = s.get("start_time", c.start_time);
  c.dt = s.get("dt", c.dt);
  c.t_final = s.get("t_final", c.t_final);
  c.V0 = s.get("V0", c.V0);
  c.report_window = detail::parse_pair(s, "report_window", c.report_window);
  c.record_every = s.get("record_every", c.record_every);
  if (s.has("extremal")) {
    auto e = s.child("extremal");
    ExtremalSmearingConfig ec;
    ec.a = e.get("a", ec.a);
    ec.b = e.get("b", ec.b);
    ec.V0 = e.get("V0", ec.V0);
    ec.s_min = e.get("s_min", ec.s_min);
    ec.s_max = e.get("s_max", ec.s_max);
    ec.ds = e.get("ds", ec.ds);
    e.finish();
    detail::check_values(ec.V0, "extremal.V0", false);
    check(ec.a >= 0.0 && ec.b > 0.0, "extremal: requires a >= 0 and b > 0");
    check(ec.s_min < -1.0 && ec.s_max > 1.0 && ec.ds > 0.0, "extremal: need s_min < -1 < 1 < s_max and ds > 0");
    c.extremal = ec;
  } else {
    s.get<json>("extremal", json());
  }
  detail::check_values(c.V0, "V0", false);
  check(c.sigma > 0.0, "state.sigma must be > 0");
  check(c.x_min < 0.0 && c.x_max > 0.0 && c.n >= 16, "grid needs x_min < 0 < x_max and n >= 16");
  check(c.dt > 0.0 && c.t_final >= c.dt, "dt must be > 0 and t_final >= dt");
  check(c.record_every >= 1, "record_every must be >= 1");
  return c;
}

/// Parses a full run configuration; the `command` key selects the schema.
inline CommandConfig parse_config(const json& j, std::string* command = nullptr) {
  Section s(j, "");
  const auto name = s.required<std::string>("command");
  if (command) *command = name;
  CommandConfig out;
  if (name == "spectrum")
    out = parse_spectrum(s);
  else if (name == "sweep-smearing")
    out = parse_sweep(s);
  else if (name == "gaussian")
    out = parse_gaussian(s);
  else if (name == "analytic-state")
    out = parse_analytic(s);
  else if (name == "measure")
    out = parse_measure(s);
  else
    throw ConfigError("unknown command '" + name + "'");
  s.finish();
  return out;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace backflow::cli
