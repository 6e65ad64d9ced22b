#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "backflow/errors.hpp"

namespace backflow::numerics {

/// Nodes and weights of an interpolatory quadrature rule on some interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss–Legendre rule mapped to [a, b]. Exact for polynomials of
/// degree <= 2n - 1. Roots are found by Newton iteration on the three-term
/// recurrence, starting from the Tricomi approximation.
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  require(n >= 1, "gauss_legendre: n must be >= 1");
  require(std::isfinite(a) && std::isfinite(b) && a < b,
                  "gauss_legendre: requires finite a < b");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const std::size_t m = (n + 1) / 2;

  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const auto jd = static_cast<double>(j);
        p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (n % 2 == 1 && i == m - 1) z = 0.0;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

/// Gauss–Legendre panels between consecutive entries of `edges`.
inline QuadratureRule composite_rule(std::span<const double> edges, std::size_t points_per_panel) {
  require(edges.size() >= 2, "composite_rule: need at least one panel");
  QuadratureRule out;
  out.nodes.reserve((edges.size() - 1) * points_per_panel);
  out.weights.reserve((edges.size() - 1) * points_per_panel);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const auto panel = gauss_legendre(points_per_panel, edges[p], edges[p + 1]);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

/// Uniform composite Gauss–Legendre rule on [a, b].
inline QuadratureRule composite_uniform(double a, double b, std::size_t panels,
                                        std::size_t points_per_panel) {
  require(panels >= 1, "composite_uniform: panels must be >= 1");
  require(a < b, "composite_uniform: requires a < b");
  std::vector<double> edges(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i)
    edges[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(panels);
  edges.back() = b;
  return composite_rule(edges, points_per_panel);
}

/// Quadrature grid on the truncated momentum half-line (0, u_max].
class MomentumGrid {
 public:
  MomentumGrid() = default;

  MomentumGrid(std::vector<double> nodes, std::vector<double> weights, double u_max)
      : nodes_(std::move(nodes)), weights_(std::move(weights)), u_max_(u_max) {
    require(u_max_ > 0.0 && std::isfinite(u_max_), "MomentumGrid: u_max must be > 0");
    require(!nodes_.empty() && nodes_.size() == weights_.size(),
                    "MomentumGrid: nodes and weights must be non-empty and equal length");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      require(nodes_[i] > 0.0 && nodes_[i] < u_max_,
                      "MomentumGrid: nodes must lie in (0, u_max)");
      require(weights_[i] > 0.0, "MomentumGrid: weights must be positive");
      if (i > 0)
        require(nodes_[i] > nodes_[i - 1], "MomentumGrid: nodes must be strictly increasing");
    }
  }

  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] double u_max() const { return u_max_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  // Largest node spacing in the neighbourhood of u; used as a local resolution scale.
  [[nodiscard]] double local_spacing(double u) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), u);
    const std::size_t i = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
    double h = 0.0;
    if (i > 0 && i < nodes_.size()) h = std::max(h, nodes_[i] - nodes_[i - 1]);
    if (i + 1 < nodes_.size()) h = std::max(h, nodes_[i + 1] - nodes_[i]);
    if (i >= 2) h = std::max(h, nodes_[i - 1] - nodes_[i - 2]);
    return h;
  }

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double u_max_ = 0.0;
};

/// Below this momentum, panels are uniform in u; above it they are uniform in u^2
/// so that each panel spans the same phase of cos(u^2).
inline constexpr double kUniformPhaseThreshold = 2.0;

/// Panel-wise Gauss–Legendre grid on (0, u_max]. The panel budget is split so
/// that the panel width is continuous at u = u_split: width h in u below,
/// width 2 u_split h in u^2 above.
inline MomentumGrid composite_grid(std::size_t panels, std::size_t points_per_panel, double u_max,
                                   double u_split = kUniformPhaseThreshold) {
  require(panels >= 1 && points_per_panel >= 1,
                  "composite_grid: panel and point counts must be >= 1");
  require(u_max > 0.0 && std::isfinite(u_max), "composite_grid: u_max must be > 0");
  require(u_split > 0.0 && std::isfinite(u_split), "composite_grid: u_split must be > 0");

  std::vector<double> edges;
  const double ub = std::min(u_split, u_max);
  if (u_max <= u_split || panels == 1) {
    for (std::size_t i = 0; i <= panels; ++i)
      edges.push_back(u_max * static_cast<double>(i) / static_cast<double>(panels));
  } else {
    const double span = ub + (u_max * u_max - ub * ub) / (2.0 * ub);
    const double h = span / static_cast<double>(panels);
    auto low = static_cast<std::size_t>(std::llround(ub / h));
    low = std::clamp<std::size_t>(low, 1, panels - 1);
    const std::size_t high = panels - low;
    for (std::size_t i = 0; i <= low; ++i)
      edges.push_back(ub * static_cast<double>(i) / static_cast<double>(low));
    const double q0 = ub * ub;
    const double q1 = u_max * u_max;
    for (std::size_t i = 1; i <= high; ++i)
      edges.push_back(std::sqrt(q0 + (q1 - q0) * static_cast<double>(i) / static_cast<double>(high)));
  }
  edges.back() = u_max;
  auto rule = composite_rule(edges, points_per_panel);
  return {std::move(rule.nodes), std::move(rule.weights), u_max};
}

/// Grid sized by panel width in u^2 rather than panel count; convenient for
/// refinement studies where u_max grows at fixed phase resolution.
inline MomentumGrid phase_uniform_grid(double u_max, double panel_width_u2, std::size_t points_per_panel,
                                       double u_split = kUniformPhaseThreshold) {
  require(panel_width_u2 > 0.0, "phase_uniform_grid: panel width must be > 0");
  require(u_split > 0.0 && std::isfinite(u_split), "phase_uniform_grid: u_split must be > 0");
  const double ub = std::min(u_split, u_max);
  const double span = ub + std::max(0.0, u_max * u_max - ub * ub) / (2.0 * ub);
  const double h = panel_width_u2 / (2.0 * ub);
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(span / h)));
  return composite_grid(panels, points_per_panel, u_max, u_split);
}

}  // namespace backflow::numerics
