#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "backflow/errors.hpp"
#include "backflow/numerics/quadrature.hpp"
#include "backflow/states/momentum_state.hpp"

namespace backflow::spectral {

using numerics::MomentumGrid;

/// Backflow flux kernel on the positive momentum half-line, optionally smeared
/// by a gaussian quasiprojector of dimensionless width a (a^2 = 2 m sigma^2 / hbar T).
struct FluxKernel {
  double a = 0.0;
};

/// Largest bound on the most negative eigenvalue of the sharp kernel.
inline constexpr double kBrackenMelloy = 0.038452;

/// (1/pi) sin(u^2 - v^2)/(u - v) exp(-a^2 (u - v)^2); equals 2u/pi on the diagonal.
inline double kernel_value(double u, double v, const FluxKernel& kernel) {
  require(u > 0.0 && v > 0.0, "kernel_value: u and v must be positive");
  require(kernel.a >= 0.0, "kernel_value: smearing a must be >= 0");
  const double d = u - v;
  const double sum = u + v;
  // sin(d * sum)/d written as sum * sinc(d * sum) stays accurate as d -> 0
  const double x = d * sum;
  const double sinc = std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 + x * x * x * x / 120.0 : std::sin(x) / x;
  double k = sum * sinc / std::numbers::pi;
  if (kernel.a > 0.0) k *= std::exp(-kernel.a * kernel.a * d * d);
  return k;
}

/// Symmetric Nyström matrix M_ij = sqrt(w_i) K(u_i, u_j) sqrt(w_j).
struct DiscretizedOperator {
  MomentumGrid grid;
  FluxKernel kernel;
  Eigen::MatrixXd matrix;
};

inline DiscretizedOperator build_operator(const MomentumGrid& grid, const FluxKernel& kernel) {
  require(grid.size() >= 1, "build_operator: empty grid");
  require(kernel.a >= 0.0, "build_operator: smearing a must be >= 0");
  const auto u = grid.nodes();
  const auto w = grid.weights();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw(i) = std::sqrt(w[static_cast<std::size_t>(i)]);

  Eigen::MatrixXd m(n, n);
  // Rows are independent; fill the lower triangle and mirror so symmetry is exact.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double k = kernel_value(u[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(j)], kernel);
      m(i, j) = sw(i) * k * sw(j);
      m(j, i) = m(i, j);
    }
  }
  return {grid, kernel, std::move(m)};
}

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending
  double lowest = 0.0;
  states::MomentumState phi_max;
  double a = 0.0;
};

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve(const Eigen::MatrixXd& m, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eigen_decompose: symmetric QR iteration did not converge for n = " +
                             std::to_string(m.rows()) + " (max " +
                             std::to_string(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>::m_maxIterations) +
                             " sweeps per eigenvalue)");
  }
  return solver;
}

inline void require_symmetric(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "eigen_decompose: matrix must be square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-13, "eigen_decompose: matrix is not symmetric");
}

}  // namespace detail

/// Full symmetric eigendecomposition. The lowest eigenvector is mapped back to
/// state samples phi(u_i) = v_i / sqrt(w_i), normalized on the grid and signed
/// so that its value at the smallest node is positive.
inline SpectralResult eigen_decompose(const DiscretizedOperator& op) {
  detail::require_symmetric(op.matrix);
  require(op.matrix.rows() == static_cast<Eigen::Index>(op.grid.size()),
                  "eigen_decompose: matrix size must equal grid size");
  const auto solver = detail::solve(op.matrix, true);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const Eigen::VectorXd v0 = solver.eigenvectors().col(0);

  const auto w = op.grid.weights();
  std::vector<double> samples(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) samples[i] = v0(static_cast<Eigen::Index>(i)) / std::sqrt(w[i]);
  if (samples.front() < 0.0)
    for (double& x : samples) x = -x;

  return SpectralResult{std::vector<double>(ev.data(), ev.data() + ev.size()), ev(0),
                        states::make_tabulated(op.grid, std::move(samples)), op.kernel.a};
}

/// Lowest eigenvalue only; skips eigenvectors for sweeps and refinement studies.
inline double lowest_eigenvalue(const DiscretizedOperator& op) {
  detail::require_symmetric(op.matrix);
  return detail::solve(op.matrix, false).eigenvalues()(0);
}

struct BoundsViolation {
  std::size_t index = 0;
  double value = 0.0;
};

struct BoundsReport {
  double lower = -kBrackenMelloy;
  double upper = 1.0;
  double tolerance = 2e-3;
  std::vector<BoundsViolation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Flags eigenvalues outside [-c_bm - tol, 1 + tol].
inline BoundsReport spectrum_bounds_check(std::span<const double> eigenvalues, double tolerance = 2e-3) {
  require(tolerance >= 0.0, "spectrum_bounds_check: tolerance must be >= 0");
  BoundsReport report;
  report.tolerance = tolerance;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const double x = eigenvalues[i];
    if (x < report.lower - tolerance || x > report.upper + tolerance) report.violations.push_back({i, x});
  }
  return report;
}

inline BoundsReport spectrum_bounds_check(const SpectralResult& result, double tolerance = 2e-3) {
  return spectrum_bounds_check(std::span<const double>(result.eigenvalues), tolerance);
}

struct SweepPoint {
  double a = 0.0;
  double lambda_min = 0.0;
};

/// Most negative eigenvalue of the smeared kernel for each a, sorted by a.
/// Points are independent and evaluated concurrently up to `max_threads`.
inline std::vector<SweepPoint> lambda_sweep(std::vector<double> a_values, const MomentumGrid& grid,
                                            unsigned max_threads = 1) {
  for (double a : a_values) require(a >= 0.0 && std::isfinite(a), "lambda_sweep: a must be >= 0");
  std::sort(a_values.begin(), a_values.end());
  std::vector<SweepPoint> out(a_values.size());
  const unsigned threads = std::max(1u, max_threads);
  for (std::size_t start = 0; start < a_values.size(); start += threads) {
    std::vector<std::future<double>> batch;
    const std::size_t stop = std::min(a_values.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i) {
      const double a = a_values[i];
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&grid, a] { return lowest_eigenvalue(build_operator(grid, FluxKernel{a})); }));
    }
    for (std::size_t i = start; i < stop; ++i) out[i] = {a_values[i], batch[i - start].get()};
  }
  return out;
}

/// Nyström residual || K phi - lambda phi || in the grid L2 norm.
inline double eigen_residual(const DiscretizedOperator& op, const states::MomentumState& phi, double lambda) {
  const auto u = op.grid.nodes();
  const auto w = op.grid.weights();
  const auto n = u.size();
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double kphi = 0.0;
    for (std::size_t j = 0; j < n; ++j) kphi += w[j] * kernel_value(u[i], u[j], op.kernel) * phi(u[j]);
    const double r = kphi - lambda * phi(u[i]);
    r2 += w[i] * r * r;
  }
  return std::sqrt(r2);
}

}  // namespace backflow::spectral
