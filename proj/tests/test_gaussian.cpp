#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "backflow/spectral/spectral.hpp"
#include "backflow/states/current.hpp"
#include "backflow/states/gaussian.hpp"
#include "oracle.hpp"

using namespace backflow;
using namespace backflow::states;

namespace {

constexpr double kPi = std::numbers::pi;
using C = std::complex<double>;

GaussianSuperposition reference_pair(PhaseConvention c = PhaseConvention::schrodinger_exact) {
  return GaussianSuperposition({{1.8, 0.3}, {1.0, 1.4}}, 10.0, c);
}

// Largest increase of prob_left over any [t1, t2] inside the samples.
double max_increase(const std::vector<double>& p) {
  double lowest = p.front();
  double best = 0.0;
  for (double v : p) {
    best = std::max(best, v - lowest);
    lowest = std::min(lowest, v);
  }
  return best;
}

}  // namespace

TEST(Gaussian, ConventionsAgreeAtTimeZero) {
  const auto exact = reference_pair();
  const auto literal = exact.with_convention(PhaseConvention::printed);
  EXPECT_EQ(exact.norm_constant(), literal.norm_constant());
  for (double x : {-30.0, -2.5, 0.0, 1.0, 17.3}) {
    EXPECT_EQ(gaussian_wavefunction(exact, x, 0.0), gaussian_wavefunction(literal, x, 0.0));
  }
}

TEST(Gaussian, ConventionsDifferLater) {
  const auto exact = reference_pair();
  const auto literal = exact.with_convention(PhaseConvention::printed);
  EXPECT_GT(std::abs(gaussian_wavefunction(exact, 0.0, 3.0) - gaussian_wavefunction(literal, 0.0, 3.0)), 1e-3);
}

TEST(Gaussian, SingleComponentAtTimeZero) {
  const double p = 0.7;
  const double sigma = 2.0;
  const GaussianSuperposition g({{1.0, p}}, sigma);
  const C ref = gaussian_wavefunction(g, 0.0, 0.0);
  for (double x : {-3.0, -0.4, 1.1, 5.0}) {
    const C expected = ref * std::exp(C(-x * x / (4.0 * sigma * sigma), p * x));
    EXPECT_NEAR(std::abs(gaussian_wavefunction(g, x, 0.0) - expected), 0.0, 1e-14);
  }
  // N' for a unit-norm gaussian envelope.
  EXPECT_NEAR(std::norm(ref), 1.0 / std::sqrt(2.0 * kPi * sigma * sigma), 1e-12);
}

TEST(Gaussian, NormalizedAtTimeZero) {
  const auto g = reference_pair();
  const double n = oracle::integrate([&](double x) { return std::norm(gaussian_wavefunction(g, x, 0.0)); }, -150.0,
                                     150.0, 1e-12, 256);
  EXPECT_NEAR(n, 1.0, 1e-8);
}

TEST(Gaussian, NormConservedUnderExactEvolution) {
  const auto g = reference_pair();
  const double n = oracle::integrate([&](double x) { return std::norm(gaussian_wavefunction(g, x, 5.0)); }, -150.0,
                                     160.0, 1e-12, 512);
  EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(Gaussian, DerivativeMatchesFiniteDifference) {
  const auto g = reference_pair(PhaseConvention::printed);
  for (double t : {0.0, 2.7}) {
    for (double x : {-4.0, 0.0, 3.3}) {
      const double h = 1e-5;
      const C fd = (gaussian_wavefunction(g, x + h, t) - gaussian_wavefunction(g, x - h, t)) / (2.0 * h);
      EXPECT_NEAR(std::abs(g.value_and_derivative(x, t).second - fd), 0.0, 1e-9);
    }
  }
}

TEST(Gaussian, PlaneWaveLimit) {
  const double a1 = 1.8, p1 = 0.3, a2 = 1.0, p2 = 1.4;
  const double sigma = 1e3;
  const GaussianSuperposition g({{a1, p1}, {a2, p2}}, sigma);
  const double scale = g.norm_constant() * g.norm_constant() / (4.0 * sigma * sigma);
  const double peak = a1 * a1 * p1 + a2 * a2 * p2 + a1 * a2 * (p1 + p2);
  for (double t = 0.0; t <= 40.0; t += 0.37) {
    const double pw = a1 * a1 * p1 + a2 * a2 * p2 + a1 * a2 * (p1 + p2) * std::cos((p1 * p1 - p2 * p2) * t / 2.0);
    EXPECT_NEAR(gaussian_current(g, t) / scale, pw, 0.01 * peak) << "t=" << t;
  }
}

TEST(Gaussian, SingleComponentCurrentSign) {
  EXPECT_GT(gaussian_current(GaussianSuperposition({{1.0, 0.7}}, 3.0), 0.0), 0.0);
  EXPECT_LT(gaussian_current(GaussianSuperposition({{1.0, -0.7}}, 3.0), 0.0), 0.0);
  EXPECT_NEAR(gaussian_current(GaussianSuperposition({{1.0, 0.0}}, 3.0), 0.0), 0.0, 1e-15);
}

TEST(Gaussian, RejectsInvalidState) {
  EXPECT_THROW(GaussianSuperposition({}, 1.0), InvalidArgument);
  EXPECT_THROW(GaussianSuperposition({{1.0, 0.0}}, 0.0), InvalidArgument);
  EXPECT_THROW(GaussianSuperposition({{1.0, 0.5}, {-1.0, 0.5}}, 1.0), InvalidArgument);
}

TEST(ProbLeft, SymmetricPacketIsHalf) {
  EXPECT_NEAR(prob_left(GaussianSuperposition({{1.0, 0.0}}, 1.0), 0.0), 0.5, 1e-8);
  EXPECT_NEAR(prob_left(GaussianSuperposition({{1.0, 0.0}}, 10.0), 0.0), 0.5, 1e-8);
  EXPECT_NEAR(prob_left(reference_pair(), 0.0), 0.5, 1e-8);
}

TEST(ProbLeft, ContinuityWithCurrent) {
  const auto g = reference_pair();
  for (auto [t1, t2] : {std::pair{0.0, 2.0}, std::pair{2.0, 4.0}, std::pair{1.3, 9.0}, std::pair{0.0, 30.0}}) {
    const double flow = oracle::integrate([&](double t) { return gaussian_current(g, t); }, t1, t2, 1e-12);
    EXPECT_NEAR(prob_left(g, t1) - prob_left(g, t2), flow, 1e-6) << t1 << ".." << t2;
  }
}

TEST(ProbLeft, PrintedPhaseBreaksContinuity) {
  // The printed phase p (x - p t) is not a solution of the free equation, so
  // its density and current are not linked by continuity.
  const auto g = reference_pair(PhaseConvention::printed);
  const double flow = oracle::integrate([&](double t) { return gaussian_current(g, t); }, 2.0, 4.0, 1e-12);
  EXPECT_GT(std::abs(prob_left(g, 2.0) - prob_left(g, 4.0) - flow), 1e-4);
}

TEST(ProbLeft, GainBoundedForShippedStates) {
  const double bound = spectral::kBrackenMelloy + 3e-3;
  for (auto c : {PhaseConvention::schrodinger_exact, PhaseConvention::printed}) {
    const auto g = reference_pair(c);
    std::vector<double> p;
    for (double t = 0.0; t <= 40.0; t += 0.05) p.push_back(prob_left(g, t));
    EXPECT_LE(max_increase(p), bound);
  }
}

TEST(Backflow, ReferencePairHasNegativeCurrentBetweenTwoAndFour) {
  for (auto c : {PhaseConvention::schrodinger_exact, PhaseConvention::printed}) {
    const auto g = reference_pair(c);
    double lowest = 0.0;
    for (double t = 2.0; t <= 4.0; t += 0.01) lowest = std::min(lowest, gaussian_current(g, t));
    EXPECT_LT(lowest, 0.0);
  }
}

TEST(Backflow, SingleComponentHasNoWindow) {
  const GaussianSuperposition g({{1.0, 0.9}}, 4.0);
  CurrentTrace trace;
  for (double t = 0.0; t <= 20.0; t += 0.05) {
    trace.times.push_back(t);
    trace.values.push_back(gaussian_current(g, t));
  }
  EXPECT_FALSE(most_negative_window(trace).has_value());
}

TEST(Gaussian, MeanEnergyOfSinglePacket) {
  // <p^2/2> = p^2/2 + 1/(8 sigma^2) for one packet.
  EXPECT_NEAR(mean_energy(GaussianSuperposition({{1.0, 1.0}}, 2.0)), 0.5 + 1.0 / 32.0, 1e-10);
  EXPECT_NEAR(mean_energy(GaussianSuperposition({{2.0, -0.4}}, 5.0)), 0.08 + 1.0 / 200.0, 1e-10);
}

TEST(NegativeMomentum, ZeroMomentumIsHalf) {
  for (double sigma : {0.1, 1.0, 25.0}) EXPECT_NEAR(neg_momentum_prob(GaussianSuperposition({{1.0, 0.0}}, sigma)), 0.5, 1e-15);
}

TEST(NegativeMomentum, ReferencePairIsNegligible) { EXPECT_LE(neg_momentum_prob(reference_pair()), 1e-9); }

TEST(NegativeMomentum, MatchesBruteForceTransform) {
  for (auto [p0, sigma] : {std::pair{0.3, 10.0}, std::pair{0.2, 3.0}}) {
    const GaussianSuperposition g({{1.0, p0}}, sigma);
    // psi~(p) by trapezoid in x, then Simpson in p over the negative half-line.
    const double L = 16.0 * sigma;
    const double dx = sigma / 20.0;
    auto transform = [&](double p) {
      C sum = 0.0;
      for (double x = -L; x <= L; x += dx) sum += gaussian_wavefunction(g, x, 0.0) * std::polar(1.0, -p * x);
      return sum * dx / std::sqrt(2.0 * kPi);
    };
    const double lo = -8.0 / sigma;
    const int n = 400;
    const double h = -lo / n;
    double neg = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      neg += w * std::norm(transform(lo + h * i));
    }
    neg *= h / 3.0;
    EXPECT_NEAR(neg_momentum_prob(g), neg, 0.05 * neg) << "p=" << p0 << " sigma=" << sigma;
  }
}
