#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "collrabi/broadening.hpp"
#include "collrabi/errors.hpp"
#include "collrabi/quadrature.hpp"
#include "collrabi/units.hpp"
#include "oracles.hpp"

using namespace collrabi;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

double alpha_mhz(double sigma_mhz) { return units::alpha_from_sigma(units::mhz_to_angular(sigma_mhz)); }

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST(HermiteRule, OnePoint) {
  const auto& r = hermite_rule(1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.nodes[0], 0.0);
  EXPECT_NEAR(r.weights[0], kSqrtPi, 1e-15);
}

TEST(HermiteRule, TwoPoint) {
  const auto& r = hermite_rule(2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.nodes[0], -1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(r.nodes[1], 1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(r.weights[0], kSqrtPi / 2, 1e-15);
  EXPECT_NEAR(r.weights[1], kSqrtPi / 2, 1e-15);
}

TEST(HermiteRule, FourthMoment) {
  const auto& r = hermite_rule(40);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], 4);
  EXPECT_NEAR(sum, 3 * kSqrtPi / 4, 1e-12 * 3 * kSqrtPi / 4);
}

TEST(HermiteRule, StructuralInvariants) {
  for (int n : {1, 2, 3, 7, 20, 40, 41, 100, 200}) {
    const auto& r = hermite_rule(n);
    ASSERT_EQ(r.size(), static_cast<std::size_t>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_GT(r.weights[i], 0.0);
      EXPECT_EQ(r.nodes[i], -r.nodes[r.size() - 1 - i]);
      sum += r.weights[i];
    }
    EXPECT_NEAR(sum, kSqrtPi, 1e-12 * kSqrtPi) << "n=" << n;
  }
}

TEST(HermiteRule, ExactForPolynomialsUpToDegree2nMinus1) {
  const int n = 12;
  const auto& r = hermite_rule(n);
  // Even moments of exp(-x^2): Gamma(k + 1/2).
  for (int k = 0; 2 * k <= 2 * n - 1; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], 2 * k);
    const double exact = std::tgamma(k + 0.5);
    EXPECT_NEAR(sum, exact, 1e-12 * exact) << "degree " << 2 * k;
  }
}

TEST(HermiteRule, OutOfRange) {
  EXPECT_THROW(hermite_rule(0), ConfigError);
  EXPECT_THROW(hermite_rule(201), ConfigError);
}

TEST(BroadeningParams, Validation) {
  EXPECT_THROW(validate(BroadeningParams{0.0, 40}), ConfigError);
  EXPECT_THROW(validate(BroadeningParams{1.0, 0}), ConfigError);
  EXPECT_NO_THROW(validate(BroadeningParams{1e-3, 1}));
}

TEST(ReferenceIntegrate, ConstantIntegrandHasUnitMass) {
  for (double alpha : {1e-4, 2e-3, 1.0, 1e6}) {
    EXPECT_NEAR(reference_integrate([](double) { return 1.0; }, alpha), 1.0, 1e-10);
  }
}

TEST(ReferenceIntegrate, GaussianSecondMoment) {
  const double alpha = alpha_mhz(2.5);
  // Second moment of the unit-mass normal truncated to +-6 sd.
  const double pdf6 = std::exp(-18.0) / std::sqrt(2 * std::numbers::pi);
  const double var = (1.0 - 12.0 * pdf6 / std::erf(6.0 / std::numbers::sqrt2)) / (2.0 * alpha);
  EXPECT_NEAR(reference_integrate([](double d) { return d * d; }, alpha), var, 1e-10 * var + 1e-10);
}

TEST(ReferenceIntegrate, ReportsNonConvergence) {
  // Discontinuous everywhere at the sampling scale; the recursion cannot settle.
  auto nasty = [](double d) { return std::sin(1e9 * d) > 0 ? 1e6 : -1e6; };
  EXPECT_THROW(reference_integrate(nasty, 1.0), NumericalError);
}

TEST(InhomogeneousSignal, DeltaLimit) {
  const ChirpedOscParams p{8.0, 6.0, 0.1, units::mhz_to_angular(50.9), 0.0};
  for (double t : grid(0.0, 0.3, 61)) {
    EXPECT_NEAR(inhomogeneous_signal(p, {1e6, 40}, t), retrieval_probability(p, t), 1e-6);
  }
}

TEST(InhomogeneousSignal, ZeroAtTimeZero) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const ChirpedOscParams p{30 * u(gen), 20 * u(gen), u(gen), 500 * u(gen), 0.0};
    const BroadeningParams b{1e-4 + u(gen), 40};
    EXPECT_EQ(inhomogeneous_signal(p, b, 0.0), 0.0);
    BroadenedSignal fast(40);
    fast.prepare(p.omega_n, b.alpha);
    EXPECT_EQ(fast(p, 0.0), 0.0);
  }
}

TEST(InhomogeneousSignal, AgreesWithSimpsonAndTrapezoidOracles) {
  const ChirpedOscParams p{2.0, 1.0, 0.15, units::mhz_to_angular(50.0), 0.0};
  const BroadeningParams b{alpha_mhz(2.5), 40};
  for (double t : grid(0.0, 0.3, 31)) {
    const double q = inhomogeneous_signal(p, b, t);
    EXPECT_NEAR(q, reference_integrate(p, b, t), 1e-8) << "t=" << t;
    EXPECT_NEAR(q, oracle::broadened(p.beta, p.chirp, p.t0, p.omega_n, b.alpha, t), 1e-8) << "t=" << t;
  }
}

TEST(InhomogeneousSignal, ConvexAverageOfShiftedSignals) {
  const ChirpedOscParams p{8.0, 6.0, 0.1, units::mhz_to_angular(47.7), 0.0};
  const BroadeningParams b{alpha_mhz(2.5), 40};
  const double six_sigma = 6.0 * units::sigma_from_alpha(b.alpha);
  for (double t : grid(0.001, 0.3, 40)) {
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k <= 4000; ++k) {
      ChirpedOscParams q = p;
      q.delta = -six_sigma + 2 * six_sigma * k / 4000.0;
      const double v = retrieval_probability(q, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double s = inhomogeneous_signal(p, b, t);
    EXPECT_GE(s, lo - 1e-9);
    EXPECT_LE(s, hi + 1e-9);
  }
}

TEST(InhomogeneousSignal, NarrowerBroadeningApproachesUnbroadenedAtAntinodes) {
  const double w = units::mhz_to_angular(50.0);
  const ChirpedOscParams p{0.0, 0.0, 0.0, w, 0.0};
  const double antinode = 5 * std::numbers::pi / w;  // third antinode
  double prev_gap = 1e300;
  for (double sigma : {4.0, 2.0, 1.0, 0.5, 0.25}) {
    const BroadeningParams b{alpha_mhz(sigma), 40};
    const double gap = std::abs(reference_integrate(p, b, antinode) - retrieval_probability(p, antinode));
    EXPECT_LT(gap, prev_gap) << "sigma=" << sigma;
    prev_gap = gap;
  }
}

TEST(BroadenedSignal, ParallelMatchesSerialReference) {
  const ChirpedOscParams p{8.0, 6.0, 0.1, units::mhz_to_angular(46.1), 0.0};
  const BroadeningParams b{alpha_mhz(2.5), 40};
  const auto t = grid(-0.05, 0.35, 2001);
  std::vector<double> ref(t.size()), par(t.size()), ser(t.size());
  broadened_signal_reference(p, b, t, ref);
  BroadenedSignal fast(40);
  fast.evaluate(p, b.alpha, t, par, Exec::parallel);
  fast.evaluate(p, b.alpha, t, ser, Exec::serial);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(par[i], ser[i]);
    EXPECT_NEAR(par[i], ref[i], 1e-13);
  }
}

TEST(Visibility, PureCosineIsOne) {
  const double w = units::mhz_to_angular(50.0);
  const auto t = grid(0.0, 0.3, 3001);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = 1.0 - std::cos(w * t[i]);
  EXPECT_NEAR(visibility(t, y, 0.0, 0.3), 1.0, 1e-3);
}

TEST(Visibility, ConstantIsZero) {
  const auto t = grid(0.0, 0.3, 301);
  const std::vector<double> y(t.size(), 4.2);
  EXPECT_EQ(visibility(t, y, 0.0, 0.3), 0.0);
}

TEST(Visibility, TooFewExtremaThrows) {
  const auto t = grid(0.0, 0.3, 301);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = t[i] * t[i];
  EXPECT_THROW(visibility(t, y, 0.0, 0.3), AnalysisError);
}

TEST(Visibility, WiderBroadeningLowersVisibility) {
  const ChirpedOscParams p{8.0, 6.0, 0.1, units::mhz_to_angular(50.9), 0.0};
  const auto t = grid(0.0, 0.3, 3001);
  double prev = 2.0;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = inhomogeneous_signal(p, {alpha_mhz(sigma), 40}, t[i]);
    const double v = visibility(t, y, 0.0, 0.3);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LT(v, prev) << "sigma=" << sigma;
    prev = v;
  }
}
