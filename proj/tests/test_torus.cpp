#include <gtest/gtest.h>

#include <cmath>

#include "qplab/rng.hpp"
#include "qplab/torus.hpp"

using namespace qplab;

TEST(Translate, PeriodTwo) {
  EXPECT_EQ(translate(TorusPoint::of(0.25), Frequency::of(0.5), 2)[0], 0.25);
}

TEST(Translate, GoldenOneStep) {
  EXPECT_NEAR(translate(TorusPoint::of(0.0), Frequency::golden(), 1)[0], 0.6180339887498949, 1e-16);
}

TEST(Translate, ZeroStepsIsIdentity) {
  const TorusPoint x{0.3, 0.9};
  EXPECT_EQ(translate(x, Frequency({0.1, 0.2}), 0), x);
}

TEST(Translate, StaysInUnitInterval) {
  RandomStream rng(3);
  const Frequency w({0.9999999999999999, 0.7548776662466927});
  for (int i = 0; i < 1000; ++i) {
    const TorusPoint x{rng.uniform(), rng.uniform()};
    const auto y = translate(x, w, static_cast<std::uint64_t>(rng.uniform() * 1e9));
    for (double c : y.coords()) {
      EXPECT_GE(c, 0.0);
      EXPECT_LT(c, 1.0);
    }
  }
}

TEST(Translate, Composition) {
  RandomStream rng(7);
  const Frequency w = Frequency::golden();
  for (int i = 0; i < 1000; ++i) {
    const TorusPoint x = TorusPoint::of(rng.uniform());
    const auto a = static_cast<std::uint64_t>(rng.uniform() * 1e6);
    const auto b = static_cast<std::uint64_t>(rng.uniform() * 1e6);
    const double lhs = translate(translate(x, w, a), w, b)[0];
    const double rhs = translate(x, w, a + b)[0];
    EXPECT_LE(dist_to_integer(lhs - rhs), 4e-16);
  }
}

TEST(Translate, LongOrbitDoesNotDrift) {
  // Oracle: the product in 64-bit-mantissa long double, error below 1e-13.
  const Frequency w = Frequency::golden();
  const std::uint64_t n = 1000000;
  const long double acc = static_cast<long double>(n) * static_cast<long double>(w[0]);
  const double oracle = static_cast<double>(acc - std::floor(acc));
  EXPECT_LE(dist_to_integer(translate(TorusPoint::of(0.0), w, n)[0] - oracle), 1e-12);
}

TEST(TorusPoint, WrapsAndValidates) {
  EXPECT_EQ(TorusPoint::of(1.25)[0], 0.25);
  EXPECT_EQ(TorusPoint::of(-0.25)[0], 0.75);
  EXPECT_THROW(TorusPoint::of(std::nan("")), InputError);
  EXPECT_THROW((TorusPoint{0.1, 0.2, 0.3, 0.4}), InputError);
}

TEST(Diophantine, RationalFailsAtTwo) {
  const auto r = diophantine_check(Frequency::of(0.5), 1e-6, 100);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.resonance);
  ASSERT_TRUE(r.first_violation.has_value());
  EXPECT_EQ(*r.first_violation, (std::vector<std::int64_t>{2}));
}

TEST(Diophantine, GoldenMeanMatchesContinuedFractionOracle) {
  // For the golden mean the minimum of k^2 ||k w|| over k <= K is attained at
  // Fibonacci denominators; the smallest value is at k = 1.
  Frequency w = Frequency::golden();
  const auto r = certify(w, 0.3, 10000);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.t_star, 0.3);
  double oracle = 1e300;
  std::int64_t f0 = 1, f1 = 1;
  while (f1 <= 10000) {
    const double k = static_cast<double>(f1);
    const double pk = static_cast<double>(f0);  // nearest numerator
    oracle = std::min(oracle, k * k * std::abs(k * w[0] - pk));
    const std::int64_t f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  EXPECT_NEAR(r.t_star, oracle, 1e-9);
  ASSERT_TRUE(w.certificate().has_value());
  EXPECT_EQ(w.certificate()->exponent, 2);
  EXPECT_EQ(w.certificate()->k_max, 10000);
}

TEST(Diophantine, TwoDimensionalPasses) {
  Frequency w({std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0});
  const auto r = certify(w, 1e-3, 200);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(w.certificate().has_value());
  EXPECT_EQ(w.certificate()->exponent, 3);
}

TEST(Diophantine, MonotoneInKMax) {
  const Frequency w = Frequency::of(0.3819660112501051);
  const double t = 0.5;
  const auto small = diophantine_check(w, t, 10);
  ASSERT_FALSE(small.passed);
  for (std::int64_t k : {20, 100, 1000}) {
    const auto big = diophantine_check(w, t, k);
    EXPECT_FALSE(big.passed);
    EXPECT_LE(big.t_star, small.t_star);
  }
}

TEST(Diophantine, RejectsBadArguments) {
  EXPECT_THROW(diophantine_check(Frequency::golden(), 0.0, 10), InputError);
  EXPECT_THROW(diophantine_check(Frequency::golden(), 0.1, 0), InputError);
}

TEST(Diophantine, FailedCertificationClearsCertificate) {
  Frequency w = Frequency::golden();
  certify(w, 0.3, 100);
  ASSERT_TRUE(w.certificate().has_value());
  certify(w, 0.5, 100);
  EXPECT_FALSE(w.certificate().has_value());
}
