#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "qplab/cocycle.hpp"
#include "qplab/rng.hpp"

using namespace qplab;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

// [[lambda f(x) - E, -1], [1, 0]] with f a scalar trig polynomial.
CocycleSpec schrodinger_like(TrigPoly f, double lambda, double e, Frequency w = Frequency::golden()) {
  return CocycleSpec(
      2, std::move(w),
      [f = std::move(f), lambda, e](const TorusPoint& x, std::span<double> out) {
        out[0] = lambda * f(x) - e;
        out[1] = -1.0;
        out[2] = 1.0;
        out[3] = 0.0;
        return 0.0;
      },
      "schrodinger-like");
}

TrigPoly random_trig(RandomStream& rng, int degree) {
  std::vector<TrigTerm> terms{{{0}, rng.normal(), 0.0}};
  for (int k = 1; k <= degree; ++k) terms.push_back({{k}, rng.normal(), rng.normal()});
  return TrigPoly(1, terms);
}

}  // namespace

TEST(Iterate, ConstantDiagonal) {
  const auto spec = CocycleSpec::constant(Matrix::diagonal({2.0, 1.0}), Frequency::golden());
  const auto led = iterate(spec, TorusPoint::of(0.3), 10);
  EXPECT_NEAR(led.log_norm(), 10 * std::log(2.0), 1e-13);
  EXPECT_EQ(led.steps, 10u);
}

TEST(Iterate, NilpotentGivesZeroFlag) {
  const auto spec = CocycleSpec::constant(Matrix{{0, 1}, {0, 0}}, Frequency::golden());
  EXPECT_FALSE(iterate(spec, TorusPoint::of(0.1), 1).zero);
  const auto led = iterate(spec, TorusPoint::of(0.1), 2);
  EXPECT_TRUE(led.zero);
  EXPECT_EQ(led.log_scale(), kNegInf);
  EXPECT_EQ(led.log_norm(), kNegInf);
}

TEST(Iterate, MatchesHighPrecisionProduct) {
  using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256>>;
  const double lambda = 10.0;
  const auto spec = schrodinger_like(TrigPoly::cosine(), lambda, 0.0);
  const double x0 = 0.1;
  const int n = 50;
  const auto led = iterate(spec, TorusPoint::of(x0), n);

  const Big pi2 = boost::multiprecision::acos(Big(-1)) * 2;
  const Big w = (boost::multiprecision::sqrt(Big(5)) - 1) / 2;
  Big p[2][2] = {{1, 0}, {0, 1}};
  for (int j = 0; j < n; ++j) {
    const Big a = lambda * boost::multiprecision::cos(pi2 * (Big(x0) + j * w));
    const Big q[2][2] = {{a * p[0][0] - p[1][0], a * p[0][1] - p[1][1]}, {p[0][0], p[0][1]}};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) p[r][c] = q[r][c];
  }
  const double scale = std::exp(led.log_scale());
  Big mx = 0;
  for (auto& row : p)
    for (auto& v : row) mx = std::max(mx, Big(abs(v)));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double got = scale * led.factor(r, c);
      EXPECT_LE(std::abs(got - static_cast<double>(p[r][c])), 1e-10 * static_cast<double>(mx));
    }
}

TEST(Iterate, LedgerStaysInBandAndIsReproducible) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 30.0, 0.5);
  const auto a = iterate(spec, TorusPoint::of(0.37), 20000);
  const auto b = iterate(spec, TorusPoint::of(0.37), 20000);
  EXPECT_EQ(a.factor, b.factor);
  EXPECT_EQ(a.exponent2, b.exponent2);
  const double mx = max_abs(a.factor);
  EXPECT_GE(mx, kLedgerLow);
  EXPECT_LE(mx, kLedgerHigh / 2);
  EXPECT_TRUE(std::isfinite(a.log_norm()));
  EXPECT_GT(a.log_norm(), 1000.0);
}

TEST(Iterate, RejectsZeroSteps) {
  const auto spec = CocycleSpec::constant(Matrix::identity(2), Frequency::golden());
  EXPECT_THROW(iterate(spec, TorusPoint::of(0.0), 0), InputError);
}

TEST(Un, ExponentialDiagonal) {
  const auto spec = CocycleSpec::constant(Matrix::diagonal({std::exp(1.0), 1.0}), Frequency::golden());
  for (std::uint64_t n : {1u, 7u, 100u}) EXPECT_NEAR(u_n(spec, TorusPoint::of(0.2), n), 1.0, 1e-14);
}

TEST(Un, ZeroCocycle) {
  const auto spec = CocycleSpec::constant(Matrix(2, 2), Frequency::golden());
  EXPECT_EQ(u_n(spec, TorusPoint::of(0.2), 3), kNegInf);
}

TEST(FiniteScale, ConstantAndIdentity) {
  const auto d = CocycleSpec::constant(Matrix::diagonal({2.0, 1.0}), Frequency::golden());
  EXPECT_NEAR(finite_scale_top_le(d, 16).estimate, std::log(2.0), 1e-14);
  const auto id = CocycleSpec::constant(Matrix::identity(3), Frequency::golden());
  EXPECT_EQ(finite_scale_top_le(id, 5).estimate, 0.0);
}

TEST(FiniteScale, ClosedFormScalarIntegral) {
  // int_0^1 log(a + cos 2 pi x) dx = log((a + sqrt(a^2 - 1)) / 2)
  const auto poly = MatrixTrigPoly::from_entries(1, 1, {{TrigPoly::cosine(1.0, 2.0)}});
  const auto spec = CocycleSpec::from_trig(poly, Frequency::golden());
  const auto r = finite_scale_top_le(spec, 1);
  EXPECT_NEAR(r.estimate, std::log((2.0 + std::sqrt(3.0)) / 2.0), 1e-12);
  EXPECT_EQ(r.samples, 2048u);
  EXPECT_EQ(r.excluded, 0u);
}

TEST(FiniteScale, AgreesWithGridAverageOfUn) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 3.0, 0.2);
  QuadratureSettings q;
  q.grid = 128;
  const auto r = finite_scale_top_le(spec, 40, q);
  std::vector<double> v;
  for (std::size_t i = 0; i < 128; ++i) v.push_back(u_n(spec, TorusPoint::of((i + 0.5) / 128.0), 40));
  EXPECT_NEAR(r.estimate, pairwise_mean(v), 1e-12);
}

TEST(FiniteScale, DeterministicAcrossWorkerCounts) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 2.5, 0.1);
  QuadratureSettings q1, q4;
  q1.grid = q4.grid = 256;
  q1.workers = 1;
  q4.workers = 4;
  EXPECT_EQ(finite_scale_top_le(spec, 64, q1).estimate, finite_scale_top_le(spec, 64, q4).estimate);
}

TEST(FiniteScale, GridRefinementWithinErrorEstimate) {
  for (double lambda : {0.5, 2.0, 4.0, 10.0}) {
    const auto spec = schrodinger_like(TrigPoly::cosine(), lambda, 0.3);
    QuadratureSettings a, b;
    a.grid = 512;
    b.grid = 1024;
    const auto ra = finite_scale_top_le(spec, 32, a);
    const auto rb = finite_scale_top_le(spec, 32, b);
    EXPECT_LE(std::abs(ra.estimate - rb.estimate), std::max(ra.error_estimate, 1e-12)) << lambda;
  }
}

TEST(FiniteScale, DegenerateWarningAndTruncation) {
  const auto spec = CocycleSpec::constant(Matrix{{0, 1}, {0, 0}}, Frequency::golden());
  QuadratureSettings q;
  q.grid = 64;
  const auto r = finite_scale_top_le(spec, 4, q);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.excluded, 64u);
  q.truncate = true;
  const auto t = finite_scale_top_le(spec, 4, q);
  EXPECT_FALSE(t.degenerate);
  EXPECT_NEAR(t.estimate, -std::pow(4.0, 0.9), 1e-12);
}

TEST(FiniteScale, RejectsCoarseGrid) {
  const auto spec = CocycleSpec::constant(Matrix::identity(2), Frequency::golden());
  QuadratureSettings q;
  q.grid = 32;
  EXPECT_THROW(finite_scale_top_le(spec, 4, q), InputError);
}

TEST(FiniteScale, OrbitAverageConsistent) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 5.0, 0.0);
  QuadratureSettings q;
  q.orbit_samples = 4096;
  const auto r = finite_scale_top_le(spec, 50, q);
  ASSERT_TRUE(r.orbit_estimate.has_value());
  EXPECT_NEAR(*r.orbit_estimate, r.estimate, 2e-2);
}

TEST(FiniteScale, TwoDimensionalTorus) {
  // a(x, y) = 3 + cos 2 pi x + cos 2 pi y, mean of log checked against a fine
  // tensor midpoint rule evaluated directly.
  const TrigPoly a(2, {{{0, 0}, 3.0, 0.0}, {{1, 0}, 1.0, 0.0}, {{0, 1}, 1.0, 0.0}});
  const auto spec = CocycleSpec::from_trig(MatrixTrigPoly::from_entries(1, 1, {{a}}),
                                           Frequency({std::sqrt(2.0) - 1, std::sqrt(3.0) - 1}));
  QuadratureSettings q;
  q.grid = 64;
  const auto r = finite_scale_top_le(spec, 1, q);
  double s = 0.0;
  const int g = 400;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      s += std::log(3.0 + std::cos(kTwoPi * (i + 0.5) / g) + std::cos(kTwoPi * (j + 0.5) / g));
  EXPECT_NEAR(r.estimate, s / (g * g), 1e-10);
}

TEST(Spectrum, ConstantDiagonal) {
  const auto spec = CocycleSpec::constant(Matrix::diagonal({3.0, 2.0, 1.0}), Frequency::golden());
  const auto s = lyapunov_spectrum(spec, 50, 4);
  EXPECT_NEAR(s.exponents[0], std::log(3.0), 1e-13);
  EXPECT_NEAR(s.exponents[1], std::log(2.0), 1e-13);
  EXPECT_NEAR(s.exponents[2], 0.0, 1e-13);
  ASSERT_TRUE(s.wedge_residual.has_value());
  EXPECT_LE(*s.wedge_residual, 1e-12);
}

TEST(Spectrum, RandomConstantSl2SumsToZero) {
  RandomStream rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix g{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    double det = determinant(g);
    if (det < 0) {
      g(0, 0) = -g(0, 0);
      g(0, 1) = -g(0, 1);
      det = -det;
    }
    g *= 1.0 / std::sqrt(det);
    const auto s = lyapunov_spectrum(CocycleSpec::constant(g, Frequency::golden()), 1000, 4);
    EXPECT_NEAR(s.exponents[0] + s.exponents[1], 0.0, 1e-8);
  }
}

TEST(Spectrum, SingularStepsGiveNegInfTail) {
  const auto spec = CocycleSpec::constant(Matrix{{2, 1, 0}, {1, 1, 0}, {0, 0, 0}}, Frequency::golden());
  const auto s = lyapunov_spectrum(spec, 4000, 3);
  EXPECT_TRUE(std::isfinite(s.exponents[0]));
  EXPECT_TRUE(std::isfinite(s.exponents[1]));
  EXPECT_EQ(s.exponents[2], kNegInf);
  const double top = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  // Start-up transient is O(1/n).
  EXPECT_NEAR(s.exponents[0], top, 1e-3);
  EXPECT_NEAR(s.exponents[1], -top, 1e-3);
  EXPECT_NEAR(s.exponents[0] + s.exponents[1], 0.0, 1e-12);
}

TEST(Spectrum, ExteriorSquareIdentityForRandomSl2TrigCocycles) {
  RandomStream rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const auto spec = schrodinger_like(random_trig(rng, 2), 2.0, 0.0);
    const auto s = lyapunov_spectrum(spec, 10000, 8);
    ASSERT_TRUE(s.wedge_residual.has_value());
    EXPECT_LE(*s.wedge_residual, 2e-2);
    EXPECT_GE(s.exponents[0], s.exponents[1]);
  }
}

TEST(Spectrum, ThreeDimensionalWedgeAgreement) {
  RandomStream rng(9);
  std::vector<std::vector<TrigPoly>> entries(3, std::vector<TrigPoly>(3));
  for (auto& row : entries)
    for (auto& e : row) e = random_trig(rng, 1);
  const auto spec = CocycleSpec::from_trig(MatrixTrigPoly::from_entries(3, 3, entries), Frequency::golden());
  const auto s = lyapunov_spectrum(spec, 4000, 8);
  EXPECT_GE(s.exponents[0], s.exponents[1]);
  EXPECT_GE(s.exponents[1], s.exponents[2]);
  ASSERT_TRUE(s.wedge_residual.has_value());
  EXPECT_LE(*s.wedge_residual, 2e-2);
  // Top exponent agrees with the finite-scale estimate along the same phases.
  std::vector<double> u;
  for (std::size_t i = 0; i < 8; ++i) u.push_back(u_n(spec, spectrum_phase(i, 8, 1), 4000));
  EXPECT_NEAR(pairwise_mean(u), s.exponents[0], 2e-2);
}

TEST(Properties, SubadditivityAndUpperBound) {
  RandomStream rng(13);
  const TrigPoly f = random_trig(rng, 2);
  const auto spec = schrodinger_like(f, 3.0, 0.4);
  double sup_norm = 0.0;
  for (int i = 0; i < 20000; ++i) sup_norm = std::max(sup_norm, spectral_norm(spec.evaluate(TorusPoint::of(i / 20000.0))));
  const double bound = std::log(sup_norm * (1 + 1e-6));
  const Frequency& w = spec.frequency();
  for (int trial = 0; trial < 200; ++trial) {
    const TorusPoint x = TorusPoint::of(rng.uniform());
    const std::uint64_t a = 1 + static_cast<std::uint64_t>(rng.uniform() * 60);
    const std::uint64_t b = 1 + static_cast<std::uint64_t>(rng.uniform() * 60);
    const double lhs = (a + b) * u_n(spec, x, a + b);
    const double rhs = a * u_n(spec, translate(x, w, b), a) + b * u_n(spec, x, b);
    EXPECT_LE(lhs, rhs + 1e-9);
    EXPECT_LE(u_n(spec, x, a), bound);
  }
}

TEST(Exterior, CocycleOfSquareMatchesPointwise) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 2.0, 0.0);
  const auto w = exterior_square_cocycle(spec);
  EXPECT_EQ(w.dim(), 1u);
  EXPECT_NEAR(w.evaluate(TorusPoint::of(0.3))(0, 0), 1.0, 1e-15);
  EXPECT_THROW(exterior_power_cocycle(spec, 3), InputError);
}

TEST(MeanLogDet, SchrodingerDeterminantIsOne) {
  const auto spec = schrodinger_like(TrigPoly::cosine(), 2.0, 0.0);
  EXPECT_NEAR(mean_log_abs_det(spec), 0.0, 1e-15);
}
