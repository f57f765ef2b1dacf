#include <gtest/gtest.h>

#include <cmath>

#include "qplab/reduction.hpp"

using namespace qplab;

namespace {

// diag(f(x), 0) with f = 2 + cos 2 pi x.
CocycleSpec diag_f_zero() {
  const TrigPoly f = TrigPoly::cosine(1.0, 2.0);
  return CocycleSpec::from_trig(
      MatrixTrigPoly::from_entries(2, 2, {{f, TrigPoly::constant(0.0)}, {TrigPoly::constant(0.0), TrigPoly::constant(0.0)}}),
      Frequency::golden(), "diag(f,0)");
}

// 3 x 3 cocycle killing the constant direction e_3: A(x) = B(x) diag(1,1,0).
CocycleSpec constant_kernel_cocycle() {
  auto b = random_rank_deficient_cocycle(77, 3, 3);
  return CocycleSpec(
      3, Frequency::golden(),
      [b](const TorusPoint& x, std::span<double> out) {
        b.evaluate_into(x, out);
        for (std::size_t i = 0; i < 3; ++i) out[i * 3 + 2] = 0.0;
        return 0.0;
      },
      "constant-kernel");
}

double l1_of_log_f() { return std::log((2.0 + std::sqrt(3.0)) / 2.0); }

}  // namespace

TEST(RankProfile, DiagonalWithZero) {
  const auto p = rank_profile(diag_f_zero());
  EXPECT_EQ(p.ranks, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(p.stabilized_rank, 1u);
  EXPECT_EQ(p.stabilization_index, 1u);
}

TEST(RankProfile, NilpotentUpperTriangular) {
  const TrigPoly f = TrigPoly::cosine(1.0, 2.0), z = TrigPoly::constant(0.0);
  const auto spec = CocycleSpec::from_trig(MatrixTrigPoly::from_entries(2, 2, {{z, f}, {z, z}}), Frequency::golden());
  const auto p = rank_profile(spec);
  EXPECT_EQ(p.ranks, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(p.stabilized_rank, 0u);
  EXPECT_THROW(build_reduction(spec), NilpotentError);
}

TEST(RankProfile, InvertibleHasFullRank) {
  const auto spec = CocycleSpec::constant(Matrix{{2, -1}, {1, 0}}, Frequency::golden());
  EXPECT_EQ(rank_profile(spec).stabilized_rank, 2u);
}

TEST(RankProfile, StabilizationPersists) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto spec = random_rank_deficient_cocycle(seed, 4, 2);
    const auto p = rank_profile(spec, 32);
    for (std::size_t n = 1; n < p.ranks.size(); ++n) {
      EXPECT_LE(p.ranks[n], p.ranks[n - 1]);
      if (p.ranks[n] == p.ranks[n - 1]) {
        for (std::size_t j = n; j < p.ranks.size(); ++j) EXPECT_EQ(p.ranks[j], p.ranks[n]);
      }
    }
    EXPECT_EQ(p.stabilized_rank, 2u);
  }
}

TEST(Nilpotency, StrictlyUpperTriangular) {
  const auto spec = CocycleSpec::constant(Matrix{{0, 1, 2}, {0, 0, 3}, {0, 0, 0}}, Frequency::golden());
  const auto r = is_nilpotent(spec);
  EXPECT_TRUE(r.nilpotent);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LE(*r.witness, 3u);
  EXPECT_EQ(*r.witness, 3u);
  EXPECT_EQ(finite_scale_top_le(spec, 3).estimate, kNegInf);
}

TEST(Nilpotency, SchrodingerIsNot) {
  const TrigPoly f = TrigPoly::cosine();
  const auto spec = CocycleSpec(2, Frequency::golden(), [f](const TorusPoint& x, std::span<double> o) {
    o[0] = 3.0 * f(x);
    o[1] = -1.0;
    o[2] = 1.0;
    o[3] = 0.0;
    return 0.0;
  });
  EXPECT_FALSE(is_nilpotent(spec).nilpotent);
}

TEST(Nilpotency, RankOneWithOrthogonalFactorsMatchesDirectIteration) {
  // A(x) = a(x) v w^T with w orthogonal to v: A(Tx) A(x) = 0 identically.
  const TrigPoly a = TrigPoly::cosine(1.0, 0.5);
  const std::vector<double> v{1.0, 2.0, -1.0}, w{1.0, 0.0, 1.0};
  const auto spec = CocycleSpec(3, Frequency::golden(), [a, v, w](const TorusPoint& x, std::span<double> o) {
    const double s = a(x);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) o[i * 3 + j] = s * v[i] * w[j];
    return 0.0;
  });
  const auto r = is_nilpotent(spec);
  EXPECT_TRUE(r.nilpotent);
  EXPECT_EQ(*r.witness, 2u);
  for (int i = 0; i < 64; ++i) EXPECT_EQ(max_abs(spec.evaluate(TorusPoint::of(i / 64.0 + 0.001)) *
                                                 Matrix::identity(3)) == 0.0, false);
  for (int i = 0; i < 64; ++i) EXPECT_TRUE(iterate(spec, TorusPoint::of((i + 0.5) / 64.0), 3).zero);
}

TEST(Reduction, DiagonalStructure) {
  const auto spec = diag_f_zero();
  const auto red = build_reduction(spec);
  EXPECT_EQ(red.k(), 1u);
  EXPECT_EQ(red.row_indices(), (std::vector<std::size_t>{0}));
  const TorusPoint x = TorusPoint::of(0.21);
  const ScaledMatrix v = red.v(x);
  const TrigPoly f = TrigPoly::cosine(1.0, 2.0);
  const double expected = f(translate(x, spec.frequency(), 1)) * f(x);
  EXPECT_NEAR(std::exp(v.log_scale) * v.factor(0, 0), expected, 1e-13 * expected);
  EXPECT_EQ(v.factor(0, 1), 0.0);
  const auto rep = verify_semiconjugation(red, red.m() + 5, 20);
  EXPECT_LE(rep.max_residual.rv_vatilde, 1e-9);
  EXPECT_LE(rep.max_residual.bn, 1e-9);
  EXPECT_LE(rep.max_residual.an, 1e-9);
}

TEST(Reduction, ConstantKernelDirection) {
  const auto spec = constant_kernel_cocycle();
  const auto red = build_reduction(spec);
  EXPECT_EQ(red.k(), 2u);
  const auto r = red.r_spec();
  int nonsingular = 0;
  for (int i = 0; i < 512; ++i) {
    const Matrix rx = r.evaluate_scaled(TorusPoint::of((i + 0.5) / 512)).factor;
    if (std::abs(determinant(rx)) > 1e-12 * std::pow(max_abs(rx), 2)) ++nonsingular;
  }
  EXPECT_GE(nonsingular, 507);  // at least 99% of the grid
}

TEST(Reduction, MaximalRankLeAgreement) {
  const auto spec = random_rank_deficient_cocycle(5, 2, 2);
  const auto red = build_reduction(spec);
  EXPECT_EQ(red.k(), 2u);
  LeDecompositionOptions o;
  o.grid = 512;
  const auto le = le_decomposition(red, 256, o);
  EXPECT_NEAR(le.l1_r - le.l1_h, le.l1_a, 1e-2);
}

TEST(Reduction, RandomRankOneIdentities) {
  const auto spec = random_rank_deficient_cocycle(11, 2, 1);
  const auto red = build_reduction(spec);
  ASSERT_EQ(red.k(), 1u);
  const auto rep = verify_semiconjugation(red, 30, 100);
  EXPECT_LE(rep.max_residual.rv_vatilde, 1e-8);
  EXPECT_LE(rep.max_residual.bn, 1e-8);
  EXPECT_LE(rep.max_residual.an, 1e-8);
}

TEST(Reduction, ProjectorIsOrthogonal) {
  const auto spec = random_rank_deficient_cocycle(3, 3, 2);
  const auto red = build_reduction(spec);
  for (int i = 0; i < 20; ++i) {
    const Matrix p = red.projector(TorusPoint::of((i + 0.37) / 20));
    EXPECT_LE(max_abs(p * p - p), 1e-10);
    EXPECT_LE(max_abs(p - transpose(p)), 1e-10);
    // P = V^+ V
    const TorusPoint x = TorusPoint::of((i + 0.37) / 20);
    const ScaledMatrix pv = red.v_pinv(x) * red.v(x);
    Matrix q = pv.factor;
    q *= std::exp(pv.log_scale);
    EXPECT_LE(max_abs(q - p), 1e-10);
  }
}

TEST(Reduction, AtildeMapsRangeOntoNextRange) {
  const auto spec = random_rank_deficient_cocycle(4, 3, 2);
  const auto red = build_reduction(spec);
  const auto at = red.atilde_spec();
  for (int i = 0; i < 20; ++i) {
    const TorusPoint x = TorusPoint::of((i + 0.11) / 20);
    const Matrix px = red.projector(x);
    const Matrix ptx = red.projector(translate(x, spec.frequency(), 1));
    // Image of Range P(x) under At(x), compared with Range P(Tx).
    const Matrix img = at.evaluate_scaled(x).factor * px;
    const Svd s = svd(img);
    // Top-k left singular vectors of the image span the same space as P(Tx).
    Matrix basis(3, 2);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 2; ++c) basis(r, c) = s.u(r, c);
    const Matrix residual = basis - ptx * basis;
    // sin of the largest principal angle.
    EXPECT_LE(spectral_norm(residual), 1e-8);
    EXPECT_GT(s.s[1], 1e-8 * s.s[0]);
  }
}

TEST(Reduction, DetRNonzeroAndHPositive) {
  const auto spec = random_rank_deficient_cocycle(8, 3, 2);
  const auto red = build_reduction(spec);
  const auto r = red.r_spec();
  int good_det = 0, good_gram = 0;
  for (int i = 0; i < 512; ++i) {
    const TorusPoint x = TorusPoint::of((i + 0.5) / 512);
    const auto s = red.sample(x);
    if (s.full_rank && s.gram_ratio > 1e-12) ++good_gram;
    const Matrix rx = r.evaluate_scaled(x).factor;
    if (std::abs(determinant(rx)) > 1e-12 * std::pow(max_abs(rx), 2)) ++good_det;
    EXPECT_TRUE(std::isfinite(red.log_h(x)));
  }
  EXPECT_GE(good_gram, 507);
  EXPECT_GE(good_det, 507);
}

TEST(Reduction, LeDecompositionClosedForm) {
  const auto red = build_reduction(diag_f_zero());
  LeDecompositionOptions o;
  o.grid = 1024;
  const auto le = le_decomposition(red, 64, o);
  EXPECT_NEAR(le.l1_a, l1_of_log_f(), 1e-2);
  EXPECT_NEAR(le.l1_r - le.l1_h, l1_of_log_f(), 1e-2);
  EXPECT_THROW(le_decomposition(red, 32, o), InputError);
}

TEST(Reduction, RemainderShrinksForMaximalRank) {
  const auto spec = random_rank_deficient_cocycle(6, 2, 2);
  const auto red = build_reduction(spec);
  LeDecompositionOptions o;
  o.grid = 256;
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t n : {64u, 128u, 256u}) {
    const auto le = le_decomposition(red, n, o);
    EXPECT_LT(std::abs(le.remainder_mean), prev);
    prev = std::abs(le.remainder_mean);
  }
}

TEST(Reduction, SeedInvariance) {
  const auto spec = random_rank_deficient_cocycle(9, 3, 2);
  ReductionOptions a, b;
  a.seed = 1;
  b.seed = 2;
  LeDecompositionOptions o;
  o.grid = 512;
  const auto la = le_decomposition(build_reduction(spec, a), 256, o);
  const auto lb = le_decomposition(build_reduction(spec, b), 256, o);
  EXPECT_NEAR(la.l1_r - la.l1_h, lb.l1_r - lb.l1_h, 1e-2);
}

TEST(Reduction, L2BoundedAcrossScales) {
  const auto spec = random_rank_deficient_cocycle(12, 3, 1);
  QuadratureSettings q;
  q.grid = 256;
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t n : {8u, 32u, 128u, 512u}) {
    const auto r = finite_scale_top_le(spec, n, q);
    double s = 0.0;
    for (double v : r.values) s += v * v;
    const double l2 = std::sqrt(s / r.values.size());
    lo = std::min(lo, l2);
    hi = std::max(hi, l2);
  }
  EXPECT_LT(hi, 3.0 * lo + 1.0);
}

TEST(Reduction, ExteriorSquareDetectsRankAtMostOne) {
  // rank A(x) <= 1 everywhere iff wedge^2 A vanishes identically.
  const auto k1 = random_rank_deficient_cocycle(13, 3, 1);
  const auto k2 = random_rank_deficient_cocycle(13, 3, 2);
  const auto w1 = exterior_square_cocycle(k1), w2 = exterior_square_cocycle(k2);
  double worst1 = 0.0, best2 = 0.0;
  for (int i = 0; i < 256; ++i) {
    const TorusPoint x = TorusPoint::of((i + 0.5) / 256);
    const double n1 = spectral_norm(k1.evaluate(x)), n2 = spectral_norm(k2.evaluate(x));
    worst1 = std::max(worst1, max_abs(w1.evaluate(x)) / (n1 * n1));
    best2 = std::max(best2, max_abs(w2.evaluate(x)) / (n2 * n2));
  }
  EXPECT_LE(worst1, 1e-14);
  EXPECT_GE(best2, 1e-3);
  EXPECT_EQ(rank_profile(k1).stabilized_rank, 1u);
  EXPECT_EQ(rank_profile(k2).stabilized_rank, 2u);
}

TEST(Reduction, VerificationRejectsBadPhases) {
  const auto red = build_reduction(diag_f_zero());
  const auto rep = verify_semiconjugation(red, 4, 5);
  EXPECT_EQ(rep.points.size(), 5u);
  EXPECT_THROW(verify_semiconjugation(red, 1, 5), InputError);
}

TEST(Reduction, RankTwoIdentitiesNearSingularGram) {
  // The selected rows of this cocycle have det(V V^T) / prod ||v_i||^2 ~ 1e-10
  // somewhere on the circle; the identities must survive that conditioning.
  const auto red = build_reduction(random_rank_deficient_cocycle(3, 3, 2));
  ASSERT_EQ(red.k(), 2u);
  ASSERT_LT(red.selection_score(), 1e-8);
  const auto rep = verify_semiconjugation(red, 30, 100, 3);
  EXPECT_LE(rep.max_residual.rv_vatilde, 1e-8);
  EXPECT_LE(rep.max_residual.bn, 1e-8);
  EXPECT_LE(rep.max_residual.an, 1e-8);
}

TEST(Reduction, ReducedMatrixMatchesAdjugateFormula) {
  // Oracle: g(Tx)^3 V(Tx) A(x) V(x)^T adj(V V^T)(x) formed directly.
  const auto spec = random_rank_deficient_cocycle(6, 3, 2);
  const auto red = build_reduction(spec);
  const auto r = red.r_spec();
  for (double x0 : {0.1, 0.37, 0.8}) {
    const TorusPoint x = TorusPoint::of(x0);
    const auto s0 = red.sample(x), s1 = red.sample(translate(x, spec.frequency(), 1));
    const ScaledMatrix a = spec.evaluate_scaled(x);
    const Matrix b = s1.v * a.factor * transpose(s0.v) * adjugate(s0.v * transpose(s0.v));
    const double log_b = 3.0 * s1.log_g + s1.log_am + a.log_scale + 3.0 * s0.log_am;
    EXPECT_LE(scaled_residual(ScaledMatrix{b, log_b}, r.evaluate_scaled(x)), 1e-10) << "x = " << x0;
  }
}
