#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qplab/linalg.hpp"
#include "qplab/rng.hpp"

using namespace qplab;

namespace {

Matrix random_matrix(RandomStream& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

}  // namespace

TEST(SingularProfile, DiagonalMatrix) {
  const auto p = singular_profile(Matrix::diagonal({3.0, 1.0}));
  ASSERT_EQ(p.values.size(), 2u);
  EXPECT_NEAR(p.values[0], 3.0, 1e-15);
  EXPECT_NEAR(p.values[1], 1.0, 1e-15);
  EXPECT_EQ(p.numerical_rank, 2u);
}

TEST(SingularProfile, ZeroMatrix) {
  const auto p = singular_profile(Matrix(2, 2));
  EXPECT_EQ(p.values, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(p.numerical_rank, 0u);
}

TEST(SingularProfile, MatchesSymmetricEigensolver) {
  RandomStream rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = random_matrix(rng, 3, 3);
    const auto p = singular_profile(g);
    const Eigen::MatrixXd e = to_eigen(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e);
    Eigen::VectorXd ev = es.eigenvalues();  // ascending
    for (int j = 0; j < 3; ++j) {
      const double oracle = std::sqrt(std::max(0.0, ev(2 - j)));
      EXPECT_NEAR(p.values[j], oracle, 1e-12 * std::max(1.0, oracle)) << "trial " << trial;
    }
  }
}

TEST(SingularProfile, OrthogonalHasUnitValues) {
  const double c = std::cos(0.7), s = std::sin(0.7);
  const auto p = singular_profile(Matrix{{c, -s, 0}, {s, c, 0}, {0, 0, 1}});
  for (double v : p.values) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(SingularProfile, RejectsBadInput) {
  EXPECT_THROW(singular_profile(Matrix::identity(2), 0.0), InputError);
  EXPECT_THROW(singular_profile(Matrix::identity(2), 1.0), InputError);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(singular_profile(bad), InputError);
}

TEST(SingularProfile, ValuesSortedAndRankCountsAboveTolerance) {
  const auto p = singular_profile(Matrix::diagonal({1e-12, 5.0, 1.0}), 1e-10);
  EXPECT_TRUE(std::is_sorted(p.values.rbegin(), p.values.rend()));
  EXPECT_EQ(p.numerical_rank, 2u);
}

TEST(PseudoInverse, OrthonormalRows) {
  const Matrix v{{1, 0, 0}, {0, 1, 0}};
  EXPECT_LE(max_abs_diff(pseudo_inverse(v), transpose(v)), 1e-15);
}

TEST(PseudoInverse, Scalar) { EXPECT_NEAR(pseudo_inverse(Matrix{{2.0}})(0, 0), 0.5, 1e-16); }

TEST(PseudoInverse, RandomWideMatchesBounds) {
  RandomStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix v = random_matrix(rng, 2, 4);
    const Matrix w = pseudo_inverse(v);
    EXPECT_LE(max_abs_diff(v * w, Matrix::identity(2)), 1e-12);
    // Range(W) is orthogonal to Ker(V): W = V^T (V V^T)^{-1}.
    const Matrix vvt = v * transpose(v);
    EXPECT_LE(max_abs_diff(w, transpose(v) * inverse(vvt)), 1e-10 * spectral_norm(w));
    const double wn = spectral_norm(w);
    EXPECT_GE(wn * (1 + 1e-12), 1.0 / spectral_norm(v));
    EXPECT_LE(wn, std::sqrt(spectral_norm(adjugate(vvt)) / determinant(vvt)) * (1 + 1e-12));
  }
}

TEST(PseudoInverse, RankDeficientNamesSingularValue) {
  const Matrix v{{1, 2, 3}, {2, 4, 6}};
  try {
    pseudo_inverse(v);
    FAIL() << "expected SingularInputError";
  } catch (const SingularInputError& e) {
    EXPECT_EQ(e.index(), 1u);
    EXPECT_LT(e.singular_value(), 1e-10);
    EXPECT_NE(std::string(e.what()).find("s_2"), std::string::npos);
  }
}

TEST(Adjugate, Identity) { EXPECT_EQ(adjugate(Matrix::identity(3)), Matrix::identity(3)); }

TEST(Adjugate, TwoByTwoClosedForm) {
  const Matrix g{{1.5, -2.0}, {0.25, 3.0}};
  EXPECT_EQ(adjugate(g), (Matrix{{3.0, 2.0}, {-0.25, 1.5}}));
}

TEST(Adjugate, MatchesDetTimesInverse) {
  RandomStream rng(17);
  for (std::size_t m : {3u, 4u, 5u, 6u, 8u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix g = random_matrix(rng, m, m);
      const Eigen::MatrixXd e = to_eigen(g);
      const Eigen::MatrixXd oracle = e.determinant() * e.inverse();
      const Matrix a = adjugate(g);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          err = std::max(err, std::abs(a(i, j) - oracle(i, j)));
          scale = std::max(scale, std::abs(oracle(i, j)));
        }
      EXPECT_LE(err, 1e-10 * scale) << "m=" << m;
      // g adj(g) = det(g) I
      EXPECT_LE(max_abs_diff(g * a, determinant(g) * Matrix::identity(m)), 1e-10 * scale * max_abs(g) * m);
    }
  }
}

TEST(Adjugate, SingularMatrixStillExact) {
  const Matrix g{{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}, {0, 1, 0, 1, 0}, {1, 0, 1, 0, 1}, {3, 1, 4, 1, 5}};
  const Matrix a = adjugate(g);
  EXPECT_LE(max_abs(g * a), 1e-9 * std::max(1.0, max_abs(a)));
}

TEST(Adjugate, RejectsLargeDimension) { EXPECT_THROW(adjugate(Matrix::identity(9)), InputError); }

TEST(ExteriorSquare, Diagonal) { EXPECT_EQ(exterior_square(Matrix::diagonal({3.0, 2.0})), (Matrix{{6.0}})); }

TEST(ExteriorSquare, Rotation) {
  const double c = std::cos(1.1), s = std::sin(1.1);
  EXPECT_NEAR(exterior_square(Matrix{{c, -s}, {s, c}})(0, 0), 1.0, 1e-15);
}

TEST(ExteriorSquare, NormIsProductOfTopSingularValues) {
  RandomStream rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = random_matrix(rng, 3, 3);
    const auto s = singular_values(g);
    const double lhs = spectral_norm(exterior_square(g));
    EXPECT_NEAR(lhs, s[0] * s[1], 1e-10 * s[0] * s[1]);
  }
}

TEST(ExteriorSquare, Submultiplicative) {
  RandomStream rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = random_matrix(rng, 4, 4), h = random_matrix(rng, 4, 4);
    EXPECT_LE(spectral_norm(exterior_square(g * h)),
              spectral_norm(exterior_square(g)) * spectral_norm(exterior_square(h)) * (1 + 1e-12));
  }
}

TEST(ExteriorSquare, FunctorialAndAgreesWithGeneralPower) {
  RandomStream rng(31);
  const Matrix g = random_matrix(rng, 4, 4), h = random_matrix(rng, 4, 4);
  const Matrix lhs = exterior_square(g * h);
  const Matrix rhs = exterior_square(g) * exterior_square(h);
  EXPECT_LE(max_abs_diff(lhs, rhs), 1e-12 * max_abs(lhs));
  EXPECT_LE(max_abs_diff(exterior_power(g, 2), exterior_square(g)), 1e-14 * max_abs(lhs));
  EXPECT_NEAR(exterior_power(g, 4)(0, 0), determinant(g), 1e-12 * std::abs(determinant(g)) + 1e-14);
}

TEST(ExteriorSquare, RejectsScalar) { EXPECT_THROW(exterior_square(Matrix{{2.0}}), InputError); }

TEST(Qr, ReconstructsAndHasNonNegativeDiagonal) {
  RandomStream rng(37);
  const Matrix a = random_matrix(rng, 5, 3);
  const Qr f = householder_qr(a);
  EXPECT_LE(max_abs_diff(f.q * f.r, a), 1e-13);
  EXPECT_LE(max_abs_diff(transpose(f.q) * f.q, Matrix::identity(3)), 1e-13);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_GE(f.r(i, i), 0.0);
}

TEST(Determinant, MatchesEigen) {
  RandomStream rng(41);
  for (std::size_t m = 1; m <= 6; ++m) {
    const Matrix g = random_matrix(rng, m, m);
    const double oracle = to_eigen(g).determinant();
    EXPECT_NEAR(determinant(g), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(ScaledMatrix, PowerOfTwoNormalizationIsExact) {
  Matrix a{{3.0, -1e30}, {1e-10, 7.0}};
  const Matrix orig = a;
  const int e = normalize_power_of_two(a);
  EXPECT_GE(max_abs(a), 0.5);
  EXPECT_LT(max_abs(a), 1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(std::ldexp(a.data()[i], e), orig.data()[i]);
}

TEST(Matrix, RejectsRaggedAndMismatched) {
  EXPECT_THROW((Matrix{{1, 2}, {3}}), InputError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), InputError);
  EXPECT_THROW(Matrix(2, 2) + Matrix(2, 3), InputError);
}
