#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "magstab/matan.hpp"
#include "test_support.hpp"

namespace magstab {
namespace {

using cd = std::complex<double>;

bool contains(const Spectrum& s, cd value, double tol) {
  return std::any_of(s.begin(), s.end(), [&](cd x) { return std::abs(x - value) <= tol; });
}

TEST(Eigenvalues, Diagonal) {
  const Spectrum s = eigenvalues(Eigen::Vector3d(-1, -2, -3).asDiagonal().toDenseMatrix());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(s[1].real(), -2.0, 1e-14);
  EXPECT_NEAR(s[2].real(), -3.0, 1e-14);
}

TEST(Eigenvalues, Rotation) {
  DenseMatrix a(2, 2);
  a << 0, 1, -1, 0;
  const Spectrum s = eigenvalues(a);
  EXPECT_TRUE(contains(s, cd(0, 1), 1e-14));
  EXPECT_TRUE(contains(s, cd(0, -1), 1e-14));
}

TEST(Eigenvalues, CompanionMatrixRoots) {
  // (x+1)(x+2)(x^2+x+1) = x^4 + 4x^3 + 6x^2 + 5x + 2
  DenseMatrix c = DenseMatrix::Zero(4, 4);
  c.row(0) << -4, -6, -5, -2;
  c(1, 0) = c(2, 1) = c(3, 2) = 1.0;
  const Spectrum s = eigenvalues(c);
  ASSERT_EQ(s.size(), 4u);
  // Quadratic formula for x^2 + x + 1.
  const double im = std::sqrt(3.0) / 2.0;
  for (cd root : {cd(-1, 0), cd(-2, 0), cd(-0.5, im), cd(-0.5, -im)}) {
    EXPECT_TRUE(contains(s, root, 1e-10)) << root;
  }
}

TEST(Eigenvalues, ConjugateSymmetryAndCertificate) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    DenseMatrix a(n, n);
    for (int i = 0; i < a.size(); ++i) a(i) = d(rng);
    const Spectrum s = eigenvalues(a);
    ASSERT_EQ(s.size(), static_cast<std::size_t>(n));
    for (cd l : s) {
      EXPECT_TRUE(contains(s, std::conj(l), 1e-9 * spectral_norm(a)));
      Eigen::MatrixXcd shifted = a.cast<cd>();
      shifted.diagonal().array() -= l;
      EXPECT_LE(Eigen::JacobiSVD<Eigen::MatrixXcd>(shifted).singularValues()(n - 1),
                1e-8 * spectral_norm(a));
    }
  }
}

TEST(Eigenvalues, Errors) {
  EXPECT_THROW(eigenvalues(DenseMatrix::Zero(2, 3)), DomainError);
  EXPECT_THROW(eigenvalues(DenseMatrix::Identity(65, 65)), DomainError);
}

TEST(IsHurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz(-DenseMatrix::Identity(4, 4)));
  DenseMatrix nil(2, 2);
  nil << 0, 1, 0, 0;
  EXPECT_FALSE(is_hurwitz(nil));
  DenseMatrix marginal(2, 2);
  marginal << 0, 1, -1, 0;
  EXPECT_FALSE(is_hurwitz(marginal));
  // A margin larger than the decay rate rejects a stable matrix.
  EXPECT_FALSE(is_hurwitz(-0.5 * DenseMatrix::Identity(3, 3), 1.0));
}

TEST(SolveLyapunov, ClosedForms) {
  const DenseMatrix p = solve_lyapunov(-DenseMatrix::Identity(5, 5));
  EXPECT_LE((p - 0.5 * DenseMatrix::Identity(5, 5)).norm(), 1e-14);

  const DenseMatrix a = Eigen::Vector2d(-1, -2).asDiagonal();
  const DenseMatrix p2 = solve_lyapunov(a);
  EXPECT_LE((p2 - Eigen::Vector2d(0.5, 0.25).asDiagonal().toDenseMatrix()).norm(), 1e-14);
}

TEST(SolveLyapunov, RandomStableResidual) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix a = testing::random_hurwitz(rng, 6);
    const DenseMatrix p = solve_lyapunov(a);
    const DenseMatrix residual = p * a + a.transpose() * p + DenseMatrix::Identity(6, 6);
    EXPECT_LE(spectral_norm(residual), 1e-8);
    EXPECT_LE((p - p.transpose()).norm(), 1e-12 * p.norm());
    EXPECT_GT(min_eig_sym(p), 0.0);
  }
}

TEST(SolveLyapunov, RejectsUnstable) {
  EXPECT_THROW(solve_lyapunov(DenseMatrix::Identity(3, 3)), DomainError);
  EXPECT_THROW(solve_lyapunov(DenseMatrix::Zero(2, 2)), DomainError);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(Eigen::Vector2d(3, -5).asDiagonal()), 5.0, 1e-14);
  EXPECT_NEAR(spectral_norm(DenseMatrix::Identity(4, 4)), 1.0, 1e-15);
}

TEST(SpectralNorm, DominatesEveryRayleighQuotient) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> d(0.0, 1.0);
  DenseMatrix a(5, 4);
  for (int i = 0; i < a.size(); ++i) a(i) = d(rng);
  const double norm = spectral_norm(a);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = d(rng);
    EXPECT_GE(norm * (1.0 + 1e-14), (a * x).norm() / x.norm());
  }
  EXPECT_NEAR(spectral_norm(-3.5 * a), 3.5 * norm, 1e-13 * norm);
}

TEST(MinEigSym, Examples) {
  EXPECT_NEAR(min_eig_sym(Eigen::Vector3d(1, 2, 3).asDiagonal()), 1.0, 1e-15);
  EXPECT_EQ(min_eig_sym(DenseMatrix::Zero(3, 3)), 0.0);
}

TEST(MinEigSym, GramMatrixIsPsd) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix b(2, 4);
    for (int i = 0; i < b.size(); ++i) b(i) = d(rng);
    const DenseMatrix s = b.transpose() * b;
    EXPECT_GE(min_eig_sym(s), -1e-14 * s.norm());
  }
}

TEST(MinEigSym, RejectsAsymmetric) {
  DenseMatrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(min_eig_sym(a), DomainError);
}

}  // namespace
}  // namespace magstab
