#pragma once

// Small dense matrix analysis: spectra, Hurwitz tests, continuous Lyapunov
// equations and 2-norms.

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "magstab/errors.hpp"

namespace magstab {

using DenseMatrix = Eigen::MatrixXd;
using Spectrum = std::vector<std::complex<double>>;

inline constexpr Eigen::Index kMaxDenseDim = 64;

/// Largest singular value.
inline double spectral_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Eigenvalues sorted by decreasing real part, then decreasing imaginary part.
///
/// Every returned value carries a residual certificate: the smallest singular
/// value of A - lambda I is at most 1e-8 ||A||. Failure to converge or to
/// certify throws NumericError.
inline Spectrum eigenvalues(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DomainError("eigenvalues: matrix is not square");
  if (a.rows() > kMaxDenseDim) throw DomainError("eigenvalues: dimension exceeds 64");
  if (!a.allFinite()) throw DomainError("eigenvalues: non-finite entries");
  const Eigen::Index n = a.rows();
  if (n == 0) return {};

  Eigen::EigenSolver<DenseMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalues: QR iteration did not converge");
  }

  const double scale = spectral_norm(a);
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  Spectrum out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = solver.eigenvalues()(i);
    Eigen::MatrixXcd shifted = ac;
    shifted.diagonal().array() -= lambda;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
    const double smin = svd.singularValues()(n - 1);
    if (!(smin <= 1e-8 * scale)) {
      throw NumericError("eigenvalues: residual certificate failed (sigma_min = " +
                         std::to_string(smin) + ")");
    }
    out[static_cast<std::size_t>(i)] = lambda;
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return out;
}

inline double max_real_part(const Spectrum& spectrum) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& l : spectrum) m = std::max(m, l.real());
  return m;
}

/// True iff every eigenvalue satisfies Re(lambda) < -margin. The default
/// margin is 1e-9 ||A||.
inline bool is_hurwitz(const DenseMatrix& a, std::optional<double> margin = std::nullopt) {
  const double m = margin.value_or(1e-9 * spectral_norm(a));
  return max_real_part(eigenvalues(a)) < -m;
}

/// Solves P A + A' P = -I through the vectorized (Kronecker) system
/// (I (x) A' + A' (x) I) vec(P) = -vec(I), then symmetrizes.
inline DenseMatrix solve_lyapunov(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DomainError("solve_lyapunov: matrix is not square");
  if (!is_hurwitz(a)) throw DomainError("solve_lyapunov: matrix is not Hurwitz");
  const Eigen::Index n = a.rows();
  const DenseMatrix at = a.transpose();
  const DenseMatrix eye = DenseMatrix::Identity(n, n);

  DenseMatrix kron = DenseMatrix::Zero(n * n, n * n);
  // Column-major vec: vec(A' P) = (I (x) A') vec(P), vec(P A) = (A' (x) I) vec(P).
  for (Eigen::Index i = 0; i < n; ++i) {
    kron.block(i * n, i * n, n, n) += at;
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n).diagonal().array() += at(i, j);
    }
  }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(eye.data(), n * n);

  Eigen::PartialPivLU<DenseMatrix> lu(kron);
  Eigen::VectorXd x = lu.solve(rhs);
  // One step of iterative refinement.
  x += lu.solve(rhs - kron * x);

  DenseMatrix p = Eigen::Map<DenseMatrix>(x.data(), n, n);
  return 0.5 * (p + p.transpose());
}

/// Minimum eigenvalue of a symmetric matrix (evaluated on its symmetric part).
inline double min_eig_sym(const DenseMatrix& s) {
  if (s.rows() != s.cols()) throw DomainError("min_eig_sym: matrix is not square");
  const double scale = spectral_norm(s);
  if (spectral_norm(s - s.transpose()) > 1e-9 * scale) {
    throw DomainError("min_eig_sym: matrix is not symmetric");
  }
  const DenseMatrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace magstab
