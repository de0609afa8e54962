#pragma once

// Sampling-period and gain-scaling design for the averaged closed loop
//
//   z(k+1) = z(k) + eps T A(T) z(k),
//
// where A(T) is A_s(T) (state feedback, z in R^6) or A_o(T) (output feedback,
// z in R^10). A(T) Hurwitz on (0, T*) and eps <= eps0 = 1 / (2 T ||A'PA||),
// with PA + A'P = -I, make the averaged system exponentially stable.

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "magstab/averaging.hpp"
#include "magstab/matan.hpp"

namespace magstab {

struct InertiaSpec {
  Mat3 J = Mat3::Identity();

  void validate() const {
    if (!J.allFinite()) throw DomainError("inertia matrix has non-finite entries");
    if ((J - J.transpose()).norm() > 1e-12 * J.norm())
      throw DomainError("inertia matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(J, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw DomainError("inertia matrix must be positive definite");
  }
};

struct StateGains {
  double k1 = 0.0;
  double k2 = 0.0;
};

struct OutputGains {
  double k1 = 0.0;
  double k2 = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
};

using Gains = std::variant<StateGains, OutputGains>;

enum class FeedbackKind { state, output };

inline FeedbackKind feedback_kind(const Gains& g) {
  return std::holds_alternative<StateGains>(g) ? FeedbackKind::state : FeedbackKind::output;
}

namespace detail {
inline Mat3 inverse_inertia(const InertiaSpec& inertia) {
  Eigen::FullPivLU<Mat3> lu(inertia.J);
  if (!lu.isInvertible()) throw DomainError("inertia matrix is singular");
  return lu.inverse();
}
}  // namespace detail

/// A_s = [0, I/2; -k1 J^-1 Lav, -k2 J^-1 Lav].
inline DenseMatrix build_As(const InertiaSpec& inertia, const StateGains& g, const Mat3& lav) {
  const Mat3 jl = detail::inverse_inertia(inertia) * lav;
  DenseMatrix a = DenseMatrix::Zero(6, 6);
  a.block<3, 3>(0, 3) = 0.5 * Mat3::Identity();
  a.block<3, 3>(3, 0) = -g.k1 * jl;
  a.block<3, 3>(3, 3) = -g.k2 * jl;
  return a;
}

/// A_o, state ordering (z1, z2, z3, z4) = (q_v, w / eps, q_v - eps lambda delta_v, delta_4 - 1/(eps lambda)):
///
///   [ 0            I/2   0                          0    ]
///   [ -k1 J^-1 Lav 0     -k2 alpha lambda J^-1 Lav/2 0    ]
///   [ 0            I/2   -alpha lambda I            0    ]
///   [ 0            0     0                          -alpha lambda ]
inline DenseMatrix build_Ao(const InertiaSpec& inertia, const OutputGains& g, const Mat3& lav) {
  const Mat3 jl = detail::inverse_inertia(inertia) * lav;
  const double al = g.alpha * g.lambda;
  DenseMatrix a = DenseMatrix::Zero(10, 10);
  a.block<3, 3>(0, 3) = 0.5 * Mat3::Identity();
  a.block<3, 3>(3, 0) = -g.k1 * jl;
  a.block<3, 3>(3, 6) = -0.5 * g.k2 * al * jl;
  a.block<3, 3>(6, 3) = 0.5 * Mat3::Identity();
  a.block<3, 3>(6, 6) = -al * Mat3::Identity();
  a(9, 9) = -al;
  return a;
}

inline DenseMatrix build_average_matrix(const InertiaSpec& inertia, const Gains& gains,
                                        const Mat3& lav) {
  return std::visit(
      [&](const auto& g) -> DenseMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, StateGains>) {
          return build_As(inertia, g, lav);
        } else {
          return build_Ao(inertia, g, lav);
        }
      },
      gains);
}

/// Quadratic form k1 w1' L0 w1 + 1/2 w2' J w2, non-increasing along w' = A_s^0 w.
inline double lyapunov_v1(const Eigen::VectorXd& w, const StateGains& g, const Mat3& l0,
                          const InertiaSpec& inertia) {
  const Vec3 w1 = w.segment<3>(0), w2 = w.segment<3>(3);
  return g.k1 * w1.dot(l0 * w1) + 0.5 * w2.dot(inertia.J * w2);
}

/// V1 plus 1/2 k2 alpha lambda w3' L0 w3 + 1/2 w4^2, non-increasing along w' = A_o^0 w.
inline double lyapunov_v3(const Eigen::VectorXd& w, const OutputGains& g, const Mat3& l0,
                          const InertiaSpec& inertia) {
  const Vec3 w1 = w.segment<3>(0), w2 = w.segment<3>(3), w3 = w.segment<3>(6);
  const double w4 = w(9);
  return g.k1 * w1.dot(l0 * w1) + 0.5 * w2.dot(inertia.J * w2) +
         0.5 * g.k2 * g.alpha * g.lambda * w3.dot(l0 * w3) + 0.5 * w4 * w4;
}

struct TstarOptions {
  double scan_step = 10.0;
  double bisect_tol = 1.0;
  /// Upper end of the scan; 0 means one orbital period.
  double scan_max = 0.0;
  /// Hurwitz margin as a fraction of ||A(T)||.
  double relative_margin = 1e-9;
  AveragingConfig averaging{};
};

struct TstarResult {
  double Tstar = 0.0;
  /// True when A(T) stayed Hurwitz over the whole scan; Tstar is then scan_max.
  bool capped = false;
  int evaluations = 0;
};

/// Average matrix A(T) built from L_av(T).
inline DenseMatrix average_matrix_at(const OrbitSpec& spec, const InertiaSpec& inertia,
                                     const Gains& gains, double period,
                                     const AveragingConfig& averaging) {
  return build_average_matrix(inertia, gains, l_average(spec, period, averaging));
}

/// Largest T (to bisect_tol) such that A(t) is Hurwitz at every scanned t in
/// (0, T]. A coarse scan finds the first loss of Hurwitzness; bisection
/// refines it.
inline TstarResult find_Tstar(const OrbitSpec& spec, const InertiaSpec& inertia,
                              const Gains& gains, const TstarOptions& opt = {}) {
  if (!(opt.scan_step > 0.0)) throw DomainError("scan_step must be > 0");
  if (!(opt.bisect_tol > 0.0)) throw DomainError("bisect_tol must be > 0");
  if (!(opt.relative_margin >= 0.0)) throw DomainError("Hurwitz margin must be >= 0");
  const auto a1 = assumption1_holds(spec);
  if (!a1.holds) {
    throw DesignFailure("Assumption 1 violated: L_av^0 is not positive definite (equatorial orbit?)");
  }
  const double scan_max = opt.scan_max > 0.0 ? opt.scan_max : orbital_period(spec);

  TstarResult result;
  auto hurwitz_at = [&](double period) {
    ++result.evaluations;
    const DenseMatrix a = average_matrix_at(spec, inertia, gains, period, opt.averaging);
    return is_hurwitz(a, opt.relative_margin * spectral_norm(a));
  };

  double good = 0.0;
  double bad = 0.0;
  for (int j = 1;; ++j) {
    const double period = std::min(j * opt.scan_step, scan_max);
    if (!hurwitz_at(period)) {
      bad = period;
      break;
    }
    good = period;
    if (period >= scan_max) {
      result.Tstar = scan_max;
      result.capped = true;
      return result;
    }
  }
  if (good == 0.0) {
    throw DesignFailure("average matrix is not Hurwitz even at T = " + std::to_string(bad) + " s");
  }
  while (bad - good > opt.bisect_tol) {
    const double mid = 0.5 * (good + bad);
    (hurwitz_at(mid) ? good : bad) = mid;
  }
  result.Tstar = good;
  return result;
}

struct EpsilonBound {
  double eps0 = 0.0;
  DenseMatrix P;
};

/// eps0 = 1 / (2 T ||A' P A||) with P A + A' P = -I.
inline EpsilonBound epsilon_bound(const DenseMatrix& a, double period) {
  if (!(period > 0.0)) throw DomainError("epsilon_bound: T must be > 0");
  EpsilonBound out;
  out.P = solve_lyapunov(a);
  out.eps0 = 1.0 / (2.0 * period * spectral_norm(a.transpose() * out.P * a));
  return out;
}

struct SamplingDesign {
  double T = 0.0;
  double Tstar = 0.0;
  bool Tstar_capped = false;
  DenseMatrix P;
  double eps0 = 0.0;
  Spectrum spectrum_at_T;
  Assumption1Result assumption1;
  Mat3 l_average_zero;
  Mat3 l_average_at_T;
};

/// Assumption 1 check, T* search and eps0 at the chosen T. Throws
/// DesignFailure when the orbit is equatorial or T >= T*.
inline SamplingDesign design_sampling(const OrbitSpec& spec, const InertiaSpec& inertia,
                                      const Gains& gains, double period,
                                      const TstarOptions& opt = {}) {
  spec.validate();
  inertia.validate();
  if (!(period > 0.0)) throw DomainError("sampling period T must be > 0");

  SamplingDesign d;
  d.T = period;
  d.assumption1 = assumption1_holds(spec);
  if (!d.assumption1.holds) {
    throw DesignFailure("Assumption 1 violated: L_av^0 is not positive definite (equatorial orbit?)");
  }
  d.l_average_zero = l_average_zero(spec);
  const TstarResult ts = find_Tstar(spec, inertia, gains, opt);
  d.Tstar = ts.Tstar;
  d.Tstar_capped = ts.capped;
  if (period >= d.Tstar && !ts.capped) {
    throw DesignFailure("T exceeds T*: T = " + std::to_string(period) +
                        " s, T* = " + std::to_string(d.Tstar) + " s");
  }
  d.l_average_at_T = l_average(spec, period, opt.averaging);
  const DenseMatrix a = build_average_matrix(inertia, gains, d.l_average_at_T);
  d.spectrum_at_T = eigenvalues(a);
  if (!is_hurwitz(a, opt.relative_margin * spectral_norm(a))) {
    throw DesignFailure("average matrix is not Hurwitz at T = " + std::to_string(period) + " s");
  }
  EpsilonBound eb = epsilon_bound(a, period);
  d.P = std::move(eb.P);
  d.eps0 = eb.eps0;
  return d;
}

}  // namespace magstab
