#pragma once

// Averaging of the sampled linearized dynamics.
//
// Over one hold interval [kT, (k+1)T] the linearized plant integrates the
// held torque -B^i(t)^x m through the matrices
//
//   G1(k,T) = int 1/2 ((k+1)T - tau) B^i(tau)^x dtau
//   G2(k,T) = int B^i(tau)^x dtau
//
// and the averaged closed loop depends on L(k,T) = (G2(k,T)/T) (B^i(kT)^x)'
// only through its mean L_av(T).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "magstab/attmath.hpp"
#include "magstab/geomag.hpp"
#include "magstab/matan.hpp"

namespace magstab {

enum class AveragingMethod {
  /// (1/N) sum_{k=s+1}^{s+N} L(k,T), a literal finite-horizon mean.
  sample_sum,
  /// Mean of L over a uniformly distributed sampling phase. This is the
  /// N -> infinity limit of the sample sum whenever T / (2 pi / n) is
  /// irrational, and it does not suffer from slow convergence near resonant
  /// periods T ~ (2 pi / n) / j.
  phase,
};

struct AveragingConfig {
  int quad_substeps = 64;
  /// N for the sample sum; 0 picks N automatically (see averaging_samples).
  std::int64_t avg_samples = 0;
  /// Integer shift s of the sample sum.
  std::int64_t sample_offset = 0;
  /// Minimum horizon of the automatic N, in orbital periods.
  double horizon_orbits = 20.0;
  AveragingMethod method = AveragingMethod::phase;
  /// Number of sampling phases for AveragingMethod::phase.
  int phase_points = 512;

  void validate() const {
    if (quad_substeps < 8 || quad_substeps % 2 != 0)
      throw DomainError("quad_substeps must be even and >= 8");
    if (avg_samples < 0) throw DomainError("avg_samples must be >= 1 (or 0 for automatic)");
    if (!(horizon_orbits > 0.0)) throw DomainError("horizon_orbits must be > 0");
    if (phase_points < 8) throw DomainError("phase_points must be >= 8");
  }
};

/// Composite Simpson rule over [a, b] with `panels` (even) subintervals.
template <typename F>
auto simpson(F&& f, double a, double b, int panels) {
  if (panels < 2 || panels % 2 != 0) throw DomainError("simpson: panel count must be even");
  using Result = std::decay_t<decltype(f(a))>;
  const double h = (b - a) / panels;
  Result acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  }
  return Result(acc * (h / 3.0));
}

namespace detail {
inline void require_positive_period(double period, const char* who) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw DomainError(std::string(who) + ": sampling period must be > 0");
  }
}

/// Integral of B^i(tau)^x over [t, t+T].
inline Mat3 held_field_integral(const OrbitSpec& spec, double t, double period, int substeps) {
  return simpson([&](double tau) { return skew(field_inertial(spec, tau)); }, t, t + period,
                 substeps);
}

/// (1/T) int_t^{t+T} B^x dtau (B(t)^x)'.
inline Mat3 l_at(const OrbitSpec& spec, double t, double period, int substeps) {
  const Mat3 h2 = held_field_integral(spec, t, period, substeps) / period;
  return h2 * skew(field_inertial(spec, t)).transpose();
}
}  // namespace detail

inline Mat3 g1(const OrbitSpec& spec, std::int64_t k, double period, int substeps = 64) {
  detail::require_positive_period(period, "g1");
  const double t0 = static_cast<double>(k) * period;
  const double t1 = t0 + period;
  return simpson([&](double tau) { return (0.5 * (t1 - tau) * skew(field_inertial(spec, tau))).eval(); },
                 t0, t1, substeps);
}

inline Mat3 g2(const OrbitSpec& spec, std::int64_t k, double period, int substeps = 64) {
  detail::require_positive_period(period, "g2");
  return detail::held_field_integral(spec, static_cast<double>(k) * period, period, substeps);
}

/// L(k,T) = H2(k,T) (B^i(kT)^x)' with H2 = G2 / T.
inline Mat3 l_of_k(const OrbitSpec& spec, std::int64_t k, double period, int substeps = 64) {
  detail::require_positive_period(period, "l_of_k");
  return detail::l_at(spec, static_cast<double>(k) * period, period, substeps);
}

/// Automatic N for the sample sum: the N in [N_min, 2 N_min], with
/// N_min = ceil(horizon_orbits * P / T), whose horizon N T is closest to a
/// whole number of orbital periods P.
inline std::int64_t averaging_samples(const OrbitSpec& spec, double period,
                                      const AveragingConfig& cfg) {
  if (cfg.avg_samples > 0) return cfg.avg_samples;
  const double orbits_per_sample = period / orbital_period(spec);
  const auto n_min = static_cast<std::int64_t>(std::ceil(cfg.horizon_orbits / orbits_per_sample));
  std::int64_t best = n_min;
  double best_gap = 1.0;
  for (std::int64_t n = n_min; n <= 2 * n_min; ++n) {
    const double x = static_cast<double>(n) * orbits_per_sample;
    const double gap = std::abs(x - std::round(x));
    if (gap < best_gap) {
      best_gap = gap;
      best = n;
    }
  }
  return best;
}

inline Mat3 l_average_sum(const OrbitSpec& spec, double period, const AveragingConfig& cfg) {
  detail::require_positive_period(period, "l_average");
  cfg.validate();
  const std::int64_t n = averaging_samples(spec, period, cfg);
  Mat3 acc = Mat3::Zero();
  for (std::int64_t k = cfg.sample_offset + 1; k <= cfg.sample_offset + n; ++k) {
    acc += l_of_k(spec, k, period, cfg.quad_substeps);
  }
  return acc / static_cast<double>(n);
}

inline Mat3 l_average_phase(const OrbitSpec& spec, double period, const AveragingConfig& cfg) {
  detail::require_positive_period(period, "l_average");
  cfg.validate();
  const double orbit = orbital_period(spec);
  Mat3 acc = Mat3::Zero();
  // Rectangle rule on a periodic integrand.
  for (int j = 0; j < cfg.phase_points; ++j) {
    const double t = orbit * j / cfg.phase_points;
    acc += detail::l_at(spec, t, period, cfg.quad_substeps);
  }
  return acc / static_cast<double>(cfg.phase_points);
}

/// L_av(T) with the configured estimator.
inline Mat3 l_average(const OrbitSpec& spec, double period, const AveragingConfig& cfg = {}) {
  switch (cfg.method) {
    case AveragingMethod::sample_sum:
      return l_average_sum(spec, period, cfg);
    case AveragingMethod::phase:
      return l_average_phase(spec, period, cfg);
  }
  throw std::logic_error("l_average: unknown method");
}

/// L_av^0 = (n / 2 pi) int_0^{2 pi / n} B^i(t)^x (B^i(t)^x)' dt, exactly symmetric.
inline Mat3 l_average_zero(const OrbitSpec& spec, int panels = 4096) {
  const double orbit = orbital_period(spec);
  const Mat3 integral = simpson(
      [&](double t) {
        const Mat3 b = skew(field_inertial(spec, t));
        return (b * b.transpose()).eval();
      },
      0.0, orbit, panels);
  const Mat3 mean = integral / orbit;
  return 0.5 * (mean + mean.transpose());
}

struct Assumption1Result {
  bool holds = false;
  /// min eig(L_av^0) / (trace(L_av^0) / 3); 0 for a singular L_av^0.
  double margin = 0.0;
  double min_eig = 0.0;
  double trace = 0.0;
};

inline constexpr double kAssumption1Tol = 1e-6;

/// Positive definiteness of L_av^0, relative to its mean eigenvalue.
inline Assumption1Result assumption1_holds(const OrbitSpec& spec) {
  const Mat3 l0 = l_average_zero(spec);
  Assumption1Result r;
  r.min_eig = min_eig_sym(l0);
  r.trace = l0.trace();
  r.margin = r.trace > 0.0 ? r.min_eig / (r.trace / 3.0) : 0.0;
  r.holds = r.margin > kAssumption1Tol;
  return r;
}

}  // namespace magstab
