#pragma once

// Closed-loop simulation of the magnetically actuated rigid body
//
//   q' = W(q) w
//   J w' = -w^x J w - B^b(q,t)^x m
//
// with fixed-step RK4. Sampled (ZOH) controllers are evaluated at t = kT and
// their dipole moment is held until the next sample; T must be an integer
// multiple of the step h so that samples fall on step boundaries.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "magstab/attmath.hpp"
#include "magstab/averaging.hpp"
#include "magstab/control.hpp"
#include "magstab/design.hpp"
#include "magstab/geomag.hpp"

namespace magstab {

/// Classical fourth-order Runge-Kutta step of x' = f(t, x).
template <typename F, typename State>
State rk4(F&& f, double t, const State& x, double h) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * h, State(x + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(x + 0.5 * h * k2));
  const State k4 = f(t + h, State(x + h * k3));
  return State(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

struct PlantState {
  Quaternion q;
  Vec3 omega = Vec3::Zero();
};

struct PlantRate {
  Vec4 q_dot;
  Vec3 omega_dot;
};

namespace detail {
// RK4 stages evaluate off the unit sphere, so these skip the norm check.
inline Mat3 dcm_unchecked(const Vec3& v, double s) {
  return (s * s - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() - 2.0 * s * skew(v);
}

inline Vec4 kinematics_unchecked(const Vec3& v, double s, const Vec3& omega) {
  Vec4 out;
  out.head<3>() = 0.5 * (s * omega + v.cross(omega));
  out(3) = -0.5 * v.dot(omega);
  return out;
}

using PlantVector = Eigen::Matrix<double, 7, 1>;
using ObservedPlantVector = Eigen::Matrix<double, 11, 1>;

inline PlantRate plant_rhs(const Vec3& v, double s, const Vec3& omega, const Vec3& m, double t,
                           const OrbitSpec& orbit, const Mat3& inertia, const Mat3& inertia_inv) {
  const Vec3 b_body = dcm_unchecked(v, s) * field_inertial(orbit, t);
  const Vec3 torque = -omega.cross(inertia * omega) - b_body.cross(m);
  return {kinematics_unchecked(v, s, omega), inertia_inv * torque};
}
}  // namespace detail

/// Right-hand side of the closed plant for a given dipole moment m.
inline PlantRate dynamics_rhs(const Quaternion& q, const Vec3& omega, const Vec3& m, double t,
                              const OrbitSpec& orbit, const InertiaSpec& inertia) {
  detail::require_unit(q, "dynamics_rhs");
  return detail::plant_rhs(q.v, q.s, omega, m, t, orbit, inertia.J,
                           detail::inverse_inertia(inertia));
}

/// RK4 step with m frozen over [t, t+h]. The returned quaternion is not
/// renormalized.
inline PlantState rk4_step_raw(const PlantState& x, const Vec3& m_held, double t, double h,
                               const OrbitSpec& orbit, const InertiaSpec& inertia) {
  const Mat3 jinv = detail::inverse_inertia(inertia);
  auto f = [&](double tau, const detail::PlantVector& y) {
    const PlantRate r = detail::plant_rhs(y.segment<3>(0), y(3), y.segment<3>(4), m_held, tau,
                                          orbit, inertia.J, jinv);
    detail::PlantVector dy;
    dy << r.q_dot, r.omega_dot;
    return dy;
  };
  detail::PlantVector y;
  y << x.q.v, x.q.s, x.omega;
  const detail::PlantVector y1 = rk4(f, t, y, h);
  return {Quaternion(y1.segment<3>(0), y1(3)), y1.segment<3>(4)};
}

/// RK4 step with m frozen, followed by quaternion renormalization.
inline PlantState rk4_step(const PlantState& x, const Vec3& m_held, double t, double h,
                           const OrbitSpec& orbit, const InertiaSpec& inertia) {
  PlantState y = rk4_step_raw(x, m_held, t, h, orbit, inertia);
  y.q = normalize(y.q);
  return y;
}

/// Angular momentum in inertial components, C(q)' J w.
inline Vec3 inertial_angular_momentum(const PlantState& x, const InertiaSpec& inertia) {
  return dcm_from_quat(x.q).transpose() * (inertia.J * x.omega);
}

inline double kinetic_energy(const PlantState& x, const InertiaSpec& inertia) {
  return 0.5 * x.omega.dot(inertia.J * x.omega);
}

struct SimConfig {
  OrbitSpec orbit;
  InertiaSpec inertia;
  ControllerConfig controller;
  Quaternion q0;
  Vec3 omega0 = Vec3::Zero();
  double t_final = 0.0;
  double h = 0.1;
  /// Record every n-th integrator step (the final state is always recorded).
  int record_every = 1;
  /// Initial observer state; defaults to q0 / (eps lambda).
  std::optional<Vec4> delta0;

  /// Sample period in integrator steps (ZOH kinds).
  std::int64_t steps_per_sample() const {
    return static_cast<std::int64_t>(std::llround(controller.T / h));
  }

  void validate() const {
    orbit.validate();
    inertia.validate();
    controller.validate();
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("integrator step h must be > 0");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw DomainError("t_final must be > 0");
    if (record_every < 1) throw DomainError("record_every must be >= 1");
    if (std::abs(q0.norm() - 1.0) > kUnitQuaternionTol) throw DomainError("q0 must be a unit quaternion");
    if (!omega0.allFinite()) throw DomainError("omega0 must be finite");
    if (is_zoh(controller.kind)) {
      const double ratio = controller.T / h;
      if (std::llround(ratio) < 1 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw DomainError("sampling period T must be a positive integer multiple of h");
      if (t_final < controller.T) throw DomainError("t_final must be >= T");
    }
  }
};

struct SimSample {
  double t = 0.0;
  Quaternion q;
  Vec3 omega = Vec3::Zero();
  Vec3 m = Vec3::Zero();
  Vec3 b_body = Vec3::Zero();
};

struct Trajectory {
  std::vector<SimSample> samples;
  std::uint64_t config_hash = 0;
  double wall_seconds = 0.0;
  /// Largest |‖q‖ - 1| observed after an RK4 step, before renormalization.
  double max_norm_drift = 0.0;
};

namespace detail {
class Fnv1a {
 public:
  void add(double x) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof x);
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 1099511628211ull;
    }
  }
  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) add(m(i));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

inline std::uint64_t hash_config(const SimConfig& cfg) {
  Fnv1a h;
  const auto& o = cfg.orbit;
  for (double x : {o.radius_m, o.incl_rad, o.raan_rad, o.phi0_rad, o.mu_earth, o.mu_m}) h.add(x);
  h.add(o.m_hat_i);
  h.add(cfg.inertia.J);
  h.add(static_cast<double>(static_cast<int>(cfg.controller.kind)));
  std::visit([&](const auto& g) {
    h.add(g.k1);
    h.add(g.k2);
    if constexpr (std::is_same_v<std::decay_t<decltype(g)>, OutputGains>) {
      h.add(g.alpha);
      h.add(g.lambda);
    }
  }, cfg.controller.gains);
  for (double x : {cfg.controller.epsilon, cfg.controller.T, cfg.t_final, cfg.h}) h.add(x);
  h.add(cfg.q0.to_vec4());
  h.add(cfg.omega0);
  if (cfg.delta0) h.add(*cfg.delta0);
  return h.value();
}
}  // namespace detail

/// Divergence guard on the angular rate, rad/s.
inline constexpr double kMaxAngularRate = 10.0;

inline Trajectory run_closed_loop(const SimConfig& cfg) {
  cfg.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const ControllerConfig& ctl = cfg.controller;
  const double eps = ctl.epsilon;
  const Mat3 jinv = detail::inverse_inertia(cfg.inertia);

  const auto n_steps = static_cast<std::int64_t>(std::ceil(cfg.t_final / cfg.h - 1e-9));
  const std::int64_t sps = is_zoh(ctl.kind) ? cfg.steps_per_sample() : 1;

  PlantState x{cfg.q0, cfg.omega0};
  ObserverState obs;
  if (const auto* g = std::get_if<OutputGains>(&ctl.gains)) {
    obs = cfg.delta0 ? ObserverState{*cfg.delta0} : initial_observer(cfg.q0, eps, g->lambda);
  }

  // Dipole moment commanded from the plant (and observer) state at time t.
  auto continuous_dipole = [&](const Vec3& v, double s, const Vec3& omega, const Vec4& delta,
                               double t) -> Vec3 {
    const Vec3 b = detail::dcm_unchecked(v, s) * field_inertial(cfg.orbit, t);
    if (const auto* g = std::get_if<StateGains>(&ctl.gains)) {
      return skew(b).transpose() * (eps * eps * g->k1 * v + eps * g->k2 * omega);
    }
    const auto& g = std::get<OutputGains>(ctl.gains);
    Vec4 q4;
    q4 << v, s;
    const Vec4 filt = q4 - eps * g.lambda * delta;
    Eigen::Matrix<double, 4, 3> w;
    w.topRows<3>() = 0.5 * (s * Mat3::Identity() + skew(v));
    w.row(3) = -0.5 * v.transpose();
    return skew(b).transpose() *
           (eps * eps * (g.k1 * v + g.k2 * g.alpha * g.lambda * (w.transpose() * filt)));
  };

  Trajectory traj;
  traj.config_hash = detail::hash_config(cfg);
  traj.samples.reserve(static_cast<std::size_t>(n_steps / cfg.record_every + 2));

  Vec3 m_held = Vec3::Zero();
  double last_valid_t = 0.0;
  for (std::int64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * cfg.h;
    const Vec3 b_body = dcm_from_quat(x.q) * field_inertial(cfg.orbit, t);

    switch (ctl.kind) {
      case ControllerKind::zoh_state:
        if (i % sps == 0) {
          m_held = state_fb_dipole(x.q, x.omega, b_body, std::get<StateGains>(ctl.gains), eps);
        }
        break;
      case ControllerKind::zoh_output:
        if (i % sps == 0) {
          const auto step =
              output_fb_step(obs, x.q, b_body, std::get<OutputGains>(ctl.gains), eps, ctl.T);
          m_held = step.m;
          obs = step.next;
        }
        break;
      case ControllerKind::continuous_state:
      case ControllerKind::continuous_output:
        m_held = continuous_dipole(x.q.v, x.q.s, x.omega, obs.delta, t);
        break;
    }

    if (i % cfg.record_every == 0 || i == n_steps) {
      traj.samples.push_back({t, x.q, x.omega, m_held, b_body});
    }
    if (i == n_steps) break;

    PlantState next;
    if (is_zoh(ctl.kind)) {
      next = rk4_step_raw(x, m_held, t, cfg.h, cfg.orbit, cfg.inertia);
    } else {
      // Continuous laws: the dipole moment follows the state inside the step.
      auto f = [&](double tau, const detail::ObservedPlantVector& y) {
        const Vec3 v = y.segment<3>(0);
        const Vec3 w = y.segment<3>(4);
        const Vec4 d = y.segment<4>(7);
        const Vec3 m = continuous_dipole(v, y(3), w, d, tau);
        const PlantRate r = detail::plant_rhs(v, y(3), w, m, tau, cfg.orbit, cfg.inertia.J, jinv);
        detail::ObservedPlantVector dy;
        dy << r.q_dot, r.omega_dot, Vec4::Zero();
        if (const auto* g = std::get_if<OutputGains>(&ctl.gains)) {
          Vec4 q4;
          q4 << v, y(3);
          dy.segment<4>(7) = g->alpha * (q4 - eps * g->lambda * d);
        }
        return dy;
      };
      detail::ObservedPlantVector y;
      y << x.q.v, x.q.s, x.omega, obs.delta;
      const detail::ObservedPlantVector y1 = rk4(f, t, y, cfg.h);
      next = {Quaternion(y1.segment<3>(0), y1(3)), y1.segment<3>(4)};
      obs.delta = y1.segment<4>(7);
    }

    const double norm = next.q.norm();
    if (!std::isfinite(norm) || !next.omega.allFinite() || !obs.delta.allFinite() ||
        next.omega.norm() > kMaxAngularRate) {
      throw SimulationDivergence("simulation diverged after t = " + std::to_string(last_valid_t) +
                                     " s",
                                 last_valid_t);
    }
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm - 1.0));
    next.q = normalize(next.q);
    x = next;
    last_valid_t = static_cast<double>(i + 1) * cfg.h;
  }

  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return traj;
}

struct LinearizedConfig {
  OrbitSpec orbit;
  InertiaSpec inertia;
  StateGains gains;
  double epsilon = 0.0;
  double T = 0.0;
  Vec3 qv0 = Vec3::Zero();
  Vec3 omega0 = Vec3::Zero();
  std::int64_t steps = 0;
  int quad_substeps = 64;
};

struct LinearizedSample {
  std::int64_t k = 0;
  Vec3 qv = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 m = Vec3::Zero();
};

/// Exact discrete map of the linearized plant under held dipole moments:
///
///   q_v+ = q_v + T/2 w - J^-1 G1(k,T) m,   w+ = w - J^-1 G2(k,T) m,
///   m = (B^i(kT)^x)' (eps^2 k1 q_v + eps k2 w).
///
/// Returns steps + 1 samples; the last one carries m = 0.
inline std::vector<LinearizedSample> run_linearized_sampled(const LinearizedConfig& cfg) {
  if (!(cfg.T > 0.0)) throw DomainError("run_linearized_sampled: T must be > 0");
  if (cfg.steps < 0) throw DomainError("run_linearized_sampled: steps must be >= 0");
  const Mat3 jinv = detail::inverse_inertia(cfg.inertia);
  const double eps = cfg.epsilon;
  std::vector<LinearizedSample> out;
  out.reserve(static_cast<std::size_t>(cfg.steps + 1));
  Vec3 qv = cfg.qv0, omega = cfg.omega0;
  for (std::int64_t k = 0; k < cfg.steps; ++k) {
    const Vec3 b = field_inertial(cfg.orbit, static_cast<double>(k) * cfg.T);
    const Vec3 m =
        skew(b).transpose() * (eps * eps * cfg.gains.k1 * qv + eps * cfg.gains.k2 * omega);
    out.push_back({k, qv, omega, m});
    const Mat3 g1m = g1(cfg.orbit, k, cfg.T, cfg.quad_substeps);
    const Mat3 g2m = g2(cfg.orbit, k, cfg.T, cfg.quad_substeps);
    const Vec3 qv_next = qv + 0.5 * cfg.T * omega - jinv * (g1m * m);
    omega = omega - jinv * (g2m * m);
    qv = qv_next;
  }
  out.push_back({cfg.steps, qv, omega, Vec3::Zero()});
  return out;
}

struct Metrics {
  /// Earliest time after which ‖w‖ < tol_omega and ‖q_v‖ < tol_qv hold for
  /// every remaining sample; empty when the final sample is not settled.
  std::optional<double> settle_time;
  double max_dipole = 0.0;
  double final_omega = 0.0;
  double final_qv = 0.0;
  double final_time = 0.0;
};

inline Metrics metrics(const Trajectory& traj, double tol_omega = 1e-4, double tol_qv = 0.1) {
  if (traj.samples.empty()) throw DomainError("metrics: empty trajectory");
  Metrics out;
  for (const auto& s : traj.samples) out.max_dipole = std::max(out.max_dipole, s.m.norm());
  const auto& last = traj.samples.back();
  out.final_omega = last.omega.norm();
  out.final_qv = last.q.v.norm();
  out.final_time = last.t;

  auto settled = [&](const SimSample& s) {
    return s.omega.norm() < tol_omega && s.q.v.norm() < tol_qv;
  };
  std::size_t first = traj.samples.size();
  while (first > 0 && settled(traj.samples[first - 1])) --first;
  if (first < traj.samples.size()) out.settle_time = traj.samples[first].t;
  return out;
}

}  // namespace magstab
