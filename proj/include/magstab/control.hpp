#pragma once

// Magnetic control laws. All of them command a dipole moment of the form
// m = (B_b^x)' v, so the resulting torque m x B_b is orthogonal to B_b.

#include <string>
#include <variant>

#include "magstab/attmath.hpp"
#include "magstab/design.hpp"

namespace magstab {

enum class ControllerKind { continuous_state, continuous_output, zoh_state, zoh_output };

inline bool is_zoh(ControllerKind k) {
  return k == ControllerKind::zoh_state || k == ControllerKind::zoh_output;
}

inline bool is_output_feedback(ControllerKind k) {
  return k == ControllerKind::continuous_output || k == ControllerKind::zoh_output;
}

inline std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::continuous_state: return "continuous-state";
    case ControllerKind::continuous_output: return "continuous-output";
    case ControllerKind::zoh_state: return "zoh-state";
    case ControllerKind::zoh_output: return "zoh-output";
  }
  return "?";
}

struct ControllerConfig {
  ControllerKind kind = ControllerKind::zoh_state;
  Gains gains = StateGains{};
  /// Gain scaling. Zero switches the actuation off.
  double epsilon = 0.0;
  /// Sampling period, ZOH kinds only.
  double T = 0.0;

  void validate() const {
    const bool output_gains = std::holds_alternative<OutputGains>(gains);
    if (output_gains != is_output_feedback(kind))
      throw DomainError("controller gains do not match controller kind " + to_string(kind));
    std::visit(
        [](const auto& g) {
          if (!(g.k1 > 0.0)) throw DomainError("k1 required and > 0");
          if (!(g.k2 > 0.0)) throw DomainError("k2 required and > 0");
          if constexpr (std::is_same_v<std::decay_t<decltype(g)>, OutputGains>) {
            if (!(g.alpha > 0.0)) throw DomainError("alpha required and > 0");
            if (!(g.lambda > 0.0)) throw DomainError("lambda required and > 0");
          }
        },
        gains);
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be >= 0");
    if (is_zoh(kind) && !(T > 0.0)) throw DomainError("sampling period T required and > 0");
  }
};

/// Observer state delta in R^4 of the dynamic output feedback.
struct ObserverState {
  Vec4 delta = Vec4::Zero();
};

/// delta(0) = q(0) / (eps lambda), which zeroes the initial filter error
/// q - eps lambda delta. Zero when eps lambda == 0.
inline ObserverState initial_observer(const Quaternion& q0, double epsilon, double lambda) {
  const double el = epsilon * lambda;
  if (el == 0.0) return {};
  return {q0.to_vec4() / el};
}

/// m = (B_b^x)' (eps^2 k1 q_v + eps k2 w), sampled and held by the ZOH loop.
inline Vec3 state_fb_dipole(const Quaternion& q, const Vec3& omega, const Vec3& b_body,
                            const StateGains& g, double epsilon) {
  return skew(b_body).transpose() * (epsilon * epsilon * g.k1 * q.v + epsilon * g.k2 * omega);
}

/// Continuous-time static state feedback; same law evaluated at every instant.
inline Vec3 continuous_state_fb(const Quaternion& q, const Vec3& omega, const Vec3& b_body,
                                const StateGains& g, double epsilon) {
  return state_fb_dipole(q, omega, b_body, g, epsilon);
}

/// m = (B_b^x)' eps^2 [k1 q_v + k2 alpha lambda W(q)' (q - eps lambda delta)].
inline Vec3 output_fb_dipole(const ObserverState& obs, const Quaternion& q, const Vec3& b_body,
                             const OutputGains& g, double epsilon) {
  const Vec4 filt = q.to_vec4() - epsilon * g.lambda * obs.delta;
  const Vec3 v = g.k1 * q.v + g.k2 * g.alpha * g.lambda * (kin_matrix(q).transpose() * filt);
  return skew(b_body).transpose() * (epsilon * epsilon * v);
}

struct OutputFeedbackStep {
  Vec3 m;
  ObserverState next;
};

/// Forward-difference discrete observer: delta+ = delta + T alpha (q - eps lambda delta).
inline OutputFeedbackStep output_fb_step(const ObserverState& obs, const Quaternion& q,
                                         const Vec3& b_body, const OutputGains& g,
                                         double epsilon, double period) {
  const Vec4 filt = q.to_vec4() - epsilon * g.lambda * obs.delta;
  return {output_fb_dipole(obs, q, b_body, g, epsilon),
          {obs.delta + period * g.alpha * filt}};
}

struct OutputFeedbackRate {
  Vec3 m;
  Vec4 delta_dot;
};

/// Continuous-time dynamic output feedback: delta' = alpha (q - eps lambda delta).
inline OutputFeedbackRate continuous_output_fb(const ObserverState& obs, const Quaternion& q,
                                               const Vec3& b_body, const OutputGains& g,
                                               double epsilon) {
  return {output_fb_dipole(obs, q, b_body, g, epsilon),
          g.alpha * (q.to_vec4() - epsilon * g.lambda * obs.delta)};
}

}  // namespace magstab
