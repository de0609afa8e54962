#pragma once

// Quaternion and rotation algebra. Quaternions are stored vector part first,
// q = [q_v; q4], and represent the rotation of the body frame with respect to
// the inertial frame.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "magstab/errors.hpp"

namespace magstab {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat43 = Eigen::Matrix<double, 4, 3>;

/// Tolerance on |‖q‖ - 1| accepted by operations that require a unit quaternion.
inline constexpr double kUnitQuaternionTol = 1e-6;

struct Quaternion {
  Vec3 v = Vec3::Zero();
  double s = 1.0;

  Quaternion() = default;
  Quaternion(const Vec3& vec, double scalar) : v(vec), s(scalar) {}
  Quaternion(double q1, double q2, double q3, double q4) : v(q1, q2, q3), s(q4) {}

  static Quaternion identity() { return {}; }

  /// Packs as [q1 q2 q3 q4].
  static Quaternion from_vec4(const Vec4& q) { return {q.head<3>(), q(3)}; }
  Vec4 to_vec4() const {
    Vec4 out;
    out << v, s;
    return out;
  }

  double norm() const { return std::sqrt(v.squaredNorm() + s * s); }
  Quaternion operator-() const { return {-v, -s}; }

  friend bool operator==(const Quaternion& a, const Quaternion& b) {
    return a.v == b.v && a.s == b.s;
  }
};

/// a^x, so that skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a(2), a(1),
       a(2), 0.0, -a(0),
       -a(1), a(0), 0.0;
  return m;
}

namespace detail {
inline void require_unit(const Quaternion& q, const char* who) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitQuaternionTol) {
    throw DomainError(std::string(who) + ": quaternion norm " + std::to_string(n) +
                      " is not 1");
  }
}
}  // namespace detail

/// Attitude matrix C(q) = (q4^2 - q_v'q_v) I + 2 q_v q_v' - 2 q4 q_v^x.
/// Maps inertial-frame components to body-frame components.
inline Mat3 dcm_from_quat(const Quaternion& q) {
  detail::require_unit(q, "dcm_from_quat");
  return (q.s * q.s - q.v.squaredNorm()) * Mat3::Identity() + 2.0 * q.v * q.v.transpose() -
         2.0 * q.s * skew(q.v);
}

/// W(q) = 1/2 [q4 I + q_v^x; -q_v'], the kinematic matrix of q' = W(q) w.
inline Mat43 kin_matrix(const Quaternion& q) {
  detail::require_unit(q, "kin_matrix");
  Mat43 w;
  w.topRows<3>() = 0.5 * (q.s * Mat3::Identity() + skew(q.v));
  w.row(3) = -0.5 * q.v.transpose();
  return w;
}

inline Quaternion normalize(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 1e-12)) {
    throw DomainError("normalize: quaternion norm too small to normalize");
  }
  return {q.v / n, q.s / n};
}

}  // namespace magstab
