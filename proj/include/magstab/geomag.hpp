#pragma once

// Circular orbit and non-tilted dipole model of the geomagnetic field.

#include <cmath>
#include <numbers>

#include "magstab/attmath.hpp"

namespace magstab {

inline constexpr double kEarthRadius = 6.371e6;        // m
inline constexpr double kMuEarth = 3.986e14;           // m^3/s^2
inline constexpr double kGeomagneticDipole = 7.746e15; // Wb m

struct OrbitSpec {
  double radius_m = kEarthRadius + 450e3;
  double incl_rad = 0.0;
  double raan_rad = 0.0;
  double phi0_rad = 0.0;
  double mu_earth = kMuEarth;
  double mu_m = kGeomagneticDipole;
  Vec3 m_hat_i = Vec3(0.0, 0.0, -1.0);

  /// Throws DomainError when an invariant does not hold.
  void validate() const {
    if (!(radius_m > kEarthRadius)) throw DomainError("orbit radius must exceed the Earth radius");
    if (!(incl_rad >= 0.0 && incl_rad <= std::numbers::pi))
      throw DomainError("orbit inclination must lie in [0, pi]");
    if (!(mu_m > 0.0)) throw DomainError("dipole strength mu_m must be > 0");
    if (!(mu_earth > 0.0)) throw DomainError("gravitational parameter must be > 0");
    if (!std::isfinite(raan_rad) || !std::isfinite(phi0_rad))
      throw DomainError("orbit angles must be finite");
  }
};

/// Mean motion n = sqrt(mu / R^3), rad/s.
inline double orbital_rate(const OrbitSpec& spec) {
  return std::sqrt(spec.mu_earth / (spec.radius_m * spec.radius_m * spec.radius_m));
}

inline double orbital_period(const OrbitSpec& spec) {
  return 2.0 * std::numbers::pi / orbital_rate(spec);
}

/// Field magnitude at the magnetic equator, mu_m / R^3.
inline double equatorial_field(const OrbitSpec& spec) {
  return spec.mu_m / (spec.radius_m * spec.radius_m * spec.radius_m);
}

/// r_hat(t) = R_z(raan) R_x(incl) [cos(nt + phi0), sin(nt + phi0), 0]'.
inline Vec3 position_unit_inertial(const OrbitSpec& spec, double t) {
  const double u = orbital_rate(spec) * t + spec.phi0_rad;
  const double cu = std::cos(u), su = std::sin(u);
  const double ci = std::cos(spec.incl_rad), si = std::sin(spec.incl_rad);
  const double co = std::cos(spec.raan_rad), so = std::sin(spec.raan_rad);
  // R_x(incl) * [cu, su, 0]
  const double x = cu, y = ci * su, z = si * su;
  return {co * x - so * y, so * x + co * y, z};
}

/// B^i(t) = mu_m / R^3 [3 (m_hat' r_hat) r_hat - m_hat], tesla.
inline Vec3 field_inertial(const OrbitSpec& spec, double t) {
  const Vec3 r = position_unit_inertial(spec, t);
  return equatorial_field(spec) * (3.0 * spec.m_hat_i.dot(r) * r - spec.m_hat_i);
}

/// B^b(q, t) = C(q) B^i(t).
inline Vec3 field_body(const Quaternion& q, const OrbitSpec& spec, double t) {
  return dcm_from_quat(q) * field_inertial(spec, t);
}

}  // namespace magstab
