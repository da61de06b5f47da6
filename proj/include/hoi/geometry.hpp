// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <string>

#include "hoi/errors.hpp"

namespace hoi {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;  // (w, x, y, z) constructor order

inline constexpr double kUnitQuatTol = 1e-6;

inline bool isUnit(const Quat& q, double tol = kUnitQuatTol) {
  return std::abs(q.norm() - 1.0) <= tol;
}

inline void requireUnit(const Quat& q, const std::string& what) {
  if (!isUnit(q)) {
    throw ValidationError(what + ": quaternion is not unit (norm=" +
                          std::to_string(q.norm()) + ")");
  }
}

/// Normalize with w>=0 left to the caller; only the norm is fixed here.
inline Quat normalized(const Quat& q) {
  Quat r = q;
  r.normalize();
  return r;
}

/// Quaternion for a rotation of |v| radians about v/|v| (rotation-vector
/// exponential map). Small angles use the series for sin(x/2)/x.
inline Quat quatExp(const Vec3& rotVec) {
  const double angle = rotVec.norm();
  double half = 0.5 * angle;
  double s;
  if (angle < 1e-8) {
    s = 0.5 - angle * angle / 48.0;  // sin(a/2)/a
  } else {
    s = std::sin(half) / angle;
  }
  Quat q(std::cos(half), s * rotVec.x(), s * rotVec.y(), s * rotVec.z());
  return normalized(q);
}

/// Rotation vector of a unit quaternion; the shorter representative
/// (angle in [0, pi]) is returned.
inline Vec3 quatLog(const Quat& qin) {
  Quat q = qin;
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const double vnorm = q.vec().norm();
  if (vnorm < 1e-12) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(vnorm, q.w());
  return q.vec() * (angle / vnorm);
}

/// Geodesic angle between two rotations, respecting the double cover.
/// Computed as 2*asin(min(1, |vec(qa^-1 qb)|)) for stability near identity.
inline double geodesicAngle(const Quat& qa, const Quat& qb) {
  const Quat rel = qa.conjugate() * qb;
  const double v = rel.vec().norm();
  return 2.0 * std::asin(std::min(1.0, v));
}

/// Shortest-arc spherical interpolation between unit quaternions.
/// u=0 gives q0; u=1 gives q1 up to sign.
inline Quat slerp(const Quat& q0, const Quat& q1, double u) {
  requireUnit(q0, "slerp q0");
  requireUnit(q1, "slerp q1");
  if (u < 0.0 || u > 1.0) {
    throw ValidationError("slerp: u must lie in [0,1], got " +
                          std::to_string(u));
  }
  return normalized(q0.slerp(u, q1));
}

/// Rigid transform: rotation then translation (x -> q*x + p).
struct Pose {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& x) const { return q * x + p; }

  Pose compose(const Pose& other) const {
    return Pose{p + q * other.p, normalized(q * other.q)};
  }

  Pose inverse() const {
    const Quat qi = q.conjugate();
    return Pose{-(qi * p), qi};
  }

  void validate(const std::string& what = "Pose") const {
    requireUnit(q, what);
    if (!p.allFinite()) throw ValidationError(what + ": non-finite position");
  }
};

inline bool approxEqual(const Pose& a, const Pose& b, double posTol,
                        double rotTol) {
  return (a.p - b.p).norm() <= posTol && geodesicAngle(a.q, b.q) <= rotTol;
}

/// Componentwise linear interpolation of positions plus slerp of rotations.
inline Pose interpolate(const Pose& a, const Pose& b, double u) {
  return Pose{a.p + u * (b.p - a.p), slerp(a.q, b.q, u)};
}

}  // namespace hoi
