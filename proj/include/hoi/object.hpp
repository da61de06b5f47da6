// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "hoi/ballistic.hpp"
#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"

namespace hoi {

struct SphereGeometry {
  double r = 0.1;
};
struct BoxGeometry {
  double lx = 0.2, ly = 0.2, lz = 0.2;  // full edge lengths
};
struct CylinderGeometry {
  double r = 0.05, h = 0.2;  // axis along local z
};

using ObjectGeometry =
    std::variant<SphereGeometry, BoxGeometry, CylinderGeometry>;

struct ObjectSpec {
  ObjectGeometry geometry = SphereGeometry{};
  double mass = 1.0;  // kg
  SimParams sim;

  void validate() const {
    std::visit(
        [](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SphereGeometry>) {
            if (g.r <= 0.0) throw ValidationError("ObjectSpec: sphere r <= 0");
          } else if constexpr (std::is_same_v<T, BoxGeometry>) {
            if (g.lx <= 0.0 || g.ly <= 0.0 || g.lz <= 0.0)
              throw ValidationError("ObjectSpec: box dimensions must be > 0");
          } else {
            if (g.r <= 0.0 || g.h <= 0.0)
              throw ValidationError(
                  "ObjectSpec: cylinder dimensions must be > 0");
          }
        },
        geometry);
    if (mass <= 0.0) throw ValidationError("ObjectSpec: mass must be > 0");
    sim.validate();
  }

  double maxDimension() const {
    return std::visit(
        [](const auto& g) -> double {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SphereGeometry>)
            return 2.0 * g.r;
          else if constexpr (std::is_same_v<T, BoxGeometry>)
            return std::max({g.lx, g.ly, g.lz});
          else
            return std::max(2.0 * g.r, g.h);
        },
        geometry);
  }

  ObjectSpec scaled(double s) const {
    if (s <= 0.0)
      throw ValidationError("ObjectSpec::scaled: scale must be > 0, got " +
                            std::to_string(s));
    ObjectSpec out = *this;
    std::visit(
        [s](auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, SphereGeometry>) {
            g.r *= s;
          } else if constexpr (std::is_same_v<T, BoxGeometry>) {
            g.lx *= s;
            g.ly *= s;
            g.lz *= s;
          } else {
            g.r *= s;
            g.h *= s;
          }
        },
        out.geometry);
    return out;
  }
};

namespace detail {

inline double sphereSdf(const Vec3& p, const SphereGeometry& g) {
  return p.norm() - g.r;
}

inline double boxSdf(const Vec3& p, const BoxGeometry& g) {
  const Vec3 h(0.5 * g.lx, 0.5 * g.ly, 0.5 * g.lz);
  const Vec3 q = p.cwiseAbs() - h;
  const Vec3 outside = q.cwiseMax(0.0);
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside.norm() + inside;
}

inline double cylinderSdf(const Vec3& p, const CylinderGeometry& g) {
  const double dr = std::hypot(p.x(), p.y()) - g.r;
  const double dz = std::abs(p.z()) - 0.5 * g.h;
  const double ox = std::max(dr, 0.0);
  const double oz = std::max(dz, 0.0);
  const double inside = std::min(std::max(dr, dz), 0.0);
  return std::hypot(ox, oz) + inside;
}

inline Vec3 sphereClosest(const Vec3& p, const SphereGeometry& g) {
  const double n = p.norm();
  if (n < 1e-12) return Vec3(g.r, 0.0, 0.0);  // center: tie-break toward +x
  return p * (g.r / n);
}

inline Vec3 boxClosest(const Vec3& p, const BoxGeometry& g) {
  const Vec3 h(0.5 * g.lx, 0.5 * g.ly, 0.5 * g.lz);
  const bool inside = std::abs(p.x()) <= h.x() && std::abs(p.y()) <= h.y() &&
                      std::abs(p.z()) <= h.z();
  if (!inside) return p.cwiseMax(-h).cwiseMin(h);
  // interior point: push to the nearest face, ties toward lower axis (+x
  // first), zero coordinate pushed to the positive face
  int axis = 0;
  double best = h.x() - std::abs(p.x());
  for (int i = 1; i < 3; ++i) {
    const double d = h[i] - std::abs(p[i]);
    if (d < best - 1e-15) {
      best = d;
      axis = i;
    }
  }
  Vec3 out = p;
  out[axis] = p[axis] >= 0.0 ? h[axis] : -h[axis];
  return out;
}

inline Vec3 cylinderClosest(const Vec3& p, const CylinderGeometry& g) {
  const double halfH = 0.5 * g.h;
  const double rho = std::hypot(p.x(), p.y());
  Eigen::Vector2d dir(1.0, 0.0);  // axis point: tie-break toward +x
  if (rho > 1e-12) dir = Eigen::Vector2d(p.x(), p.y()) / rho;
  const bool insideR = rho <= g.r;
  const bool insideZ = std::abs(p.z()) <= halfH;
  if (insideR && insideZ) {
    const double wall = g.r - rho;
    const double cap = halfH - std::abs(p.z());
    if (wall <= cap)  // tie prefers the wall
      return Vec3(g.r * dir.x(), g.r * dir.y(), p.z());
    return Vec3(p.x(), p.y(), p.z() >= 0.0 ? halfH : -halfH);
  }
  const double rc = std::min(rho, g.r);
  const double zc = std::clamp(p.z(), -halfH, halfH);
  if (!insideR && !insideZ) return Vec3(g.r * dir.x(), g.r * dir.y(), zc);
  if (!insideR) return Vec3(g.r * dir.x(), g.r * dir.y(), p.z());
  return Vec3(rc * dir.x(), rc * dir.y(), zc);
}

/// Outward unit normal for a point on (or numerically near) the surface.
inline Vec3 outwardNormal(const Vec3& s, const ObjectGeometry& geom) {
  return std::visit(
      [&s](const auto& g) -> Vec3 {
        using T = std::decay_t<decltype(g)>;
        constexpr double kEps = 1e-9;
        if constexpr (std::is_same_v<T, SphereGeometry>) {
          const double n = s.norm();
          return n < 1e-12 ? Vec3(1.0, 0.0, 0.0) : Vec3(s / n);
        } else if constexpr (std::is_same_v<T, BoxGeometry>) {
          const Vec3 h(0.5 * g.lx, 0.5 * g.ly, 0.5 * g.lz);
          Vec3 n = Vec3::Zero();
          for (int i = 0; i < 3; ++i)
            if (std::abs(s[i]) >= h[i] - kEps)
              n[i] = s[i] >= 0.0 ? 1.0 : -1.0;
          if (n.norm() < 0.5) n = Vec3(1.0, 0.0, 0.0);
          return n.normalized();
        } else {
          const double halfH = 0.5 * g.h;
          const double rho = std::hypot(s.x(), s.y());
          Vec3 n = Vec3::Zero();
          if (rho >= g.r - kEps && rho > 1e-12)
            n += Vec3(s.x() / rho, s.y() / rho, 0.0);
          if (std::abs(s.z()) >= halfH - kEps)
            n += Vec3(0.0, 0.0, s.z() >= 0.0 ? 1.0 : -1.0);
          if (n.norm() < 0.5) n = Vec3(1.0, 0.0, 0.0);
          return n.normalized();
        }
      },
      geom);
}

}  // namespace detail

/// Signed distance from a world-space point to the object surface
/// (negative inside).
inline double signedDistance(const Vec3& worldPoint, const Pose& objectPose,
                             const ObjectGeometry& geom) {
  const Vec3 local = objectPose.inverse().apply(worldPoint);
  return std::visit(
      [&local](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, SphereGeometry>)
          return detail::sphereSdf(local, g);
        else if constexpr (std::is_same_v<T, BoxGeometry>)
          return detail::boxSdf(local, g);
        else
          return detail::cylinderSdf(local, g);
      },
      geom);
}

/// Nearest point on the object surface, in world coordinates. Interior and
/// degenerate (medial-axis) points resolve deterministically, ties toward +x.
inline Vec3 closestSurfacePoint(const Vec3& worldPoint, const Pose& objectPose,
                                const ObjectGeometry& geom) {
  const Vec3 local = objectPose.inverse().apply(worldPoint);
  const Vec3 s = std::visit(
      [&local](const auto& g) -> Vec3 {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, SphereGeometry>)
          return detail::sphereClosest(local, g);
        else if constexpr (std::is_same_v<T, BoxGeometry>)
          return detail::boxClosest(local, g);
        else
          return detail::cylinderClosest(local, g);
      },
      geom);
  return objectPose.apply(s);
}

/// Inward unit surface normal (pointing into the object) at a world-space
/// surface point.
inline Vec3 inwardSurfaceNormal(const Vec3& worldSurfacePoint,
                                const Pose& objectPose,
                                const ObjectGeometry& geom) {
  const Vec3 local = objectPose.inverse().apply(worldSurfacePoint);
  const Vec3 outward = detail::outwardNormal(local, geom);
  return objectPose.q * (-outward);
}

}  // namespace hoi
