// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"
#include "hoi/lp.hpp"
#include "hoi/object.hpp"

namespace hoi {

struct Contact {
  Vec3 point = Vec3::Zero();   // object frame, m
  Vec3 normal = Vec3::UnitZ();  // inward, unit
};

struct ContactSet {
  std::vector<Contact> contacts;
  double friction_mu = 0.5;
  int cone_edges = 8;
  // Soft-finger torsional friction: each contact can resist a moment about
  // its normal of up to friction_mu * torsion_patch_radius per unit normal
  // force. Two antipodal frictional contacts close only through this term.
  double torsion_patch_radius = 0.005;  // m
  // Torque components of the contact wrenches are divided by this length so
  // force and torque are comparable in the margin computation. 0 means
  // "derive from the contact points" (bounding-sphere diameter).
  double characteristic_length = 0.0;

  void validate() const {
    if (contacts.empty())
      throw ValidationError("ContactSet: at least 1 contact required");
    if (friction_mu < 0.0)
      throw ValidationError("ContactSet: friction_mu must be >= 0");
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      const double n = contacts[i].normal.norm();
      if (std::abs(n - 1.0) > 1e-9)
        throw ValidationError("ContactSet: contact " + std::to_string(i) +
                              " normal is not unit (norm=" +
                              std::to_string(n) + ")");
    }
  }

  double charLength() const {
    if (characteristic_length > 0.0) return characteristic_length;
    double maxR = 0.0;
    for (const auto& c : contacts) maxR = std::max(maxR, c.point.norm());
    return std::max(2.0 * maxR, 1e-6);
  }
};

struct ClosureResult {
  bool closure = false;
  double margin = 0.0;  // probe-restricted inscribed-radius estimate; <= 0
                        // whenever closure is false
};

struct ClosureReport {
  bool closure = false;
  double margin = 0.0;
  int num_contacts = 0;
  Vec3 mean_offset = Vec3::Zero();
};

/// m unit force directions evenly spaced on the friction cone of half-angle
/// atan(mu) about the (unit, inward) normal. mu = 0 degenerates to m copies
/// of the normal.
inline std::vector<Vec3> frictionConeDiscretize(const Vec3& normal, double mu,
                                                int mEdges) {
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw ValidationError("frictionConeDiscretize: normal must be unit");
  if (mu < 0.0) throw ValidationError("frictionConeDiscretize: mu must be >= 0");
  if (mEdges < 1)
    throw ValidationError("frictionConeDiscretize: need at least 1 edge");
  if (mu > 0.0 && mEdges < 3)
    throw ValidationError(
        "frictionConeDiscretize: mu > 0 requires at least 3 edges");

  if (mu == 0.0) return std::vector<Vec3>(mEdges, normal);

  // deterministic tangent basis: azimuth 0 along the world axis least
  // aligned with the normal
  int least = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(normal[i]) < std::abs(normal[least])) least = i;
  Vec3 a = Vec3::Zero();
  a[least] = 1.0;
  Vec3 t1 = (a - a.dot(normal) * normal).normalized();
  Vec3 t2 = normal.cross(t1);

  const double theta = std::atan(mu);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  std::vector<Vec3> edges;
  edges.reserve(mEdges);
  for (int k = 0; k < mEdges; ++k) {
    const double phi = 2.0 * M_PI * k / mEdges;
    edges.push_back(
        (c * normal + s * (std::cos(phi) * t1 + std::sin(phi) * t2))
            .normalized());
  }
  return edges;
}

namespace detail {

/// Generator matrix of the linearized soft-finger wrench cone, one row per
/// generator: the friction-cone edges (force; point x force / charLength)
/// plus, per contact, a pair of unit-normal-force generators carrying the
/// torsional friction extremes about the normal. Torque components are
/// divided by charLength so units are comparable.
inline Eigen::MatrixXd wrenchMatrix(const ContactSet& cs) {
  const double lc = cs.charLength();
  const double torsion = cs.friction_mu * cs.torsion_patch_radius;
  std::vector<Eigen::Matrix<double, 6, 1>> rows;
  for (const auto& c : cs.contacts) {
    for (const auto& f : frictionConeDiscretize(c.normal, cs.friction_mu,
                                                cs.cone_edges)) {
      Eigen::Matrix<double, 6, 1> w;
      w.head<3>() = f;
      w.tail<3>() = c.point.cross(f) / lc;
      rows.push_back(w);
    }
    if (torsion > 0.0) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::Matrix<double, 6, 1> w;
        w.head<3>() = c.normal;
        w.tail<3>() = (c.point.cross(c.normal) + sgn * torsion * c.normal) / lc;
        rows.push_back(w);
      }
    }
  }
  Eigen::MatrixXd W(rows.size(), 6);
  for (std::size_t i = 0; i < rows.size(); ++i) W.row(i) = rows[i].transpose();
  return W;
}

/// Directions of the {-1,0,1}^6 grid (normalized, zero excluded) used for
/// the margin estimate.
inline const std::vector<Eigen::Matrix<double, 6, 1>>& probeDirections() {
  static const std::vector<Eigen::Matrix<double, 6, 1>> probes = [] {
    std::vector<Eigen::Matrix<double, 6, 1>> out;
    Eigen::Matrix<double, 6, 1> d;
    for (int code = 0; code < 729; ++code) {  // 3^6
      int c = code;
      for (int i = 0; i < 6; ++i) {
        d(i) = static_cast<double>(c % 3 - 1);
        c /= 3;
      }
      if (d.squaredNorm() == 0.0) continue;
      out.push_back(d.normalized());
    }
    return out;
  }();
  return probes;
}

inline double support(const Eigen::MatrixXd& W,
                      const Eigen::Matrix<double, 6, 1>& d) {
  return (W * d).maxCoeff();
}

}  // namespace detail

/// Force-closure decision with a margin, on a prebuilt K x 6 wrench set.
/// Closure holds iff the origin lies strictly inside the convex hull of the
/// wrenches, equivalently iff no direction d != 0 has all wrench components
/// <= 0. The decision is exact: twelve LP feasibility probes search for such
/// a separating direction (one per signed component normalization
/// d_j = +/-1). The margin is the minimum support over a fixed probe grid, an
/// upper estimate of the inscribed-ball radius, forced <= 0 by the separating
/// certificate when closure fails.
inline ClosureResult forceClosureTestWrenches(const Eigen::MatrixXd& W) {
  if (W.cols() != 6 || W.rows() < 1)
    throw ValidationError("forceClosureTestWrenches: expected a K x 6 matrix");
  const int K = static_cast<int>(W.rows());

  constexpr double kSeparationTol = 1e-9;
  bool separated = false;
  Eigen::Matrix<double, 6, 1> sep = Eigen::Matrix<double, 6, 1>::Zero();
  for (int j = 0; j < 6 && !separated; ++j) {
    for (double sgn : {1.0, -1.0}) {
      // W d <= tol  and  sgn * d_j = 1  (as a pair of inequalities)
      Eigen::MatrixXd A(K + 2, 6);
      Eigen::VectorXd b =
          Eigen::VectorXd::Constant(K + 2, kSeparationTol);
      A.topRows(K) = W;
      A.row(K).setZero();
      A(K, j) = sgn;
      b(K) = 1.0;
      A.row(K + 1).setZero();
      A(K + 1, j) = -sgn;
      b(K + 1) = -1.0;
      if (auto d = lp::findFeasible(A, b)) {
        separated = true;
        sep = d->normalized();
        break;
      }
    }
  }

  double margin = std::numeric_limits<double>::infinity();
  for (const auto& p : detail::probeDirections())
    margin = std::min(margin, detail::support(W, p));
  if (separated) margin = std::min({margin, detail::support(W, sep), 0.0});

  return ClosureResult{!separated, margin};
}

inline ClosureResult forceClosureTest(const ContactSet& cs) {
  cs.validate();
  return forceClosureTestWrenches(detail::wrenchMatrix(cs));
}

struct ProjectionResult {
  std::vector<Vec3> adjusted_points;
  Vec3 offset = Vec3::Zero();  // mean correction applied
};

/// Moves each point to the nearest point on the object surface.
inline ProjectionResult projectContactsToSurface(
    const std::vector<Vec3>& palmPoints, const Pose& objectPose,
    const ObjectSpec& spec) {
  spec.validate();
  objectPose.validate("projectContactsToSurface object pose");
  if (palmPoints.empty())
    throw ValidationError("projectContactsToSurface: no points given");
  ProjectionResult out;
  out.adjusted_points.reserve(palmPoints.size());
  Vec3 sum = Vec3::Zero();
  for (const auto& p : palmPoints) {
    const Vec3 s = closestSurfacePoint(p, objectPose, spec.geometry);
    out.adjusted_points.push_back(s);
    sum += s - p;
  }
  out.offset = sum / static_cast<double>(palmPoints.size());
  return out;
}

struct RefineParams {
  double friction_mu = 0.5;
  int cone_edges = 8;
};

struct RefineFrameResult {
  std::map<std::string, Pose> keypoints;  // refined
  ContactSet contact_set;
  ClosureReport report;
};

/// Projects the designated contact keypoints onto the object surface and
/// rigidly shifts the remaining keypoints by the mean correction, keeping the
/// hand shape. The contact set (object-frame points, inward normals) feeds
/// the closure test.
inline RefineFrameResult refineContactFrame(
    const std::map<std::string, Pose>& keypoints, const Pose& objectPose,
    const ObjectSpec& spec, const std::vector<std::string>& contactNames,
    const RefineParams& params = {}) {
  if (contactNames.empty())
    throw ValidationError("refineContactFrame: no contact keypoints given");
  std::vector<Vec3> points;
  points.reserve(contactNames.size());
  for (const auto& name : contactNames) {
    auto it = keypoints.find(name);
    if (it == keypoints.end())
      throw ValidationError("refineContactFrame: unknown contact keypoint '" +
                            name + "'");
    points.push_back(it->second.p);
  }

  const ProjectionResult proj =
      projectContactsToSurface(points, objectPose, spec);

  RefineFrameResult out;
  out.keypoints = keypoints;
  for (std::size_t i = 0; i < contactNames.size(); ++i)
    out.keypoints[contactNames[i]].p = proj.adjusted_points[i];
  for (auto& [name, pose] : out.keypoints) {
    if (std::find(contactNames.begin(), contactNames.end(), name) ==
        contactNames.end())
      pose.p += proj.offset;
  }

  const Pose objInv = objectPose.inverse();
  out.contact_set.friction_mu = params.friction_mu;
  out.contact_set.cone_edges = params.cone_edges;
  out.contact_set.characteristic_length = spec.maxDimension();
  for (const auto& s : proj.adjusted_points) {
    Contact c;
    c.point = objInv.apply(s);
    c.normal = objInv.q * inwardSurfaceNormal(s, objectPose, spec.geometry);
    out.contact_set.contacts.push_back(c);
  }

  const ClosureResult closure = forceClosureTest(out.contact_set);
  out.report.closure = closure.closure;
  out.report.margin = closure.margin;
  out.report.num_contacts = static_cast<int>(proj.adjusted_points.size());
  out.report.mean_offset = proj.offset;
  return out;
}

}  // namespace hoi
