// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "hoi/grasp.hpp"
#include "hoi/rng.hpp"
#include "support/hull_oracle.hpp"
#include "support/test_helpers.hpp"

using namespace hoi;

namespace {

ContactSet antipodalSphereGrasp(double r, double mu, int edges) {
  ContactSet cs;
  cs.friction_mu = mu;
  cs.cone_edges = edges;
  cs.characteristic_length = 2.0 * r;
  cs.contacts.push_back({Vec3(r, 0, 0), Vec3(-1, 0, 0)});
  cs.contacts.push_back({Vec3(-r, 0, 0), Vec3(1, 0, 0)});
  return cs;
}

/// Random grasp on a sphere or box with inward normals.
ContactSet randomGrasp(Rng& rng) {
  ContactSet cs;
  cs.friction_mu = rng.uniform(0.0, 1.0);
  cs.cone_edges = 4;
  const int n = 2 + static_cast<int>(rng.bits() % 3);
  const bool sphere = (rng.bits() & 1) != 0;
  if (sphere) {
    const double r = rng.uniform(0.05, 0.2);
    cs.characteristic_length = 2.0 * r;
    for (int i = 0; i < n; ++i) {
      const Vec3 dir = rng.unitVector();
      cs.contacts.push_back({r * dir, -dir});
    }
  } else {
    const Vec3 h(rng.uniform(0.03, 0.15), rng.uniform(0.03, 0.15),
                 rng.uniform(0.03, 0.15));
    cs.characteristic_length = 2.0 * h.maxCoeff();
    for (int i = 0; i < n; ++i) {
      const int axis = static_cast<int>(rng.bits() % 3);
      const double sgn = (rng.bits() & 1) ? 1.0 : -1.0;
      Vec3 p(rng.symmetric(1.0) * h.x(), rng.symmetric(1.0) * h.y(),
             rng.symmetric(1.0) * h.z());
      p[axis] = sgn * h[axis];
      Vec3 normal = Vec3::Zero();
      normal[axis] = -sgn;
      cs.contacts.push_back({p, normal});
    }
  }
  return cs;
}

}  // namespace

TEST_CASE("friction cone: mu=0 collapses to the normal") {
  const auto edges = frictionConeDiscretize(Vec3::UnitZ(), 0.0, 6);
  REQUIRE(edges.size() == 6);
  for (const auto& e : edges) CHECK((e - Vec3::UnitZ()).norm() < 1e-15);
}

TEST_CASE("friction cone: mu=1, m=4 about +z gives 45-degree edges") {
  const auto edges = frictionConeDiscretize(Vec3::UnitZ(), 1.0, 4);
  REQUIRE(edges.size() == 4);
  const double c = std::sqrt(0.5);
  // azimuths 0/90/180/270 relative to the deterministic tangent basis
  CHECK((edges[0] - Vec3(c, 0, c)).norm() < 1e-12);
  CHECK((edges[1] - Vec3(0, c, c)).norm() < 1e-12);
  CHECK((edges[2] - Vec3(-c, 0, c)).norm() < 1e-12);
  CHECK((edges[3] - Vec3(0, -c, c)).norm() < 1e-12);
}

TEST_CASE("friction cone construction invariants") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 n = rng.unitVector();
    const double mu = rng.uniform(0.05, 2.0);
    const int m = 3 + static_cast<int>(rng.bits() % 8);
    const double theta = std::atan(mu);
    for (const auto& e : frictionConeDiscretize(n, mu, m)) {
      CHECK(std::abs(e.norm() - 1.0) < 1e-9);
      CHECK(std::abs(std::acos(std::clamp(e.dot(n), -1.0, 1.0)) - theta) <
            1e-9);
    }
  }
}

TEST_CASE("friction cone rejects bad input") {
  CHECK_THROWS_AS(frictionConeDiscretize(Vec3(0, 0, 2), 0.5, 4),
                  ValidationError);
  CHECK_THROWS_AS(frictionConeDiscretize(Vec3::UnitZ(), 0.5, 2),
                  ValidationError);
  CHECK_THROWS_AS(frictionConeDiscretize(Vec3::UnitZ(), -0.1, 4),
                  ValidationError);
}

TEST_CASE("antipodal grasp with friction closes") {
  const ClosureResult r = forceClosureTest(antipodalSphereGrasp(1.0, 0.5, 8));
  CHECK(r.closure);
  CHECK(r.margin > 0.0);
}

TEST_CASE("single contact never closes") {
  ContactSet cs;
  cs.friction_mu = 1.0;
  cs.cone_edges = 8;
  cs.contacts.push_back({Vec3(0.1, 0, 0), Vec3(-1, 0, 0)});
  const ClosureResult r = forceClosureTest(cs);
  CHECK(!r.closure);
  CHECK(r.margin <= 0.0);
}

TEST_CASE("frictionless antipodal grasp cannot resist axis torque") {
  const ClosureResult r = forceClosureTest(antipodalSphereGrasp(1.0, 0.0, 8));
  CHECK(!r.closure);
  CHECK(r.margin <= 0.0);
}

TEST_CASE("closure decision matches the brute-force hull oracle") {
  Rng rng(77);
  int closures = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const ContactSet cs = randomGrasp(rng);
    const ClosureResult lpResult = forceClosureTest(cs);
    const auto oracle = hoi::testing::hullContainsOriginStrictly(
        hoi::detail::wrenchMatrix(cs));
    INFO("trial " << trial << " contacts=" << cs.contacts.size()
                  << " mu=" << cs.friction_mu);
    CHECK(lpResult.closure == oracle.contains_origin_strictly);
    if (lpResult.closure) ++closures;
  }
  CHECK(closures > 0);  // the sample must exercise both outcomes
  CHECK(closures < 60);
}

TEST_CASE("closure is invariant under the rigid adjoint of the wrench set") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const ContactSet cs = randomGrasp(rng);
    const Pose rigid = hoi::testing::randomPose(rng);
    const double lc = cs.charLength();
    const Eigen::MatrixXd W = hoi::detail::wrenchMatrix(cs);
    // adjoint of (R, t) on scaled wrenches: f' = Rf, tau' = R tau + (t/L)x(Rf)
    Eigen::MatrixXd Wmoved = W;
    const Eigen::Matrix3d R = rigid.q.toRotationMatrix();
    for (int i = 0; i < W.rows(); ++i) {
      const Vec3 f = W.row(i).head<3>();
      const Vec3 tau = W.row(i).tail<3>();
      Wmoved.row(i).head<3>() = R * f;
      Wmoved.row(i).tail<3>() = (R * tau + (rigid.p / lc).cross(R * f));
    }
    const ClosureResult a = forceClosureTestWrenches(W);
    const ClosureResult b = forceClosureTestWrenches(Wmoved);
    INFO("trial " << trial << " margin " << a.margin);
    CHECK(a.closure == b.closure);
    CHECK((a.margin > 0.0) == (b.margin > 0.0));
  }
}

TEST_CASE("closure of a clearly closed grasp survives contact-set rotation") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    ContactSet cs = antipodalSphereGrasp(0.5, 0.6, 16);
    const Pose rigid = hoi::testing::randomPose(rng);
    for (auto& c : cs.contacts) {
      c.point = rigid.apply(c.point);
      c.normal = rigid.q * c.normal;
    }
    cs.characteristic_length = 1.0;
    CHECK(forceClosureTest(cs).closure);
  }
}

TEST_CASE("raising mu never breaks closure") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    ContactSet cs = randomGrasp(rng);
    cs.friction_mu = rng.uniform(0.1, 0.6);
    const bool before = forceClosureTest(cs).closure;
    ContactSet more = cs;
    more.friction_mu = cs.friction_mu + rng.uniform(0.1, 1.0);
    const bool after = forceClosureTest(more).closure;
    if (before) CHECK(after);
  }
}

TEST_CASE("projection: on-surface point is unchanged") {
  ObjectSpec spec;
  spec.geometry = SphereGeometry{0.12};
  const Pose pose = Pose::identity();
  const Vec3 onSurface(0.12, 0, 0);
  const auto res = projectContactsToSurface({onSurface}, pose, spec);
  CHECK((res.adjusted_points[0] - onSurface).norm() < 1e-12);
  CHECK(res.offset.norm() < 1e-12);
}

TEST_CASE("projection moves a point radially onto the sphere") {
  ObjectSpec spec;
  spec.geometry = SphereGeometry{0.12};
  const Vec3 p(0.15, 0, 0);
  const auto res = projectContactsToSurface({p}, Pose::identity(), spec);
  CHECK((res.adjusted_points[0] - Vec3(0.12, 0, 0)).norm() < 1e-12);
  CHECK((res.offset - Vec3(-0.03, 0, 0)).norm() < 1e-12);
}

TEST_CASE("projection tie-breaks the sphere center toward +x") {
  ObjectSpec spec;
  spec.geometry = SphereGeometry{0.12};
  const auto res =
      projectContactsToSurface({Vec3::Zero()}, Pose::identity(), spec);
  CHECK((res.adjusted_points[0] - Vec3(0.12, 0, 0)).norm() < 1e-12);
}

TEST_CASE("projection is idempotent across geometries and poses") {
  Rng rng(41);
  std::vector<ObjectGeometry> geoms = {SphereGeometry{0.1},
                                       BoxGeometry{0.2, 0.15, 0.3},
                                       CylinderGeometry{0.07, 0.25}};
  for (const auto& g : geoms) {
    ObjectSpec spec;
    spec.geometry = g;
    for (int trial = 0; trial < 30; ++trial) {
      const Pose pose = hoi::testing::randomPose(rng);
      const Vec3 p(rng.symmetric(0.5), rng.symmetric(0.5), rng.symmetric(0.5));
      const auto once = projectContactsToSurface({pose.apply(p)}, pose, spec);
      const auto twice =
          projectContactsToSurface(once.adjusted_points, pose, spec);
      CHECK((twice.adjusted_points[0] - once.adjusted_points[0]).norm() <
            1e-12);
      CHECK(std::abs(signedDistance(once.adjusted_points[0], pose,
                                    spec.geometry)) < 1e-9);
    }
  }
}

TEST_CASE("box interior projection picks the nearest face, +x on ties") {
  ObjectSpec spec;
  spec.geometry = BoxGeometry{0.2, 0.2, 0.2};
  // dead center: tie across all axes -> +x face
  const auto centre =
      projectContactsToSurface({Vec3::Zero()}, Pose::identity(), spec);
  CHECK((centre.adjusted_points[0] - Vec3(0.1, 0, 0)).norm() < 1e-12);
  // close to the top face
  const auto near =
      projectContactsToSurface({Vec3(0.0, 0.0, 0.08)}, Pose::identity(), spec);
  CHECK((near.adjusted_points[0] - Vec3(0.0, 0.0, 0.1)).norm() < 1e-12);
}

TEST_CASE("refine frame puts contacts on the surface and reports closure") {
  ObjectSpec spec;
  spec.geometry = SphereGeometry{0.12};
  const Pose objectPose{Vec3(0.0, 0.0, 1.0), Quat::Identity()};

  std::map<std::string, Pose> kps;
  kps["left_palm"] = Pose{Vec3(-0.15, 0.0, 1.0), Quat::Identity()};
  kps["right_palm"] = Pose{Vec3(0.16, 0.0, 1.0), Quat::Identity()};
  kps["head"] = Pose{Vec3(0.0, 0.0, 1.6), Quat::Identity()};

  const auto res = refineContactFrame(kps, objectPose, spec,
                                      {"left_palm", "right_palm"});
  CHECK(std::abs(signedDistance(res.keypoints.at("left_palm").p, objectPose,
                                spec.geometry)) < 1e-9);
  CHECK(std::abs(signedDistance(res.keypoints.at("right_palm").p, objectPose,
                                spec.geometry)) < 1e-9);
  // non-contact keypoint shifted rigidly by the mean offset
  CHECK((res.keypoints.at("head").p - (Vec3(0.0, 0.0, 1.6) +
                                       res.report.mean_offset))
            .norm() < 1e-12);
  CHECK(res.report.num_contacts == 2);
  CHECK(res.report.closure);  // antipodal with default mu=0.5
  // inward normals in the object frame
  for (const auto& c : res.contact_set.contacts)
    CHECK((c.normal + c.point.normalized()).norm() < 1e-9);
}
