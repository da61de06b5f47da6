// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "hoi/rng.hpp"
#include "hoi/synthesis.hpp"
#include "support/test_helpers.hpp"

namespace hoi::testing {

struct SynthesisFixture {
  MotionClip motion;
  PhaseAnnotation phases;
  ObjectSpec spec;
  SynthesisSettings settings;
};

/// Hand-authored two-palm lift: the ball flies into the hands at t_s, rides
/// the palm midpoint through an arc, and is released at t_e.
inline SynthesisFixture makeLiftFixture() {
  SynthesisFixture fx;
  MotionClip& clip = fx.motion;
  clip.fps = 50.0;
  clip.joint_names = {"shoulder", "elbow", "wrist"};
  clip.keypoint_names = {"left_palm", "right_palm", "head", "left_foot",
                         "right_foot"};

  const int len = 70;
  for (int t = 0; t < len; ++t) {
    const double s = static_cast<double>(t) / (len - 1);
    const Vec3 centre(0.4 * s, 0.0, 1.0 + 0.25 * std::sin(M_PI * s));
    MotionFrame f;
    f.root = Pose{centre + Vec3(0, 0, -0.3), Quat::Identity()};
    f.joints = Eigen::Vector3d(0.3 * std::sin(2 * M_PI * s),
                               0.2 * std::cos(2 * M_PI * s), 0.1 * s);
    f.keypoints["left_palm"] = Pose{centre + Vec3(0, -0.1, 0), Quat::Identity()};
    f.keypoints["right_palm"] = Pose{centre + Vec3(0, 0.1, 0), Quat::Identity()};
    f.keypoints["head"] = Pose{centre + Vec3(0, 0, 0.5), Quat::Identity()};
    f.keypoints["left_foot"] = Pose{Vec3(0.4 * s, -0.1, 0.05), Quat::Identity()};
    f.keypoints["right_foot"] = Pose{Vec3(0.4 * s, 0.1, 0.05), Quat::Identity()};
    clip.frames.push_back(std::move(f));
  }

  fx.phases.t_s = 20;
  fx.phases.t_e = 50;
  fx.phases.blend_window_k = 5;
  fx.phases.anchor.kind = AnchorKind::MidpointOfTwoKeypoints;
  fx.phases.anchor.keypoint_names = {"left_palm", "right_palm"};

  fx.spec.geometry = SphereGeometry{0.11};
  fx.spec.mass = 0.6;
  fx.spec.sim.dt = 0.005;
  fx.spec.sim.restitution = 0.6;
  fx.spec.sim.ground_height = 0.0;

  fx.settings.phi = RelativeTransform{};  // object rides the palm midpoint
  return fx;
}

/// Randomized synthesis input with a smooth sinusoidal anchor path, random
/// phases/blend window, random primitive geometry and a random (small) phi.
inline SynthesisFixture makeRandomFixture(std::uint64_t seed) {
  Rng rng(seed);
  SynthesisFixture fx;
  MotionClip& clip = fx.motion;
  clip.fps = 50.0;
  clip.joint_names = {"j0", "j1", "j2", "j3"};
  clip.keypoint_names = {"left_palm", "right_palm", "head"};

  const int len = 40 + static_cast<int>(rng.bits() % 40);
  const Vec3 amp(rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5),
                 rng.uniform(0.05, 0.3));
  const Vec3 freq(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                  rng.uniform(0.5, 2.0));
  const Vec3 phase(rng.uniform(0.0, 6.28), rng.uniform(0.0, 6.28),
                   rng.uniform(0.0, 6.28));
  const double palmGap = rng.uniform(0.07, 0.13);
  const double yawRate = rng.symmetric(1.0);

  for (int t = 0; t < len; ++t) {
    const double time = t / clip.fps;
    const Vec3 centre(amp.x() * std::sin(freq.x() * time + phase.x()),
                      amp.y() * std::sin(freq.y() * time + phase.y()),
                      2.0 + amp.z() * std::sin(freq.z() * time + phase.z()));
    const Quat yaw = quatFromAxisAngle(Vec3::UnitZ(), yawRate * time);
    MotionFrame f;
    f.root = Pose{centre + Vec3(0, 0, -0.4), yaw};
    f.joints = Eigen::Vector4d(std::sin(time), std::cos(time), 0.2 * time, 0.0);
    f.keypoints["left_palm"] = Pose{centre + yaw * Vec3(0, -palmGap, 0), yaw};
    f.keypoints["right_palm"] = Pose{centre + yaw * Vec3(0, palmGap, 0), yaw};
    f.keypoints["head"] = Pose{centre + Vec3(0, 0, 0.5), Quat::Identity()};
    clip.frames.push_back(std::move(f));
  }

  const auto ulen = static_cast<std::size_t>(len);
  fx.phases.t_s = 5 + rng.bits() % (ulen / 3);
  fx.phases.t_e = fx.phases.t_s + 10 + rng.bits() % (ulen - fx.phases.t_s - 12);
  const std::size_t maxK =
      std::min({fx.phases.t_s, ulen - 1 - fx.phases.t_e,
                (fx.phases.t_e - fx.phases.t_s) / 2});
  fx.phases.blend_window_k = rng.bits() % (1 + maxK);
  fx.phases.anchor.kind = AnchorKind::MidpointOfTwoKeypoints;
  fx.phases.anchor.keypoint_names = {"left_palm", "right_palm"};

  switch (rng.bits() % 3) {
    case 0:
      fx.spec.geometry = SphereGeometry{rng.uniform(0.08, 0.15)};
      break;
    case 1:
      fx.spec.geometry = BoxGeometry{rng.uniform(0.1, 0.25),
                                     rng.uniform(0.1, 0.25),
                                     rng.uniform(0.1, 0.25)};
      break;
    default:
      fx.spec.geometry =
          CylinderGeometry{rng.uniform(0.05, 0.1), rng.uniform(0.1, 0.3)};
      break;
  }
  fx.spec.mass = rng.uniform(0.2, 2.0);
  fx.spec.sim.dt = 0.01;
  fx.spec.sim.ground_height = -100.0;  // keep synthetic flights bounce-free

  fx.settings.phi.translation =
      Vec3(rng.symmetric(0.05), rng.symmetric(0.05), rng.symmetric(0.05));
  fx.settings.phi.rotation =
      quatFromAxisAngle(rng.unitVector(), rng.symmetric(0.5));
  return fx;
}

}  // namespace hoi::testing
