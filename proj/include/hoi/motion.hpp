// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"

namespace hoi {

/// One sample of humanoid state: root pose, joint angles and the precomputed
/// world poses of named key bodies (palms, feet, ...).
struct MotionFrame {
  Pose root;
  Eigen::VectorXd joints;                 // rad, one entry per robot dof
  std::map<std::string, Pose> keypoints;  // world poses, name -> pose
  std::optional<Eigen::VectorXd> joint_velocities;  // rad/s
};

struct MotionClip {
  double fps = 30.0;
  std::vector<std::string> joint_names;
  std::vector<std::string> keypoint_names;
  std::vector<MotionFrame> frames;

  std::size_t length() const { return frames.size(); }
  double dt() const { return 1.0 / fps; }

  void validate() const {
    if (fps <= 0.0) throw ValidationError("MotionClip: fps must be > 0");
    if (frames.size() < 2)
      throw ValidationError("MotionClip: needs at least 2 frames, got " +
                            std::to_string(frames.size()));
    const auto dofCount = static_cast<Eigen::Index>(joint_names.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& f = frames[i];
      const std::string at = "MotionClip frame " + std::to_string(i);
      f.root.validate(at + " root");
      if (f.joints.size() != dofCount)
        throw ValidationError(at + ": dof count " +
                              std::to_string(f.joints.size()) +
                              " != " + std::to_string(dofCount));
      if (f.joint_velocities && f.joint_velocities->size() != dofCount)
        throw ValidationError(at + ": dof velocity count mismatch");
      if (f.keypoints.size() != keypoint_names.size())
        throw ValidationError(at + ": keypoint set size mismatch");
      for (const auto& name : keypoint_names) {
        auto it = f.keypoints.find(name);
        if (it == f.keypoints.end())
          throw ValidationError(at + ": missing keypoint '" + name + "'");
        it->second.validate(at + " keypoint '" + name + "'");
      }
    }
  }

  const Pose& keypoint(std::size_t frame, const std::string& name) const {
    const auto& kps = frames.at(frame).keypoints;
    auto it = kps.find(name);
    if (it == kps.end())
      throw ValidationError("missing keypoint '" + name + "' at frame " +
                            std::to_string(frame));
    return it->second;
  }
};

enum class AnchorKind { MidpointOfTwoKeypoints, SingleKeypoint };

enum class AnchorOrientationRule { KeypointA, Averaged, ConstructedFrame };

/// Body-derived reference frame whose rigid relation to the object defines a
/// contact phase (e.g. the midpoint of the two palms).
struct AnchorSpec {
  AnchorKind kind = AnchorKind::MidpointOfTwoKeypoints;
  std::vector<std::string> keypoint_names;
  AnchorOrientationRule orientation_rule = AnchorOrientationRule::KeypointA;

  void validate() const {
    const std::size_t want =
        kind == AnchorKind::MidpointOfTwoKeypoints ? 2u : 1u;
    if (keypoint_names.size() != want)
      throw ValidationError("AnchorSpec: expected " + std::to_string(want) +
                            " keypoint names, got " +
                            std::to_string(keypoint_names.size()));
  }
};

struct PoseSeries {
  double fps = 30.0;
  std::vector<Pose> poses;
  std::vector<Vec3> lin_vel;  // m/s; empty until differentiated
  std::vector<Vec3> ang_vel;  // rad/s, world frame

  std::size_t size() const { return poses.size(); }
  double dt() const { return 1.0 / fps; }
  bool hasVelocities() const {
    return lin_vel.size() == poses.size() && ang_vel.size() == poses.size();
  }
};

namespace detail {

/// Right-handed frame with x along (b-a), z as close to world up as possible.
inline Quat constructedFrame(const Vec3& a, const Vec3& b, const Quat& fallback) {
  Vec3 ex = b - a;
  const double len = ex.norm();
  if (len < 1e-12) return fallback;
  ex /= len;
  Vec3 up(0.0, 0.0, 1.0);
  Vec3 ez = up - up.dot(ex) * ex;
  if (ez.norm() < 1e-9) {
    // degenerate: keypoint axis is vertical; project world x instead
    const Vec3 wx(1.0, 0.0, 0.0);
    ez = wx - wx.dot(ex) * ex;
  }
  ez.normalize();
  const Vec3 ey = ez.cross(ex);
  Eigen::Matrix3d rot;
  rot.col(0) = ex;
  rot.col(1) = ey;
  rot.col(2) = ez;
  return normalized(Quat(rot));
}

}  // namespace detail

/// Per-frame anchor pose derived from keypoint trajectories. For the midpoint
/// kind the position is the arithmetic mean of the two keypoints; the
/// orientation follows the spec'd rule.
inline PoseSeries deriveAnchorTrajectory(const MotionClip& clip,
                                         const AnchorSpec& spec) {
  spec.validate();
  PoseSeries out;
  out.fps = clip.fps;
  out.poses.reserve(clip.length());
  for (std::size_t i = 0; i < clip.length(); ++i) {
    if (spec.kind == AnchorKind::SingleKeypoint) {
      out.poses.push_back(clip.keypoint(i, spec.keypoint_names[0]));
      continue;
    }
    const Pose& a = clip.keypoint(i, spec.keypoint_names[0]);
    const Pose& b = clip.keypoint(i, spec.keypoint_names[1]);
    Pose anchor;
    anchor.p = 0.5 * (a.p + b.p);
    switch (spec.orientation_rule) {
      case AnchorOrientationRule::KeypointA:
        anchor.q = a.q;
        break;
      case AnchorOrientationRule::Averaged:
        anchor.q = slerp(a.q, b.q, 0.5);
        break;
      case AnchorOrientationRule::ConstructedFrame:
        anchor.q = detail::constructedFrame(a.p, b.p, a.q);
        break;
    }
    out.poses.push_back(anchor);
  }
  return out;
}

/// Central differences in the interior, one-sided at the ends. Angular
/// velocity comes from the world-frame relative-quaternion log over dt.
inline PoseSeries finiteDifferenceVelocities(const PoseSeries& series) {
  if (series.size() < 2)
    throw ValidationError(
        "finiteDifferenceVelocities: need at least 2 poses, got " +
        std::to_string(series.size()));
  PoseSeries out = series;
  const std::size_t n = series.size();
  const double dt = series.dt();
  out.lin_vel.assign(n, Vec3::Zero());
  out.ang_vel.assign(n, Vec3::Zero());

  auto angVel = [](const Quat& from, const Quat& to, double span) {
    return quatLog(normalized(to * from.conjugate())) / span;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == n) ? n - 1 : i + 1;
    const double span = static_cast<double>(hi - lo) * dt;
    out.lin_vel[i] = (series.poses[hi].p - series.poses[lo].p) / span;
    out.ang_vel[i] = angVel(series.poses[lo].q, series.poses[hi].q, span);
  }
  return out;
}

}  // namespace hoi
