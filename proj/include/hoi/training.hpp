// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"
#include "hoi/reward.hpp"
#include "hoi/rng.hpp"

namespace hoi {

struct GaussianPolicyOutput {
  Eigen::VectorXd mean;
  Eigen::VectorXd diag_std;

  void validate() const {
    if (diag_std.size() != mean.size())
      throw ValidationError("GaussianPolicyOutput: std/mean size mismatch");
    if (diag_std.size() && diag_std.minCoeff() <= 0.0)
      throw ValidationError("GaussianPolicyOutput: std must be > 0");
  }
};

/// Distillation loss between student and teacher policies: squared L2 norm
/// of the mean difference. The (state-independent) covariances do not enter.
inline double bcLoss(const GaussianPolicyOutput& student,
                     const GaussianPolicyOutput& teacher) {
  student.validate();
  teacher.validate();
  if (student.mean.size() != teacher.mean.size())
    throw ValidationError("bcLoss: action dimension mismatch");
  return (student.mean - teacher.mean).squaredNorm();
}

struct DisturbConfig {
  double root_rot_range = 0.0;   // rad, about the vertical axis
  double root_pos_range = 0.0;   // m, per axis
  double joint_range = 0.0;      // rad, per joint
  double object_pos_range = 0.0; // m, per axis
  double object_rot_range = 0.0; // rad, about a random axis

  void validate() const {
    if (root_rot_range < 0.0 || root_pos_range < 0.0 || joint_range < 0.0 ||
        object_pos_range < 0.0 || object_rot_range < 0.0)
      throw ValidationError("DisturbConfig: ranges must be >= 0");
  }
};

struct EpisodeInit {
  Pose root;
  Eigen::VectorXd joints;
  Pose object;
};

/// Uniform start-state perturbation. The root rotation is perturbed about
/// the vertical axis only, so disturbed starts never begin mid-fall.
inline EpisodeInit sampleDisturbedInit(const EpisodeInit& nominal,
                                       const DisturbConfig& cfg,
                                       std::uint64_t seed) {
  cfg.validate();
  nominal.root.validate("sampleDisturbedInit root");
  nominal.object.validate("sampleDisturbedInit object");
  Rng rng(seed);
  EpisodeInit out = nominal;

  const double yaw = rng.symmetric(cfg.root_rot_range);
  out.root.q = normalized(quatExp(Vec3(0.0, 0.0, yaw)) * nominal.root.q);
  for (int a = 0; a < 3; ++a)
    out.root.p[a] += rng.symmetric(cfg.root_pos_range);
  for (Eigen::Index i = 0; i < out.joints.size(); ++i)
    out.joints(i) += rng.symmetric(cfg.joint_range);
  for (int a = 0; a < 3; ++a)
    out.object.p[a] += rng.symmetric(cfg.object_pos_range);
  const Vec3 axis = rng.unitVector();
  const double angle = rng.symmetric(cfg.object_rot_range);
  out.object.q = normalized(quatExp(axis * angle) * nominal.object.q);
  return out;
}

/// Probabilistic interaction cutoff: fires only when the reference frame is
/// in contact, the tracked relative error exceeds the threshold, and the
/// caller's uniform draw falls below p_terminate.
inline bool interactionTerminationCheck(double relError, double threshold,
                                        double pTerminate, bool inContactRef,
                                        double draw) {
  if (pTerminate < 0.0 || pTerminate > 1.0)
    throw ValidationError(
        "interactionTerminationCheck: p_terminate must lie in [0,1]");
  if (relError < 0.0 || threshold < 0.0)
    throw ValidationError(
        "interactionTerminationCheck: errors must be >= 0");
  return inContactRef && relError > threshold && draw < pTerminate;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  void validate(const std::string& what) const {
    if (lo > hi) throw ValidationError(what + ": range not ordered");
  }
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

struct DRConfig {
  Range object_size_scale{1.0, 1.0};
  Range object_mass{1.0, 1.0};          // kg
  Range restitution{0.6, 0.6};
  Range robot_friction{1.0, 1.0};
  Range com_offset{0.0, 0.0};           // m, per axis
  Range perception_noise_std{0.0, 0.0}; // m
  double force_magnitude = 0.0;         // N, upper bound
  double force_duration = 0.0;          // s
  double force_interval = 0.0;          // s between event starts
  double episode_length = 0.0;          // s

  void validate() const {
    object_size_scale.validate("object_size_scale");
    object_mass.validate("object_mass");
    restitution.validate("restitution");
    robot_friction.validate("robot_friction");
    com_offset.validate("com_offset");
    perception_noise_std.validate("perception_noise_std");
    if (object_size_scale.lo <= 0.0 || object_mass.lo <= 0.0)
      throw ValidationError("DRConfig: scale and mass must stay > 0");
    if (restitution.lo < 0.0 || restitution.hi > 1.0)
      throw ValidationError("DRConfig: restitution must stay in [0,1]");
    if (force_magnitude < 0.0 || force_duration < 0.0 ||
        force_interval < 0.0 || episode_length < 0.0)
      throw ValidationError("DRConfig: force schedule must be >= 0");
  }
};

struct ForceEvent {
  double start = 0.0;     // s
  double duration = 0.0;  // s
  Vec3 force = Vec3::Zero();
};

struct DomainRandomization {
  double object_size_scale = 1.0;
  double object_mass = 1.0;
  double restitution = 0.6;
  double robot_friction = 1.0;
  Vec3 com_offset = Vec3::Zero();
  double perception_noise_std = 0.0;
  std::vector<ForceEvent> force_schedule;
};

/// One draw of every physical parameter plus the sustained external-force
/// schedule: events every `force_interval` seconds, each with a uniformly
/// random direction and magnitude U[0, force_magnitude].
inline DomainRandomization sampleDomainRandomization(const DRConfig& cfg,
                                                     std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  DomainRandomization out;
  out.object_size_scale = cfg.object_size_scale.sample(rng);
  out.object_mass = cfg.object_mass.sample(rng);
  out.restitution = cfg.restitution.sample(rng);
  out.robot_friction = cfg.robot_friction.sample(rng);
  for (int a = 0; a < 3; ++a) out.com_offset[a] = cfg.com_offset.sample(rng);
  out.perception_noise_std = cfg.perception_noise_std.sample(rng);

  if (cfg.force_interval > 0.0 && cfg.force_magnitude > 0.0) {
    for (double start = cfg.force_interval;
         start + cfg.force_duration <= cfg.episode_length;
         start += cfg.force_interval) {
      ForceEvent ev;
      ev.start = start;
      ev.duration = cfg.force_duration;
      ev.force = rng.unitVector() * rng.uniform(0.0, cfg.force_magnitude);
      out.force_schedule.push_back(ev);
    }
  }
  return out;
}

enum class PolicyRole { Teacher, Student };

/// Observation-term toggles. The layout order is fixed; see
/// buildObservation.
struct ObservationConfig {
  PolicyRole role = PolicyRole::Teacher;
  bool base_ang_vel = true;
  bool gravity = true;
  bool dof_pos = true;
  bool dof_vel = true;
  bool action = true;
  bool pd_error = true;
  bool ref_body_pos = false;    // privileged
  bool delta_body_pos = false;  // privileged
  bool object_pos = false;
  bool object_rot = false;
  bool target_object_pos = false;
  bool target_object_rot = false;
  int skill_label_dim = 0;  // 0 = no skill label slice
  int history_depth = 0;    // past frames of the proprioceptive terms

  void validate() const {
    if (role == PolicyRole::Student && (ref_body_pos || delta_body_pos))
      throw ValidationError(
          "ObservationConfig: privileged terms (ref/delta body pos) are "
          "teacher-only");
    if (skill_label_dim < 0 || history_depth < 0)
      throw ValidationError("ObservationConfig: sizes must be >= 0");
  }
};

struct LayoutSlice {
  std::string name;
  int offset = 0;
  int size = 0;
};

struct Observation {
  Eigen::VectorXd values;
  std::vector<LayoutSlice> layout;
};

namespace detail {

inline void pushSlice(Observation& obs, std::vector<double>& buf,
                      const std::string& name, std::size_t before) {
  LayoutSlice s;
  s.name = name;
  s.offset = static_cast<int>(before);
  s.size = static_cast<int>(buf.size() - before);
  obs.layout.push_back(s);
}

inline void appendVec3(std::vector<double>& buf, const Vec3& v) {
  buf.push_back(v.x());
  buf.push_back(v.y());
  buf.push_back(v.z());
}

inline void appendQuat(std::vector<double>& buf, const Quat& q) {
  buf.push_back(q.w());
  buf.push_back(q.x());
  buf.push_back(q.y());
  buf.push_back(q.z());
}

inline void appendVecXd(std::vector<double>& buf, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) buf.push_back(v(i));
}

}  // namespace detail

/// Flat observation vector in a fixed documented order with a layout
/// descriptor naming every slice. Current terms first (base ang vel,
/// projected gravity, dof pos, dof vel, action, pd error, then the enabled
/// privileged/object/target/skill slices), followed by the history terms,
/// most recent lag first. Object and target poses are expressed in the root
/// frame; keypoints iterate in name order.
inline Observation buildObservation(const RolloutFrame& frame,
                                    const RolloutFrame* ref,
                                    const std::vector<RolloutFrame>& history,
                                    const ObservationConfig& cfg) {
  cfg.validate();
  if ((cfg.ref_body_pos || cfg.delta_body_pos) && ref == nullptr)
    throw ValidationError(
        "buildObservation: privileged terms require a reference frame");
  if (cfg.history_depth > static_cast<int>(history.size()))
    throw ValidationError("buildObservation: history depth " +
                          std::to_string(cfg.history_depth) +
                          " exceeds buffer size " +
                          std::to_string(history.size()));

  Observation obs;
  std::vector<double> buf;
  const Quat rootInv = frame.root.q.conjugate();

  auto appendCurrent = [&](const RolloutFrame& f, const std::string& prefix) {
    const Quat inv = f.root.q.conjugate();
    if (cfg.base_ang_vel) {
      const std::size_t before = buf.size();
      detail::appendVec3(buf, f.base_ang_vel);
      detail::pushSlice(obs, buf, prefix + "base_ang_vel", before);
    }
    if (cfg.gravity) {
      const std::size_t before = buf.size();
      detail::appendVec3(buf, inv * Vec3(0.0, 0.0, -1.0));
      detail::pushSlice(obs, buf, prefix + "gravity", before);
    }
    if (cfg.dof_pos) {
      const std::size_t before = buf.size();
      detail::appendVecXd(buf, f.dof_pos);
      detail::pushSlice(obs, buf, prefix + "dof_pos", before);
    }
    if (cfg.dof_vel) {
      const std::size_t before = buf.size();
      detail::appendVecXd(buf, f.dof_vel);
      detail::pushSlice(obs, buf, prefix + "dof_vel", before);
    }
    if (cfg.action) {
      const std::size_t before = buf.size();
      detail::appendVecXd(buf, f.action);
      detail::pushSlice(obs, buf, prefix + "action", before);
    }
  };

  appendCurrent(frame, "");
  if (cfg.pd_error) {
    // the action is the PD position target
    if (frame.action.size() != frame.dof_pos.size())
      throw ValidationError(
          "buildObservation: pd_error needs action and dof_pos of equal "
          "size");
    const std::size_t before = buf.size();
    detail::appendVecXd(buf, frame.action - frame.dof_pos);
    detail::pushSlice(obs, buf, "pd_error", before);
  }
  if (cfg.ref_body_pos) {
    const std::size_t before = buf.size();
    for (const auto& [name, pose] : ref->keypoints)
      detail::appendVec3(buf, rootInv * (pose.p - frame.root.p));
    detail::pushSlice(obs, buf, "ref_body_pos", before);
  }
  if (cfg.delta_body_pos) {
    const std::size_t before = buf.size();
    for (const auto& [name, pose] : ref->keypoints) {
      auto it = frame.keypoints.find(name);
      if (it == frame.keypoints.end())
        throw ValidationError("buildObservation: missing keypoint '" + name +
                              "'");
      detail::appendVec3(buf, rootInv * (pose.p - it->second.p));
    }
    detail::pushSlice(obs, buf, "delta_body_pos", before);
  }
  if (cfg.object_pos) {
    const std::size_t before = buf.size();
    detail::appendVec3(buf, rootInv * (frame.object_pose.p - frame.root.p));
    detail::pushSlice(obs, buf, "object_pos", before);
  }
  if (cfg.object_rot) {
    const std::size_t before = buf.size();
    detail::appendQuat(buf, normalized(rootInv * frame.object_pose.q));
    detail::pushSlice(obs, buf, "object_rot", before);
  }
  if (cfg.target_object_pos || cfg.target_object_rot) {
    if (!frame.target_object)
      throw ValidationError(
          "buildObservation: target terms require a target object pose");
    if (cfg.target_object_pos) {
      const std::size_t before = buf.size();
      detail::appendVec3(buf,
                         rootInv * (frame.target_object->p - frame.root.p));
      detail::pushSlice(obs, buf, "target_object_pos", before);
    }
    if (cfg.target_object_rot) {
      const std::size_t before = buf.size();
      detail::appendQuat(buf, normalized(rootInv * frame.target_object->q));
      detail::pushSlice(obs, buf, "target_object_rot", before);
    }
  }
  if (cfg.skill_label_dim > 0) {
    if (!frame.skill_label ||
        frame.skill_label->size() != cfg.skill_label_dim)
      throw ValidationError(
          "buildObservation: skill label missing or of wrong size");
    const std::size_t before = buf.size();
    detail::appendVecXd(buf, *frame.skill_label);
    detail::pushSlice(obs, buf, "skill_label", before);
  }

  for (int lag = 1; lag <= cfg.history_depth; ++lag)
    appendCurrent(history[lag - 1], "hist" + std::to_string(lag) + "_");

  obs.values = Eigen::Map<Eigen::VectorXd>(buf.data(),
                                           static_cast<Eigen::Index>(buf.size()));
  return obs;
}

}  // namespace hoi
