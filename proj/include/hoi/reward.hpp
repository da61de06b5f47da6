// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"
#include "hoi/motion.hpp"
#include "hoi/synthesis.hpp"

namespace hoi {

/// gamma * exp(-lambda * error); the universal imitation kernel. Values lie
/// in (0, gamma] for error >= 0.
inline double expKernel(double error, double gamma, double lambda) {
  if (error < 0.0)
    throw ValidationError("expKernel: error must be >= 0, got " +
                          std::to_string(error));
  if (gamma < 0.0 || lambda < 0.0)
    throw ValidationError("expKernel: gamma and lambda must be >= 0");
  return gamma * std::exp(-lambda * error);
}

struct TermWeight {
  double gamma = 1.0;
  double lambda = 1.0;
};

/// Per-term kernel weights plus contact-edge sensitivities and
/// regularization coefficients. The shipped defaults are toolkit defaults,
/// not tuned values; adjust per task.
struct RewardWeights {
  TermWeight body_pos{1.0, 5.0};
  TermWeight body_rot{1.0, 2.0};
  TermWeight dof_pos{1.0, 2.0};
  TermWeight body_vel{1.0, 0.5};
  TermWeight body_ang_vel{1.0, 0.1};
  TermWeight dof_vel{1.0, 0.1};
  TermWeight obj_pos{1.0, 5.0};
  TermWeight obj_rot{1.0, 2.0};
  bool obj_rot_enabled = true;
  TermWeight rel_pos{1.0, 5.0};
  TermWeight rel_rot{1.0, 2.0};
  bool rel_rot_enabled = false;
  Eigen::VectorXd contact_lambda;  // one entry per contact edge; empty = all 1
  std::vector<std::string> relative_keypoints;  // empty = all keypoints

  struct RegCoeffs {
    double torque = 0.0;
    double action_rate = 0.0;
    double dof_limit = 0.0;
    double torque_limit = 0.0;
    double waist = 0.0;
    double feet_orientation = 0.0;
    double feet_slippage = 0.0;
    double termination = 0.0;
  } reg;
};

struct JointLimits {
  Eigen::VectorXd dof_limit;     // symmetric |q| bound per joint; empty = off
  Eigen::VectorXd torque_limit;  // symmetric |tau| bound; empty = off
  std::vector<int> waist_indices;
};

struct FootState {
  Quat orientation = Quat::Identity();
  Vec3 lin_vel = Vec3::Zero();
  bool contact = false;
};

/// Everything one simulated policy step exposes to scoring. The same struct
/// carries reference frames (built from an InteractionClip).
struct RolloutFrame {
  Pose root;
  Vec3 base_ang_vel = Vec3::Zero();  // body frame
  std::map<std::string, Pose> keypoints;
  std::map<std::string, Vec3> keypoint_lin_vel;
  std::map<std::string, Vec3> keypoint_ang_vel;
  Eigen::VectorXd dof_pos;
  Eigen::VectorXd dof_vel;
  Eigen::VectorXd torque;
  Eigen::VectorXd action;
  Eigen::VectorXd prev_action;
  Pose object_pose;
  Vec3 object_lin_vel = Vec3::Zero();
  Vec3 object_ang_vel = Vec3::Zero();
  std::vector<int> contact_graph;
  std::optional<double> amp;  // externally supplied channel
  std::vector<FootState> feet;
  std::optional<Pose> target_object;
  std::optional<Eigen::VectorXd> skill_label;
  bool terminated = false;
};

/// Ordered term -> value map; insertion order fixes the CSV column order.
using TermMap = std::vector<std::pair<std::string, double>>;

inline double termSum(const TermMap& terms) {
  double s = 0.0;
  for (const auto& [name, v] : terms) s += v;
  return s;
}

namespace detail {

inline void requireSameKeypoints(const RolloutFrame& frame,
                                 const RolloutFrame& ref,
                                 const std::string& who) {
  if (frame.keypoints.size() != ref.keypoints.size())
    throw ValidationError(who + ": keypoint count mismatch");
  for (const auto& [name, pose] : ref.keypoints)
    if (frame.keypoints.find(name) == frame.keypoints.end())
      throw ValidationError(who + ": missing keypoint '" + name + "'");
}

inline double meanKeypointPosError(const RolloutFrame& frame,
                                   const RolloutFrame& ref) {
  double sum = 0.0;
  for (const auto& [name, pose] : ref.keypoints)
    sum += (frame.keypoints.at(name).p - pose.p).norm();
  return sum / static_cast<double>(ref.keypoints.size());
}

inline double meanKeypointRotError(const RolloutFrame& frame,
                                   const RolloutFrame& ref) {
  double sum = 0.0;
  for (const auto& [name, pose] : ref.keypoints)
    sum += geodesicAngle(frame.keypoints.at(name).q, pose.q);
  return sum / static_cast<double>(ref.keypoints.size());
}

inline double meanMapVecError(const std::map<std::string, Vec3>& a,
                              const std::map<std::string, Vec3>& b,
                              const std::string& who) {
  if (a.size() != b.size()) throw ValidationError(who + ": size mismatch");
  double sum = 0.0;
  for (const auto& [name, v] : b) {
    auto it = a.find(name);
    if (it == a.end())
      throw ValidationError(who + ": missing entry '" + name + "'");
    sum += (it->second - v).norm();
  }
  return b.empty() ? 0.0 : sum / static_cast<double>(b.size());
}

inline double meanAbsError(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           const std::string& who) {
  if (a.size() != b.size()) throw ValidationError(who + ": size mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().mean();
}

}  // namespace detail

/// Body tracking terms: keypoint position/rotation, dof position, the three
/// velocity analogues, and the externally supplied naturalness channel (0
/// when absent). Errors are means over keypoints/dofs so the lambdas do not
/// depend on population size.
inline TermMap bodyReward(const RolloutFrame& frame, const RolloutFrame& ref,
                          const RewardWeights& w) {
  detail::requireSameKeypoints(frame, ref, "bodyReward");
  TermMap out;
  out.emplace_back("body_pos",
                   expKernel(detail::meanKeypointPosError(frame, ref),
                             w.body_pos.gamma, w.body_pos.lambda));
  out.emplace_back("body_rot",
                   expKernel(detail::meanKeypointRotError(frame, ref),
                             w.body_rot.gamma, w.body_rot.lambda));
  out.emplace_back(
      "dof_pos",
      expKernel(detail::meanAbsError(frame.dof_pos, ref.dof_pos, "dof_pos"),
                w.dof_pos.gamma, w.dof_pos.lambda));
  out.emplace_back(
      "body_vel",
      expKernel(detail::meanMapVecError(frame.keypoint_lin_vel,
                                        ref.keypoint_lin_vel, "body_vel"),
                w.body_vel.gamma, w.body_vel.lambda));
  out.emplace_back(
      "body_ang_vel",
      expKernel(detail::meanMapVecError(frame.keypoint_ang_vel,
                                        ref.keypoint_ang_vel, "body_ang_vel"),
                w.body_ang_vel.gamma, w.body_ang_vel.lambda));
  out.emplace_back(
      "dof_vel",
      expKernel(detail::meanAbsError(frame.dof_vel, ref.dof_vel, "dof_vel"),
                w.dof_vel.gamma, w.dof_vel.lambda));
  out.emplace_back("amp", frame.amp.value_or(0.0));
  return out;
}

/// Object tracking: position kernel plus optional rotation kernel.
inline TermMap objectReward(const RolloutFrame& frame, const RolloutFrame& ref,
                            const RewardWeights& w) {
  TermMap out;
  out.emplace_back(
      "obj_pos",
      expKernel((frame.object_pose.p - ref.object_pose.p).norm(),
                w.obj_pos.gamma, w.obj_pos.lambda));
  if (w.obj_rot_enabled)
    out.emplace_back(
        "obj_rot",
        expKernel(geodesicAngle(frame.object_pose.q, ref.object_pose.q),
                  w.obj_rot.gamma, w.obj_rot.lambda));
  return out;
}

/// Body-object relative terms. The position error is the L2 norm of the
/// stacked differences of keypoint-to-object vectors, which makes the term
/// invariant under any rigid translation applied jointly to body and object.
/// The rotation error sums geodesic distances of object-relative-to-keypoint
/// rotations.
inline TermMap relativeReward(const RolloutFrame& frame,
                              const RolloutFrame& ref,
                              const RewardWeights& w) {
  detail::requireSameKeypoints(frame, ref, "relativeReward");
  std::vector<std::string> names = w.relative_keypoints;
  if (names.empty())
    for (const auto& [name, pose] : ref.keypoints) names.push_back(name);

  double sq = 0.0;
  for (const auto& name : names) {
    auto fit = frame.keypoints.find(name);
    auto rit = ref.keypoints.find(name);
    if (fit == frame.keypoints.end() || rit == ref.keypoints.end())
      throw ValidationError("relativeReward: unknown keypoint '" + name + "'");
    const Vec3 u = fit->second.p - frame.object_pose.p;
    const Vec3 uRef = rit->second.p - ref.object_pose.p;
    sq += (u - uRef).squaredNorm();
  }
  TermMap out;
  out.emplace_back("rel_pos", expKernel(std::sqrt(sq), w.rel_pos.gamma,
                                        w.rel_pos.lambda));
  if (w.rel_rot_enabled) {
    double rotErr = 0.0;
    for (const auto& name : names) {
      const Quat rel =
          frame.object_pose.q * frame.keypoints.at(name).q.conjugate();
      const Quat relRef =
          ref.object_pose.q * ref.keypoints.at(name).q.conjugate();
      rotErr += geodesicAngle(rel, relRef);
    }
    out.emplace_back("rel_rot",
                     expKernel(rotErr, w.rel_rot.gamma, w.rel_rot.lambda));
  }
  return out;
}

/// exp(-sum_j lambda_j |s_j - ref_j|) over the binary contact graph.
inline double contactReward(const std::vector<int>& graph,
                            const std::vector<int>& refGraph,
                            const Eigen::VectorXd& lambda) {
  if (graph.size() != refGraph.size())
    throw ValidationError("contactReward: length mismatch");
  if (lambda.size() != 0 &&
      static_cast<std::size_t>(lambda.size()) != graph.size())
    throw ValidationError("contactReward: lambda length mismatch");
  double err = 0.0;
  for (std::size_t j = 0; j < graph.size(); ++j) {
    if ((graph[j] != 0 && graph[j] != 1) ||
        (refGraph[j] != 0 && refGraph[j] != 1))
      throw ValidationError("contactReward: entries must be 0 or 1");
    const double lj = lambda.size() == 0 ? 1.0 : lambda(j);
    err += lj * std::abs(graph[j] - refGraph[j]);
  }
  return std::exp(-err);
}

/// Signed penalty terms (each <= 0). Feet terms evaluate only when the frame
/// carries foot states.
inline TermMap regularizationPenalties(const RolloutFrame& frame,
                                       const JointLimits& limits,
                                       const RewardWeights::RegCoeffs& c) {
  TermMap out;
  out.emplace_back("reg_torque", -c.torque * frame.torque.squaredNorm());
  const double actionRate =
      (frame.action.size() == frame.prev_action.size() &&
       frame.action.size() > 0)
          ? (frame.action - frame.prev_action).squaredNorm()
          : 0.0;
  out.emplace_back("reg_action_rate", -c.action_rate * actionRate);

  double dofLimit = 0.0;
  if (limits.dof_limit.size() > 0) {
    if (limits.dof_limit.size() != frame.dof_pos.size())
      throw ValidationError("regularizationPenalties: dof limit size");
    for (Eigen::Index i = 0; i < frame.dof_pos.size(); ++i) {
      const double over = std::abs(frame.dof_pos(i)) - limits.dof_limit(i);
      if (over > 0.0) dofLimit += over * over;
    }
  }
  out.emplace_back("reg_dof_limit", -c.dof_limit * dofLimit);

  double torqueLimit = 0.0;
  if (limits.torque_limit.size() > 0) {
    if (limits.torque_limit.size() != frame.torque.size())
      throw ValidationError("regularizationPenalties: torque limit size");
    for (Eigen::Index i = 0; i < frame.torque.size(); ++i) {
      const double over = std::abs(frame.torque(i)) - limits.torque_limit(i);
      if (over > 0.0) torqueLimit += over * over;
    }
  }
  out.emplace_back("reg_torque_limit", -c.torque_limit * torqueLimit);

  double waist = 0.0;
  for (int idx : limits.waist_indices) {
    if (idx < 0 || idx >= frame.dof_pos.size())
      throw ValidationError("regularizationPenalties: waist index range");
    waist += frame.dof_pos(idx) * frame.dof_pos(idx);
  }
  out.emplace_back("reg_waist", -c.waist * waist);

  double feetOrient = 0.0;
  double feetSlip = 0.0;
  for (const auto& foot : frame.feet) {
    const Vec3 up = foot.orientation * Vec3::UnitZ();
    const double tilt = std::acos(std::clamp(up.z(), -1.0, 1.0));
    feetOrient += tilt * tilt;
    if (foot.contact) feetSlip += foot.lin_vel.squaredNorm();
  }
  out.emplace_back("reg_feet_orientation", -c.feet_orientation * feetOrient);
  out.emplace_back("reg_feet_slippage", -c.feet_slippage * feetSlip);
  out.emplace_back("reg_termination",
                   frame.terminated ? -c.termination : 0.0);
  return out;
}

struct RewardRow {
  TermMap terms;
  double total = 0.0;
};

/// Full per-frame breakdown; total is the exact sum of the listed terms.
inline RewardRow totalReward(const RolloutFrame& frame, const RolloutFrame& ref,
                             const RewardWeights& w, const JointLimits& limits) {
  RewardRow row;
  for (auto& t : bodyReward(frame, ref, w)) row.terms.push_back(std::move(t));
  for (auto& t : objectReward(frame, ref, w))
    row.terms.push_back(std::move(t));
  for (auto& t : relativeReward(frame, ref, w))
    row.terms.push_back(std::move(t));
  row.terms.emplace_back(
      "contact",
      contactReward(frame.contact_graph, ref.contact_graph, w.contact_lambda));
  for (auto& t : regularizationPenalties(frame, limits, w.reg))
    row.terms.push_back(std::move(t));
  row.total = termSum(row.terms);
  return row;
}

struct RewardReport {
  std::vector<std::string> columns;
  std::vector<RewardRow> rows;
  TermMap means;
  double mean_total = 0.0;
};

inline RewardReport buildRewardReport(const std::vector<RolloutFrame>& rollout,
                                      const std::vector<RolloutFrame>& ref,
                                      const RewardWeights& w,
                                      const JointLimits& limits) {
  if (rollout.size() != ref.size() || rollout.empty())
    throw ValidationError("buildRewardReport: rollout/reference mismatch");
  RewardReport report;
  for (std::size_t t = 0; t < rollout.size(); ++t)
    report.rows.push_back(totalReward(rollout[t], ref[t], w, limits));
  for (const auto& [name, v] : report.rows.front().terms)
    report.columns.push_back(name);
  for (const auto& name : report.columns) {
    double sum = 0.0;
    for (const auto& row : report.rows)
      for (const auto& [n, v] : row.terms)
        if (n == name) sum += v;
    report.means.emplace_back(name, sum / static_cast<double>(report.rows.size()));
  }
  for (const auto& row : report.rows) report.mean_total += row.total;
  report.mean_total /= static_cast<double>(report.rows.size());
  return report;
}

struct TrackingErrors {
  double object = 0.0;    // mean object position error over frames
  double keybody = 0.0;   // mean keypoint position error over frames
};

inline TrackingErrors trackingErrors(const std::vector<RolloutFrame>& rollout,
                                     const std::vector<RolloutFrame>& ref) {
  if (rollout.size() != ref.size() || rollout.empty())
    throw ValidationError("trackingErrors: rollout/reference mismatch");
  TrackingErrors out;
  for (std::size_t t = 0; t < rollout.size(); ++t) {
    detail::requireSameKeypoints(rollout[t], ref[t], "trackingErrors");
    out.object += (rollout[t].object_pose.p - ref[t].object_pose.p).norm();
    out.keybody += detail::meanKeypointPosError(rollout[t], ref[t]);
  }
  out.object /= static_cast<double>(rollout.size());
  out.keybody /= static_cast<double>(rollout.size());
  return out;
}

/// Landing within 20 cm of the target hoop centre.
inline bool catchShotSuccess(const Vec3& landing, const Vec3& hoopCentre) {
  return (landing - hoopCentre).norm() <= 0.20;
}

/// Lifted height within 10 cm of the target height.
inline bool cargoSuccess(double liftedHeight, double targetHeight) {
  return std::abs(liftedHeight - targetHeight) <= 0.10;
}

inline double successRate(const std::vector<bool>& outcomes) {
  if (outcomes.empty())
    throw ValidationError("successRate: no rollouts given");
  std::size_t hits = 0;
  for (bool b : outcomes) hits += b ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

/// Reference-side frame bundles for an interaction clip; keypoint and dof
/// velocities come from finite differences when the clip does not carry them.
inline std::vector<RolloutFrame> buildReferenceFrames(
    const InteractionClip& clip) {
  const MotionClip& m = clip.motion;
  std::map<std::string, PoseSeries> kpSeries;
  for (const auto& name : m.keypoint_names) {
    PoseSeries s;
    s.fps = m.fps;
    for (std::size_t t = 0; t < m.length(); ++t)
      s.poses.push_back(m.keypoint(t, name));
    kpSeries[name] = finiteDifferenceVelocities(s);
  }

  std::vector<RolloutFrame> out(m.length());
  const double dt = m.dt();
  for (std::size_t t = 0; t < m.length(); ++t) {
    RolloutFrame& f = out[t];
    f.root = m.frames[t].root;
    f.dof_pos = m.frames[t].joints;
    if (m.frames[t].joint_velocities) {
      f.dof_vel = *m.frames[t].joint_velocities;
    } else {
      const std::size_t lo = t == 0 ? 0 : t - 1;
      const std::size_t hi = t + 1 == m.length() ? m.length() - 1 : t + 1;
      f.dof_vel = (m.frames[hi].joints - m.frames[lo].joints) /
                  (static_cast<double>(hi - lo) * dt);
    }
    for (const auto& name : m.keypoint_names) {
      f.keypoints[name] = kpSeries[name].poses[t];
      f.keypoint_lin_vel[name] = kpSeries[name].lin_vel[t];
      f.keypoint_ang_vel[name] = kpSeries[name].ang_vel[t];
    }
    f.object_pose = clip.object.poses[t];
    f.object_lin_vel = clip.object.lin_vel[t];
    f.object_ang_vel = clip.object.ang_vel[t];
    f.contact_graph = clip.contact_graph.frames[t];
    const Eigen::Index n = m.frames[t].joints.size();
    f.torque = Eigen::VectorXd::Zero(n);
    f.action = Eigen::VectorXd::Zero(n);
    f.prev_action = Eigen::VectorXd::Zero(n);
  }
  return out;
}

}  // namespace hoi
