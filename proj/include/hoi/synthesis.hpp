// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hoi/ballistic.hpp"
#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"
#include "hoi/grasp.hpp"
#include "hoi/motion.hpp"
#include "hoi/object.hpp"

namespace hoi {

/// Fixed anchor-to-object rigid transform, held invariant during a contact
/// phase.
struct RelativeTransform {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();

  Pose asPose() const { return Pose{translation, rotation}; }

  void validate() const {
    requireUnit(rotation, "RelativeTransform");
    if (!translation.allFinite())
      throw ValidationError("RelativeTransform: non-finite translation");
  }
};

/// Frame ranges of one interaction: pre-contact [0, t_s), contact
/// [t_s, t_e], post-contact (t_e, len).
struct PhaseAnnotation {
  std::size_t t_s = 0;
  std::size_t t_e = 0;
  AnchorSpec anchor;
  std::size_t blend_window_k = 0;

  void validate(std::size_t clipLen) const {
    anchor.validate();
    if (t_s > t_e)
      throw ValidationError("PhaseAnnotation: t_s (" + std::to_string(t_s) +
                            ") > t_e (" + std::to_string(t_e) + ")");
    if (t_e >= clipLen)
      throw ValidationError("PhaseAnnotation: t_e (" + std::to_string(t_e) +
                            ") out of range for clip length " +
                            std::to_string(clipLen));
    const std::size_t maxK = std::min(t_s, clipLen - 1 - t_e);
    if (blend_window_k > maxK)
      throw ValidationError(
          "PhaseAnnotation: blend_window_k (" +
          std::to_string(blend_window_k) +
          ") exceeds the available margin before/after the contact phase (" +
          std::to_string(maxK) + ")");
    // overlapping windows would make the two blends order-dependent
    if (blend_window_k > 0 && 2 * blend_window_k > t_e - t_s)
      throw ValidationError(
          "PhaseAnnotation: blend windows around t_s and t_e overlap "
          "(2k > t_e - t_s)");
  }
};

struct IndexRange {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

struct PhaseRanges {
  IndexRange pre;
  IndexRange contact;
  IndexRange post;
};

inline PhaseRanges segmentPhases(const PhaseAnnotation& annotation,
                                 std::size_t clipLen) {
  annotation.validate(clipLen);
  PhaseRanges out;
  out.pre = {0, annotation.t_s};
  out.contact = {annotation.t_s, annotation.t_e + 1};
  out.post = {annotation.t_e + 1, clipLen};
  return out;
}

/// phi such that object = anchor o phi, exactly.
inline RelativeTransform estimateRelativePose(const Pose& anchorAtTs,
                                              const Pose& objectAtTs) {
  anchorAtTs.validate("estimateRelativePose anchor");
  objectAtTs.validate("estimateRelativePose object");
  const Pose rel = anchorAtTs.inverse().compose(objectAtTs);
  return RelativeTransform{rel.p, rel.q};
}

/// Object poses over `range`, rigidly attached to the anchor by phi;
/// velocities by finite differences over the propagated segment.
inline PoseSeries propagateContactTrajectory(const PoseSeries& anchor,
                                             const RelativeTransform& phi,
                                             const IndexRange& range) {
  phi.validate();
  if (range.end > anchor.size() || range.begin > range.end)
    throw ValidationError("propagateContactTrajectory: range out of bounds");
  PoseSeries out;
  out.fps = anchor.fps;
  out.poses.reserve(range.size());
  const Pose phiPose = phi.asPose();
  for (std::size_t i = range.begin; i < range.end; ++i)
    out.poses.push_back(anchor.poses[i].compose(phiPose));
  if (out.size() >= 2) out = finiteDifferenceVelocities(out);
  else if (out.size() == 1) {
    out.lin_vel.assign(1, Vec3::Zero());
    out.ang_vel.assign(1, Vec3::Zero());
  }
  return out;
}

namespace detail {

inline MotionFrame interpolateFrame(const MotionFrame& a, const MotionFrame& b,
                                    double u) {
  MotionFrame f;
  f.root = interpolate(a.root, b.root, u);
  f.joints = a.joints + u * (b.joints - a.joints);
  if (a.joint_velocities && b.joint_velocities)
    f.joint_velocities =
        *a.joint_velocities + u * (*b.joint_velocities - *a.joint_velocities);
  for (const auto& [name, pose] : a.keypoints)
    f.keypoints[name] = interpolate(pose, b.keypoints.at(name), u);
  return f;
}

inline void blendWindow(MotionClip& clip, std::size_t centre, std::size_t k) {
  if (k == 0) return;
  const std::size_t a = centre - k;
  const std::size_t b = centre + k;
  const MotionFrame fa = clip.frames[a];
  const MotionFrame fb = clip.frames[b];
  for (std::size_t t = a + 1; t < b; ++t) {
    const double u = static_cast<double>(t - a) / static_cast<double>(b - a);
    clip.frames[t] = interpolateFrame(fa, fb, u);
  }
}

}  // namespace detail

/// Linear interpolation of body poses (root, joints, keypoints) across the
/// +-k windows around both phase boundaries; frames outside the windows are
/// untouched. Idempotent: the window endpoints are never modified.
inline MotionClip blendTransitions(const MotionClip& motion,
                                   const PhaseAnnotation& phases) {
  phases.validate(motion.length());
  MotionClip out = motion;
  if (phases.blend_window_k == 0) return out;
  detail::blendWindow(out, phases.t_s, phases.blend_window_k);
  if (phases.t_e != phases.t_s)
    detail::blendWindow(out, phases.t_e, phases.blend_window_k);
  return out;
}

struct ContactGraphTrack {
  std::vector<std::string> key_bodies;
  std::vector<std::vector<int>> frames;  // entries in {0,1}

  void validate(std::size_t clipLen) const {
    if (frames.size() != clipLen)
      throw ValidationError("ContactGraphTrack: frame count mismatch");
    for (const auto& f : frames) {
      if (f.size() != key_bodies.size())
        throw ValidationError("ContactGraphTrack: entry count mismatch");
      for (int v : f)
        if (v != 0 && v != 1)
          throw ValidationError("ContactGraphTrack: entries must be 0 or 1");
    }
  }
};

/// Entry j of frame t is 1 iff key body j is within `threshold` of the
/// object surface (signed distance, so interior points always contact).
inline ContactGraphTrack annotateContactGraph(
    const MotionClip& motion, const PoseSeries& objectSeries,
    const ObjectSpec& spec, const std::vector<std::string>& keyBodies,
    double threshold) {
  spec.validate();
  if (objectSeries.size() != motion.length())
    throw ValidationError(
        "annotateContactGraph: object series length != clip length");
  if (keyBodies.empty())
    throw ValidationError("annotateContactGraph: no key bodies given");
  for (const auto& name : keyBodies)
    if (std::find(motion.keypoint_names.begin(), motion.keypoint_names.end(),
                  name) == motion.keypoint_names.end())
      throw ValidationError("annotateContactGraph: unknown key body '" + name +
                            "'");
  ContactGraphTrack track;
  track.key_bodies = keyBodies;
  track.frames.resize(motion.length());
  for (std::size_t t = 0; t < motion.length(); ++t) {
    track.frames[t].reserve(keyBodies.size());
    for (const auto& name : keyBodies) {
      const double sd = signedDistance(motion.keypoint(t, name).p,
                                       objectSeries.poses[t], spec.geometry);
      track.frames[t].push_back(sd <= threshold ? 1 : 0);
    }
  }
  return track;
}

struct TransformRecord {
  std::string type;
  std::vector<std::pair<std::string, double>> params;
  std::optional<std::uint64_t> seed;
};

/// Inputs the pipeline was run with; enough to replay it on the clip's own
/// motion (augmentations do exactly that).
struct SynthesisSettings {
  RelativeTransform phi;
  std::vector<std::string> contact_bodies;  // empty = the anchor's keypoints
  double contact_threshold = 0.02;          // m
  RefineParams refine;
  std::optional<Vec3> pre_lin_vel;   // overrides; default = boundary FD
  std::optional<Vec3> pre_ang_vel;
  std::optional<Vec3> post_lin_vel;
  std::optional<Vec3> post_ang_vel;
  double phi_tolerance = 1e-9;
  double velocity_continuity_tolerance = 0.05;  // m/s, warning only
};

struct SynthesisReport {
  int refine_iterations = 0;
  double refine_residual = 0.0;  // final max contact-point correction (m)
  double min_closure_margin = 0.0;
  bool all_contact_frames_closed = true;
  Vec3 pre_boundary_lin_vel = Vec3::Zero();
  Vec3 post_boundary_lin_vel = Vec3::Zero();
  double velocity_jump_at_ts = 0.0;  // m/s between pre sim and contact FD
  double velocity_jump_at_te = 0.0;
};

struct ProvenanceRecord {
  std::string parent;  // empty for clips synthesized straight from motion
  std::vector<TransformRecord> transforms;
  SynthesisSettings settings;
  SynthesisReport report;
  std::vector<std::string> warnings;
};

/// A complete humanoid-object interaction: motion, synchronized object
/// track, contact graph, phase annotation and lineage.
struct InteractionClip {
  MotionClip motion;
  PoseSeries object;
  ContactGraphTrack contact_graph;
  PhaseAnnotation phases;
  ObjectSpec object_spec;
  ProvenanceRecord provenance;

  std::size_t length() const { return motion.length(); }

  void validate() const {
    motion.validate();
    phases.validate(motion.length());
    object_spec.validate();
    if (object.size() != motion.length())
      throw ValidationError("InteractionClip: object track length mismatch");
    if (!object.hasVelocities())
      throw ValidationError("InteractionClip: object track lacks velocities");
    contact_graph.validate(motion.length());
    provenance.settings.phi.validate();

    // phi-invariance across the contact phase
    const PoseSeries anchor = deriveAnchorTrajectory(motion, phases.anchor);
    const double tol = provenance.settings.phi_tolerance;
    for (std::size_t t = phases.t_s; t <= phases.t_e; ++t) {
      const Pose rel = anchor.poses[t].inverse().compose(object.poses[t]);
      if ((rel.p - provenance.settings.phi.translation).norm() > tol ||
          geodesicAngle(rel.q, provenance.settings.phi.rotation) > tol)
        throw ValidationError(
            "InteractionClip: anchor-object transform deviates from phi at "
            "frame " +
            std::to_string(t));
    }
  }
};

namespace detail {

/// Substep count so that an integer number of simulator steps lands exactly
/// on each motion frame while respecting the dt stability bound.
inline std::size_t substepsPerFrame(double frameDt, double dtMax) {
  return static_cast<std::size_t>(std::ceil(frameDt / dtMax - 1e-12));
}

}  // namespace detail

/// Glue layer: checks the segments fit together and packs them into a
/// schema-valid clip. `contactObject` covers [t_s, t_e]; `pre` covers
/// [0, t_s] including the boundary frame; `post` covers [t_e, len) including
/// the boundary frame. Boundary duplicates must agree to 1e-6 m.
inline InteractionClip assembleInteractionClip(
    const MotionClip& motion, const PhaseAnnotation& phases,
    const ObjectSpec& spec, const PoseSeries& contactObject,
    const std::vector<BodyState>& pre, const std::vector<BodyState>& post,
    const std::vector<std::string>& keyBodies, double threshold,
    const SynthesisSettings& settings) {
  motion.validate();
  phases.validate(motion.length());
  const PhaseRanges ranges = segmentPhases(phases, motion.length());

  if (contactObject.size() != ranges.contact.size())
    throw ValidationError("assembleInteractionClip: contact segment length " +
                          std::to_string(contactObject.size()) + " != " +
                          std::to_string(ranges.contact.size()));
  if (!ranges.pre.empty() && pre.size() != ranges.pre.size() + 1)
    throw ValidationError(
        "assembleInteractionClip: pre segment must cover [0, t_s]");
  if (!ranges.post.empty() && post.size() != ranges.post.size() + 1)
    throw ValidationError(
        "assembleInteractionClip: post segment must cover [t_e, len)");

  constexpr double kBoundaryTol = 1e-6;
  if (!ranges.pre.empty() &&
      (pre.back().pose.p - contactObject.poses.front().p).norm() >
          kBoundaryTol)
    throw ValidationError(
        "assembleInteractionClip: pre segment does not end at the contact "
        "start pose");
  if (!ranges.post.empty() &&
      (post.front().pose.p - contactObject.poses.back().p).norm() >
          kBoundaryTol)
    throw ValidationError(
        "assembleInteractionClip: post segment does not start at the contact "
        "end pose");

  InteractionClip clip;
  clip.motion = motion;
  clip.phases = phases;
  clip.object_spec = spec;
  clip.provenance.settings = settings;

  clip.object.fps = motion.fps;
  clip.object.poses.resize(motion.length());
  clip.object.lin_vel.resize(motion.length());
  clip.object.ang_vel.resize(motion.length());
  for (std::size_t t = 0; t < ranges.pre.size(); ++t) {
    clip.object.poses[t] = pre[t].pose;
    clip.object.lin_vel[t] = pre[t].lin_vel;
    clip.object.ang_vel[t] = pre[t].ang_vel;
  }
  for (std::size_t i = 0; i < ranges.contact.size(); ++i) {
    const std::size_t t = ranges.contact.begin + i;
    clip.object.poses[t] = contactObject.poses[i];
    clip.object.lin_vel[t] = contactObject.lin_vel[i];
    clip.object.ang_vel[t] = contactObject.ang_vel[i];
  }
  for (std::size_t i = 0; i < ranges.post.size(); ++i) {
    const std::size_t t = ranges.post.begin + i;
    clip.object.poses[t] = post[i + 1].pose;
    clip.object.lin_vel[t] = post[i + 1].lin_vel;
    clip.object.ang_vel[t] = post[i + 1].ang_vel;
  }

  clip.contact_graph =
      annotateContactGraph(motion, clip.object, spec, keyBodies, threshold);
  return clip;
}

/// Full synthesis: iterative grasp refinement against the phi-propagated
/// object, transition blending, final propagation from the blended anchor
/// (phi-invariance holds by construction), ballistic pre/post phases from
/// the boundary states, and contact-graph annotation.
inline InteractionClip synthesizeInteractionClip(const MotionClip& motion,
                                                 const PhaseAnnotation& phases,
                                                 const ObjectSpec& spec,
                                                 SynthesisSettings settings) {
  motion.validate();
  phases.validate(motion.length());
  spec.validate();
  settings.phi.validate();

  if (settings.contact_bodies.empty())
    settings.contact_bodies = phases.anchor.keypoint_names;

  MotionClip work = motion;
  const PhaseRanges ranges = segmentPhases(phases, motion.length());
  const Pose phiPose = settings.phi.asPose();

  SynthesisReport report;
  std::vector<std::string> warnings;

  // Grasp refinement: project the contact bodies onto the object implied by
  // the current anchor, shift the rest of the body by the mean correction,
  // and iterate until the corrections vanish. The object is re-propagated
  // from the refined anchor each round, so the fixed point satisfies both
  // palms-on-surface and object = anchor o phi. Only frames that survive
  // transition blending are refined; the blend-window interiors are
  // interpolations and get overwritten anyway, and skipping them keeps
  // re-running the pipeline on its own output a no-op.
  const std::size_t k = phases.blend_window_k;
  const std::size_t refineBegin = phases.t_s + k;
  const std::size_t refineEnd =
      phases.t_e >= k ? phases.t_e - k + 1 : 0;  // exclusive
  constexpr int kMaxRefine = 12;
  constexpr double kRefineTol = 1e-11;
  double residual = 0.0;
  for (int iter = 0; iter < kMaxRefine; ++iter) {
    const PoseSeries anchor = deriveAnchorTrajectory(work, phases.anchor);
    residual = 0.0;
    for (std::size_t t = refineBegin; t < refineEnd; ++t) {
      const Pose objectPose = anchor.poses[t].compose(phiPose);
      std::vector<Vec3> pts;
      pts.reserve(settings.contact_bodies.size());
      for (const auto& name : settings.contact_bodies)
        pts.push_back(work.keypoint(t, name).p);
      const ProjectionResult proj =
          projectContactsToSurface(pts, objectPose, spec);
      for (std::size_t i = 0; i < settings.contact_bodies.size(); ++i) {
        const Vec3 corr = proj.adjusted_points[i] - pts[i];
        residual = std::max(residual, corr.norm());
        work.frames[t].keypoints[settings.contact_bodies[i]].p =
            proj.adjusted_points[i];
      }
      for (auto& [name, pose] : work.frames[t].keypoints) {
        if (std::find(settings.contact_bodies.begin(),
                      settings.contact_bodies.end(),
                      name) == settings.contact_bodies.end())
          pose.p += proj.offset;
      }
      work.frames[t].root.p += proj.offset;
    }
    report.refine_iterations = iter + 1;
    if (residual < kRefineTol) break;
  }
  report.refine_residual = residual;
  if (residual >= kRefineTol)
    warnings.push_back("grasp refinement left a residual of " +
                       std::to_string(residual) + " m");

  work = blendTransitions(work, phases);

  // Final object track from the blended anchor; exact phi-invariance.
  const PoseSeries anchor = deriveAnchorTrajectory(work, phases.anchor);
  const PoseSeries contactObject =
      propagateContactTrajectory(anchor, settings.phi, ranges.contact);

  // Closure audit over the contact phase.
  report.min_closure_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ranges.contact.size(); ++i) {
    const std::size_t t = ranges.contact.begin + i;
    std::vector<Vec3> pts;
    for (const auto& name : settings.contact_bodies)
      pts.push_back(work.keypoint(t, name).p);
    const Pose objectPose = contactObject.poses[i];
    ContactSet cs;
    cs.friction_mu = settings.refine.friction_mu;
    cs.cone_edges = settings.refine.cone_edges;
    cs.characteristic_length = spec.maxDimension();
    const Pose inv = objectPose.inverse();
    for (const auto& p : pts) {
      const Vec3 s = closestSurfacePoint(p, objectPose, spec.geometry);
      cs.contacts.push_back(
          {inv.apply(s),
           inv.q * inwardSurfaceNormal(s, objectPose, spec.geometry)});
    }
    const ClosureResult closure = forceClosureTest(cs);
    report.min_closure_margin =
        std::min(report.min_closure_margin, closure.margin);
    if (!closure.closure) report.all_contact_frames_closed = false;
  }
  if (!report.all_contact_frames_closed)
    warnings.push_back("contact phase contains frames without force closure");

  // Boundary states for the ballistic phases.
  const double frameDt = 1.0 / motion.fps;
  std::vector<BodyState> pre, post;
  if (!ranges.pre.empty()) {
    BodyState boundary;
    boundary.pose = contactObject.poses.front();
    boundary.lin_vel = settings.pre_lin_vel.value_or(
        contactObject.hasVelocities() ? contactObject.lin_vel.front()
                                      : Vec3::Zero());
    boundary.ang_vel = settings.pre_ang_vel.value_or(
        contactObject.hasVelocities() ? contactObject.ang_vel.front()
                                      : Vec3::Zero());
    report.pre_boundary_lin_vel = boundary.lin_vel;
    report.velocity_jump_at_ts =
        (boundary.lin_vel - (contactObject.hasVelocities()
                                 ? contactObject.lin_vel.front()
                                 : Vec3::Zero()))
            .norm();
    const std::size_t sub =
        detail::substepsPerFrame(frameDt, spec.sim.dt);
    SimParams params = spec.sim;
    params.dt = frameDt / static_cast<double>(sub);
    const auto traj =
        simulateReverse(boundary, params, ranges.pre.size() * sub);
    pre.reserve(ranges.pre.size() + 1);
    for (std::size_t k = 0; k <= ranges.pre.size(); ++k)
      pre.push_back(traj[k * sub]);
  }
  if (!ranges.post.empty()) {
    BodyState boundary;
    boundary.pose = contactObject.poses.back();
    boundary.lin_vel = settings.post_lin_vel.value_or(
        contactObject.hasVelocities() ? contactObject.lin_vel.back()
                                      : Vec3::Zero());
    boundary.ang_vel = settings.post_ang_vel.value_or(
        contactObject.hasVelocities() ? contactObject.ang_vel.back()
                                      : Vec3::Zero());
    report.post_boundary_lin_vel = boundary.lin_vel;
    report.velocity_jump_at_te =
        (boundary.lin_vel - (contactObject.hasVelocities()
                                 ? contactObject.lin_vel.back()
                                 : Vec3::Zero()))
            .norm();
    const std::size_t sub =
        detail::substepsPerFrame(frameDt, spec.sim.dt);
    SimParams params = spec.sim;
    params.dt = frameDt / static_cast<double>(sub);
    const auto traj =
        simulateForward(boundary, params, ranges.post.size() * sub);
    post.reserve(ranges.post.size() + 1);
    for (std::size_t k = 0; k <= ranges.post.size(); ++k)
      post.push_back(traj[k * sub]);
  }

  const double vtol = settings.velocity_continuity_tolerance;
  if (report.velocity_jump_at_ts > vtol)
    warnings.push_back("object velocity jump at t_s exceeds tolerance: " +
                       std::to_string(report.velocity_jump_at_ts) + " m/s");
  if (report.velocity_jump_at_te > vtol)
    warnings.push_back("object velocity jump at t_e exceeds tolerance: " +
                       std::to_string(report.velocity_jump_at_te) + " m/s");

  InteractionClip clip = assembleInteractionClip(
      work, phases, spec, contactObject, pre, post, settings.contact_bodies,
      settings.contact_threshold, settings);
  clip.provenance.report = report;
  clip.provenance.warnings = std::move(warnings);
  clip.validate();
  return clip;
}

}  // namespace hoi
