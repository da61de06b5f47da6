// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/rng.hpp"
#include "hoi/synthesis.hpp"

namespace hoi {

struct DropoutModel {
  double p_loss = 0.0;        // stationary loss fraction
  double mean_burst_len = 5;  // frames, geometric burst lengths

  void validate() const {
    if (p_loss < 0.0 || p_loss > 1.0)
      throw ValidationError("DropoutModel: p_loss must lie in [0,1]");
    if (mean_burst_len < 1.0)
      throw ValidationError("DropoutModel: mean_burst_len must be >= 1");
  }
};

struct AugmentationConfig {
  double geometry_scale_lo = 1.0;
  double geometry_scale_hi = 1.0;
  Vec3 contact_translation_range = Vec3::Zero();  // per-axis, symmetric (m)
  double contact_scale_lo = 1.0;
  double contact_scale_hi = 1.0;
  Vec3 velocity_perturbation = Vec3::Zero();  // per-axis, symmetric (m/s)
  DropoutModel mocap_dropout;
  std::uint64_t seed = 0;

  void validate() const {
    if (geometry_scale_lo > geometry_scale_hi || geometry_scale_lo <= 0.0)
      throw ValidationError("AugmentationConfig: bad geometry scale range");
    if (contact_scale_lo > contact_scale_hi || contact_scale_lo <= 0.0)
      throw ValidationError("AugmentationConfig: bad contact scale range");
    if (contact_translation_range.minCoeff() < 0.0 ||
        velocity_perturbation.minCoeff() < 0.0)
      throw ValidationError("AugmentationConfig: ranges must be >= 0");
    mocap_dropout.validate();
  }
};

namespace detail {

inline InteractionClip resynthesize(const MotionClip& motion,
                                    const InteractionClip& parent,
                                    const ObjectSpec& spec,
                                    const SynthesisSettings& settings,
                                    TransformRecord record) {
  InteractionClip out =
      synthesizeInteractionClip(motion, parent.phases, spec, settings);
  out.provenance.parent = parent.provenance.parent;
  out.provenance.transforms = parent.provenance.transforms;
  out.provenance.transforms.push_back(std::move(record));
  return out;
}

}  // namespace detail

/// Similarity transform of the interaction: geometry scaled by s, phi
/// translation scaled along so the grasp contacts stay on the scaled
/// surface, then the whole pipeline re-run (refinement, blending, ballistic
/// phases, contact graph). A grasp that loses closure is emitted with a
/// provenance warning.
inline InteractionClip scaleObject(const InteractionClip& clip, double s) {
  clip.validate();
  const ObjectSpec spec = clip.object_spec.scaled(s);  // rejects s <= 0
  SynthesisSettings settings = clip.provenance.settings;
  settings.phi.translation *= s;
  TransformRecord rec;
  rec.type = "scale_object";
  rec.params = {{"s", s}};
  return detail::resynthesize(clip.motion, clip, spec, settings,
                              std::move(rec));
}

/// Scales the contact-phase anchor path about its centroid and translates
/// it; the body follows rigidly, with the offset ramped to zero across the
/// blend windows. Non-contact phases are re-simulated from the new
/// boundaries.
inline InteractionClip transformContactTrajectory(const InteractionClip& clip,
                                                  const Vec3& translation,
                                                  double s) {
  clip.validate();
  if (s <= 0.0)
    throw ValidationError(
        "transformContactTrajectory: scale must be > 0, got " +
        std::to_string(s));

  const PoseSeries anchor =
      deriveAnchorTrajectory(clip.motion, clip.phases.anchor);
  const std::size_t ts = clip.phases.t_s;
  const std::size_t te = clip.phases.t_e;
  const std::size_t k = clip.phases.blend_window_k;

  Vec3 centroid = Vec3::Zero();
  for (std::size_t t = ts; t <= te; ++t) centroid += anchor.poses[t].p;
  centroid /= static_cast<double>(te - ts + 1);

  auto displacement = [&](std::size_t t) {
    return Vec3((s - 1.0) * (anchor.poses[t].p - centroid) + translation);
  };

  MotionClip motion = clip.motion;
  for (std::size_t t = 0; t < motion.length(); ++t) {
    Vec3 d = Vec3::Zero();
    if (t >= ts && t <= te) {
      d = displacement(t);
    } else if (k > 0 && t + k >= ts && t < ts) {
      const double u =
          static_cast<double>(t - (ts - k)) / static_cast<double>(k);
      d = u * displacement(ts);
    } else if (k > 0 && t > te && t <= te + k) {
      const double u = static_cast<double>(t - te) / static_cast<double>(k);
      d = (1.0 - u) * displacement(te);
    }
    if (d.squaredNorm() == 0.0) continue;
    motion.frames[t].root.p += d;
    for (auto& [name, pose] : motion.frames[t].keypoints) pose.p += d;
  }

  TransformRecord rec;
  rec.type = "transform_contact_trajectory";
  rec.params = {{"tx", translation.x()},
                {"ty", translation.y()},
                {"tz", translation.z()},
                {"s", s}};
  InteractionClip out = detail::resynthesize(
      motion, clip, clip.object_spec, clip.provenance.settings,
      std::move(rec));

  const double ground = clip.object_spec.sim.ground_height;
  for (std::size_t t = ts; t <= te; ++t)
    if (out.object.poses[t].p.z() < ground)
      throw ValidationError(
          "transformContactTrajectory: transformed object trajectory dips "
          "below ground at frame " +
          std::to_string(t));
  return out;
}

/// n re-simulations of the non-contact phases with the boundary velocity
/// perturbed per axis by U[-range, range]; deterministic per (seed, index).
inline std::vector<InteractionClip> randomizeInitialVelocity(
    const InteractionClip& clip, const AugmentationConfig& config,
    std::size_t n) {
  clip.validate();
  config.validate();
  const bool hasPre = clip.phases.t_s > 0;
  const bool hasPost = clip.phases.t_e + 1 < clip.length();
  if (!hasPre && !hasPost)
    throw ValidationError(
        "randomizeInitialVelocity: clip has no non-contact phase");

  const Vec3 nominalPre = clip.provenance.report.pre_boundary_lin_vel;
  const Vec3 nominalPost = clip.provenance.report.post_boundary_lin_vel;

  std::vector<InteractionClip> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(deriveSeed(config.seed, i));
    // fixed draw order regardless of which phases exist
    Vec3 dPre, dPost;
    for (int a = 0; a < 3; ++a)
      dPre[a] = rng.symmetric(config.velocity_perturbation[a]);
    for (int a = 0; a < 3; ++a)
      dPost[a] = rng.symmetric(config.velocity_perturbation[a]);

    SynthesisSettings settings = clip.provenance.settings;
    TransformRecord rec;
    rec.type = "randomize_initial_velocity";
    rec.seed = deriveSeed(config.seed, i);
    rec.params = {{"index", static_cast<double>(i)}};
    if (hasPre) {
      settings.pre_lin_vel = nominalPre + dPre;
      rec.params.emplace_back("pre_vx", settings.pre_lin_vel->x());
      rec.params.emplace_back("pre_vy", settings.pre_lin_vel->y());
      rec.params.emplace_back("pre_vz", settings.pre_lin_vel->z());
    }
    if (hasPost) {
      settings.post_lin_vel = nominalPost + dPost;
      rec.params.emplace_back("post_vx", settings.post_lin_vel->x());
      rec.params.emplace_back("post_vy", settings.post_lin_vel->y());
      rec.params.emplace_back("post_vz", settings.post_lin_vel->z());
    }
    out.push_back(detail::resynthesize(clip.motion, clip, clip.object_spec,
                                       settings, std::move(rec)));
  }
  return out;
}

/// Replays a transform record (as stored in provenance) on a clip.
inline InteractionClip replayTransform(const InteractionClip& clip,
                                       const TransformRecord& rec) {
  auto param = [&rec](const std::string& name) {
    for (const auto& [k, v] : rec.params)
      if (k == name) return v;
    throw ValidationError("replayTransform: record lacks parameter '" + name +
                          "'");
  };
  auto hasParam = [&rec](const std::string& name) {
    for (const auto& [k, v] : rec.params)
      if (k == name) return true;
    return false;
  };
  if (rec.type == "scale_object") return scaleObject(clip, param("s"));
  if (rec.type == "transform_contact_trajectory")
    return transformContactTrajectory(
        clip, Vec3(param("tx"), param("ty"), param("tz")), param("s"));
  if (rec.type == "randomize_initial_velocity") {
    SynthesisSettings settings = clip.provenance.settings;
    if (hasParam("pre_vx"))
      settings.pre_lin_vel =
          Vec3(param("pre_vx"), param("pre_vy"), param("pre_vz"));
    if (hasParam("post_vx"))
      settings.post_lin_vel =
          Vec3(param("post_vx"), param("post_vy"), param("post_vz"));
    return detail::resynthesize(clip.motion, clip, clip.object_spec, settings,
                                rec);
  }
  throw ValidationError("replayTransform: unknown transform type '" +
                        rec.type + "'");
}

struct DropoutResult {
  PoseSeries series;
  std::vector<int> loss_mask;  // 1 = frame was lost and holds the last pose
};

/// Two-state Markov frame-loss model: from OK, enter loss with probability
/// p_loss / (L (1 - p_loss)); from LOST, recover with probability 1/L. The
/// stationary loss fraction is p_loss and bursts are geometric with mean L.
/// Lost frames hold the last valid sample. Frame 0 is always valid.
inline DropoutResult simulateMocapDropout(const PoseSeries& objectObs,
                                          const DropoutModel& model,
                                          std::uint64_t seed) {
  model.validate();
  DropoutResult out;
  out.series = objectObs;
  out.loss_mask.assign(objectObs.size(), 0);
  if (objectObs.size() == 0 || model.p_loss == 0.0) return out;

  const double exitProb = 1.0 / model.mean_burst_len;
  const double enterProb =
      model.p_loss >= 1.0
          ? 1.0
          : std::min(1.0, model.p_loss /
                              (model.mean_burst_len * (1.0 - model.p_loss)));

  Rng rng(seed);
  bool lost = false;
  std::size_t lastValid = 0;
  for (std::size_t t = 1; t < objectObs.size(); ++t) {
    if (model.p_loss >= 1.0) {
      lost = true;
    } else if (lost) {
      if (rng.unit() < exitProb) lost = false;
    } else {
      if (rng.unit() < enterProb) lost = true;
    }
    if (lost) {
      out.loss_mask[t] = 1;
      out.series.poses[t] = out.series.poses[lastValid];
      if (out.series.hasVelocities()) {
        out.series.lin_vel[t] = out.series.lin_vel[lastValid];
        out.series.ang_vel[t] = out.series.ang_vel[lastValid];
      }
    } else {
      lastValid = t;
    }
  }
  return out;
}

enum class GeneralizationTask { CatchShot, Badminton, Cargo };

inline GeneralizationTask generalizationTaskFromString(const std::string& s) {
  if (s == "catch_shot") return GeneralizationTask::CatchShot;
  if (s == "badminton") return GeneralizationTask::Badminton;
  if (s == "cargo") return GeneralizationTask::Cargo;
  throw ValidationError("unknown generalization task tag '" + s + "'");
}

struct GeneralizationCase {
  GeneralizationTask task;
  // catch_shot / badminton: per-axis offset of the object start position.
  // cargo: placement on the ground in the robot frame (x forward).
  Vec3 value = Vec3::Zero();
};

/// Initial-condition sampler for the generalization evaluations: ball and
/// shuttle starts are offset by U[-0.3, 0.3] per axis; cargo is placed
/// area-uniformly on the forward semicircular disc of radius 3 m.
inline GeneralizationCase sampleGeneralizationCase(GeneralizationTask task,
                                                   std::uint64_t seed) {
  Rng rng(seed);
  GeneralizationCase out;
  out.task = task;
  switch (task) {
    case GeneralizationTask::CatchShot:
    case GeneralizationTask::Badminton:
      out.value = Vec3(rng.symmetric(0.3), rng.symmetric(0.3),
                       rng.symmetric(0.3));
      break;
    case GeneralizationTask::Cargo: {
      const double r = 3.0 * std::sqrt(rng.unit());  // area-uniform radius
      const double heading = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
      out.value = Vec3(r * std::cos(heading), r * std::sin(heading), 0.0);
      break;
    }
  }
  return out;
}

}  // namespace hoi
