// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoi/augment.hpp"
#include "hoi/dynamics.hpp"
#include "hoi/errors.hpp"
#include "hoi/motion.hpp"
#include "hoi/reward.hpp"
#include "hoi/synthesis.hpp"

namespace hoi::io {

// ordered_json keeps insertion order, so emission is deterministic and a
// parse -> dump round trip is byte-identical.
using Json = nlohmann::ordered_json;

inline Json parseJson(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write-temp-then-rename so partially written outputs are never observed.
inline void writeFileAtomic(const std::filesystem::path& path,
                            const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename '" + tmp.string() + "' to '" +
                  path.string() + "': " + ec.message());
}

namespace detail {

inline void requireKeys(const Json& j, const std::vector<std::string>& allowed,
                        const std::string& what) {
  if (!j.is_object()) throw ParseError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ParseError(what + ": unknown key '" + key + "'");
  }
}

inline const Json& at(const Json& j, const std::string& key,
                      const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(what + ": missing key '" + key + "'");
  return *it;
}

inline double num(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(what + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// geometry primitives

inline Json toJson(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3FromJson(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(what + ": expected [x, y, z]");
  return Vec3(detail::num(j[0], what), detail::num(j[1], what),
              detail::num(j[2], what));
}

inline Json toJson(const Quat& q) {
  return Json::array({q.w(), q.x(), q.y(), q.z()});
}

inline Quat quatFromJson(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    throw ParseError(what + ": expected [w, x, y, z]");
  return Quat(detail::num(j[0], what), detail::num(j[1], what),
              detail::num(j[2], what), detail::num(j[3], what));
}

inline Json toJson(const Pose& p) {
  Json j;
  j["p"] = toJson(p.p);
  j["q"] = toJson(p.q);
  return j;
}

inline Pose poseFromJson(const Json& j, const std::string& what) {
  detail::requireKeys(j, {"p", "q"}, what);
  Pose p;
  p.p = vec3FromJson(detail::at(j, "p", what), what + ".p");
  p.q = quatFromJson(detail::at(j, "q", what), what + ".q");
  return p;
}

// ---------------------------------------------------------------------------
// motion clips

inline Json toJson(const MotionClip& clip) {
  Json j;
  j["fps"] = clip.fps;
  j["joint_names"] = clip.joint_names;
  j["keypoint_names"] = clip.keypoint_names;
  Json frames = Json::array();
  for (const auto& f : clip.frames) {
    Json jf;
    jf["root"] = toJson(f.root);
    Json dof = Json::array();
    for (Eigen::Index i = 0; i < f.joints.size(); ++i) dof.push_back(f.joints(i));
    jf["dof"] = std::move(dof);
    Json kps;
    for (const auto& name : clip.keypoint_names)
      kps[name] = toJson(f.keypoints.at(name));
    jf["keypoints"] = std::move(kps);
    if (f.joint_velocities) {
      Json dv = Json::array();
      for (Eigen::Index i = 0; i < f.joint_velocities->size(); ++i)
        dv.push_back((*f.joint_velocities)(i));
      jf["dof_vel"] = std::move(dv);
    }
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j;
}

inline MotionClip motionClipFromJson(const Json& j) {
  const std::string what = "MotionClip";
  detail::requireKeys(j, {"fps", "joint_names", "keypoint_names", "frames"},
                      what);
  MotionClip clip;
  clip.fps = detail::num(detail::at(j, "fps", what), what + ".fps");
  for (const auto& n : detail::at(j, "joint_names", what))
    clip.joint_names.push_back(n.get<std::string>());
  for (const auto& n : detail::at(j, "keypoint_names", what))
    clip.keypoint_names.push_back(n.get<std::string>());
  for (const auto& jf : detail::at(j, "frames", what)) {
    detail::requireKeys(jf, {"root", "dof", "keypoints", "dof_vel"}, what);
    MotionFrame f;
    f.root = poseFromJson(detail::at(jf, "root", what), what + ".root");
    const Json& dof = detail::at(jf, "dof", what);
    f.joints = Eigen::VectorXd(dof.size());
    for (std::size_t i = 0; i < dof.size(); ++i)
      f.joints(static_cast<Eigen::Index>(i)) = detail::num(dof[i], what);
    const Json& kps = detail::at(jf, "keypoints", what);
    for (const auto& [name, pose] : kps.items())
      f.keypoints[name] = poseFromJson(pose, what + ".keypoints." + name);
    if (jf.contains("dof_vel")) {
      const Json& dv = jf["dof_vel"];
      Eigen::VectorXd v(dv.size());
      for (std::size_t i = 0; i < dv.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = detail::num(dv[i], what);
      f.joint_velocities = std::move(v);
    }
    clip.frames.push_back(std::move(f));
  }
  clip.validate();
  return clip;
}

// ---------------------------------------------------------------------------
// anchors, phases, object specs

inline Json toJson(const AnchorSpec& a) {
  Json j;
  j["kind"] = a.kind == AnchorKind::MidpointOfTwoKeypoints
                  ? "midpoint-of-two-keypoints"
                  : "single-keypoint";
  j["keypoints"] = a.keypoint_names;
  switch (a.orientation_rule) {
    case AnchorOrientationRule::KeypointA:
      j["orientation_rule"] = "keypoint-a";
      break;
    case AnchorOrientationRule::Averaged:
      j["orientation_rule"] = "averaged";
      break;
    case AnchorOrientationRule::ConstructedFrame:
      j["orientation_rule"] = "constructed-frame";
      break;
  }
  return j;
}

inline AnchorSpec anchorSpecFromJson(const Json& j) {
  const std::string what = "AnchorSpec";
  detail::requireKeys(j, {"kind", "keypoints", "orientation_rule"}, what);
  AnchorSpec a;
  const std::string kind =
      detail::at(j, "kind", what).get<std::string>();
  if (kind == "midpoint-of-two-keypoints")
    a.kind = AnchorKind::MidpointOfTwoKeypoints;
  else if (kind == "single-keypoint")
    a.kind = AnchorKind::SingleKeypoint;
  else
    throw ParseError(what + ": unknown kind '" + kind + "'");
  for (const auto& n : detail::at(j, "keypoints", what))
    a.keypoint_names.push_back(n.get<std::string>());
  const std::string rule =
      detail::at(j, "orientation_rule", what).get<std::string>();
  if (rule == "keypoint-a")
    a.orientation_rule = AnchorOrientationRule::KeypointA;
  else if (rule == "averaged")
    a.orientation_rule = AnchorOrientationRule::Averaged;
  else if (rule == "constructed-frame")
    a.orientation_rule = AnchorOrientationRule::ConstructedFrame;
  else
    throw ParseError(what + ": unknown orientation_rule '" + rule + "'");
  return a;
}

inline Json toJson(const PhaseAnnotation& p) {
  Json j;
  j["t_s"] = p.t_s;
  j["t_e"] = p.t_e;
  j["anchor"] = toJson(p.anchor);
  j["blend_window_k"] = p.blend_window_k;
  return j;
}

inline PhaseAnnotation phaseAnnotationFromJson(const Json& j) {
  const std::string what = "PhaseAnnotation";
  detail::requireKeys(j, {"t_s", "t_e", "anchor", "blend_window_k"}, what);
  PhaseAnnotation p;
  p.t_s = detail::at(j, "t_s", what).get<std::size_t>();
  p.t_e = detail::at(j, "t_e", what).get<std::size_t>();
  p.anchor = anchorSpecFromJson(detail::at(j, "anchor", what));
  p.blend_window_k = detail::at(j, "blend_window_k", what).get<std::size_t>();
  return p;
}

inline Json toJson(const SimParams& s) {
  Json j;
  j["gravity"] = toJson(s.gravity);
  j["linear_damping"] = s.linear_damping;
  j["angular_damping"] = s.angular_damping;
  j["restitution"] = s.restitution;
  j["ground_height"] = s.ground_height;
  j["dt"] = s.dt;
  return j;
}

inline SimParams simParamsFromJson(const Json& j) {
  const std::string what = "SimParams";
  detail::requireKeys(j,
                      {"gravity", "linear_damping", "angular_damping",
                       "restitution", "ground_height", "dt"},
                      what);
  SimParams s;
  s.gravity = vec3FromJson(detail::at(j, "gravity", what), what + ".gravity");
  s.linear_damping = detail::num(detail::at(j, "linear_damping", what), what);
  s.angular_damping =
      detail::num(detail::at(j, "angular_damping", what), what);
  s.restitution = detail::num(detail::at(j, "restitution", what), what);
  s.ground_height = detail::num(detail::at(j, "ground_height", what), what);
  s.dt = detail::num(detail::at(j, "dt", what), what);
  s.validate();
  return s;
}

inline Json toJson(const ObjectSpec& spec) {
  Json g;
  if (const auto* s = std::get_if<SphereGeometry>(&spec.geometry)) {
    g["type"] = "sphere";
    g["r"] = s->r;
  } else if (const auto* b = std::get_if<BoxGeometry>(&spec.geometry)) {
    g["type"] = "box";
    g["lx"] = b->lx;
    g["ly"] = b->ly;
    g["lz"] = b->lz;
  } else {
    const auto& c = std::get<CylinderGeometry>(spec.geometry);
    g["type"] = "cylinder";
    g["r"] = c.r;
    g["h"] = c.h;
  }
  Json j;
  j["geometry"] = std::move(g);
  j["mass"] = spec.mass;
  j["sim"] = toJson(spec.sim);
  return j;
}

inline ObjectSpec objectSpecFromJson(const Json& j) {
  const std::string what = "ObjectSpec";
  detail::requireKeys(j, {"geometry", "mass", "sim"}, what);
  const Json& g = detail::at(j, "geometry", what);
  const std::string type =
      detail::at(g, "type", what + ".geometry").get<std::string>();
  ObjectSpec spec;
  if (type == "sphere") {
    detail::requireKeys(g, {"type", "r"}, what + ".geometry");
    spec.geometry = SphereGeometry{detail::num(detail::at(g, "r", what), what)};
  } else if (type == "box") {
    detail::requireKeys(g, {"type", "lx", "ly", "lz"}, what + ".geometry");
    spec.geometry = BoxGeometry{detail::num(detail::at(g, "lx", what), what),
                                detail::num(detail::at(g, "ly", what), what),
                                detail::num(detail::at(g, "lz", what), what)};
  } else if (type == "cylinder") {
    detail::requireKeys(g, {"type", "r", "h"}, what + ".geometry");
    spec.geometry =
        CylinderGeometry{detail::num(detail::at(g, "r", what), what),
                         detail::num(detail::at(g, "h", what), what)};
  } else {
    throw ParseError(what + ": unknown geometry type '" + type + "'");
  }
  spec.mass = detail::num(detail::at(j, "mass", what), what + ".mass");
  spec.sim = simParamsFromJson(detail::at(j, "sim", what));
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// provenance

inline Json toJson(const RelativeTransform& phi) {
  Json j;
  j["t"] = toJson(phi.translation);
  j["q"] = toJson(phi.rotation);
  return j;
}

inline RelativeTransform relativeTransformFromJson(const Json& j) {
  detail::requireKeys(j, {"t", "q"}, "RelativeTransform");
  RelativeTransform phi;
  phi.translation = vec3FromJson(detail::at(j, "t", "RelativeTransform"),
                                 "RelativeTransform.t");
  phi.rotation = quatFromJson(detail::at(j, "q", "RelativeTransform"),
                              "RelativeTransform.q");
  return phi;
}

inline Json toJson(const SynthesisSettings& s) {
  Json j;
  j["phi"] = toJson(s.phi);
  j["contact_bodies"] = s.contact_bodies;
  j["contact_threshold"] = s.contact_threshold;
  j["friction_mu"] = s.refine.friction_mu;
  j["cone_edges"] = s.refine.cone_edges;
  if (s.pre_lin_vel) j["pre_lin_vel"] = toJson(*s.pre_lin_vel);
  if (s.pre_ang_vel) j["pre_ang_vel"] = toJson(*s.pre_ang_vel);
  if (s.post_lin_vel) j["post_lin_vel"] = toJson(*s.post_lin_vel);
  if (s.post_ang_vel) j["post_ang_vel"] = toJson(*s.post_ang_vel);
  j["phi_tolerance"] = s.phi_tolerance;
  j["velocity_continuity_tolerance"] = s.velocity_continuity_tolerance;
  return j;
}

inline SynthesisSettings synthesisSettingsFromJson(const Json& j) {
  const std::string what = "SynthesisSettings";
  detail::requireKeys(j,
                      {"phi", "contact_bodies", "contact_threshold",
                       "friction_mu", "cone_edges", "pre_lin_vel",
                       "pre_ang_vel", "post_lin_vel", "post_ang_vel",
                       "phi_tolerance", "velocity_continuity_tolerance"},
                      what);
  SynthesisSettings s;
  s.phi = relativeTransformFromJson(detail::at(j, "phi", what));
  for (const auto& n : detail::at(j, "contact_bodies", what))
    s.contact_bodies.push_back(n.get<std::string>());
  s.contact_threshold =
      detail::num(detail::at(j, "contact_threshold", what), what);
  s.refine.friction_mu = detail::num(detail::at(j, "friction_mu", what), what);
  s.refine.cone_edges = detail::at(j, "cone_edges", what).get<int>();
  if (j.contains("pre_lin_vel"))
    s.pre_lin_vel = vec3FromJson(j["pre_lin_vel"], what + ".pre_lin_vel");
  if (j.contains("pre_ang_vel"))
    s.pre_ang_vel = vec3FromJson(j["pre_ang_vel"], what + ".pre_ang_vel");
  if (j.contains("post_lin_vel"))
    s.post_lin_vel = vec3FromJson(j["post_lin_vel"], what + ".post_lin_vel");
  if (j.contains("post_ang_vel"))
    s.post_ang_vel = vec3FromJson(j["post_ang_vel"], what + ".post_ang_vel");
  s.phi_tolerance = detail::num(detail::at(j, "phi_tolerance", what), what);
  s.velocity_continuity_tolerance =
      detail::num(detail::at(j, "velocity_continuity_tolerance", what), what);
  return s;
}

inline Json toJson(const SynthesisReport& r) {
  Json j;
  j["refine_iterations"] = r.refine_iterations;
  j["refine_residual"] = r.refine_residual;
  j["min_closure_margin"] = r.min_closure_margin;
  j["all_contact_frames_closed"] = r.all_contact_frames_closed;
  j["pre_boundary_lin_vel"] = toJson(r.pre_boundary_lin_vel);
  j["post_boundary_lin_vel"] = toJson(r.post_boundary_lin_vel);
  j["velocity_jump_at_ts"] = r.velocity_jump_at_ts;
  j["velocity_jump_at_te"] = r.velocity_jump_at_te;
  return j;
}

inline SynthesisReport synthesisReportFromJson(const Json& j) {
  const std::string what = "SynthesisReport";
  detail::requireKeys(
      j, {"refine_iterations", "refine_residual", "min_closure_margin",
          "all_contact_frames_closed", "pre_boundary_lin_vel",
          "post_boundary_lin_vel", "velocity_jump_at_ts",
          "velocity_jump_at_te"},
      what);
  SynthesisReport r;
  r.refine_iterations = detail::at(j, "refine_iterations", what).get<int>();
  r.refine_residual = detail::num(detail::at(j, "refine_residual", what), what);
  r.min_closure_margin =
      detail::num(detail::at(j, "min_closure_margin", what), what);
  r.all_contact_frames_closed =
      detail::at(j, "all_contact_frames_closed", what).get<bool>();
  r.pre_boundary_lin_vel = vec3FromJson(
      detail::at(j, "pre_boundary_lin_vel", what), what);
  r.post_boundary_lin_vel = vec3FromJson(
      detail::at(j, "post_boundary_lin_vel", what), what);
  r.velocity_jump_at_ts =
      detail::num(detail::at(j, "velocity_jump_at_ts", what), what);
  r.velocity_jump_at_te =
      detail::num(detail::at(j, "velocity_jump_at_te", what), what);
  return r;
}

inline Json toJson(const ProvenanceRecord& p) {
  Json j;
  j["parent"] = p.parent;
  Json transforms = Json::array();
  for (const auto& t : p.transforms) {
    Json jt;
    jt["type"] = t.type;
    Json params;
    for (const auto& [k, v] : t.params) params[k] = v;
    jt["params"] = std::move(params);
    if (t.seed) jt["seed"] = *t.seed;
    transforms.push_back(std::move(jt));
  }
  j["transforms"] = std::move(transforms);
  j["settings"] = toJson(p.settings);
  j["report"] = toJson(p.report);
  j["warnings"] = p.warnings;
  return j;
}

inline ProvenanceRecord provenanceFromJson(const Json& j) {
  const std::string what = "ProvenanceRecord";
  detail::requireKeys(
      j, {"parent", "transforms", "settings", "report", "warnings"}, what);
  ProvenanceRecord p;
  p.parent = detail::at(j, "parent", what).get<std::string>();
  for (const auto& jt : detail::at(j, "transforms", what)) {
    detail::requireKeys(jt, {"type", "params", "seed"}, what + ".transforms");
    TransformRecord t;
    t.type = detail::at(jt, "type", what).get<std::string>();
    for (const auto& [k, v] : detail::at(jt, "params", what).items())
      t.params.emplace_back(k, detail::num(v, what + ".params." + k));
    if (jt.contains("seed")) t.seed = jt["seed"].get<std::uint64_t>();
    p.transforms.push_back(std::move(t));
  }
  p.settings = synthesisSettingsFromJson(detail::at(j, "settings", what));
  p.report = synthesisReportFromJson(detail::at(j, "report", what));
  for (const auto& w : detail::at(j, "warnings", what))
    p.warnings.push_back(w.get<std::string>());
  return p;
}

// ---------------------------------------------------------------------------
// interaction clips

inline Json toJson(const InteractionClip& clip) {
  Json j;
  j["schema_version"] = 1;
  const Json motion = toJson(clip.motion);
  for (const auto& [k, v] : motion.items()) j[k] = v;

  Json objFrames = Json::array();
  for (std::size_t t = 0; t < clip.object.size(); ++t) {
    Json f;
    f["p"] = toJson(clip.object.poses[t].p);
    f["q"] = toJson(clip.object.poses[t].q);
    f["v"] = toJson(clip.object.lin_vel[t]);
    f["w"] = toJson(clip.object.ang_vel[t]);
    objFrames.push_back(std::move(f));
  }
  Json object;
  object["frames"] = std::move(objFrames);
  j["object"] = std::move(object);

  Json graph;
  graph["key_bodies"] = clip.contact_graph.key_bodies;
  graph["frames"] = clip.contact_graph.frames;
  j["contact_graph"] = std::move(graph);

  j["phases"] = toJson(clip.phases);
  j["object_spec"] = toJson(clip.object_spec);
  j["provenance"] = toJson(clip.provenance);
  return j;
}

inline InteractionClip interactionClipFromJson(const Json& j) {
  const std::string what = "InteractionClip";
  detail::requireKeys(j,
                      {"schema_version", "fps", "joint_names",
                       "keypoint_names", "frames", "object", "contact_graph",
                       "phases", "object_spec", "provenance"},
                      what);
  const int version = detail::at(j, "schema_version", what).get<int>();
  if (version != 1)
    throw ParseError(what + ": unsupported schema_version " +
                     std::to_string(version));
  InteractionClip clip;
  Json motion;
  motion["fps"] = detail::at(j, "fps", what);
  motion["joint_names"] = detail::at(j, "joint_names", what);
  motion["keypoint_names"] = detail::at(j, "keypoint_names", what);
  motion["frames"] = detail::at(j, "frames", what);
  clip.motion = motionClipFromJson(motion);

  const Json& object = detail::at(j, "object", what);
  detail::requireKeys(object, {"frames"}, what + ".object");
  clip.object.fps = clip.motion.fps;
  for (const auto& f : detail::at(object, "frames", what)) {
    detail::requireKeys(f, {"p", "q", "v", "w"}, what + ".object.frames");
    Pose pose;
    pose.p = vec3FromJson(detail::at(f, "p", what), what + ".object.p");
    pose.q = quatFromJson(detail::at(f, "q", what), what + ".object.q");
    clip.object.poses.push_back(pose);
    clip.object.lin_vel.push_back(
        vec3FromJson(detail::at(f, "v", what), what + ".object.v"));
    clip.object.ang_vel.push_back(
        vec3FromJson(detail::at(f, "w", what), what + ".object.w"));
  }

  const Json& graph = detail::at(j, "contact_graph", what);
  detail::requireKeys(graph, {"key_bodies", "frames"}, what + ".contact_graph");
  for (const auto& n : detail::at(graph, "key_bodies", what))
    clip.contact_graph.key_bodies.push_back(n.get<std::string>());
  for (const auto& f : detail::at(graph, "frames", what))
    clip.contact_graph.frames.push_back(f.get<std::vector<int>>());

  clip.phases = phaseAnnotationFromJson(detail::at(j, "phases", what));
  clip.object_spec = objectSpecFromJson(detail::at(j, "object_spec", what));
  clip.provenance = provenanceFromJson(detail::at(j, "provenance", what));
  clip.validate();
  return clip;
}

// ---------------------------------------------------------------------------
// reward configuration

inline Json toJson(const TermWeight& t) {
  Json j;
  j["gamma"] = t.gamma;
  j["lambda"] = t.lambda;
  return j;
}

inline TermWeight termWeightFromJson(const Json& j, const std::string& what) {
  detail::requireKeys(j, {"gamma", "lambda"}, what);
  TermWeight t;
  t.gamma = detail::num(detail::at(j, "gamma", what), what);
  t.lambda = detail::num(detail::at(j, "lambda", what), what);
  if (t.gamma < 0.0 || t.lambda < 0.0)
    throw ValidationError(what + ": gamma and lambda must be >= 0");
  return t;
}

inline Json toJson(const RewardWeights& w, const JointLimits& limits) {
  Json terms;
  terms["body_pos"] = toJson(w.body_pos);
  terms["body_rot"] = toJson(w.body_rot);
  terms["dof_pos"] = toJson(w.dof_pos);
  terms["body_vel"] = toJson(w.body_vel);
  terms["body_ang_vel"] = toJson(w.body_ang_vel);
  terms["dof_vel"] = toJson(w.dof_vel);
  terms["obj_pos"] = toJson(w.obj_pos);
  terms["obj_rot"] = toJson(w.obj_rot);
  terms["rel_pos"] = toJson(w.rel_pos);
  terms["rel_rot"] = toJson(w.rel_rot);

  Json j;
  j["terms"] = std::move(terms);
  j["obj_rot_enabled"] = w.obj_rot_enabled;
  j["rel_rot_enabled"] = w.rel_rot_enabled;
  Json cl = Json::array();
  for (Eigen::Index i = 0; i < w.contact_lambda.size(); ++i)
    cl.push_back(w.contact_lambda(i));
  j["contact_lambda"] = std::move(cl);
  j["relative_keypoints"] = w.relative_keypoints;
  Json reg;
  reg["torque"] = w.reg.torque;
  reg["action_rate"] = w.reg.action_rate;
  reg["dof_limit"] = w.reg.dof_limit;
  reg["torque_limit"] = w.reg.torque_limit;
  reg["waist"] = w.reg.waist;
  reg["feet_orientation"] = w.reg.feet_orientation;
  reg["feet_slippage"] = w.reg.feet_slippage;
  reg["termination"] = w.reg.termination;
  j["reg"] = std::move(reg);

  Json lim;
  Json dl = Json::array();
  for (Eigen::Index i = 0; i < limits.dof_limit.size(); ++i)
    dl.push_back(limits.dof_limit(i));
  lim["dof_limit"] = std::move(dl);
  Json tl = Json::array();
  for (Eigen::Index i = 0; i < limits.torque_limit.size(); ++i)
    tl.push_back(limits.torque_limit(i));
  lim["torque_limit"] = std::move(tl);
  lim["waist_indices"] = limits.waist_indices;
  j["limits"] = std::move(lim);
  return j;
}

struct RewardConfig {
  RewardWeights weights;
  JointLimits limits;
};

inline RewardConfig rewardConfigFromJson(const Json& j) {
  const std::string what = "RewardConfig";
  detail::requireKeys(j,
                      {"terms", "obj_rot_enabled", "rel_rot_enabled",
                       "contact_lambda", "relative_keypoints", "reg",
                       "limits"},
                      what);
  RewardConfig cfg;
  const Json& terms = detail::at(j, "terms", what);
  detail::requireKeys(terms,
                      {"body_pos", "body_rot", "dof_pos", "body_vel",
                       "body_ang_vel", "dof_vel", "obj_pos", "obj_rot",
                       "rel_pos", "rel_rot"},
                      what + ".terms");
  auto& w = cfg.weights;
  w.body_pos = termWeightFromJson(terms["body_pos"], "body_pos");
  w.body_rot = termWeightFromJson(terms["body_rot"], "body_rot");
  w.dof_pos = termWeightFromJson(terms["dof_pos"], "dof_pos");
  w.body_vel = termWeightFromJson(terms["body_vel"], "body_vel");
  w.body_ang_vel = termWeightFromJson(terms["body_ang_vel"], "body_ang_vel");
  w.dof_vel = termWeightFromJson(terms["dof_vel"], "dof_vel");
  w.obj_pos = termWeightFromJson(terms["obj_pos"], "obj_pos");
  w.obj_rot = termWeightFromJson(terms["obj_rot"], "obj_rot");
  w.rel_pos = termWeightFromJson(terms["rel_pos"], "rel_pos");
  w.rel_rot = termWeightFromJson(terms["rel_rot"], "rel_rot");
  w.obj_rot_enabled = detail::at(j, "obj_rot_enabled", what).get<bool>();
  w.rel_rot_enabled = detail::at(j, "rel_rot_enabled", what).get<bool>();
  const Json& cl = detail::at(j, "contact_lambda", what);
  w.contact_lambda = Eigen::VectorXd(cl.size());
  for (std::size_t i = 0; i < cl.size(); ++i)
    w.contact_lambda(static_cast<Eigen::Index>(i)) = detail::num(cl[i], what);
  for (const auto& n : detail::at(j, "relative_keypoints", what))
    w.relative_keypoints.push_back(n.get<std::string>());
  const Json& reg = detail::at(j, "reg", what);
  detail::requireKeys(reg,
                      {"torque", "action_rate", "dof_limit", "torque_limit",
                       "waist", "feet_orientation", "feet_slippage",
                       "termination"},
                      what + ".reg");
  w.reg.torque = detail::num(reg["torque"], what);
  w.reg.action_rate = detail::num(reg["action_rate"], what);
  w.reg.dof_limit = detail::num(reg["dof_limit"], what);
  w.reg.torque_limit = detail::num(reg["torque_limit"], what);
  w.reg.waist = detail::num(reg["waist"], what);
  w.reg.feet_orientation = detail::num(reg["feet_orientation"], what);
  w.reg.feet_slippage = detail::num(reg["feet_slippage"], what);
  w.reg.termination = detail::num(reg["termination"], what);

  const Json& lim = detail::at(j, "limits", what);
  detail::requireKeys(lim, {"dof_limit", "torque_limit", "waist_indices"},
                      what + ".limits");
  const Json& dl = lim["dof_limit"];
  cfg.limits.dof_limit = Eigen::VectorXd(dl.size());
  for (std::size_t i = 0; i < dl.size(); ++i)
    cfg.limits.dof_limit(static_cast<Eigen::Index>(i)) =
        detail::num(dl[i], what);
  const Json& tl = lim["torque_limit"];
  cfg.limits.torque_limit = Eigen::VectorXd(tl.size());
  for (std::size_t i = 0; i < tl.size(); ++i)
    cfg.limits.torque_limit(static_cast<Eigen::Index>(i)) =
        detail::num(tl[i], what);
  for (const auto& v : lim["waist_indices"])
    cfg.limits.waist_indices.push_back(v.get<int>());
  return cfg;
}

// ---------------------------------------------------------------------------
// rollout logs

inline Json toJson(const std::vector<RolloutFrame>& frames, double fps) {
  Json j;
  j["schema_version"] = 1;
  j["fps"] = fps;
  Json arr = Json::array();
  for (const auto& f : frames) {
    Json jf;
    jf["root"] = toJson(f.root);
    jf["base_ang_vel"] = toJson(f.base_ang_vel);
    Json kps;
    for (const auto& [name, pose] : f.keypoints) kps[name] = toJson(pose);
    jf["keypoints"] = std::move(kps);
    Json kv;
    for (const auto& [name, v] : f.keypoint_lin_vel) kv[name] = toJson(v);
    jf["keypoint_lin_vel"] = std::move(kv);
    Json kw;
    for (const auto& [name, v] : f.keypoint_ang_vel) kw[name] = toJson(v);
    jf["keypoint_ang_vel"] = std::move(kw);
    auto vecToJson = [](const Eigen::VectorXd& v) {
      Json a = Json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
      return a;
    };
    jf["dof_pos"] = vecToJson(f.dof_pos);
    jf["dof_vel"] = vecToJson(f.dof_vel);
    jf["torque"] = vecToJson(f.torque);
    jf["action"] = vecToJson(f.action);
    jf["prev_action"] = vecToJson(f.prev_action);
    jf["object"] = toJson(f.object_pose);
    jf["object_lin_vel"] = toJson(f.object_lin_vel);
    jf["object_ang_vel"] = toJson(f.object_ang_vel);
    jf["contact_graph"] = f.contact_graph;
    if (f.amp) jf["amp"] = *f.amp;
    arr.push_back(std::move(jf));
  }
  j["frames"] = std::move(arr);
  return j;
}

inline std::vector<RolloutFrame> rolloutFramesFromJson(const Json& j) {
  const std::string what = "RolloutLog";
  detail::requireKeys(j, {"schema_version", "fps", "frames"}, what);
  std::vector<RolloutFrame> out;
  for (const auto& jf : detail::at(j, "frames", what)) {
    detail::requireKeys(jf,
                        {"root", "base_ang_vel", "keypoints",
                         "keypoint_lin_vel", "keypoint_ang_vel", "dof_pos",
                         "dof_vel", "torque", "action", "prev_action",
                         "object", "object_lin_vel", "object_ang_vel",
                         "contact_graph", "amp"},
                        what + ".frames");
    RolloutFrame f;
    f.root = poseFromJson(detail::at(jf, "root", what), what + ".root");
    f.base_ang_vel =
        vec3FromJson(detail::at(jf, "base_ang_vel", what), what);
    for (const auto& [name, pose] : detail::at(jf, "keypoints", what).items())
      f.keypoints[name] = poseFromJson(pose, what + ".keypoints");
    for (const auto& [name, v] :
         detail::at(jf, "keypoint_lin_vel", what).items())
      f.keypoint_lin_vel[name] = vec3FromJson(v, what);
    for (const auto& [name, v] :
         detail::at(jf, "keypoint_ang_vel", what).items())
      f.keypoint_ang_vel[name] = vec3FromJson(v, what);
    auto vecFromJson = [&what](const Json& a) {
      Eigen::VectorXd v(a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = detail::num(a[i], what);
      return v;
    };
    f.dof_pos = vecFromJson(detail::at(jf, "dof_pos", what));
    f.dof_vel = vecFromJson(detail::at(jf, "dof_vel", what));
    f.torque = vecFromJson(detail::at(jf, "torque", what));
    f.action = vecFromJson(detail::at(jf, "action", what));
    f.prev_action = vecFromJson(detail::at(jf, "prev_action", what));
    f.object_pose =
        poseFromJson(detail::at(jf, "object", what), what + ".object");
    f.object_lin_vel =
        vec3FromJson(detail::at(jf, "object_lin_vel", what), what);
    f.object_ang_vel =
        vec3FromJson(detail::at(jf, "object_ang_vel", what), what);
    f.contact_graph =
        detail::at(jf, "contact_graph", what).get<std::vector<int>>();
    if (jf.contains("amp")) f.amp = detail::num(jf["amp"], what);
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// kinematic chains

inline Json toJson(const KinematicChain& chain) {
  Json j;
  Json links = Json::array();
  for (const auto& l : chain.links) {
    Json jl;
    jl["mass"] = l.mass;
    jl["com_offset"] = l.com_offset;
    jl["inertia_about_com"] = l.inertia_about_com;
    jl["length"] = l.length;
    links.push_back(std::move(jl));
  }
  j["links"] = std::move(links);
  j["gravity"] = Json::array({chain.gravity.x(), chain.gravity.y()});
  return j;
}

inline KinematicChain kinematicChainFromJson(const Json& j) {
  const std::string what = "KinematicChain";
  detail::requireKeys(j, {"links", "gravity"}, what);
  KinematicChain chain;
  for (const auto& jl : detail::at(j, "links", what)) {
    detail::requireKeys(jl, {"mass", "com_offset", "inertia_about_com",
                             "length"},
                        what + ".links");
    ChainLink l;
    l.mass = detail::num(detail::at(jl, "mass", what), what);
    l.com_offset = detail::num(detail::at(jl, "com_offset", what), what);
    l.inertia_about_com =
        detail::num(detail::at(jl, "inertia_about_com", what), what);
    l.length = detail::num(detail::at(jl, "length", what), what);
    chain.links.push_back(l);
  }
  const Json& g = detail::at(j, "gravity", what);
  if (!g.is_array() || g.size() != 2)
    throw ParseError(what + ": gravity must be [gx, gy]");
  chain.gravity = Eigen::Vector2d(detail::num(g[0], what),
                                  detail::num(g[1], what));
  chain.validate();
  return chain;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string fmtDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// t, px, py, pz, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz
inline std::string trajectoryCsv(const std::vector<BodyState>& traj,
                                 double dt) {
  std::string out = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    const double vals[] = {static_cast<double>(i) * dt,
                           s.pose.p.x(),  s.pose.p.y(),  s.pose.p.z(),
                           s.pose.q.w(),  s.pose.q.x(),  s.pose.q.y(),
                           s.pose.q.z(),  s.lin_vel.x(), s.lin_vel.y(),
                           s.lin_vel.z(), s.ang_vel.x(), s.ang_vel.y(),
                           s.ang_vel.z()};
    for (std::size_t k = 0; k < std::size(vals); ++k) {
      if (k) out += ',';
      out += detail::fmtDouble(vals[k]);
    }
    out += '\n';
  }
  return out;
}

/// frame, <term columns...>, total
inline std::string rewardReportCsv(const RewardReport& report) {
  std::string out = "frame";
  for (const auto& c : report.columns) out += "," + c;
  out += ",total\n";
  for (std::size_t t = 0; t < report.rows.size(); ++t) {
    out += std::to_string(t);
    for (const auto& [name, v] : report.rows[t].terms)
      out += "," + detail::fmtDouble(v);
    out += "," + detail::fmtDouble(report.rows[t].total) + "\n";
  }
  return out;
}

struct EstimatorLog {
  double rate_hz = 100.0;
  std::vector<double> time;
  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> qd;
  std::vector<Eigen::VectorXd> tau_cmd;
};

/// Header: t,q0..qN-1,qd0..qdN-1,tau0..tauN-1
inline EstimatorLog estimatorLogFromCsv(const std::string& text, int dof) {
  EstimatorLog log;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("estimator log: empty file");
  const std::size_t expected = 1 + 3 * static_cast<std::size_t>(dof);
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("estimator log line " + std::to_string(lineNo) +
                         ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != expected)
      throw ParseError("estimator log line " + std::to_string(lineNo) +
                       ": expected " + std::to_string(expected) +
                       " columns, got " + std::to_string(vals.size()));
    log.time.push_back(vals[0]);
    Eigen::VectorXd q(dof), qd(dof), tau(dof);
    for (int i = 0; i < dof; ++i) {
      q(i) = vals[1 + i];
      qd(i) = vals[1 + dof + i];
      tau(i) = vals[1 + 2 * dof + i];
    }
    log.q.push_back(q);
    log.qd.push_back(qd);
    log.tau_cmd.push_back(tau);
  }
  if (log.time.empty()) throw ParseError("estimator log: no data rows");
  return log;
}

inline std::string estimatorLogCsv(const EstimatorLog& log) {
  const int dof = static_cast<int>(log.q.front().size());
  std::string out = "t";
  for (int i = 0; i < dof; ++i) out += ",q" + std::to_string(i);
  for (int i = 0; i < dof; ++i) out += ",qd" + std::to_string(i);
  for (int i = 0; i < dof; ++i) out += ",tau" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < log.time.size(); ++t) {
    out += detail::fmtDouble(log.time[t]);
    for (int i = 0; i < dof; ++i)
      out += "," + detail::fmtDouble(log.q[t](i));
    for (int i = 0; i < dof; ++i)
      out += "," + detail::fmtDouble(log.qd[t](i));
    for (int i = 0; i < dof; ++i)
      out += "," + detail::fmtDouble(log.tau_cmd[t](i));
    out += "\n";
  }
  return out;
}

/// t,tau_ext0..tau_extN-1
inline std::string externalTorqueCsv(const std::vector<double>& time,
                                     const std::vector<Eigen::VectorXd>& tau) {
  const int dof = static_cast<int>(tau.front().size());
  std::string out = "t";
  for (int i = 0; i < dof; ++i) out += ",tau_ext" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < time.size(); ++t) {
    out += detail::fmtDouble(time[t]);
    for (int i = 0; i < dof; ++i)
      out += "," + detail::fmtDouble(tau[t](i));
    out += "\n";
  }
  return out;
}

}  // namespace hoi::io
