// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hoi/errors.hpp"
#include "hoi/geometry.hpp"

namespace hoi {

/// Free-flight parameters. Linear drag acts as a rate constant:
/// a(v) = gravity - linear_damping * v.
struct SimParams {
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double linear_damping = 0.0;   // 1/s
  double angular_damping = 0.0;  // 1/s
  double restitution = 0.6;      // [0,1]
  double ground_height = 0.0;    // m
  double dt = 1e-3;              // s

  void validate() const {
    if (dt <= 0.0 || dt > 0.02)
      throw ValidationError("SimParams: dt must lie in (0, 0.02], got " +
                            std::to_string(dt));
    if (linear_damping < 0.0 || angular_damping < 0.0)
      throw ValidationError("SimParams: damping must be >= 0");
    if (restitution < 0.0 || restitution > 1.0)
      throw ValidationError("SimParams: restitution must lie in [0,1]");
    if (!gravity.allFinite())
      throw ValidationError("SimParams: non-finite gravity");
  }
};

struct BodyState {
  Pose pose;
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();  // rad/s, world frame

  void validate() const {
    pose.validate("BodyState");
    if (!lin_vel.allFinite() || !ang_vel.allFinite())
      throw ValidationError("BodyState: non-finite velocity");
  }
};

namespace detail {

// Velocity-Verlet in kick-drift-kick form. The first half-kick evaluates the
// drag explicitly, the second solves it implicitly; the combination is
// time-symmetric under (v -> -v, damping -> -damping), which is what makes
// reverse simulation with inverted damping reproduce forward trajectories to
// round-off. For damping = 0 this is plain velocity-Verlet and integrates the
// constant-gravity flight exactly.
inline BodyState stepNoBounce(const BodyState& s, const SimParams& p) {
  const double dt = p.dt;
  const double c = p.linear_damping;
  const double ca = p.angular_damping;

  BodyState out = s;
  const Vec3 vHalf =
      s.lin_vel + 0.5 * dt * (p.gravity - c * s.lin_vel);
  out.pose.p = s.pose.p + dt * vHalf;
  out.lin_vel = (vHalf + 0.5 * dt * p.gravity) / (1.0 + 0.5 * dt * c);

  const Vec3 wHalf = s.ang_vel * (1.0 - 0.5 * dt * ca);
  out.pose.q = normalized(quatExp(wHalf * dt) * s.pose.q);
  out.ang_vel = wHalf / (1.0 + 0.5 * dt * ca);
  return out;
}

}  // namespace detail

/// One integration step; ground impact reflects the position about the plane
/// and scales the normal velocity by -restitution (tangential preserved).
inline BodyState step(const BodyState& state, const SimParams& params) {
  BodyState out = detail::stepNoBounce(state, params);
  if (out.pose.p.z() < params.ground_height) {
    out.pose.p.z() = 2.0 * params.ground_height - out.pose.p.z();
    out.lin_vel.z() = -params.restitution * out.lin_vel.z();
  }
  return out;
}

/// Trajectory of n_steps+1 states; index 0 is state0.
inline std::vector<BodyState> simulateForward(const BodyState& state0,
                                              const SimParams& params,
                                              std::size_t nSteps) {
  params.validate();
  state0.validate();
  std::vector<BodyState> traj;
  traj.reserve(nSteps + 1);
  traj.push_back(state0);
  for (std::size_t i = 0; i < nSteps; ++i)
    traj.push_back(step(traj.back(), params));
  return traj;
}

/// Pre-contact synthesis: integrate backward from state_end with velocities
/// and damping negated, then reverse the record. The returned trajectory is
/// in forward time order and its final element equals state_end exactly.
/// Bounce-free segments only.
inline std::vector<BodyState> simulateReverse(const BodyState& stateEnd,
                                              const SimParams& params,
                                              std::size_t nSteps) {
  params.validate();
  stateEnd.validate();
  if (stateEnd.pose.p.z() < params.ground_height)
    throw ValidationError("simulateReverse: end state starts below ground");

  SimParams inverted = params;
  inverted.linear_damping = -params.linear_damping;
  inverted.angular_damping = -params.angular_damping;

  BodyState cur = stateEnd;
  cur.lin_vel = -cur.lin_vel;
  cur.ang_vel = -cur.ang_vel;

  std::vector<BodyState> visited;
  visited.reserve(nSteps + 1);
  visited.push_back(cur);
  for (std::size_t i = 0; i < nSteps; ++i) {
    cur = detail::stepNoBounce(cur, inverted);
    if (cur.pose.p.z() < params.ground_height)
      throw ValidationError(
          "simulateReverse: ground contact during backward integration at "
          "step " +
          std::to_string(i + 1) + "; reverse across bounces is unsupported");
    visited.push_back(cur);
  }

  std::vector<BodyState> traj(visited.rbegin(), visited.rend());
  for (auto& s : traj) {
    s.lin_vel = -s.lin_vel;
    s.ang_vel = -s.ang_vel;
  }
  return traj;
}

namespace detail {

/// Position after flying for `time` seconds (full steps plus one partial
/// step). Reports whether the path dipped below ground.
inline Vec3 positionAfter(const Vec3& p0, const Vec3& v0, double time,
                          const SimParams& params, bool* belowGround) {
  BodyState s;
  s.pose.p = p0;
  s.lin_vel = v0;
  const auto nFull = static_cast<std::size_t>(std::floor(time / params.dt));
  bool dipped = s.pose.p.z() < params.ground_height;
  for (std::size_t i = 0; i < nFull; ++i) {
    s = stepNoBounce(s, params);
    dipped = dipped || s.pose.p.z() < params.ground_height;
  }
  const double rem = time - static_cast<double>(nFull) * params.dt;
  if (rem > 1e-12) {
    SimParams partial = params;
    partial.dt = rem;
    s = stepNoBounce(s, partial);
    dipped = dipped || s.pose.p.z() < params.ground_height;
  }
  if (belowGround) *belowGround = dipped;
  return s.pose.p;
}

}  // namespace detail

struct ShootingResult {
  Vec3 v0 = Vec3::Zero();
  double residual = 0.0;
  int iterations = 0;
};

/// Initial velocity so that free flight from p0 lands on `target` after
/// `flight_time`. Damped Newton on the 3-vector landing residual, seeded by
/// the drag-free closed form v0 = (target - p0 - g t^2/2)/t. For linear drag
/// the discrete residual is affine in v0, so one Newton step converges.
inline ShootingResult solveInitialVelocity(const Vec3& p0, const Vec3& target,
                                           double flightTime,
                                           const SimParams& params) {
  params.validate();
  if (flightTime <= 0.0)
    throw ValidationError("solveInitialVelocity: flight_time must be > 0");

  const double t = flightTime;
  Vec3 v = (target - p0 - 0.5 * params.gravity * t * t) / t;

  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-6;
  constexpr double kFdStep = 1e-6;

  auto residualOf = [&](const Vec3& vel) {
    return Vec3(detail::positionAfter(p0, vel, t, params, nullptr) - target);
  };

  Vec3 r = residualOf(v);
  int iter = 0;
  while (r.norm() > kTol && iter < kMaxIter) {
    Eigen::Matrix3d jac;
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 vp = v;
      vp[axis] += kFdStep;
      jac.col(axis) = (residualOf(vp) - r) / kFdStep;
    }
    const Vec3 delta = jac.fullPivLu().solve(r);
    if (!delta.allFinite())
      throw NumericalError("solveInitialVelocity: singular shooting Jacobian");

    // damped update: halve the step until the residual shrinks
    double alpha = 1.0;
    Vec3 vNext = v - alpha * delta;
    Vec3 rNext = residualOf(vNext);
    int backtracks = 0;
    while (rNext.norm() >= r.norm() && backtracks < 12) {
      alpha *= 0.5;
      vNext = v - alpha * delta;
      rNext = residualOf(vNext);
      ++backtracks;
    }
    v = vNext;
    r = rNext;
    ++iter;
  }

  if (r.norm() > kTol)
    throw NumericalError(
        "solveInitialVelocity: no convergence after " +
        std::to_string(kMaxIter) +
        " iterations, residual = " + std::to_string(r.norm()));

  bool dipped = false;
  detail::positionAfter(p0, v, t, params, &dipped);
  if (dipped)
    throw NumericalError(
        "solveInitialVelocity: solved trajectory intersects the ground");

  return ShootingResult{v, r.norm(), iter};
}

}  // namespace hoi
