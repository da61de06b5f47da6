// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "hoi/errors.hpp"

namespace hoi {

// Fixed-base planar revolute chains. Small enough that the mass matrix, the
// Coriolis terms and gravity are exactly computable, which is what the
// proprioceptive external-torque estimator is verified against.

struct ChainLink {
  double mass = 1.0;             // kg
  double com_offset = 0.5;       // m along the link from its joint
  double inertia_about_com = 0.05;  // kg m^2
  double length = 1.0;           // m
};

struct KinematicChain {
  std::vector<ChainLink> links;
  Eigen::Vector2d gravity = Eigen::Vector2d(0.0, -9.81);  // in-plane

  int dof() const { return static_cast<int>(links.size()); }

  void validate() const {
    if (links.empty()) throw ValidationError("KinematicChain: no links");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      if (l.mass <= 0.0 || l.length <= 0.0)
        throw ValidationError("KinematicChain: link " + std::to_string(i) +
                              " mass and length must be > 0");
      if (l.inertia_about_com < 0.0)
        throw ValidationError("KinematicChain: link " + std::to_string(i) +
                              " inertia must be >= 0");
    }
  }
};

struct FrictionModel {
  Eigen::VectorXd viscous;  // N m s / rad, per joint; empty = zero
  Eigen::VectorXd coulomb;  // N m, per joint; empty = zero

  void validate(int dof) const {
    if (viscous.size() != 0 && viscous.size() != dof)
      throw ValidationError("FrictionModel: viscous size mismatch");
    if (coulomb.size() != 0 && coulomb.size() != dof)
      throw ValidationError("FrictionModel: coulomb size mismatch");
    if ((viscous.size() && viscous.minCoeff() < 0.0) ||
        (coulomb.size() && coulomb.minCoeff() < 0.0))
      throw ValidationError("FrictionModel: coefficients must be >= 0");
  }

  Eigen::VectorXd torque(const Eigen::VectorXd& qd) const {
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(qd.size());
    if (viscous.size()) tau += viscous.cwiseProduct(qd);
    if (coulomb.size())
      for (Eigen::Index i = 0; i < qd.size(); ++i)
        tau(i) += coulomb(i) * (qd(i) > 0.0 ? 1.0 : (qd(i) < 0.0 ? -1.0 : 0.0));
    return tau;
  }
};

struct ChainState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
};

namespace detail {

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline Eigen::Vector2d perp(const Eigen::Vector2d& v) {
  return Eigen::Vector2d(-v.y(), v.x());
}

inline void checkDims(const KinematicChain& chain, const Eigen::VectorXd& v,
                      const std::string& what) {
  if (v.size() != chain.dof())
    throw ValidationError(what + ": expected " + std::to_string(chain.dof()) +
                          " entries, got " + std::to_string(v.size()));
}

}  // namespace detail

/// Joint torques realizing the given accelerations with no external force
/// and no friction; recursive Newton-Euler with the base acceleration trick
/// for gravity.
inline Eigen::VectorXd inverseDynamics(const KinematicChain& chain,
                                       const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& qd,
                                       const Eigen::VectorXd& qdd) {
  chain.validate();
  detail::checkDims(chain, q, "inverseDynamics q");
  detail::checkDims(chain, qd, "inverseDynamics qd");
  detail::checkDims(chain, qdd, "inverseDynamics qdd");
  const int n = chain.dof();

  std::vector<double> theta(n), omega(n), alpha(n);
  std::vector<Eigen::Vector2d> jointPos(n + 1), jointAcc(n + 1);
  std::vector<Eigen::Vector2d> comPos(n), comAcc(n);

  double th = 0.0, w = 0.0, al = 0.0;
  jointPos[0] = Eigen::Vector2d::Zero();
  jointAcc[0] = -chain.gravity;  // gravity enters as base acceleration
  for (int i = 0; i < n; ++i) {
    th += q(i);
    w += qd(i);
    al += qdd(i);
    theta[i] = th;
    omega[i] = w;
    alpha[i] = al;
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    const Eigen::Vector2d rLink = chain.links[i].length * u;
    const Eigen::Vector2d rCom = chain.links[i].com_offset * u;
    jointPos[i + 1] = jointPos[i] + rLink;
    jointAcc[i + 1] =
        jointAcc[i] + al * detail::perp(rLink) - w * w * rLink;
    comPos[i] = jointPos[i] + rCom;
    comAcc[i] = jointAcc[i] + al * detail::perp(rCom) - w * w * rCom;
  }

  Eigen::VectorXd tau(n);
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  double moment = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const Eigen::Vector2d inertial = chain.links[i].mass * comAcc[i];
    moment += chain.links[i].inertia_about_com * alpha[i] +
              detail::cross2(comPos[i] - jointPos[i], inertial) +
              detail::cross2(jointPos[i + 1] - jointPos[i], f);
    f += inertial;
    tau(i) = moment;
  }
  return tau;
}

/// Unit-acceleration construction: column j is
/// inverseDynamics(q, 0, e_j) - inverseDynamics(q, 0, 0).
inline Eigen::MatrixXd massMatrix(const KinematicChain& chain,
                                  const Eigen::VectorXd& q) {
  const int n = chain.dof();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd bias = inverseDynamics(chain, q, zero, zero);
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
    ej(j) = 1.0;
    m.col(j) = inverseDynamics(chain, q, zero, ej) - bias;
  }
  return m;
}

/// Accelerations produced by the given torques at the current state:
/// qdd = M^-1 (tau_applied - tau_external - C qd - G - tau_friction).
/// tau_external is the joint-space projection of the external contact wrench
/// the robot works against (a positive load consumes commanded torque), the
/// same quantity estimateExternalTorque recovers.
inline Eigen::VectorXd forwardDynamicsAccel(const KinematicChain& chain,
                                            const ChainState& state,
                                            const Eigen::VectorXd& tauApplied,
                                            const Eigen::VectorXd& tauExternal,
                                            const FrictionModel& friction) {
  detail::checkDims(chain, tauApplied, "forwardDynamicsAccel tau_applied");
  detail::checkDims(chain, tauExternal, "forwardDynamicsAccel tau_external");
  friction.validate(chain.dof());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(chain.dof());
  const Eigen::VectorXd bias =
      inverseDynamics(chain, state.q, state.qd, zero);  // C qd + G
  const Eigen::VectorXd rhs =
      tauApplied - tauExternal - bias - friction.torque(state.qd);
  const Eigen::MatrixXd m = massMatrix(chain, state.q);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("forwardDynamicsAccel: mass matrix not PD");
  return llt.solve(rhs);
}

/// Semi-implicit Euler step of the chain.
inline ChainState forwardDynamicsStep(const KinematicChain& chain,
                                      const ChainState& state,
                                      const Eigen::VectorXd& tauApplied,
                                      const Eigen::VectorXd& tauExternal,
                                      const FrictionModel& friction,
                                      double dt) {
  if (dt <= 0.0) throw ValidationError("forwardDynamicsStep: dt must be > 0");
  const Eigen::VectorXd qdd =
      forwardDynamicsAccel(chain, state, tauApplied, tauExternal, friction);
  ChainState next;
  next.qd = state.qd + dt * qdd;
  next.q = state.q + dt * next.qd;
  return next;
}

/// tau = kp (q_target - q) - kd qd, optionally clamped to +-limit.
inline Eigen::VectorXd pdTorque(const Eigen::VectorXd& kp,
                                const Eigen::VectorXd& kd,
                                const Eigen::VectorXd& qTarget,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qd,
                                const Eigen::VectorXd& torqueLimit =
                                    Eigen::VectorXd()) {
  if (kp.size() != q.size() || kd.size() != q.size() ||
      qTarget.size() != q.size() || qd.size() != q.size())
    throw ValidationError("pdTorque: dimension mismatch");
  Eigen::VectorXd tau =
      kp.cwiseProduct(qTarget - q) - kd.cwiseProduct(qd);
  if (torqueLimit.size() != 0) {
    if (torqueLimit.size() != q.size())
      throw ValidationError("pdTorque: torque limit size mismatch");
    tau = tau.cwiseMax(-torqueLimit).cwiseMin(torqueLimit);
  }
  return tau;
}

/// Least-squares slope of a velocity window (equal to the central difference
/// for a 3-frame window); the estimate refers to the window midpoint.
/// Optional exponential smoothing mixes in the previous estimate.
inline Eigen::VectorXd estimateAccel(
    const std::vector<Eigen::VectorXd>& qdHistory, double dt,
    const Eigen::VectorXd* previous = nullptr, double smoothing = 0.0) {
  if (qdHistory.size() < 2)
    throw ValidationError("estimateAccel: need at least 2 velocity frames");
  if (dt <= 0.0) throw ValidationError("estimateAccel: dt must be > 0");
  const auto m = static_cast<Eigen::Index>(qdHistory.size());
  const Eigen::Index n = qdHistory.front().size();
  for (const auto& v : qdHistory)
    if (v.size() != n)
      throw ValidationError("estimateAccel: inconsistent frame sizes");

  // slope of the least-squares line through (i*dt, qd_i)
  const double tMean = 0.5 * static_cast<double>(m - 1) * dt;
  double denom = 0.0;
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double dtc = static_cast<double>(i) * dt - tMean;
    denom += dtc * dtc;
    numer += dtc * qdHistory[i];
  }
  Eigen::VectorXd slope = numer / denom;
  if (previous && smoothing > 0.0)
    slope = smoothing * (*previous) + (1.0 - smoothing) * slope;
  return slope;
}

/// Joint-space external torque: the residual between the commanded torque
/// and the full rigid-body model (including friction). This is the projection
/// of the external contact wrench onto the joints; the wrench itself is not
/// recoverable from it.
inline Eigen::VectorXd estimateExternalTorque(const KinematicChain& chain,
                                              const Eigen::VectorXd& q,
                                              const Eigen::VectorXd& qd,
                                              const Eigen::VectorXd& qddEst,
                                              const Eigen::VectorXd& tauCmd,
                                              const FrictionModel& friction) {
  detail::checkDims(chain, tauCmd, "estimateExternalTorque tau_cmd");
  friction.validate(chain.dof());
  return tauCmd - inverseDynamics(chain, q, qd, qddEst) - friction.torque(qd);
}

inline Eigen::Vector2d tipPosition(const KinematicChain& chain,
                                   const Eigen::VectorXd& q) {
  detail::checkDims(chain, q, "tipPosition q");
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double th = 0.0;
  for (int i = 0; i < chain.dof(); ++i) {
    th += q(i);
    p += chain.links[i].length * Eigen::Vector2d(std::cos(th), std::sin(th));
  }
  return p;
}

/// 2 x n Jacobian of the tip position; column i is perp(tip - joint_i).
inline Eigen::MatrixXd tipJacobian(const KinematicChain& chain,
                                   const Eigen::VectorXd& q) {
  detail::checkDims(chain, q, "tipJacobian q");
  const int n = chain.dof();
  std::vector<Eigen::Vector2d> joints(n);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double th = 0.0;
  for (int i = 0; i < n; ++i) {
    joints[i] = p;
    th += q(i);
    p += chain.links[i].length * Eigen::Vector2d(std::cos(th), std::sin(th));
  }
  Eigen::MatrixXd jac(2, n);
  for (int i = 0; i < n; ++i) jac.col(i) = detail::perp(p - joints[i]);
  return jac;
}

}  // namespace hoi
