// Copyright 2026 The hoisynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "hoi/dynamics.hpp"
#include "hoi/rng.hpp"

using namespace hoi;

namespace {

KinematicChain pendulum() {
  KinematicChain c;
  c.links.push_back({1.0, 0.5, 0.0, 1.0});
  return c;
}

KinematicChain twoLink() {
  KinematicChain c;
  c.links.push_back({1.2, 0.2, 1.2 * 0.4 * 0.4 / 12.0, 0.4});
  c.links.push_back({0.8, 0.18, 0.8 * 0.35 * 0.35 / 12.0, 0.35});
  return c;
}

KinematicChain randomChain(Rng& rng) {
  KinematicChain c;
  const int n = 2 + static_cast<int>(rng.bits() % 3);
  for (int i = 0; i < n; ++i) {
    const double len = rng.uniform(0.2, 0.8);
    const double mass = rng.uniform(0.3, 2.0);
    c.links.push_back(
        {mass, rng.uniform(0.2, 0.8) * len, mass * len * len / 12.0, len});
  }
  return c;
}

Eigen::VectorXd randomVec(Rng& rng, int n, double scale) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.symmetric(scale);
  return v;
}

/// Textbook Lagrangian dynamics of a planar 2R arm (angles from +x, gravity
/// along -y): an oracle independent of the recursive implementation.
Eigen::Vector2d lagrangianTwoLinkTorque(const KinematicChain& c,
                                        const Eigen::Vector2d& q,
                                        const Eigen::Vector2d& qd,
                                        const Eigen::Vector2d& qdd) {
  const double m1 = c.links[0].mass, m2 = c.links[1].mass;
  const double L1 = c.links[0].length;
  const double c1 = c.links[0].com_offset, c2 = c.links[1].com_offset;
  const double I1 = c.links[0].inertia_about_com;
  const double I2 = c.links[1].inertia_about_com;
  const double g = -c.gravity.y();

  const double cos2 = std::cos(q(1)), sin2 = std::sin(q(1));
  const double m11 =
      m1 * c1 * c1 + m2 * (L1 * L1 + c2 * c2 + 2.0 * L1 * c2 * cos2) + I1 + I2;
  const double m12 = m2 * (c2 * c2 + L1 * c2 * cos2) + I2;
  const double m22 = m2 * c2 * c2 + I2;
  const double h = m2 * L1 * c2 * sin2;

  const double g1 = (m1 * c1 + m2 * L1) * g * std::cos(q(0)) +
                    m2 * c2 * g * std::cos(q(0) + q(1));
  const double g2 = m2 * c2 * g * std::cos(q(0) + q(1));

  Eigen::Vector2d tau;
  tau(0) = m11 * qdd(0) + m12 * qdd(1) - h * qd(1) * (2.0 * qd(0) + qd(1)) + g1;
  tau(1) = m12 * qdd(0) + m22 * qdd(1) + h * qd(0) * qd(0) + g2;
  return tau;
}

/// Energy audit from first principles: link com positions/velocities from
/// the joint angles directly.
double chainEnergy(const KinematicChain& c, const ChainState& s) {
  double e = 0.0;
  double th = 0.0, w = 0.0;
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (int i = 0; i < c.dof(); ++i) {
    th += s.q(i);
    w += s.qd(i);
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    const Eigen::Vector2d uPerp(-std::sin(th), std::cos(th));
    const Eigen::Vector2d com = p + c.links[i].com_offset * u;
    const Eigen::Vector2d comVel = v + w * c.links[i].com_offset * uPerp;
    e += 0.5 * c.links[i].mass * comVel.squaredNorm();
    e += 0.5 * c.links[i].inertia_about_com * w * w;
    e -= c.links[i].mass * c.gravity.dot(com);
    p += c.links[i].length * u;
    v += w * c.links[i].length * uPerp;
  }
  return e;
}

}  // namespace

TEST_CASE("horizontal pendulum gravity torque") {
  const KinematicChain c = pendulum();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd tau = inverseDynamics(c, zero, zero, zero);
  CHECK(std::abs(tau(0) - 4.905) < 1e-12);  // m g l_com = 1 * 9.81 * 0.5
}

TEST_CASE("vertical-down pendulum is at equilibrium") {
  const KinematicChain c = pendulum();
  Eigen::VectorXd q(1);
  q << -M_PI / 2.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CHECK(std::abs(inverseDynamics(c, q, zero, zero)(0)) < 1e-12);
}

TEST_CASE("RNEA matches the Lagrangian oracle on the 2-link arm") {
  Rng rng(17);
  const KinematicChain c = twoLink();
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d q = randomVec(rng, 2, M_PI);
    const Eigen::Vector2d qd = randomVec(rng, 2, 3.0);
    const Eigen::Vector2d qdd = randomVec(rng, 2, 5.0);
    const Eigen::VectorXd rnea = inverseDynamics(c, q, qd, qdd);
    const Eigen::Vector2d oracle = lagrangianTwoLinkTorque(c, q, qd, qdd);
    CHECK((rnea - oracle).norm() < 1e-10);
  }
}

TEST_CASE("RNEA equals the assembled M qdd + C qd + G") {
  Rng rng(23);
  const KinematicChain c = twoLink();
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector2d q = randomVec(rng, 2, M_PI);
    const Eigen::Vector2d qd = randomVec(rng, 2, 3.0);
    const Eigen::Vector2d qdd = randomVec(rng, 2, 5.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const Eigen::MatrixXd m = massMatrix(c, q);
    const Eigen::VectorXd cg = inverseDynamics(c, q, qd, zero);  // C qd + G
    const Eigen::VectorXd assembled = m * qdd + cg;
    CHECK((inverseDynamics(c, q, qd, qdd) - assembled).norm() < 1e-10);
  }
}

TEST_CASE("inverse dynamics is linear in qdd") {
  Rng rng(29);
  const KinematicChain c = twoLink();
  const Eigen::Vector2d q = randomVec(rng, 2, M_PI);
  const Eigen::Vector2d qd = randomVec(rng, 2, 2.0);
  const Eigen::Vector2d a = randomVec(rng, 2, 4.0);
  const Eigen::Vector2d b = randomVec(rng, 2, 4.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd bias = inverseDynamics(c, q, qd, zero);
  const Eigen::VectorXd ta = inverseDynamics(c, q, qd, a) - bias;
  const Eigen::VectorXd tb = inverseDynamics(c, q, qd, b) - bias;
  const Eigen::VectorXd tab = inverseDynamics(c, q, qd, a + 2.0 * b) - bias;
  CHECK((tab - (ta + 2.0 * tb)).norm() < 1e-10);
}

TEST_CASE("mass matrix is symmetric positive definite") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const KinematicChain c = randomChain(rng);
    const Eigen::VectorXd q = randomVec(rng, c.dof(), M_PI);
    const Eigen::MatrixXd m = massMatrix(c, q);
    CHECK((m - m.transpose()).norm() < 1e-10);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("1-link mass matrix is the parallel-axis inertia") {
  KinematicChain c;
  c.links.push_back({2.0, 0.3, 0.07, 0.9});
  Eigen::VectorXd q(1);
  q << 0.4;
  const Eigen::MatrixXd m = massMatrix(c, q);
  CHECK(std::abs(m(0, 0) - (0.07 + 2.0 * 0.3 * 0.3)) < 1e-12);
}

TEST_CASE("forward dynamics at equilibrium does not move") {
  const KinematicChain c = pendulum();
  ChainState s;
  s.q = Eigen::VectorXd(1);
  s.q << -M_PI / 2.0;
  s.qd = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const ChainState next =
      forwardDynamicsStep(c, s, zero, zero, FrictionModel{}, 1e-3);
  CHECK(std::abs(next.q(0) - s.q(0)) < 1e-12);
  CHECK(std::abs(next.qd(0)) < 1e-12);
}

TEST_CASE("undriven frictionless pendulum conserves energy") {
  KinematicChain c;
  c.links.push_back({1.0, 0.5, 1.0 / 12.0, 1.0});
  ChainState s;
  s.q = Eigen::VectorXd(1);
  s.q << -M_PI / 2.0 + 0.1;  // gentle swing near the bottom
  s.qd = Eigen::VectorXd::Zero(1);
  const double e0 = chainEnergy(c, s);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const double dt = 1e-4;
  double maxDrift = 0.0;
  for (int i = 0; i < 10000; ++i) {  // 1 s
    s = forwardDynamicsStep(c, s, zero, zero, FrictionModel{}, dt);
    maxDrift = std::max(maxDrift, std::abs(chainEnergy(c, s) - e0));
  }
  CHECK(maxDrift < 1e-4);
}

TEST_CASE("viscous friction dissipates joint speed") {
  const KinematicChain c = twoLink();
  FrictionModel friction;
  friction.viscous = Eigen::Vector2d(8.0, 8.0);
  ChainState s;
  s.q = Eigen::Vector2d(-M_PI / 2.0, 0.0);
  s.qd = Eigen::Vector2d(3.0, -2.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  double prev = s.qd.norm();
  for (int i = 0; i < 2000; ++i) {
    // hold gravity out of the picture so dissipation is the only effect
    KinematicChain noG = c;
    noG.gravity.setZero();
    s = forwardDynamicsStep(noG, s, zero, zero, friction, 1e-3);
    CHECK(s.qd.norm() <= prev + 1e-12);
    prev = s.qd.norm();
  }
  CHECK(prev < 0.1);
}

TEST_CASE("forward/inverse round trip reproduces the acceleration") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const KinematicChain c = randomChain(rng);
    ChainState s;
    s.q = randomVec(rng, c.dof(), M_PI);
    s.qd = randomVec(rng, c.dof(), 2.0);
    const Eigen::VectorXd qddTarget = randomVec(rng, c.dof(), 4.0);
    const Eigen::VectorXd tau = inverseDynamics(c, s.q, s.qd, qddTarget);
    const Eigen::VectorXd qdd = forwardDynamicsAccel(
        c, s, tau, Eigen::VectorXd::Zero(c.dof()), FrictionModel{});
    CHECK((qdd - qddTarget).norm() < 1e-8);
  }
}

TEST_CASE("pd torque arithmetic and clamping") {
  Eigen::VectorXd kp(1), kd(1), qt(1), q(1), qd(1), lim(1);
  kp << 50.0;
  kd << 2.0;
  qt << 0.1;
  q << 0.0;
  qd << 0.1;
  CHECK(std::abs(pdTorque(kp, kd, qt, q, qd)(0) - 4.8) < 1e-12);

  qt << 10.0;
  lim << 20.0;
  CHECK(pdTorque(kp, kd, qt, q, qd, lim)(0) == 20.0);

  qt << 0.0;
  q << 0.0;
  qd << 0.0;
  CHECK(pdTorque(kp, kd, qt, q, qd)(0) == 0.0);
}

TEST_CASE("acceleration estimation from velocity windows") {
  // constant velocity -> zero
  std::vector<Eigen::VectorXd> hist(5, Eigen::VectorXd::Constant(2, 1.5));
  CHECK(estimateAccel(hist, 0.01).norm() < 1e-12);

  // linear ramp with slope a
  const Eigen::Vector2d a(2.0, -1.0);
  hist.clear();
  for (int i = 0; i < 7; ++i)
    hist.push_back(Eigen::VectorXd(a * (i * 0.01) + Eigen::Vector2d(0.3, 0.4)));
  CHECK((estimateAccel(hist, 0.01) - a).norm() < 1e-9);

  // 3-frame window equals the central difference
  hist = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.3),
          Eigen::VectorXd::Constant(1, 1.8)};
  CHECK(std::abs(estimateAccel(hist, 0.1)(0) - (1.8 - 1.0) / 0.2) < 1e-12);

  std::vector<Eigen::VectorXd> tooShort = {Eigen::VectorXd::Constant(1, 1.0)};
  CHECK_THROWS_AS(estimateAccel(tooShort, 0.01), ValidationError);
}

TEST_CASE("external torque residual vanishes without external force") {
  Rng rng(41);
  const KinematicChain c = twoLink();
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d q = randomVec(rng, 2, M_PI);
    const Eigen::Vector2d qd = randomVec(rng, 2, 2.0);
    const Eigen::Vector2d qdd = randomVec(rng, 2, 4.0);
    const Eigen::VectorXd tauCmd = inverseDynamics(c, q, qd, qdd);
    const Eigen::VectorXd res =
        estimateExternalTorque(c, q, qd, qdd, tauCmd, FrictionModel{});
    CHECK(res.norm() < 1e-10);
  }
}

TEST_CASE("tip force recovery on a driven 2-link trajectory") {
  const KinematicChain c = twoLink();
  const Eigen::Vector2d force(5.0, 0.0);  // constant 5 N at the tip
  FrictionModel friction;
  friction.viscous = Eigen::Vector2d(0.08, 0.06);

  const double dtSim = 1e-4;
  const int steps = 20000;  // 2 s
  const Eigen::Vector2d kp(60.0, 60.0), kd(5.0, 5.0);

  ChainState s;
  s.q = Eigen::Vector2d(-M_PI / 2.0 + 0.3, 0.5);
  s.qd = Eigen::Vector2d::Zero();

  double sumSqExact = 0.0, sumSqTrue = 0.0;
  std::vector<Eigen::VectorXd> qdAt100Hz, tauAt100Hz, extTrueAt100Hz;
  std::vector<Eigen::VectorXd> qAt100Hz;

  for (int i = 0; i < steps; ++i) {
    const double t = i * dtSim;
    const Eigen::Vector2d qTarget(-M_PI / 2.0 + 0.3 + 0.4 * std::sin(M_PI * t),
                                  0.5 + 0.3 * std::cos(M_PI * t));
    const Eigen::VectorXd tauCmd = pdTorque(kp, kd, qTarget, s.q, s.qd);
    const Eigen::VectorXd tauExt = tipJacobian(c, s.q).transpose() * force;
    const Eigen::VectorXd qddExact =
        forwardDynamicsAccel(c, s, tauCmd, tauExt, friction);

    // exact-acceleration estimate is algebraically tight
    const Eigen::VectorXd est =
        estimateExternalTorque(c, s.q, s.qd, qddExact, tauCmd, friction);
    sumSqExact += (est - tauExt).squaredNorm();
    sumSqTrue += tauExt.squaredNorm();

    if (i % 100 == 0) {  // 100 Hz sensing
      qAt100Hz.push_back(s.q);
      qdAt100Hz.push_back(s.qd);
      tauAt100Hz.push_back(tauCmd);
      extTrueAt100Hz.push_back(tauExt);
    }
    ChainState next;
    next.qd = s.qd + dtSim * qddExact;
    next.q = s.q + dtSim * next.qd;
    s = next;
  }
  const double rmsExact = std::sqrt(sumSqExact / sumSqTrue);
  CHECK(rmsExact < 0.02);

  // finite-difference accelerations from the 100 Hz velocity stream
  double sumSqFd = 0.0, sumSqTrueFd = 0.0;
  for (std::size_t k = 1; k + 1 < qdAt100Hz.size(); ++k) {
    const std::vector<Eigen::VectorXd> window = {
        qdAt100Hz[k - 1], qdAt100Hz[k], qdAt100Hz[k + 1]};
    const Eigen::VectorXd qddFd = estimateAccel(window, 0.01);
    const Eigen::VectorXd est = estimateExternalTorque(
        c, qAt100Hz[k], qdAt100Hz[k], qddFd, tauAt100Hz[k], friction);
    sumSqFd += (est - extTrueAt100Hz[k]).squaredNorm();
    sumSqTrueFd += extTrueAt100Hz[k].squaredNorm();
  }
  const double rmsFd = std::sqrt(sumSqFd / sumSqTrueFd);
  CHECK(rmsFd < 0.10);
}

TEST_CASE("estimator recovers injected torques across random chains") {
  Rng rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const KinematicChain c = randomChain(rng);
    const int n = c.dof();
    FrictionModel friction;
    friction.viscous = Eigen::VectorXd::Constant(n, 0.05);
    ChainState s;
    s.q = randomVec(rng, n, 1.0);
    s.qd = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd tauExt = randomVec(rng, n, 2.0);
    const Eigen::VectorXd kp = Eigen::VectorXd::Constant(n, 40.0);
    const Eigen::VectorXd kd = Eigen::VectorXd::Constant(n, 3.0);
    const Eigen::VectorXd qHold = s.q;

    double sumSq = 0.0, sumSqTrue = 0.0;
    for (int i = 0; i < 5000; ++i) {
      const Eigen::VectorXd tauCmd = pdTorque(kp, kd, qHold, s.q, s.qd);
      const Eigen::VectorXd qdd =
          forwardDynamicsAccel(c, s, tauCmd, tauExt, friction);
      const Eigen::VectorXd est =
          estimateExternalTorque(c, s.q, s.qd, qdd, tauCmd, friction);
      sumSq += (est - tauExt).squaredNorm();
      sumSqTrue += tauExt.squaredNorm();
      ChainState next;
      next.qd = s.qd + 1e-4 * qdd;
      next.q = s.q + 1e-4 * next.qd;
      s = next;
    }
    CHECK(std::sqrt(sumSq / sumSqTrue) < 1e-8);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const KinematicChain c = twoLink();
  const Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd ok = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(inverseDynamics(c, bad, ok, ok), ValidationError);
  CHECK_THROWS_AS(inverseDynamics(c, ok, bad, ok), ValidationError);
  CHECK_THROWS_AS(estimateExternalTorque(c, ok, ok, ok, bad, FrictionModel{}),
                  ValidationError);
  KinematicChain badChain;
  CHECK_THROWS_AS(badChain.validate(), ValidationError);
  badChain.links.push_back({-1.0, 0.1, 0.0, 0.5});
  CHECK_THROWS_AS(badChain.validate(), ValidationError);
}
