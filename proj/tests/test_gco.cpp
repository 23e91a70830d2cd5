// Copyright 2026 The PMG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "humanoid.hpp"
#include "pmg/error.hpp"
#include "pmg/gait_gen.hpp"
#include "pmg/gco.hpp"

namespace pmg {
namespace {

using fixture::Rig;

// Joint velocities for the left leg that produce a requested leg-relative
// (linear, yaw rate) foot motion.
Eigen::VectorXd left_leg_qd(const RobotModel& m, const Eigen::VectorXd& q,
                            const Eigen::Vector4d& target) {
  Eigen::Matrix<double, 4, 6> j;
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m.dof());
    e[fixture::joint_of(Foot::kLeft, k)] = 1.0;
    const FootVelocity v = fk_foot_velocity(m, q, e, Foot::kLeft);
    j.col(k) << v.linear, v.yaw_rate;
  }
  const Eigen::Matrix<double, 6, 1> leg = j.completeOrthogonalDecomposition().solve(target);
  Eigen::VectorXd qd = Eigen::VectorXd::Zero(m.dof());
  for (int k = 0; k < 6; ++k) qd[fixture::joint_of(Foot::kLeft, k)] = leg[k];
  return qd;
}

GaitFrame stand_frame(const RobotModel& m) {
  GaitFrame f;
  f.q_ref = m.q_stand;
  f.qd_ref = Eigen::VectorXd::Zero(m.dof());
  f.command = CommandVector::neutral(m);
  return f;
}

Eigen::Vector2d world_foot_velocity(const RobotModel& m, const GaitFrame& f, Foot foot) {
  const FootState s = foot_state(m, f.q_ref, f.qd_ref, foot);
  const Eigen::Vector2d p = s.position.head<2>();
  return f.u_prime.v + f.u_prime.w * Eigen::Vector2d(-p.y(), p.x()) + s.linear_velocity.head<2>();
}

std::vector<GaitFrame> run(const Rig& rig, const CommandVector& cmd, int n, double phase = 0.0) {
  GeneratorOptions o;
  o.slew_rate = 0.0;
  o.initial_phase = phase;
  GaitGenerator gen(rig.model, rig.library, o);
  std::vector<GaitFrame> frames;
  for (int k = 0; k < n; ++k) {
    frames.push_back(gen.generate_frame(cmd));
    apply_gco(*rig.model, frames.back());
  }
  return frames;
}

TEST(PinnedBaseVelocity, BackwardSweepingFootImpliesForwardBase) {
  const RobotModel m = fixture::humanoid_model();
  GaitFrame f = stand_frame(m);
  f.qd_ref = left_leg_qd(m, f.q_ref, {-1.0, 0.0, 0.0, 0.0});
  f.contact = {true, false};
  f.command[DynamicChannel::kVx] = 1.0;
  const FootVelocity check = fk_foot_velocity(m, f.q_ref, f.qd_ref, Foot::kLeft);
  ASSERT_LT((check.linear - Eigen::Vector3d(-1, 0, 0)).norm(), 1e-12);
  const BaseCorrection c = pinned_base_velocity(m, f);
  EXPECT_LT(c.dv.norm(), 1e-12);
  EXPECT_LT(std::abs(c.dw), 1e-12);
  const GcoResult r = optimize_command(m, f, f.command);
  EXPECT_NEAR(r.u_prime.v.x(), 1.0, 1e-12);
  EXPECT_NEAR(r.u_prime.v.y(), 0.0, 1e-12);
}

TEST(PinnedBaseVelocity, YawingFootIsCancelledByBaseYaw) {
  const RobotModel m = fixture::humanoid_model();
  GaitFrame f = stand_frame(m);
  f.qd_ref = left_leg_qd(m, f.q_ref, {0.0, 0.0, 0.0, 0.5});
  f.contact = {true, false};
  const GcoResult r = optimize_command(m, f, f.command);
  EXPECT_NEAR(r.u_prime.w, -0.5, 1e-12);
  // The foot sits off the base axis so the base must also translate.
  f.u_prime = r.u_prime;
  EXPECT_LT(world_foot_velocity(m, f, Foot::kLeft).norm(), 1e-12);
  EXPECT_GT(r.u_prime.v.norm(), 0.01);
}

TEST(PinnedBaseVelocity, FlightPhaseGivesZeroCorrection) {
  const RobotModel m = fixture::humanoid_model();
  GaitFrame f = stand_frame(m);
  f.qd_ref = left_leg_qd(m, f.q_ref, {1.0, 0.5, 0.0, 0.2});
  f.contact = {false, false};
  f.command[DynamicChannel::kVx] = 0.4;
  const BaseCorrection c = pinned_base_velocity(m, f);
  EXPECT_EQ(c.dv, Eigen::Vector2d::Zero());
  EXPECT_EQ(c.dw, 0.0);
  EXPECT_EQ(c.dh, 0.0);
  apply_gco(m, f);
  EXPECT_EQ(f.u_prime.v.x(), 0.4);
  EXPECT_EQ(f.slip_pre, 0.0);
}

TEST(PinnedBaseVelocity, HeightCorrectionGroundsFoot) {
  RobotModel m = fixture::humanoid_model();
  GaitFrame f = stand_frame(m);
  f.contact = {true, false};
  const double z = fk_foot(m, f.q_ref, Foot::kLeft).z();
  m.h_ground = z - 0.01;  // foot hovers 1 cm above the ground
  EXPECT_NEAR(pinned_base_velocity(m, f).dh, -0.01, 1e-15);
}

TEST(OptimizeCommand, ZeroCommandStands) {
  const Rig rig = fixture::make_rig();
  GaitFrame f = run(rig, CommandVector::neutral(*rig.model), 1).front();
  EXPECT_EQ(f.u_prime.v, Eigen::Vector2d::Zero());
  EXPECT_EQ(f.u_prime.w, 0.0);
  EXPECT_EQ(f.u_prime.pitch, 0.0);
  EXPECT_EQ(f.u_prime.roll, 0.0);
  EXPECT_NEAR(f.u_prime.height, rig.model->h_stand + f.correction.dh, 1e-15);
  EXPECT_NEAR(f.correction.dh, 0.0, 1e-12);
}

TEST(OptimizeCommand, PosturePassesThrough) {
  const Rig rig = fixture::make_rig();
  CommandVector cmd = CommandVector::make(*rig.model, 0.2, 0, 0);
  cmd[StaticChannel::kPitch] = 0.3;
  cmd[StaticChannel::kRoll] = -0.1;
  for (const GaitFrame& f : run(rig, cmd, 50)) {
    EXPECT_EQ(f.u_prime.pitch, 0.3);
    EXPECT_EQ(f.u_prime.roll, -0.1);
  }
}

TEST(OptimizeCommand, SelfConsistentClipIsFixedPoint) {
  const Rig rig = fixture::make_rig();
  for (DynamicChannel c : kDynamicChannels) {
    CommandVector cmd = CommandVector::neutral(*rig.model);
    cmd[c] = rig.model->nominal_scale(c);
    const std::vector<GaitFrame> frames = run(rig, cmd, 160);
    for (std::size_t k = 1; k < frames.size(); ++k) {
      const GaitFrame& f = frames[k];
      if (!f.contact[0] && !f.contact[1]) continue;
      // qd_ref is a backward difference, so on a touchdown frame it still
      // carries the swing velocity.
      const bool touchdown = (f.contact[0] && !frames[k - 1].contact[0]) ||
                             (f.contact[1] && !frames[k - 1].contact[1]);
      if (touchdown) continue;
      EXPECT_LT(f.correction.dv.norm(), 1e-3) << channel_name(c) << " frame " << k;
      EXPECT_LT(std::abs(f.correction.dw), 1e-3) << channel_name(c) << " frame " << k;
      EXPECT_LT(std::abs(f.correction.dh), 1e-3) << channel_name(c) << " frame " << k;
    }
  }
}

TEST(OptimizeCommand, HalfScaleMixtureSlipsUntilCorrected) {
  fixture::HumanoidSpec spec;
  spec.sigma = 0.3;  // overlapping stance windows give double support
  const Rig rig = fixture::make_rig(spec);
  const RobotModel& m = *rig.model;
  const std::vector<GaitFrame> frames = run(rig, CommandVector::make(m, 0.15, 0.15, 0.0), 160);
  double worst_pre = 0.0;
  int single = 0, dbl = 0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const GaitFrame& f = frames[k];
    const int n = f.contact[0] + f.contact[1];
    if (n == 0) continue;
    worst_pre = std::max(worst_pre, f.slip_pre);
    if (n == 1) {
      ++single;
      const Foot foot = f.contact[0] ? Foot::kLeft : Foot::kRight;
      EXPECT_LE(world_foot_velocity(m, f, foot).norm(), 1e-9);
      EXPECT_LE(f.slip_post, 1e-9);
      EXPECT_EQ(f.stance_residual, 0.0);
    } else {
      ++dbl;
      const Eigen::Vector2d a = world_foot_velocity(m, f, Foot::kLeft);
      const Eigen::Vector2d b = world_foot_velocity(m, f, Foot::kRight);
      EXPECT_LE(f.slip_post, (a - b).norm() + 1e-12);
      EXPECT_NEAR(f.slip_post, 0.5 * (a - b).norm(), 1e-12);
      EXPECT_EQ(f.stance_residual, f.slip_post);
    }
    // Mean contact height sits on the ground after correction.
    double z = 0.0;
    for (Foot foot : kFeet) {
      if (f.in_contact(foot)) z += f.u_prime.height - m.h_stand + fk_foot(m, f.q_ref, foot).z();
    }
    EXPECT_NEAR(z / n, m.h_ground, 1e-12);
  }
  EXPECT_GT(single, 0);
  EXPECT_GT(dbl, 0);
  EXPECT_GT(worst_pre, 0.05);
}

TEST(OptimizeCommand, NeverTouchesJointReference) {
  const Rig rig = fixture::make_rig();
  GeneratorOptions o;
  GaitGenerator gen(rig.model, rig.library, o);
  for (int k = 0; k < 50; ++k) {
    GaitFrame f = gen.generate_frame(CommandVector::make(*rig.model, 0.1, 0.2, -0.3));
    const Eigen::VectorXd q = f.q_ref, qd = f.qd_ref;
    apply_gco(*rig.model, f);
    EXPECT_EQ(f.q_ref, q);
    EXPECT_EQ(f.qd_ref, qd);
  }
}

TEST(ApplyPassthrough, RecordsSlipWithoutCorrecting) {
  const Rig rig = fixture::make_rig();
  GaitGenerator gen(rig.model, rig.library, GeneratorOptions{.slew_rate = 0.0});
  const CommandVector cmd = CommandVector::make(*rig.model, 0.15, 0.15, 0.0);
  gen.generate_frame(cmd);
  GaitFrame f = gen.generate_frame(cmd);
  GaitFrame g = f;
  apply_passthrough(*rig.model, f);
  apply_gco(*rig.model, g);
  EXPECT_EQ(f.u_prime.v, Eigen::Vector2d(0.15, 0.15));
  EXPECT_EQ(f.slip_post, f.slip_pre);
  EXPECT_DOUBLE_EQ(f.slip_pre, g.slip_pre);
}

TEST(CommandFilter, FirstOrderStepResponse) {
  CommandFilter filter(10.0, 0.01);
  const double gain = 0.01 / (0.01 + 1.0 / (2 * std::numbers::pi * 10.0));
  OptimizedCommand zero, one;
  one.v = {1.0, 0.0};
  one.height = 1.0;
  EXPECT_EQ(filter.apply(zero).v.x(), 0.0);
  double expect = 0.0;
  for (int k = 0; k < 20; ++k) {
    expect += gain * (1.0 - expect);
    const OptimizedCommand out = filter.apply(one);
    EXPECT_NEAR(out.v.x(), expect, 1e-15);
    EXPECT_NEAR(out.height, expect, 1e-15);
  }
  filter.reset();
  EXPECT_EQ(filter.apply(zero).v.x(), 0.0);
  EXPECT_THROW(CommandFilter(0.0, 0.01), Error);
}

std::vector<GaitFrame> constant_frames(int n, double vx, double w) {
  std::vector<GaitFrame> frames(static_cast<std::size_t>(n));
  for (GaitFrame& f : frames) {
    f.u_prime.v = {vx, 0.0};
    f.u_prime.w = w;
    f.u_prime.height = 0.8;
  }
  return frames;
}

TEST(IntegrateBase, ConstantVelocityDisplaces) {
  const std::vector<BasePose> p = integrate_base(constant_frames(100, 1.0, 0.0), 0.01);
  ASSERT_EQ(p.size(), 101u);
  EXPECT_NEAR(p.back().x, 1.0, 1e-12);
  EXPECT_NEAR(p.back().y, 0.0, 1e-15);
  EXPECT_EQ(p.back().z, 0.8);
}

TEST(IntegrateBase, ConstantYawRateReversesHeading) {
  const std::vector<BasePose> p = integrate_base(constant_frames(100, 0.0, std::numbers::pi), 0.01);
  EXPECT_NEAR(p.back().heading, std::numbers::pi, 1e-12);
}

TEST(IntegrateBase, ConvergesUnderStepRefinement) {
  // Smooth schedule v(t), w(t) over 2 s; exact pose from a fine
  // trapezoidal quadrature of the heading ODE.
  auto v = [](double t) { return 0.5 + 0.3 * std::sin(2 * t); };
  auto w = [](double t) { return 0.8 * std::cos(1.5 * t); };
  auto heading = [](double t) { return 0.8 / 1.5 * std::sin(1.5 * t); };
  const double duration = 2.0;
  double xr = 0.0, yr = 0.0;
  const int fine = 200000;
  for (int k = 0; k < fine; ++k) {
    const double a = duration * k / fine, b = duration * (k + 1) / fine;
    xr += 0.5 * (b - a) * (v(a) * std::cos(heading(a)) + v(b) * std::cos(heading(b)));
    yr += 0.5 * (b - a) * (v(a) * std::sin(heading(a)) + v(b) * std::sin(heading(b)));
  }
  double prev = 0.0;
  for (int level = 0; level < 4; ++level) {
    const double dt = 0.02 / (1 << level);
    const int n = static_cast<int>(std::lround(duration / dt));
    std::vector<GaitFrame> frames(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      frames[static_cast<std::size_t>(k)].u_prime.v = {v(k * dt), 0.0};
      frames[static_cast<std::size_t>(k)].u_prime.w = w(k * dt);
      frames[static_cast<std::size_t>(k)].u_prime.height = 0.8;
    }
    const BasePose end = integrate_base(frames, dt).back();
    const double err = std::hypot(end.x - xr, end.y - yr);
    EXPECT_LT(err, 0.5 * dt);
    if (level > 0) EXPECT_NEAR(prev / err, 2.0, 0.3);
    prev = err;
  }
}

}  // namespace
}  // namespace pmg
