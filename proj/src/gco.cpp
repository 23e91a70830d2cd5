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

#include "pmg/gco.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmg/error.hpp"

namespace pmg {
namespace {

struct ContactKinematics {
  std::vector<FootState> feet;
};

ContactKinematics contact_feet(const RobotModel& model, const GaitFrame& frame) {
  ContactKinematics k;
  for (Foot f : kFeet) {
    if (frame.in_contact(f)) {
      k.feet.push_back(foot_state(model, frame.q_ref, frame.qd_ref, f));
    }
  }
  return k;
}

double max_slip(const std::vector<FootState>& feet, const Eigen::Vector2d& v,
                double w) {
  double worst = 0.0;
  for (const FootState& s : feet) {
    worst = std::max(worst, foot_planar_velocity(v, w, s).norm());
  }
  return worst;
}

BaseCorrection solve(const RobotModel& model, const std::vector<FootState>& feet,
                     const BasePrior& prior) {
  BaseCorrection c;
  if (feet.empty()) return c;
  const double inv = 1.0 / static_cast<double>(feet.size());
  double yaw = 0.0;
  for (const FootState& s : feet) yaw -= s.yaw_rate;
  yaw *= inv;
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double z = 0.0;
  const double base_z = prior.height - model.h_stand;
  for (const FootState& s : feet) {
    const Eigen::Vector2d p = s.position.head<2>();
    v -= s.linear_velocity.head<2>() + yaw * Eigen::Vector2d(-p.y(), p.x());
    z += base_z + s.position.z();
  }
  v *= inv;
  z *= inv;
  c.dv = v - prior.v;
  c.dw = yaw - prior.w;
  c.dh = model.h_ground - z;
  return c;
}

}  // namespace

BasePrior BasePrior::from_command(const CommandVector& cmd) {
  BasePrior p;
  p.v = {cmd[DynamicChannel::kVx], cmd[DynamicChannel::kVy]};
  p.w = cmd[DynamicChannel::kWz];
  p.height = cmd[StaticChannel::kHeight];
  return p;
}

Eigen::Vector2d foot_planar_velocity(const Eigen::Vector2d& base_v, double base_w,
                                     const FootState& foot) {
  const Eigen::Vector2d p = foot.position.head<2>();
  return base_v + base_w * Eigen::Vector2d(-p.y(), p.x()) +
         foot.linear_velocity.head<2>();
}

BaseCorrection pinned_base_velocity(const RobotModel& model,
                                    const GaitFrame& frame,
                                    const BasePrior& prior) {
  return solve(model, contact_feet(model, frame).feet, prior);
}

BaseCorrection pinned_base_velocity(const RobotModel& model,
                                    const GaitFrame& frame) {
  return pinned_base_velocity(model, frame, BasePrior::from_command(frame.command));
}

GcoResult optimize_command(const RobotModel& model, const GaitFrame& frame,
                           const CommandVector& nominal) {
  const BasePrior prior = BasePrior::from_command(nominal);
  const ContactKinematics k = contact_feet(model, frame);
  GcoResult r;
  r.correction = solve(model, k.feet, prior);
  r.u_prime.v = prior.v + r.correction.dv;
  r.u_prime.w = prior.w + r.correction.dw;
  r.u_prime.pitch = nominal[StaticChannel::kPitch];
  r.u_prime.roll = nominal[StaticChannel::kRoll];
  r.u_prime.height = prior.height + r.correction.dh;
  r.slip_pre = max_slip(k.feet, prior.v, prior.w);
  r.slip_post = max_slip(k.feet, r.u_prime.v, r.u_prime.w);
  r.stance_residual = k.feet.size() > 1 ? r.slip_post : 0.0;
  if (!(r.u_prime.height > 0.0)) {
    throw Error(ErrorCode::kNumeric, "optimized base height is not positive");
  }
  return r;
}

void apply_gco(const RobotModel& model, GaitFrame& frame) {
  const GcoResult r = optimize_command(model, frame, frame.command);
  frame.u_prime = r.u_prime;
  frame.correction = r.correction;
  frame.slip_pre = r.slip_pre;
  frame.slip_post = r.slip_post;
  frame.stance_residual = r.stance_residual;
}

void apply_passthrough(const RobotModel& model, GaitFrame& frame) {
  const BasePrior prior = BasePrior::from_command(frame.command);
  const ContactKinematics k = contact_feet(model, frame);
  frame.u_prime.v = prior.v;
  frame.u_prime.w = prior.w;
  frame.u_prime.pitch = frame.command[StaticChannel::kPitch];
  frame.u_prime.roll = frame.command[StaticChannel::kRoll];
  frame.u_prime.height = prior.height;
  frame.correction = {};
  frame.slip_pre = max_slip(k.feet, prior.v, prior.w);
  frame.slip_post = frame.slip_pre;
  frame.stance_residual = 0.0;
}

CommandFilter::CommandFilter(double cutoff_hz, double dt) {
  if (!(cutoff_hz > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "filter cutoff and dt must be > 0");
  }
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  gain_ = dt / (dt + tau);
}

OptimizedCommand CommandFilter::apply(const OptimizedCommand& u) {
  if (!primed_) {
    state_ = u;
    primed_ = true;
    return state_;
  }
  state_.v += gain_ * (u.v - state_.v);
  state_.w += gain_ * (u.w - state_.w);
  state_.pitch += gain_ * (u.pitch - state_.pitch);
  state_.roll += gain_ * (u.roll - state_.roll);
  state_.height += gain_ * (u.height - state_.height);
  return state_;
}

std::vector<BasePose> integrate_base(const std::vector<GaitFrame>& frames,
                                     double dt) {
  std::vector<BasePose> poses;
  poses.reserve(frames.size() + 1);
  BasePose pose;
  if (!frames.empty()) pose.z = frames.front().u_prime.height;
  poses.push_back(pose);
  for (const GaitFrame& f : frames) {
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    pose.x += dt * (c * f.u_prime.v.x() - s * f.u_prime.v.y());
    pose.y += dt * (s * f.u_prime.v.x() + c * f.u_prime.v.y());
    pose.heading += dt * f.u_prime.w;
    pose.z = f.u_prime.height;
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace pmg
