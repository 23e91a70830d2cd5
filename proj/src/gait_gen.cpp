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

#include "pmg/gait_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmg/error.hpp"

namespace pmg {

CommandVector CommandVector::neutral(const RobotModel& model) {
  CommandVector cmd;
  for (StaticChannel c : kStaticChannels) cmd[c] = model.posture_neutral(c);
  return cmd;
}

CommandVector CommandVector::make(const RobotModel& model, double vx,
                                  double vy, double wz) {
  CommandVector cmd = neutral(model);
  cmd.velocity = {vx, vy, wz};
  return cmd;
}

double magnitude_factor(double u, double nominal_scale) {
  return std::clamp(std::abs(u) / nominal_scale, 0.0, 1.0);
}

Eigen::VectorXd channel_motion(const Eigen::VectorXd& clip_q, double alpha,
                               const Eigen::VectorXd& q_stand) {
  return alpha * clip_q + (1.0 - alpha) * q_stand;
}

std::array<double, 3> mixture_weights(const std::array<double, 3>& u_d,
                                      double epsilon) {
  const double total = std::abs(u_d[0]) + std::abs(u_d[1]) + std::abs(u_d[2]);
  std::array<double, 3> w{};
  for (std::size_t i = 0; i < 3; ++i) w[i] = std::abs(u_d[i]) / (total + epsilon);
  return w;
}

MixtureWeights compute_mixture(const RobotModel& model,
                               const std::array<double, 3>& u_d,
                               double epsilon) {
  MixtureWeights m;
  m.epsilon = epsilon;
  m.w = mixture_weights(u_d, epsilon);
  for (DynamicChannel c : kDynamicChannels) {
    const auto i = static_cast<std::size_t>(c);
    m.alpha[i] = magnitude_factor(u_d[i], model.nominal_scale(c));
    m.direction[i] = u_d[i] < 0.0 ? -1 : 1;
  }
  return m;
}

DynamicBlend blend_dynamic(const ClipLibrary& library,
                           const MixtureWeights& weights, double phase,
                           const Eigen::VectorXd& q_stand) {
  DynamicBlend blend;
  blend.q = Eigen::VectorXd::Zero(q_stand.size());
  double total = 0.0;
  double period = 0.0;
  std::array<double, 2> range{0.0, 0.0};
  std::array<Eigen::Vector2d, 2> centre{Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero()};
  for (DynamicChannel c : kDynamicChannels) {
    const auto i = static_cast<std::size_t>(c);
    const double w = weights.w[i];
    if (w <= 0.0) continue;
    const MotionClip* clip = library.dynamic(c, weights.direction[i]);
    if (!clip) {
      throw Error(ErrorCode::kState,
                  "missing clip for active channel " +
                      std::string(channel_name(c)) +
                      (weights.direction[i] > 0 ? "+" : "-"));
    }
    const ClipSample s = sample_clip(*clip, phase);
    const double alpha = weights.alpha[i];
    blend.q += w * channel_motion(s.q, alpha, q_stand);
    blend.base_v += w * alpha * s.base_v;
    blend.base_w += w * alpha * s.base_w;
    period += w * clip->period;
    for (Foot f : kFeet) {
      const auto fi = static_cast<std::size_t>(f);
      const double angle = 2.0 * std::numbers::pi * clip->window(f).mu;
      centre[fi] += w * Eigen::Vector2d(std::cos(angle), std::sin(angle));
      range[fi] += w * clip->window(f).sigma;
    }
    total += w;
  }
  if (total <= 0.0) {
    blend.q = q_stand;
    return blend;
  }
  blend.q += (1.0 - total) * q_stand;
  blend.period = period / total;
  for (Foot f : kFeet) {
    const auto fi = static_cast<std::size_t>(f);
    const double angle = std::atan2(centre[fi].y(), centre[fi].x());
    blend.contact[fi] = {wrap_phase(angle / (2.0 * std::numbers::pi)),
                         range[fi] / total};
  }
  return blend;
}

PostureOffset posture_offset(const ClipLibrary& library,
                             const std::array<double, 3>& u_s,
                             const RobotModel& model) {
  PostureOffset out;
  out.q_s = Eigen::VectorXd::Zero(static_cast<long>(model.dof()));
  for (StaticChannel c : kStaticChannels) {
    const auto i = static_cast<std::size_t>(c);
    const double neutral = model.posture_neutral(c);
    const Range& range = model.posture_range(c);
    const double u = range.clamp(u_s[i]);
    const double delta = u - neutral;
    if (std::abs(delta) < 1e-12) continue;
    const double extent = delta > 0.0 ? range.max - neutral : neutral - range.min;
    out.beta[i] = extent > 0.0 ? std::min(std::abs(delta) / extent, 1.0) : 0.0;
    const StaticClip* clip = library.posture(c);
    if (!clip) {
      throw Error(ErrorCode::kState, "posture channel " +
                                         std::string(channel_name(c)) +
                                         " commanded but no static clip exists");
    }
    out.q_s += sample_static(*clip, u) - sample_static(*clip, neutral);
  }
  return out;
}

PhaseState advance_phase(const PhaseState& state, double dt, double period) {
  return {wrap_phase(state.phase + dt / period), period};
}

CommandVector clamp_command(const CommandVector& cmd, const RobotModel& model) {
  CommandVector out;
  for (DynamicChannel c : kDynamicChannels) {
    const double limit = kCommandScaleLimit * model.nominal_scale(c);
    out[c] = std::clamp(cmd[c], -limit, limit);
  }
  for (StaticChannel c : kStaticChannels) out[c] = model.posture_range(c).clamp(cmd[c]);
  return out;
}

CommandVector SlewLimiter::apply(const CommandVector& target, double dt) {
  if (rate_ <= 0.0) {
    state_ = target;
    return state_;
  }
  const double step = rate_ * dt;
  for (std::size_t i = 0; i < 3; ++i) {
    state_.velocity[i] += std::clamp(target.velocity[i] - state_.velocity[i], -step, step);
    state_.posture[i] += std::clamp(target.posture[i] - state_.posture[i], -step, step);
  }
  return state_;
}

GaitGenerator::GaitGenerator(std::shared_ptr<const RobotModel> model,
                             std::shared_ptr<const ClipLibrary> library,
                             GeneratorOptions options)
    : model_(std::move(model)),
      library_(std::move(library)),
      options_(options),
      slew_(options.slew_rate) {
  if (!model_ || !library_) {
    throw Error(ErrorCode::kState, "generator session is not bound to a model and clip set");
  }
  if (!(options_.dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  if (!(options_.epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  }
  phase_.phase = wrap_phase(options_.initial_phase);
  slew_.reset(CommandVector::neutral(*model_));
  for (auto& w : last_contact_) w = {0.0, 0.5};
}

GaitFrame GaitGenerator::generate_frame(const CommandVector& raw_command) {
  const RobotModel& model = *model_;
  GaitFrame frame;
  frame.t = static_cast<double>(count_) * options_.dt;
  frame.phase = phase_.phase;
  frame.command = clamp_command(slew_.apply(clamp_command(raw_command, model), options_.dt), model);

  const auto& u_d = frame.command.velocity;
  const double magnitude = std::abs(u_d[0]) + std::abs(u_d[1]) + std::abs(u_d[2]);
  frame.standing = magnitude < kStandThreshold;

  Eigen::VectorXd q_d;
  if (frame.standing) {
    q_d = model.q_stand;
    frame.contact = {true, true};
    frame.contact_params = last_contact_;
    frame.period = phase_.period;
  } else {
    frame.weights = compute_mixture(model, u_d, options_.epsilon);
    DynamicBlend blend = blend_dynamic(*library_, frame.weights, phase_.phase, model.q_stand);
    q_d = std::move(blend.q);
    frame.base_v = blend.base_v;
    frame.base_w = blend.base_w;
    frame.contact_params = blend.contact;
    frame.period = blend.period;
    for (Foot f : kFeet) {
      frame.contact[static_cast<std::size_t>(f)] =
          contact_at_phase(blend.contact[static_cast<std::size_t>(f)], phase_.phase);
    }
    last_contact_ = blend.contact;
  }

  PostureOffset posture = posture_offset(*library_, frame.command.posture, model);
  frame.weights.beta = posture.beta;
  frame.q_ref = q_d + posture.q_s;
  if (previous_q_) {
    frame.qd_ref = (frame.q_ref - *previous_q_) / options_.dt;
  } else {
    frame.qd_ref = Eigen::VectorXd::Zero(frame.q_ref.size());
  }
  previous_q_ = frame.q_ref;

  if (!frame.standing) phase_ = advance_phase(phase_, options_.dt, frame.period);
  ++count_;
  return frame;
}

}  // namespace pmg
