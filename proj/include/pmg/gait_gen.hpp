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

#ifndef PMG_GAIT_GEN_HPP_
#define PMG_GAIT_GEN_HPP_

#include <array>
#include <memory>
#include <optional>

#include <Eigen/Core>

#include "pmg/gait_types.hpp"
#include "pmg/motion_data.hpp"
#include "pmg/robot_model.hpp"

namespace pmg {

inline constexpr double kMixtureEpsilon = 1e-6;
// Below this total |u_d| the generator holds the stand pose.
inline constexpr double kStandThreshold = 1e-4;
// Velocity commands are clamped to this multiple of the nominal scale.
inline constexpr double kCommandScaleLimit = 2.0;

// alpha_x = clip(|u| / scale, 0, 1).
double magnitude_factor(double u, double nominal_scale);

// q~_x = alpha q_clip + (1 - alpha) q_stand.
Eigen::VectorXd channel_motion(const Eigen::VectorXd& clip_q, double alpha,
                               const Eigen::VectorXd& q_stand);

// w_x = |u_x| / (sum |u_i| + eps).
std::array<double, 3> mixture_weights(const std::array<double, 3>& u_d,
                                      double epsilon = kMixtureEpsilon);

MixtureWeights compute_mixture(const RobotModel& model,
                               const std::array<double, 3>& u_d,
                               double epsilon = kMixtureEpsilon);

struct DynamicBlend {
  Eigen::VectorXd q;
  Eigen::Vector3d base_v = Eigen::Vector3d::Zero();
  double base_w = 0.0;
  std::array<ContactWindow, 2> contact;
  double period = 1.0;
};

// Convex mixture of the channel templates at phase. The weight left over by
// eps goes to q_stand. Contact centres use a weighted circular mean.
DynamicBlend blend_dynamic(const ClipLibrary& library,
                           const MixtureWeights& weights, double phase,
                           const Eigen::VectorXd& q_stand);

struct PostureOffset {
  Eigen::VectorXd q_s;
  std::array<double, 3> beta = {0.0, 0.0, 0.0};
};

// Sum over posture channels of the template at the commanded value minus the
// template at the neutral value.
PostureOffset posture_offset(const ClipLibrary& library,
                             const std::array<double, 3>& u_s,
                             const RobotModel& model);

struct PhaseState {
  double phase = 0.0;
  double period = 1.0;
};

PhaseState advance_phase(const PhaseState& state, double dt, double period);

// Posture clamped to the model ranges, velocity to +-2 nominal scales.
CommandVector clamp_command(const CommandVector& cmd, const RobotModel& model);

// Rate limiter applied to raw commands; rate <= 0 disables it.
class SlewLimiter {
 public:
  explicit SlewLimiter(double rate_per_s = 2.0) : rate_(rate_per_s) {}

  void reset(const CommandVector& state) { state_ = state; }
  CommandVector apply(const CommandVector& target, double dt);
  const CommandVector& state() const { return state_; }

 private:
  double rate_;
  CommandVector state_;
};

struct GeneratorOptions {
  double dt = 0.01;
  double epsilon = kMixtureEpsilon;
  double slew_rate = 2.0;  // units/s per channel, <= 0 to disable
  double initial_phase = 0.0;
};

// One generator session. Owns its phase; shares immutable model and clips.
class GaitGenerator {
 public:
  GaitGenerator(std::shared_ptr<const RobotModel> model,
                std::shared_ptr<const ClipLibrary> library,
                GeneratorOptions options = {});

  GaitFrame generate_frame(const CommandVector& raw_command);

  const RobotModel& model() const { return *model_; }
  const ClipLibrary& library() const { return *library_; }
  const GeneratorOptions& options() const { return options_; }
  const PhaseState& phase_state() const { return phase_; }
  long frame_count() const { return count_; }

 private:
  std::shared_ptr<const RobotModel> model_;
  std::shared_ptr<const ClipLibrary> library_;
  GeneratorOptions options_;
  PhaseState phase_;
  SlewLimiter slew_;
  std::optional<Eigen::VectorXd> previous_q_;
  std::array<ContactWindow, 2> last_contact_;
  long count_ = 0;
};

}  // namespace pmg

#endif  // PMG_GAIT_GEN_HPP_
