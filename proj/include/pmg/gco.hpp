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

#ifndef PMG_GCO_HPP_
#define PMG_GCO_HPP_

#include <vector>

#include <Eigen/Core>

#include "pmg/gait_types.hpp"
#include "pmg/robot_model.hpp"

namespace pmg {

// Base motion prior used by the optimizer: commanded planar velocity, yaw
// rate and base height.
struct BasePrior {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double w = 0.0;
  double height = 0.0;

  static BasePrior from_command(const CommandVector& cmd);
};

// Planar world velocity of a foot given base motion (v, w) and its
// leg-relative state: v + w z x p + p_dot.
Eigen::Vector2d foot_planar_velocity(const Eigen::Vector2d& base_v, double base_w,
                                     const FootState& foot);

// Corrections that hold every contact foot stationary and on the ground.
// Zero when no foot is in contact.
BaseCorrection pinned_base_velocity(const RobotModel& model,
                                    const GaitFrame& frame,
                                    const BasePrior& prior);
BaseCorrection pinned_base_velocity(const RobotModel& model,
                                    const GaitFrame& frame);

struct GcoResult {
  OptimizedCommand u_prime;
  BaseCorrection correction;
  double slip_pre = 0.0;         // max contact-foot planar speed, prior motion
  double slip_post = 0.0;        // same after correction
  double stance_residual = 0.0;  // inter-foot disagreement in double stance
};

GcoResult optimize_command(const RobotModel& model, const GaitFrame& frame,
                           const CommandVector& nominal);

// Writes the result into the frame's u_prime / correction / slip slots.
// q_ref is left untouched.
void apply_gco(const RobotModel& model, GaitFrame& frame);

// Passes the nominal command through and records the uncorrected slip.
void apply_passthrough(const RobotModel& model, GaitFrame& frame);

// First-order low-pass on the exported command channels.
class CommandFilter {
 public:
  CommandFilter(double cutoff_hz, double dt);

  OptimizedCommand apply(const OptimizedCommand& u);
  void reset() { primed_ = false; }

 private:
  double gain_;
  bool primed_ = false;
  OptimizedCommand state_;
};

struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double z = 0.0;
};

// Forward Euler of (v', w') in the heading frame; z follows h'. Returns
// frames.size() + 1 poses starting at the origin.
std::vector<BasePose> integrate_base(const std::vector<GaitFrame>& frames,
                                     double dt);

}  // namespace pmg

#endif  // PMG_GCO_HPP_
