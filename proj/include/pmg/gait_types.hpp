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

#ifndef PMG_GAIT_TYPES_HPP_
#define PMG_GAIT_TYPES_HPP_

#include <array>

#include <Eigen/Core>

#include "pmg/motion_data.hpp"
#include "pmg/robot_model.hpp"

namespace pmg {

// Dynamic command u_d = (vx, vy, wz) and posture command u_s = (pitch, roll,
// height).
struct CommandVector {
  std::array<double, 3> velocity = {0.0, 0.0, 0.0};
  std::array<double, 3> posture = {0.0, 0.0, 0.0};

  double& operator[](DynamicChannel c) {
    return velocity[static_cast<std::size_t>(c)];
  }
  double operator[](DynamicChannel c) const {
    return velocity[static_cast<std::size_t>(c)];
  }
  double& operator[](StaticChannel c) {
    return posture[static_cast<std::size_t>(c)];
  }
  double operator[](StaticChannel c) const {
    return posture[static_cast<std::size_t>(c)];
  }

  bool operator==(const CommandVector&) const = default;

  // Zero velocity with the model's neutral posture.
  static CommandVector neutral(const RobotModel& model);
  static CommandVector make(const RobotModel& model, double vx, double vy,
                            double wz);
};

struct MixtureWeights {
  std::array<double, 3> alpha = {0.0, 0.0, 0.0};
  std::array<double, 3> w = {0.0, 0.0, 0.0};
  std::array<int, 3> direction = {1, 1, 1};  // sign of each velocity channel
  std::array<double, 3> beta = {0.0, 0.0, 0.0};
  double epsilon = 1e-6;

  double total() const { return w[0] + w[1] + w[2]; }
};

struct BaseCorrection {
  Eigen::Vector2d dv = Eigen::Vector2d::Zero();
  double dw = 0.0;
  double dh = 0.0;
};

// u'(phi) = (v', w', pitch, roll, h').
struct OptimizedCommand {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double w = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double height = 0.0;

  std::array<double, 6> as_array() const {
    return {v.x(), v.y(), w, pitch, roll, height};
  }
};

struct GaitFrame {
  double t = 0.0;
  double phase = 0.0;
  Eigen::VectorXd q_ref;
  Eigen::VectorXd qd_ref;
  std::array<bool, 2> contact = {true, true};
  // Blended contact windows (mu_d, r_d) and weighted period T_u.
  std::array<ContactWindow, 2> contact_params;
  double period = 1.0;
  bool standing = true;
  CommandVector command;  // clamped, slew-limited command used for this frame
  MixtureWeights weights;
  // Blended template base motion (heading frame).
  Eigen::Vector3d base_v = Eigen::Vector3d::Zero();
  double base_w = 0.0;

  // Filled by ground-aware command optimization.
  OptimizedCommand u_prime;
  BaseCorrection correction;
  double slip_pre = 0.0;
  double slip_post = 0.0;
  double stance_residual = 0.0;

  bool in_contact(Foot f) const { return contact[static_cast<std::size_t>(f)]; }
};

}  // namespace pmg

#endif  // PMG_GAIT_TYPES_HPP_
