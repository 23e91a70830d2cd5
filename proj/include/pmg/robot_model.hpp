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

#ifndef PMG_ROBOT_MODEL_HPP_
#define PMG_ROBOT_MODEL_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pmg {

enum class Foot { kLeft = 0, kRight = 1 };
inline constexpr std::array<Foot, 2> kFeet = {Foot::kLeft, Foot::kRight};

std::string_view foot_name(Foot foot);
Foot parse_foot(std::string_view name);

// Velocity command channels and posture command channels.
enum class DynamicChannel { kVx = 0, kVy = 1, kWz = 2 };
enum class StaticChannel { kPitch = 0, kRoll = 1, kHeight = 2 };
inline constexpr std::array<DynamicChannel, 3> kDynamicChannels = {
    DynamicChannel::kVx, DynamicChannel::kVy, DynamicChannel::kWz};
inline constexpr std::array<StaticChannel, 3> kStaticChannels = {
    StaticChannel::kPitch, StaticChannel::kRoll, StaticChannel::kHeight};

std::string_view channel_name(DynamicChannel channel);
std::string_view channel_name(StaticChannel channel);
DynamicChannel parse_dynamic_channel(std::string_view name);
StaticChannel parse_static_channel(std::string_view name);

struct Range {
  double min = 0.0;
  double max = 0.0;
  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
  bool contains(double v) const { return v >= min && v <= max; }
};

// One element of a serial leg chain. The offset is expressed in the frame of
// the previous element; a revolute joint then rotates about `axis`. Elements
// with joint < 0 are rigid segments (foot sole, fixed brackets).
struct ChainLink {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
  int joint = -1;

  bool is_fixed() const { return joint < 0; }
};

struct RobotModel {
  std::string name;
  std::vector<std::string> joint_names;
  std::array<std::vector<ChainLink>, 2> chains;
  Eigen::VectorXd q_stand;
  // Nominal scale per dynamic channel: vx, vy [m/s], wz [rad/s].
  std::array<double, 3> nominal_scales = {1.0, 1.0, 1.0};
  // Admissible posture commands: pitch, roll [rad], height [m].
  std::array<Range, 3> posture_ranges;
  // Ground height in the base frame with the legs at q_stand.
  double h_ground = 0.0;
  // Base height above ground at the stand pose; defaults to -h_ground.
  double h_stand = 0.0;
  // Optional, either empty or one entry per joint. Metadata only.
  std::vector<Range> joint_limits;

  std::size_t dof() const { return joint_names.size(); }
  const std::vector<ChainLink>& chain(Foot foot) const {
    return chains[static_cast<std::size_t>(foot)];
  }
  double nominal_scale(DynamicChannel c) const {
    return nominal_scales[static_cast<std::size_t>(c)];
  }
  const Range& posture_range(StaticChannel c) const {
    return posture_ranges[static_cast<std::size_t>(c)];
  }
  // Neutral posture command value for a channel: 0 for pitch/roll, h_stand
  // for height.
  double posture_neutral(StaticChannel c) const {
    return c == StaticChannel::kHeight ? h_stand : 0.0;
  }

  // Throws pmg::Error (kSchema) naming the offending field.
  void validate() const;
};

struct FootVelocity {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
};

struct FootState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
};

RobotModel load_robot_model(const std::filesystem::path& path);
RobotModel parse_robot_model(std::string_view json_text);
std::string robot_model_to_json(const RobotModel& model);
void save_robot_model(const RobotModel& model,
                      const std::filesystem::path& path);

// Foot pose in the base frame. All kinematics here are base-relative.
Eigen::Isometry3d fk_foot_pose(const RobotModel& model,
                               const Eigen::VectorXd& q, Foot foot);
Eigen::Vector3d fk_foot(const RobotModel& model, const Eigen::VectorXd& q,
                        Foot foot);

// Chain Jacobian applied to qd: leg-relative linear foot velocity and the
// z component of the foot angular velocity. Base motion is not included.
FootVelocity fk_foot_velocity(const RobotModel& model,
                              const Eigen::VectorXd& q,
                              const Eigen::VectorXd& qd, Foot foot);

FootState foot_state(const RobotModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qd, Foot foot);

// True when the model declares no limits or every joint is inside them.
bool within_joint_limits(const RobotModel& model, const Eigen::VectorXd& q);

}  // namespace pmg

#endif  // PMG_ROBOT_MODEL_HPP_
