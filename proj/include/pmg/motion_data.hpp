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

#ifndef PMG_MOTION_DATA_HPP_
#define PMG_MOTION_DATA_HPP_

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pmg/robot_model.hpp"

namespace pmg {

// Stance window of one foot on the phase circle: stance iff the circular
// distance between phase and mu is at most sigma (sigma is a half-width).
struct ContactWindow {
  double mu = 0.0;
  double sigma = 0.25;
};

// One cycle-aligned dynamic gait template; frame k sits at phase k / n.
struct MotionClip {
  std::string name;
  DynamicChannel channel = DynamicChannel::kVx;
  int direction = 1;           // +1 or -1: which command sign it serves
  Eigen::MatrixXd frames_q;    // n x dof [rad]
  Eigen::MatrixXd frames_qd;   // n x dof [rad/s]
  Eigen::MatrixXd base_v;      // n x 3 [m/s], heading frame
  Eigen::VectorXd base_w;      // n [rad/s]
  std::array<ContactWindow, 2> contact;
  double period = 1.0;         // T [s]

  long n_frames() const { return frames_q.rows(); }
  long dof() const { return frames_q.cols(); }
  const ContactWindow& window(Foot foot) const {
    return contact[static_cast<std::size_t>(foot)];
  }
  void validate() const;
};

// Posture template; row i of frames_q is the pose at command_values[i].
struct StaticClip {
  std::string name;
  StaticChannel channel = StaticChannel::kPitch;
  Eigen::MatrixXd frames_q;
  std::vector<double> command_values;  // strictly increasing

  long dof() const { return frames_q.cols(); }
  void validate() const;
};

// Left/right symmetry: mirrored[i] = sign[i] * q[permutation[i]].
struct MirrorMap {
  std::vector<int> permutation;
  std::vector<double> sign;

  Eigen::VectorXd apply(const Eigen::VectorXd& q) const;
};

struct ClipSet {
  std::string robot_ref;
  std::vector<MotionClip> dynamic;
  std::vector<StaticClip> statics;
  std::optional<MirrorMap> mirror;

  const MotionClip* find(DynamicChannel channel, int direction) const;
  const StaticClip* find(StaticChannel channel) const;
  long dof() const;
  void validate() const;
};

// Raw capture: per-frame joints, per-frame foot contacts, optional base
// velocity. Rows are frames.
struct RawCapture {
  std::vector<double> timestamps;
  Eigen::MatrixXd q;
  std::vector<std::array<bool, 2>> contact;
  Eigen::MatrixXd base_v;  // rows x 3, zero when not captured
  Eigen::VectorXd base_w;

  long n_frames() const { return q.rows(); }
};

struct CycleExtraction {
  MotionClip clip;
  std::vector<std::string> warnings;
};

struct ExtractOptions {
  std::string name = "clip";
  DynamicChannel channel = DynamicChannel::kVx;
  int direction = 1;
  // Start/end joint mismatch above this is reported as a warning.
  double periodicity_tolerance = 0.05;
};

inline constexpr double kDefaultKernelStd = 3.0;

double circular_distance(double a, double b);
double wrap_phase(double phase);

bool contact_at_phase(const ContactWindow& window, double phase);
bool contact_at_phase(const MotionClip& clip, Foot foot, double phase);

// Clips exactly one cycle between the first two left-foot touchdowns.
CycleExtraction extract_cycle(const RawCapture& raw, double rate_hz,
                              const ExtractOptions& options = {});

// Wrap-around Gaussian filtering of the seam neighbourhood, then velocities
// are recomputed by circular central differences.
MotionClip smooth_boundary(const MotionClip& clip,
                           double kernel_std = kDefaultKernelStd);

// Sets frames_qd from frames_q by circular central differences.
void recompute_velocities(MotionClip& clip);

// Linear interpolation with circular wrap.
struct ClipSample {
  Eigen::VectorXd q;
  Eigen::Vector3d base_v = Eigen::Vector3d::Zero();
  double base_w = 0.0;
};
ClipSample sample_clip(const MotionClip& clip, double phase);
Eigen::VectorXd sample_static(const StaticClip& clip, double command_value);

// Left/right mirror of a clip for the opposite command sign. Joints are
// remapped and feet swapped; lateral and yaw base motion flip sign.
MotionClip mirror_clip(const MotionClip& clip, const MirrorMap& map);

// Moves the phase origin forward by delta cycles: frame k of the result is the
// source at phase k/n + delta. Whole-frame shifts are exact rotations; other
// shifts resample linearly and recompute velocities.
MotionClip shift_phase(const MotionClip& clip, double delta);

RawCapture load_raw_capture(const std::filesystem::path& path);

std::string clip_to_json(const MotionClip& clip);
MotionClip parse_clip(std::string_view json_text);
void save_clip(const MotionClip& clip, const std::filesystem::path& path);
MotionClip load_clip(const std::filesystem::path& path);

ClipSet load_clipset(const std::filesystem::path& path);
ClipSet parse_clipset(std::string_view json_text,
                      const std::filesystem::path& base_dir = {});
std::string clipset_to_json(const ClipSet& set);
void save_clipset(const ClipSet& set, const std::filesystem::path& path);

// A clip set resolved against a robot model: one template per channel and
// command sign, mirrored where only the opposite sign was recorded.
class ClipLibrary {
 public:
  ClipLibrary(ClipSet set, const RobotModel& model);

  const MotionClip* dynamic(DynamicChannel channel, int direction) const;
  const StaticClip* posture(StaticChannel channel) const;
  const ClipSet& clipset() const { return set_; }

 private:
  ClipSet set_;
  std::array<std::array<std::optional<MotionClip>, 2>, 3> dynamic_;
};

}  // namespace pmg

#endif  // PMG_MOTION_DATA_HPP_
