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

#ifndef PMG_ZEROCAL_HPP_
#define PMG_ZEROCAL_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pmg/robot_model.hpp"

namespace pmg {

// Encoder zero-offset estimation by matching the IMU gravity direction of the
// real robot with a simulated one over several default poses.
struct ZeroCalibState {
  Eigen::VectorXd z;       // current per-joint offset estimate
  double alpha = 0.5;      // damping of the update
  double tau = 0.02;       // IMU gate threshold
  double epsilon = 0.001;  // convergence threshold on |alpha * delta|
  int consecutive = 3;     // iterations below epsilon required
  int iteration = 0;
  int streak = 0;
  bool converged = false;
  std::vector<Eigen::VectorXd> history;  // aggregated delta per iteration

  static ZeroCalibState initial(std::size_t joints);
  void validate() const;
};

struct PoseSample {
  int pose_id = 0;
  Eigen::VectorXd r;      // raw encoder readings
  Eigen::VectorXd q_sim;  // simulated joint angles at the pose
  Eigen::Vector3d s_real = Eigen::Vector3d(0, 0, -1);
  Eigen::Vector3d s_sim = Eigen::Vector3d(0, 0, -1);

  void validate() const;
};

bool imu_aligned(const PoseSample& sample, double tau);

// Keeps the samples that pass the IMU gate.
std::vector<PoseSample> gate_samples(const std::vector<PoseSample>& samples,
                                     double tau);

// Joints x poses matrix of q_sim - (r + z). Throws kState "no aligned poses"
// on an empty set.
Eigen::MatrixXd residuals(const std::vector<PoseSample>& samples,
                          const Eigen::VectorXd& z);

// Row-wise median; even counts average the two central values.
Eigen::VectorXd aggregate(const Eigen::MatrixXd& delta);
double median(std::vector<double> values);

// z += alpha * delta and convergence bookkeeping.
ZeroCalibState update(ZeroCalibState state, const Eigen::VectorXd& delta);

class PoseSampler {
 public:
  virtual ~PoseSampler() = default;
  virtual std::size_t joints() const = 0;
  // Samples for one iteration given the offsets currently applied.
  virtual std::vector<PoseSample> sample(const Eigen::VectorXd& z) = 0;
  // Per joint, whether the IMU signal depends on it. Empty means unknown.
  virtual std::vector<bool> observable() const { return {}; }
};

struct SimulatedLegOptions {
  double imu_noise = 0.0;      // std of additive IMU noise
  double sim_noise = 0.0;      // std of the simulated pose error, rad
  Eigen::Vector3d imu_bias = Eigen::Vector3d::Zero();
  double observability_threshold = 1e-3;
  std::uint64_t seed = 1;
};

// One leg of a model standing flat on the ground. The controller puts the
// encoders at pose - z, so the true angles differ from the pose by z_true - z.
// The IMU reads gravity in the base frame.
class SimulatedLegSampler : public PoseSampler {
 public:
  SimulatedLegSampler(std::shared_ptr<const RobotModel> model, Foot foot,
                      std::vector<Eigen::VectorXd> poses,
                      Eigen::VectorXd z_true,
                      SimulatedLegOptions options = {});

  std::size_t joints() const override { return joint_index_.size(); }
  std::vector<PoseSample> sample(const Eigen::VectorXd& z) override;
  std::vector<bool> observable() const override;

  // Gravity direction in the base frame for leg angles q.
  Eigen::Vector3d gravity(const Eigen::VectorXd& q_leg) const;
  const std::vector<int>& joint_index() const { return joint_index_; }

 private:
  std::shared_ptr<const RobotModel> model_;
  Foot foot_;
  std::vector<Eigen::VectorXd> poses_;
  Eigen::VectorXd z_true_;
  SimulatedLegOptions options_;
  std::vector<int> joint_index_;
  std::mt19937_64 rng_;
};

// Offline samples; every iteration re-reads the same poses.
class FileSampler : public PoseSampler {
 public:
  explicit FileSampler(std::vector<PoseSample> samples);
  std::size_t joints() const override;
  std::vector<PoseSample> sample(const Eigen::VectorXd& z) override;

 private:
  std::vector<PoseSample> samples_;
};

// JSON list of {pose_id, r[], q_sim[], s_real[3], s_sim[3]}.
std::vector<PoseSample> load_pose_samples(const std::filesystem::path& path);
std::vector<PoseSample> parse_pose_samples(std::string_view json_text);
std::string pose_samples_to_json(const std::vector<PoseSample>& samples);

struct ZeroCalibReport {
  Eigen::VectorXd offsets;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> flags;
  std::vector<bool> unobservable;
  std::vector<Eigen::VectorXd> history;
  std::vector<int> accepted;  // poses passing the gate per iteration
  ZeroCalibState state;

  bool flagged(const std::string& flag) const;
  std::string to_json() const;
};

struct CalibrateOptions {
  int max_iterations = 50;
  int min_poses = 3;
};

ZeroCalibReport calibrate(PoseSampler& sampler, ZeroCalibState state,
                          const CalibrateOptions& options = {});

}  // namespace pmg

#endif  // PMG_ZEROCAL_HPP_
