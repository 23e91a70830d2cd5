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

#ifndef PMG_SYSID_HPP_
#define PMG_SYSID_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmg/cmaes.hpp"

namespace pmg {

// Single-joint PD actuator: I qdd = clamp(Kp (q_cmd - q) - Kd qd, +-tau_max)
// - b qd - f_c sign(qd).
struct MotorParams {
  double kp = 1.0;
  double kd = 0.1;
  double inertia = 0.01;
  double damping = 0.0;
  double coulomb = 0.0;
  std::optional<double> torque_limit;

  void validate() const;
};

enum class MotorParam { kKp, kKd, kInertia, kDamping, kCoulomb };
std::string_view param_name(MotorParam p);
MotorParam parse_param(std::string_view name);
double get_param(const MotorParams& m, MotorParam p);
void set_param(MotorParams& m, MotorParam p, double value);

inline constexpr double kDefaultMotorDt = 1.0 / 500.0;
// Returned by the loss when the simulation leaves the finite range.
inline constexpr double kDivergedLoss = 1e12;

struct ResponseRecord {
  double dt = kDefaultMotorDt;
  std::vector<double> q_cmd;
  std::vector<double> q_meas;

  void validate() const;
  std::size_t size() const { return q_cmd.size(); }
};

// Rows: t, q_cmd, q_meas with uniform t.
ResponseRecord load_response_record(const std::filesystem::path& path);
void save_response_record(const ResponseRecord& record,
                          const std::filesystem::path& path);

// Semi-implicit Euler; output[0] = q0, output[k+1] follows command k.
std::vector<double> simulate_motor(const MotorParams& params,
                                   std::span<const double> q_cmd, double dt,
                                   double q0 = 0.0, double qd0 = 0.0);

// Sum of squared differences over samples [begin, end); the simulation starts
// at (q_meas[0], 0). Returns kDivergedLoss on a non-finite state.
double alignment_loss(const MotorParams& params, const ResponseRecord& record,
                      std::size_t begin = 0, std::size_t end = SIZE_MAX);

struct ExcitationConfig {
  double rate_hz = 500.0;
  double duration_s = 6.0;
  std::vector<double> step_amplitudes = {0.2, 0.5};
  double step_fraction = 0.4;
  double step_hold_s = 0.4;
  double quintic_fraction = 0.2;
  int quintic_segments = 4;
  double sweep_f0_hz = 0.5;
  double sweep_f1_hz = 8.0;
  std::uint64_t seed = 1;
};

struct ExcitationSegment {
  std::string kind;  // "step", "quintic", "sweep"
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Excitation {
  double dt = kDefaultMotorDt;
  std::vector<double> q_cmd;
  std::vector<ExcitationSegment> segments;
};

// Held steps, then minimum-jerk (quintic) transitions, then a linear chirp.
Excitation excitation(const ExcitationConfig& config);

// Jumps in q_cmd larger than a tenth of its range.
int count_step_events(std::span<const double> q_cmd);

struct ParamBound {
  MotorParam param = MotorParam::kKp;
  double lower = 0.0;
  double upper = 0.0;
};

struct IdentifyConfig {
  std::vector<ParamBound> bounds;  // identified parameters
  MotorParams fixed;               // values of everything not identified
  int population = 12;
  long max_evaluations = 30000;
  double sigma0 = 0.3;  // in normalized log-parameter units
  double target_loss = 0.0;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
};

// Bounds file: {"Kp": [lo, hi], ..., "fixed": {"tau_max": 3.0, ...}}.
IdentifyConfig load_bounds(const std::filesystem::path& path);

struct SegmentResidual {
  std::size_t begin = 0;
  std::size_t end = 0;
  double rms_before = 0.0;
  double rms_after = 0.0;
};

struct CalibrationReport {
  MotorParams initial;
  MotorParams identified;
  double loss_before = 0.0;  // training loss at the initial guess
  double loss_after = 0.0;   // training loss at the optimum
  double train_rms = 0.0;
  double validation_rms = 0.0;
  long evaluations = 0;
  int generations = 0;
  std::string stop_reason;
  int step_events = 0;
  std::vector<std::string> flags;
  std::vector<SegmentResidual> segments;
  std::vector<double> residual_series;  // decimated q_sim - q_meas at optimum
  std::size_t residual_stride = 1;
  std::vector<double> best_loss_history;
  IdentifyConfig config;

  bool flagged(const std::string& flag) const;
  std::string to_json() const;
};

// CMA-ES over the alignment loss on the first (1 - holdout) of the record;
// the remainder is reported as validation residual.
CalibrationReport identify_joint(const ResponseRecord& record,
                                 const IdentifyConfig& config);

}  // namespace pmg

#endif  // PMG_SYSID_HPP_
