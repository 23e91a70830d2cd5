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

#ifndef PMG_SESSION_HPP_
#define PMG_SESSION_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmg/gait_gen.hpp"
#include "pmg/gco.hpp"

namespace pmg {

struct SessionConfig {
  double dt = 0.01;
  bool gco = true;
  double slew_rate = 2.0;
  bool filter = false;
  double filter_cutoff_hz = 10.0;
  double initial_phase = 0.0;
  std::string session_id;

  void validate() const;
};

// Generator plus ground-aware command optimization, stepped at a fixed dt.
class GaitSession {
 public:
  GaitSession(std::shared_ptr<const RobotModel> model,
              std::shared_ptr<const ClipLibrary> library,
              SessionConfig config = {});

  GaitFrame step(const CommandVector& command);

  void set_gco(bool enabled) { config_.gco = enabled; }
  const SessionConfig& config() const { return config_; }
  const RobotModel& model() const { return generator_.model(); }
  long frame_count() const { return generator_.frame_count(); }

 private:
  SessionConfig config_;
  GaitGenerator generator_;
  std::optional<CommandFilter> filter_;
};

struct ScheduledCommand {
  double t = 0.0;
  CommandVector command;
};

// Rows: t, vx, vy, wz, pitch, roll, height. Times must be non-decreasing.
std::vector<ScheduledCommand> load_command_schedule(const std::filesystem::path& path);

// Zero-order hold of the schedule at ticks k * dt for t_k <= last time.
std::vector<CommandVector> sample_schedule(const std::vector<ScheduledCommand>& schedule,
                                           double dt);

void write_trajectory_header(std::ostream& out, long dof);
void write_trajectory_row(std::ostream& out, const GaitFrame& frame);
void write_diagnostics_header(std::ostream& out);
void write_diagnostics_row(std::ostream& out, const GaitFrame& frame);

struct BatchResult {
  long frames = 0;
  double max_slip_pre = 0.0;
  double max_slip_post = 0.0;
};

BatchResult run_batch(GaitSession& session, const std::vector<CommandVector>& ticks,
                      std::ostream& trajectory, std::ostream* diagnostics);

}  // namespace pmg

#endif  // PMG_SESSION_HPP_
