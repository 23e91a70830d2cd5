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

#include "pmg/session.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "pmg/error.hpp"

namespace pmg {

void SessionConfig::validate() const {
  if (!(dt >= 0.001 && dt <= 0.1)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must lie in [0.001, 0.1] s");
  }
  if (filter && !(filter_cutoff_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "filter cutoff must be > 0");
  }
}

namespace {

GeneratorOptions generator_options(const SessionConfig& c) {
  c.validate();
  GeneratorOptions o;
  o.dt = c.dt;
  o.slew_rate = c.slew_rate;
  o.initial_phase = c.initial_phase;
  return o;
}

}  // namespace

GaitSession::GaitSession(std::shared_ptr<const RobotModel> model,
                         std::shared_ptr<const ClipLibrary> library,
                         SessionConfig config)
    : config_(std::move(config)),
      generator_(std::move(model), std::move(library), generator_options(config_)) {
  if (config_.filter) filter_.emplace(config_.filter_cutoff_hz, config_.dt);
}

GaitFrame GaitSession::step(const CommandVector& command) {
  GaitFrame frame = generator_.generate_frame(command);
  if (config_.gco) {
    apply_gco(generator_.model(), frame);
  } else {
    apply_passthrough(generator_.model(), frame);
  }
  if (filter_) frame.u_prime = filter_->apply(frame.u_prime);
  return frame;
}

std::vector<ScheduledCommand> load_command_schedule(const std::filesystem::path& path) {
  const detail::CsvTable table = detail::read_csv(path);
  std::vector<ScheduledCommand> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 7) {
      throw Error(ErrorCode::kParse, path.string() +
                                         ": expected t,vx,vy,wz,pitch,roll,height");
    }
    ScheduledCommand s;
    s.t = row[0];
    s.command.velocity = {row[1], row[2], row[3]};
    s.command.posture = {row[4], row[5], row[6]};
    if (!out.empty() && s.t < out.back().t) {
      throw Error(ErrorCode::kParse, path.string() + ": times must be non-decreasing");
    }
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::kParse, path.string() + ": empty schedule");
  return out;
}

std::vector<CommandVector> sample_schedule(const std::vector<ScheduledCommand>& schedule,
                                           double dt) {
  std::vector<CommandVector> ticks;
  if (schedule.empty()) return ticks;
  const double end = schedule.back().t;
  std::size_t idx = 0;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > end + 1e-9) break;
    while (idx + 1 < schedule.size() && schedule[idx + 1].t <= t + 1e-9) ++idx;
    ticks.push_back(schedule[idx].command);
  }
  return ticks;
}

void write_trajectory_header(std::ostream& out, long dof) {
  out << "t,phase";
  for (long i = 0; i < dof; ++i) out << ",q_ref" << i;
  for (long i = 0; i < dof; ++i) out << ",qd_ref" << i;
  out << ",contactL,contactR\n";
}

void write_trajectory_row(std::ostream& out, const GaitFrame& frame) {
  std::vector<double> row;
  row.reserve(static_cast<std::size_t>(2 * frame.q_ref.size() + 4));
  row.push_back(frame.t);
  row.push_back(frame.phase);
  for (long i = 0; i < frame.q_ref.size(); ++i) row.push_back(frame.q_ref[i]);
  for (long i = 0; i < frame.qd_ref.size(); ++i) row.push_back(frame.qd_ref[i]);
  row.push_back(frame.contact[0] ? 1.0 : 0.0);
  row.push_back(frame.contact[1] ? 1.0 : 0.0);
  detail::write_row(out, row);
}

void write_diagnostics_header(std::ostream& out) {
  out << "t,slip_speed_pre,slip_speed_post,dv_x,dv_y,dw,dh\n";
}

void write_diagnostics_row(std::ostream& out, const GaitFrame& frame) {
  detail::write_row(out, {frame.t, frame.slip_pre, frame.slip_post,
                          frame.correction.dv.x(), frame.correction.dv.y(),
                          frame.correction.dw, frame.correction.dh});
}

BatchResult run_batch(GaitSession& session, const std::vector<CommandVector>& ticks,
                      std::ostream& trajectory, std::ostream* diagnostics) {
  BatchResult result;
  write_trajectory_header(trajectory, static_cast<long>(session.model().dof()));
  if (diagnostics) write_diagnostics_header(*diagnostics);
  for (const CommandVector& cmd : ticks) {
    const GaitFrame frame = session.step(cmd);
    write_trajectory_row(trajectory, frame);
    if (diagnostics) write_diagnostics_row(*diagnostics, frame);
    result.max_slip_pre = std::max(result.max_slip_pre, frame.slip_pre);
    result.max_slip_post = std::max(result.max_slip_post, frame.slip_post);
    ++result.frames;
  }
  if (!trajectory) throw Error(ErrorCode::kIo, "failed writing trajectory");
  return result;
}

}  // namespace pmg
