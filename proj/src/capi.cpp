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

#include "pmg/pmg.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pmg/error.hpp"
#include "pmg/gait_gen.hpp"
#include "pmg/motion_data.hpp"
#include "pmg/robot_model.hpp"
#include "pmg/session.hpp"
#include "pmg/sysid.hpp"
#include "pmg/zerocal.hpp"

struct pmg_robot {
  std::shared_ptr<const pmg::RobotModel> model;
};

struct pmg_clipset {
  std::shared_ptr<const pmg::RobotModel> model;
  std::shared_ptr<const pmg::ClipLibrary> library;
};

struct pmg_session {
  std::unique_ptr<pmg::GaitSession> session;
};

namespace {

thread_local std::string g_last_error;

pmg_status to_status(pmg::ErrorCode code) {
  switch (code) {
    case pmg::ErrorCode::kInvalidArgument: return PMG_ERR_INVALID_ARGUMENT;
    case pmg::ErrorCode::kIo: return PMG_ERR_IO;
    case pmg::ErrorCode::kParse: return PMG_ERR_PARSE;
    case pmg::ErrorCode::kSchema: return PMG_ERR_SCHEMA;
    case pmg::ErrorCode::kState: return PMG_ERR_STATE;
    case pmg::ErrorCode::kNumeric: return PMG_ERR_NUMERIC;
  }
  return PMG_ERR_INTERNAL;
}

pmg_status fail(pmg_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

struct BufferTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs fn and converts any exception into a status code.
template <typename Fn>
pmg_status guarded(Fn&& fn) {
  try {
    fn();
    return PMG_OK;
  } catch (const BufferTooSmall& e) {
    return fail(PMG_ERR_BUFFER_TOO_SMALL, e.what());
  } catch (const pmg::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PMG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PMG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PMG_ERR_INTERNAL, "unknown error");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw pmg::Error(pmg::ErrorCode::kInvalidArgument, what);
}

pmg::CommandVector to_command(const pmg_command& c) {
  pmg::CommandVector out;
  out.velocity = {c.vx, c.vy, c.wz};
  out.posture = {c.pitch, c.roll, c.height};
  return out;
}

pmg_command from_command(const pmg::CommandVector& c) {
  return {c.velocity[0], c.velocity[1], c.velocity[2],
          c.posture[0],  c.posture[1],  c.posture[2]};
}

pmg::SessionConfig to_config(const pmg_session_config& c) {
  pmg::SessionConfig out;
  out.dt = c.dt;
  out.gco = c.gco != 0;
  out.slew_rate = c.slew_rate;
  out.filter = c.filter != 0;
  out.filter_cutoff_hz = c.filter_cutoff_hz;
  out.initial_phase = c.initial_phase;
  if (c.session_id) out.session_id = c.session_id;
  return out;
}

void copy_text(const std::string& text, char* buf, size_t cap) {
  if (!buf || cap == 0) return;
  const size_t n = std::min(cap - 1, text.size());
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* pmg_version(void) { return "1.0.0"; }

const char* pmg_status_name(pmg_status status) {
  switch (status) {
    case PMG_OK: return "ok";
    case PMG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PMG_ERR_IO: return "io";
    case PMG_ERR_PARSE: return "parse";
    case PMG_ERR_SCHEMA: return "schema";
    case PMG_ERR_STATE: return "state";
    case PMG_ERR_NUMERIC: return "numeric";
    case PMG_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case PMG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pmg_last_error(void) { return g_last_error.c_str(); }

pmg_status pmg_robot_load(const char* path, pmg_robot** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto model = std::make_shared<const pmg::RobotModel>(pmg::load_robot_model(path));
    *out = new pmg_robot{std::move(model)};
  });
}

pmg_status pmg_robot_parse(const char* json_text, pmg_robot** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    auto model = std::make_shared<const pmg::RobotModel>(pmg::parse_robot_model(json_text));
    *out = new pmg_robot{std::move(model)};
  });
}

void pmg_robot_free(pmg_robot* robot) { delete robot; }

size_t pmg_robot_dof(const pmg_robot* robot) { return robot ? robot->model->dof() : 0; }

pmg_status pmg_robot_q_stand(const pmg_robot* robot, double* out, size_t n) {
  return guarded([&] {
    require(robot && out, "null argument");
    if (n < robot->model->dof()) throw BufferTooSmall("buffer smaller than dof");
    for (size_t i = 0; i < robot->model->dof(); ++i) out[i] = robot->model->q_stand[static_cast<Eigen::Index>(i)];
  });
}

pmg_status pmg_robot_fk(const pmg_robot* robot, const double* q, size_t n, pmg_foot foot,
                        double out_xyz[3]) {
  return guarded([&] {
    require(robot && q && out_xyz, "null argument");
    require(n == robot->model->dof(), "q must have one entry per joint");
    require(foot == PMG_FOOT_LEFT || foot == PMG_FOOT_RIGHT, "bad foot");
    const Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q, static_cast<Eigen::Index>(n));
    const Eigen::Vector3d p = pmg::fk_foot(*robot->model, qv, static_cast<pmg::Foot>(foot));
    for (int i = 0; i < 3; ++i) out_xyz[i] = p[i];
  });
}

pmg_status pmg_robot_command_limits(const pmg_robot* robot, pmg_command* lower, pmg_command* upper,
                                    pmg_command* neutral) {
  return guarded([&] {
    require(robot, "null argument");
    const pmg::RobotModel& m = *robot->model;
    pmg::CommandVector lo, hi;
    for (pmg::DynamicChannel c : pmg::kDynamicChannels) {
      hi[c] = pmg::kCommandScaleLimit * m.nominal_scale(c);
      lo[c] = -hi[c];
    }
    for (pmg::StaticChannel c : pmg::kStaticChannels) {
      lo[c] = m.posture_range(c).min;
      hi[c] = m.posture_range(c).max;
    }
    if (lower) *lower = from_command(lo);
    if (upper) *upper = from_command(hi);
    if (neutral) *neutral = from_command(pmg::CommandVector::neutral(m));
  });
}

pmg_status pmg_robot_to_json(const pmg_robot* robot, char* buf, size_t cap, size_t* len) {
  std::string text;
  const pmg_status s = guarded([&] {
    require(robot, "null argument");
    text = pmg::robot_model_to_json(*robot->model);
  });
  if (s != PMG_OK) return s;
  if (len) *len = text.size();
  if (!buf || cap <= text.size()) {
    copy_text(text, buf, cap);
    return fail(PMG_ERR_BUFFER_TOO_SMALL, "buffer too small for robot document");
  }
  copy_text(text, buf, cap);
  return PMG_OK;
}

pmg_status pmg_clipset_load(const char* path, const pmg_robot* robot, pmg_clipset** out) {
  return guarded([&] {
    require(path && robot && out, "null argument");
    auto library = std::make_shared<const pmg::ClipLibrary>(pmg::load_clipset(path), *robot->model);
    *out = new pmg_clipset{robot->model, std::move(library)};
  });
}

void pmg_clipset_free(pmg_clipset* clips) { delete clips; }

void pmg_session_config_default(pmg_session_config* config) {
  if (!config) return;
  const pmg::SessionConfig d;
  config->dt = d.dt;
  config->gco = d.gco ? 1 : 0;
  config->slew_rate = d.slew_rate;
  config->filter = d.filter ? 1 : 0;
  config->filter_cutoff_hz = d.filter_cutoff_hz;
  config->initial_phase = d.initial_phase;
  config->session_id = nullptr;
}

pmg_status pmg_session_create(const pmg_robot* robot, const pmg_clipset* clips,
                              const pmg_session_config* config, pmg_session** out) {
  return guarded([&] {
    require(robot && clips && out, "null argument");
    if (clips->model->dof() != robot->model->dof()) {
      throw pmg::Error(pmg::ErrorCode::kInvalidArgument, "clip set was loaded for a different robot");
    }
    pmg_session_config c;
    pmg_session_config_default(&c);
    if (config) c = *config;
    auto session = std::make_unique<pmg::GaitSession>(robot->model, clips->library, to_config(c));
    *out = new pmg_session{std::move(session)};
  });
}

void pmg_session_free(pmg_session* session) { delete session; }

pmg_status pmg_session_step(pmg_session* session, const pmg_command* command, pmg_frame* frame,
                            double* q_ref, double* qd_ref, size_t n) {
  return guarded([&] {
    require(session && command, "null argument");
    const size_t dof = session->session->model().dof();
    if ((q_ref || qd_ref) && n < dof) {
      throw BufferTooSmall("joint buffers smaller than dof");
    }
    const pmg::GaitFrame f = session->session->step(to_command(*command));
    if (q_ref) std::memcpy(q_ref, f.q_ref.data(), dof * sizeof(double));
    if (qd_ref) std::memcpy(qd_ref, f.qd_ref.data(), dof * sizeof(double));
    if (frame) {
      frame->t = f.t;
      frame->phase = f.phase;
      frame->period = f.period;
      frame->standing = f.standing ? 1 : 0;
      frame->contact[0] = f.contact[0] ? 1 : 0;
      frame->contact[1] = f.contact[1] ? 1 : 0;
      frame->command = from_command(f.command);
      const auto u = f.u_prime.as_array();
      std::copy(u.begin(), u.end(), frame->u_prime);
      frame->correction[0] = f.correction.dv.x();
      frame->correction[1] = f.correction.dv.y();
      frame->correction[2] = f.correction.dw;
      frame->correction[3] = f.correction.dh;
      frame->slip_pre = f.slip_pre;
      frame->slip_post = f.slip_post;
      frame->stance_residual = f.stance_residual;
    }
  });
}

pmg_status pmg_session_set_gco(pmg_session* session, int enabled) {
  return guarded([&] {
    require(session, "null argument");
    session->session->set_gco(enabled != 0);
  });
}

long pmg_session_frame_count(const pmg_session* session) {
  return session ? session->session->frame_count() : 0;
}

pmg_status pmg_generate_file(const pmg_generate_options* options, pmg_generate_summary* summary) {
  return guarded([&] {
    require(options && options->robot_path && options->clips_path && options->commands_path &&
                options->out_path,
            "robot, clips, commands and out paths are required");
    auto model = std::make_shared<const pmg::RobotModel>(pmg::load_robot_model(options->robot_path));
    auto library = std::make_shared<const pmg::ClipLibrary>(pmg::load_clipset(options->clips_path), *model);
    pmg::GaitSession session(model, library, to_config(options->session));
    const auto schedule = pmg::load_command_schedule(options->commands_path);
    const auto ticks = pmg::sample_schedule(schedule, session.config().dt);

    std::ofstream traj(options->out_path);
    if (!traj) throw pmg::Error(pmg::ErrorCode::kIo, std::string("cannot write ") + options->out_path);
    std::ofstream diag;
    if (options->diag_path) {
      diag.open(options->diag_path);
      if (!diag) throw pmg::Error(pmg::ErrorCode::kIo, std::string("cannot write ") + options->diag_path);
    }
    const pmg::BatchResult r = pmg::run_batch(session, ticks, traj, options->diag_path ? &diag : nullptr);
    traj.close();
    if (!traj) throw pmg::Error(pmg::ErrorCode::kIo, std::string("write failed: ") + options->out_path);
    if (summary) *summary = {r.frames, r.max_slip_pre, r.max_slip_post};
  });
}

pmg_status pmg_preprocess(const pmg_preprocess_options* options, char* warnings, size_t cap) {
  return guarded([&] {
    require(options && options->capture_path && options->out_path, "capture and out paths are required");
    require(options->rate_hz > 0.0, "rate must be > 0");
    pmg::ExtractOptions ex;
    if (options->name) ex.name = options->name;
    if (options->channel) ex.channel = pmg::parse_dynamic_channel(options->channel);
    ex.direction = options->direction < 0 ? -1 : 1;
    const pmg::RawCapture raw = pmg::load_raw_capture(options->capture_path);
    if (options->robot_path) {
      const pmg::RobotModel model = pmg::load_robot_model(options->robot_path);
      if (static_cast<size_t>(raw.q.cols()) != model.dof()) {
        throw pmg::Error(pmg::ErrorCode::kInvalidArgument, "capture joint count does not match robot");
      }
    }
    pmg::CycleExtraction result = pmg::extract_cycle(raw, options->rate_hz, ex);
    pmg::MotionClip clip = options->kernel_std > 0.0
                               ? pmg::smooth_boundary(result.clip, options->kernel_std)
                               : std::move(result.clip);
    pmg::save_clip(clip, options->out_path);
    std::string text;
    for (const std::string& w : result.warnings) text += w + "\n";
    copy_text(text, warnings, cap);
  });
}

void pmg_sysid_options_default(pmg_sysid_options* options) {
  if (!options) return;
  const pmg::IdentifyConfig d;
  *options = {};
  options->population = d.population;
  options->max_evaluations = d.max_evaluations;
  options->seed = d.seed;
  options->threads = d.threads;
  options->sigma0 = d.sigma0;
  options->holdout_fraction = d.holdout_fraction;
}

pmg_status pmg_sysid_run(const pmg_sysid_options* options, pmg_sysid_summary* summary) {
  return guarded([&] {
    require(options && options->record_path && options->bounds_path && options->out_path,
            "record, bounds and out paths are required");
    const pmg::ResponseRecord record = pmg::load_response_record(options->record_path);
    pmg::IdentifyConfig config = pmg::load_bounds(options->bounds_path);
    config.population = options->population;
    config.max_evaluations = options->max_evaluations;
    config.seed = options->seed;
    config.threads = options->threads;
    config.sigma0 = options->sigma0;
    config.holdout_fraction = options->holdout_fraction;
    const pmg::CalibrationReport report = pmg::identify_joint(record, config);
    std::ofstream out(options->out_path);
    if (!out) throw pmg::Error(pmg::ErrorCode::kIo, std::string("cannot write ") + options->out_path);
    out << report.to_json();
    if (summary) {
      *summary = {report.loss_before, report.loss_after, report.train_rms,
                  report.validation_rms, report.evaluations, report.flags.empty() ? 0 : 1};
    }
  });
}

void pmg_zerocal_options_default(pmg_zerocal_options* options) {
  if (!options) return;
  const pmg::ZeroCalibState d;
  const pmg::CalibrateOptions c;
  *options = {};
  options->alpha = d.alpha;
  options->tau = d.tau;
  options->eps = d.epsilon;
  options->consecutive = d.consecutive;
  options->max_iterations = c.max_iterations;
}

pmg_status pmg_zerocal_run(const pmg_zerocal_options* options, pmg_zerocal_summary* summary) {
  return guarded([&] {
    require(options && options->samples_path && options->out_path, "samples and out paths are required");
    pmg::FileSampler sampler(pmg::load_pose_samples(options->samples_path));
    pmg::ZeroCalibState state = pmg::ZeroCalibState::initial(sampler.joints());
    state.alpha = options->alpha;
    state.tau = options->tau;
    state.epsilon = options->eps;
    state.consecutive = options->consecutive;
    pmg::CalibrateOptions copts;
    copts.max_iterations = options->max_iterations;
    const pmg::ZeroCalibReport report = pmg::calibrate(sampler, state, copts);
    std::ofstream out(options->out_path);
    if (!out) throw pmg::Error(pmg::ErrorCode::kIo, std::string("cannot write ") + options->out_path);
    out << report.to_json();
    if (summary) *summary = {report.iterations, report.converged ? 1 : 0};
  });
}

}  // extern "C"
