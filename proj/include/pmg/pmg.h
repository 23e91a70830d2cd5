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

/* C interface to the motion generator and the offline calibration
 * pipelines. All objects are opaque handles. Functions return a pmg_status;
 * on failure pmg_last_error() describes the problem for the calling thread. */

#ifndef PMG_PMG_H_
#define PMG_PMG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PMG_API __declspec(dllexport)
#else
#define PMG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pmg_status {
  PMG_OK = 0,
  PMG_ERR_INVALID_ARGUMENT = 1,
  PMG_ERR_IO = 2,
  PMG_ERR_PARSE = 3,
  PMG_ERR_SCHEMA = 4,
  PMG_ERR_STATE = 5,
  PMG_ERR_NUMERIC = 6,
  PMG_ERR_BUFFER_TOO_SMALL = 7,
  PMG_ERR_INTERNAL = 99
} pmg_status;

typedef struct pmg_robot pmg_robot;
typedef struct pmg_clipset pmg_clipset;
typedef struct pmg_session pmg_session;

typedef enum pmg_foot { PMG_FOOT_LEFT = 0, PMG_FOOT_RIGHT = 1 } pmg_foot;

typedef struct pmg_command {
  double vx, vy, wz;
  double pitch, roll, height;
} pmg_command;

PMG_API const char* pmg_version(void);
PMG_API const char* pmg_status_name(pmg_status status);
/* Message of the last failed call on this thread; never NULL. */
PMG_API const char* pmg_last_error(void);

/* Robot model. */
PMG_API pmg_status pmg_robot_load(const char* path, pmg_robot** out);
PMG_API pmg_status pmg_robot_parse(const char* json_text, pmg_robot** out);
PMG_API void pmg_robot_free(pmg_robot* robot);
PMG_API size_t pmg_robot_dof(const pmg_robot* robot);
PMG_API pmg_status pmg_robot_q_stand(const pmg_robot* robot, double* out, size_t n);
PMG_API pmg_status pmg_robot_fk(const pmg_robot* robot, const double* q, size_t n,
                                pmg_foot foot, double out_xyz[3]);
/* Admissible command box and the neutral command. Any pointer may be NULL. */
PMG_API pmg_status pmg_robot_command_limits(const pmg_robot* robot, pmg_command* lower,
                                            pmg_command* upper, pmg_command* neutral);
/* Serializes the model. Writes at most cap bytes including the terminator;
 * *len receives the required length without terminator. */
PMG_API pmg_status pmg_robot_to_json(const pmg_robot* robot, char* buf, size_t cap,
                                     size_t* len);

/* Clip set validated against a robot. It keeps its own reference to the
 * robot, so either handle may be freed first. */
PMG_API pmg_status pmg_clipset_load(const char* path, const pmg_robot* robot,
                                    pmg_clipset** out);
PMG_API void pmg_clipset_free(pmg_clipset* clips);

/* Generator sessions. */
typedef struct pmg_session_config {
  double dt;
  int gco;
  double slew_rate; /* per second, <= 0 disables slew limiting */
  int filter;
  double filter_cutoff_hz;
  double initial_phase;
  const char* session_id; /* may be NULL */
} pmg_session_config;

typedef struct pmg_frame {
  double t;
  double phase;
  double period;
  int standing;
  int contact[2];
  pmg_command command; /* clamped and slew-limited command applied */
  double u_prime[6];   /* vx, vy, wz, pitch, roll, height */
  double correction[4]; /* dvx, dvy, dw, dh */
  double slip_pre;
  double slip_post;
  double stance_residual;
} pmg_frame;

PMG_API void pmg_session_config_default(pmg_session_config* config);
PMG_API pmg_status pmg_session_create(const pmg_robot* robot, const pmg_clipset* clips,
                                      const pmg_session_config* config, pmg_session** out);
PMG_API void pmg_session_free(pmg_session* session);
/* Advances one tick. q_ref and qd_ref may be NULL; otherwise they must hold
 * n >= dof values. */
PMG_API pmg_status pmg_session_step(pmg_session* session, const pmg_command* command,
                                    pmg_frame* frame, double* q_ref, double* qd_ref,
                                    size_t n);
PMG_API pmg_status pmg_session_set_gco(pmg_session* session, int enabled);
PMG_API long pmg_session_frame_count(const pmg_session* session);

/* Batch pipelines. */
typedef struct pmg_generate_options {
  const char* robot_path;
  const char* clips_path;
  const char* commands_path;
  const char* out_path;
  const char* diag_path; /* may be NULL */
  pmg_session_config session;
} pmg_generate_options;

typedef struct pmg_generate_summary {
  long frames;
  double max_slip_pre;
  double max_slip_post;
} pmg_generate_summary;

PMG_API pmg_status pmg_generate_file(const pmg_generate_options* options,
                                     pmg_generate_summary* summary);

typedef struct pmg_preprocess_options {
  const char* capture_path;
  const char* out_path;
  const char* robot_path; /* optional DoF check */
  const char* name;
  const char* channel; /* "vx", "vy" or "wz" */
  int direction;
  double rate_hz;
  double kernel_std; /* <= 0 skips boundary smoothing */
} pmg_preprocess_options;

/* Warnings are written newline-separated into warnings (may be NULL). */
PMG_API pmg_status pmg_preprocess(const pmg_preprocess_options* options, char* warnings,
                                  size_t cap);

typedef struct pmg_sysid_options {
  const char* record_path;
  const char* bounds_path;
  const char* out_path;
  int population;
  long max_evaluations;
  uint64_t seed;
  int threads;
  double sigma0;
  double holdout_fraction;
} pmg_sysid_options;

typedef struct pmg_sysid_summary {
  double loss_before;
  double loss_after;
  double train_rms;
  double validation_rms;
  long evaluations;
  int flagged;
} pmg_sysid_summary;

PMG_API void pmg_sysid_options_default(pmg_sysid_options* options);
PMG_API pmg_status pmg_sysid_run(const pmg_sysid_options* options,
                                 pmg_sysid_summary* summary);

typedef struct pmg_zerocal_options {
  const char* samples_path;
  const char* out_path;
  double alpha;
  double tau;
  double eps;
  int consecutive;
  int max_iterations;
} pmg_zerocal_options;

typedef struct pmg_zerocal_summary {
  int iterations;
  int converged;
} pmg_zerocal_summary;

PMG_API void pmg_zerocal_options_default(pmg_zerocal_options* options);
PMG_API pmg_status pmg_zerocal_run(const pmg_zerocal_options* options,
                                   pmg_zerocal_summary* summary);

#ifdef __cplusplus
}
#endif

#endif /* PMG_PMG_H_ */
