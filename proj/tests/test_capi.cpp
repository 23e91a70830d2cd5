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

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "humanoid.hpp"
#include "pmg/pmg.h"
#include "pmg/session.hpp"
#include "pmg/sysid.hpp"
#include "pmg/zerocal.hpp"

namespace {

using pmg::fixture::temp_dir;

struct Handles {
  pmg_robot* robot = nullptr;
  pmg_clipset* clips = nullptr;
  ~Handles() {
    pmg_clipset_free(clips);
    pmg_robot_free(robot);
  }
};

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = temp_dir("capi");
    files_ = pmg::fixture::write_fixture(dir_);
    ASSERT_EQ(pmg_robot_load(files_.robot.c_str(), &h_.robot), PMG_OK) << pmg_last_error();
    ASSERT_EQ(pmg_clipset_load(files_.clips.c_str(), h_.robot, &h_.clips), PMG_OK) << pmg_last_error();
  }

  std::filesystem::path dir_;
  pmg::fixture::FixtureFiles files_;
  Handles h_;
};

TEST(CApiBasics, VersionAndStatusNames) {
  EXPECT_STREQ(pmg_version(), "1.0.0");
  EXPECT_STREQ(pmg_status_name(PMG_OK), "ok");
  EXPECT_STREQ(pmg_status_name(PMG_ERR_SCHEMA), "schema");
  EXPECT_NE(pmg_last_error(), nullptr);
}

TEST(CApiBasics, ErrorsCarryCodeAndMessage) {
  pmg_robot* r = nullptr;
  EXPECT_EQ(pmg_robot_load("/nonexistent/robot.json", &r), PMG_ERR_IO);
  EXPECT_EQ(r, nullptr);
  EXPECT_NE(std::string(pmg_last_error()).find("/nonexistent/robot.json"), std::string::npos);
  EXPECT_EQ(pmg_robot_parse("{not json", &r), PMG_ERR_PARSE);
  EXPECT_EQ(pmg_robot_parse("{}", &r), PMG_ERR_SCHEMA);
  EXPECT_NE(std::string(pmg_last_error()).find("schema_version"), std::string::npos);
  EXPECT_EQ(pmg_robot_parse(nullptr, &r), PMG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(pmg_robot_dof(nullptr), 0u);
  pmg_robot_free(nullptr);
  pmg_session_free(nullptr);
}

TEST_F(CApi, RobotQueries) {
  ASSERT_EQ(pmg_robot_dof(h_.robot), 12u);
  double q[12];
  EXPECT_EQ(pmg_robot_q_stand(h_.robot, q, 4), PMG_ERR_BUFFER_TOO_SMALL);
  ASSERT_EQ(pmg_robot_q_stand(h_.robot, q, 12), PMG_OK);
  const pmg::RobotModel model = pmg::fixture::humanoid_model();
  for (int j = 0; j < 12; ++j) EXPECT_EQ(q[j], model.q_stand[j]);
  double xyz[3];
  ASSERT_EQ(pmg_robot_fk(h_.robot, q, 12, PMG_FOOT_RIGHT, xyz), PMG_OK);
  const Eigen::Vector3d p = pmg::fk_foot(model, model.q_stand, pmg::Foot::kRight);
  EXPECT_EQ(xyz[1], p.y());
  EXPECT_EQ(xyz[2], p.z());
  EXPECT_EQ(pmg_robot_fk(h_.robot, q, 11, PMG_FOOT_LEFT, xyz), PMG_ERR_INVALID_ARGUMENT);

  pmg_command lo, hi, neutral;
  ASSERT_EQ(pmg_robot_command_limits(h_.robot, &lo, &hi, &neutral), PMG_OK);
  EXPECT_EQ(hi.vx, 0.6);
  EXPECT_EQ(lo.wz, -1.2);
  EXPECT_EQ(lo.height, 0.65);
  EXPECT_EQ(neutral.height, model.h_stand);
  EXPECT_EQ(neutral.vx, 0.0);

  size_t len = 0;
  EXPECT_EQ(pmg_robot_to_json(h_.robot, nullptr, 0, &len), PMG_ERR_BUFFER_TOO_SMALL);
  ASSERT_GT(len, 0u);
  std::string buf(len + 1, '\0');
  ASSERT_EQ(pmg_robot_to_json(h_.robot, buf.data(), buf.size(), &len), PMG_OK);
  EXPECT_EQ(nlohmann::json::parse(buf.c_str())["name"], "biped12");
}

TEST_F(CApi, SessionMatchesCoreBitForBit) {
  pmg_session_config cfg;
  pmg_session_config_default(&cfg);
  EXPECT_EQ(cfg.dt, 0.01);
  EXPECT_EQ(cfg.gco, 1);
  pmg_session* s = nullptr;
  ASSERT_EQ(pmg_session_create(h_.robot, h_.clips, &cfg, &s), PMG_OK) << pmg_last_error();

  const pmg::fixture::Rig rig = pmg::fixture::make_rig();
  pmg::GaitSession core(rig.model, rig.library);
  double q[12], qd[12];
  for (int k = 0; k < 200; ++k) {
    const pmg_command cmd = {0.002 * k, 0.1, -0.2, 0.05, 0.0, 0.8};
    pmg_frame f;
    ASSERT_EQ(pmg_session_step(s, &cmd, &f, q, qd, 12), PMG_OK);
    pmg::CommandVector c;
    c.velocity = {cmd.vx, cmd.vy, cmd.wz};
    c.posture = {cmd.pitch, cmd.roll, cmd.height};
    const pmg::GaitFrame g = core.step(c);
    ASSERT_EQ(f.t, g.t);
    ASSERT_EQ(f.phase, g.phase);
    for (int j = 0; j < 12; ++j) {
      ASSERT_EQ(q[j], g.q_ref[j]);
      ASSERT_EQ(qd[j], g.qd_ref[j]);
    }
    EXPECT_EQ(f.contact[0], g.contact[0] ? 1 : 0);
    EXPECT_EQ(f.u_prime[0], g.u_prime.v.x());
    EXPECT_EQ(f.u_prime[5], g.u_prime.height);
    EXPECT_EQ(f.slip_post, g.slip_post);
    EXPECT_EQ(f.command.vx, g.command[pmg::DynamicChannel::kVx]);
  }
  EXPECT_EQ(pmg_session_frame_count(s), 200);
  const pmg_command zero = {0, 0, 0, 0, 0, 0.8};
  EXPECT_EQ(pmg_session_step(s, &zero, nullptr, q, qd, 3), PMG_ERR_BUFFER_TOO_SMALL);
  EXPECT_EQ(pmg_session_step(s, nullptr, nullptr, nullptr, nullptr, 0), PMG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(pmg_session_set_gco(s, 0), PMG_OK);
  pmg_session_free(s);
}

TEST_F(CApi, SessionRejectsBadConfig) {
  pmg_session_config cfg;
  pmg_session_config_default(&cfg);
  cfg.dt = 0.5;
  pmg_session* s = nullptr;
  EXPECT_EQ(pmg_session_create(h_.robot, h_.clips, &cfg, &s), PMG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(s, nullptr);
  EXPECT_EQ(pmg_session_create(nullptr, h_.clips, nullptr, &s), PMG_ERR_INVALID_ARGUMENT);
}

TEST_F(CApi, ClipsetOutlivesRobotHandle) {
  pmg_robot* r = nullptr;
  pmg_clipset* c = nullptr;
  ASSERT_EQ(pmg_robot_load(files_.robot.c_str(), &r), PMG_OK);
  ASSERT_EQ(pmg_clipset_load(files_.clips.c_str(), r, &c), PMG_OK);
  pmg_session* s = nullptr;
  ASSERT_EQ(pmg_session_create(r, c, nullptr, &s), PMG_OK);
  pmg_robot_free(r);
  pmg_clipset_free(c);
  const pmg_command cmd = {0.2, 0, 0, 0, 0, 0.8};
  pmg_frame f;
  EXPECT_EQ(pmg_session_step(s, &cmd, &f, nullptr, nullptr, 0), PMG_OK);
  pmg_session_free(s);
}

TEST_F(CApi, GenerateFileMatchesBatch) {
  std::ofstream(dir_ / "cmd.csv") << "t,vx,vy,wz,pitch,roll,height\n0,0,0,0,0,0,0.8\n0.5,0.3,0,0,0,0,0.8\n1.5,0.1,0.2,0.3,0.1,0,0.75\n2.0,0.1,0.2,0.3,0.1,0,0.75\n";
  pmg_generate_options o = {};
  o.robot_path = files_.robot.c_str();
  o.clips_path = files_.clips.c_str();
  const std::string cmd = (dir_ / "cmd.csv").string(), out = (dir_ / "traj.csv").string(),
                    diag = (dir_ / "diag.csv").string();
  o.commands_path = cmd.c_str();
  o.out_path = out.c_str();
  o.diag_path = diag.c_str();
  pmg_session_config_default(&o.session);
  pmg_generate_summary sum;
  ASSERT_EQ(pmg_generate_file(&o, &sum), PMG_OK) << pmg_last_error();
  EXPECT_EQ(sum.frames, 201);
  EXPECT_GT(sum.max_slip_pre, 0.0);

  const pmg::fixture::Rig rig = pmg::fixture::make_rig();
  pmg::GaitSession core(rig.model, rig.library);
  std::ostringstream expect;
  pmg::run_batch(core, pmg::sample_schedule(pmg::load_command_schedule(cmd), 0.01), expect, nullptr);
  std::ifstream in(out);
  std::stringstream got;
  got << in.rdbuf();
  EXPECT_EQ(got.str(), expect.str());
  EXPECT_TRUE(std::filesystem::exists(diag));

  o.commands_path = "/nonexistent.csv";
  EXPECT_EQ(pmg_generate_file(&o, &sum), PMG_ERR_IO);
}

TEST_F(CApi, PreprocessExtractsClip) {
  const pmg::fixture::HumanoidSpec spec;
  const pmg::MotionClip clip = pmg::fixture::gait_clip(spec, pmg::DynamicChannel::kVx);
  const std::string cap = (dir_ / "capture.csv").string();
  {
    std::ofstream f(cap);
    f << "t";
    for (int j = 0; j < 12; ++j) f << ",q" << j;
    f << ",contactL,contactR\n";
    const long n = clip.n_frames();
    f.precision(17);
    for (long k = 0; k < 3 * n + 1; ++k) {
      const double phase = static_cast<double>(k % n) / static_cast<double>(n);
      f << 0.01 * static_cast<double>(k);
      for (int j = 0; j < 12; ++j) f << ',' << clip.frames_q(k % n, j);
      f << ',' << pmg::contact_at_phase(clip, pmg::Foot::kLeft, phase) << ','
        << pmg::contact_at_phase(clip, pmg::Foot::kRight, phase) << '\n';
    }
  }
  pmg_preprocess_options o = {};
  const std::string out = (dir_ / "vx.json").string();
  o.capture_path = cap.c_str();
  o.out_path = out.c_str();
  o.robot_path = files_.robot.c_str();
  o.name = "vx_capture";
  o.channel = "vx";
  o.direction = 1;
  o.rate_hz = 100.0;
  o.kernel_std = 3.0;
  char warnings[512];
  ASSERT_EQ(pmg_preprocess(&o, warnings, sizeof warnings), PMG_OK) << pmg_last_error();
  const pmg::MotionClip back = pmg::load_clip(out);
  EXPECT_EQ(back.name, "vx_capture");
  EXPECT_EQ(back.n_frames(), clip.n_frames());
  EXPECT_NEAR(back.period, clip.period, 1e-9);
  o.channel = "sideways";
  EXPECT_EQ(pmg_preprocess(&o, nullptr, 0), PMG_ERR_INVALID_ARGUMENT);
}

TEST_F(CApi, SysidRunWritesReport) {
  pmg::MotorParams truth;
  truth.kp = 30;
  truth.kd = 0.4;
  truth.inertia = 0.008;
  truth.coulomb = 0.1;
  const pmg::Excitation ex = pmg::excitation({});
  pmg::ResponseRecord rec;
  rec.dt = ex.dt;
  rec.q_cmd = ex.q_cmd;
  rec.q_meas = pmg::simulate_motor(truth, rec.q_cmd, rec.dt);
  rec.q_meas.resize(rec.q_cmd.size());
  const std::string rec_path = (dir_ / "rec.csv").string(), bounds = (dir_ / "bounds.json").string(),
                    out = (dir_ / "sysid.json").string();
  pmg::save_response_record(rec, rec_path);
  std::ofstream(bounds) << R"({"Kp": [10, 100], "Kd": [0.1, 1], "I": [0.002, 0.02], "fixed": {"f_c": 0.1}})";
  pmg_sysid_options o;
  pmg_sysid_options_default(&o);
  o.record_path = rec_path.c_str();
  o.bounds_path = bounds.c_str();
  o.out_path = out.c_str();
  o.threads = 1;
  pmg_sysid_summary sum;
  ASSERT_EQ(pmg_sysid_run(&o, &sum), PMG_OK) << pmg_last_error();
  EXPECT_LT(sum.loss_after, sum.loss_before);
  EXPECT_EQ(sum.flagged, 0);
  std::ifstream in(out);
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_NEAR(j["eta_star"]["Kp"].get<double>(), 30.0, 1.5);
}

TEST_F(CApi, ZerocalRunWritesReport) {
  auto model = std::make_shared<const pmg::RobotModel>(pmg::fixture::humanoid_model());
  Eigen::VectorXd z(6);
  z << 0.03, -0.05, 0.02, 0.04, -0.03, 0.06;
  std::vector<Eigen::VectorXd> poses;
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd p(6);
    p << 0.1 * k - 0.15, 0.05 * (k % 2 ? 1 : -1), -0.2 - 0.1 * k, 0.5 + 0.1 * k, -0.2, 0.03 * k;
    poses.push_back(p);
  }
  pmg::SimulatedLegSampler leg(model, pmg::Foot::kLeft, poses, z);
  const std::string samples = (dir_ / "samples.json").string(), out = (dir_ / "zc.json").string();
  std::ofstream(samples) << pmg::pose_samples_to_json(leg.sample(Eigen::VectorXd::Zero(6)));
  pmg_zerocal_options o;
  pmg_zerocal_options_default(&o);
  EXPECT_EQ(o.alpha, 0.5);
  EXPECT_EQ(o.max_iterations, 50);
  o.samples_path = samples.c_str();
  o.out_path = out.c_str();
  pmg_zerocal_summary sum;
  ASSERT_EQ(pmg_zerocal_run(&o, &sum), PMG_OK) << pmg_last_error();
  EXPECT_EQ(sum.converged, 1);
  std::ifstream in(out);
  const nlohmann::json j = nlohmann::json::parse(in);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(j["offsets"][static_cast<std::size_t>(i)].get<double>(), z[i], 0.002);
  o.alpha = 0.0;
  EXPECT_EQ(pmg_zerocal_run(&o, &sum), PMG_ERR_INVALID_ARGUMENT);
}

}  // namespace
