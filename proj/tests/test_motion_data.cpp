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

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "humanoid.hpp"
#include "pmg/error.hpp"
#include "pmg/motion_data.hpp"

namespace pmg {
namespace {

MotionClip single_joint_clip(const std::vector<double>& q, double period = 1.0) {
  MotionClip c;
  c.name = "probe";
  const auto n = static_cast<long>(q.size());
  c.frames_q.resize(n, 1);
  for (long k = 0; k < n; ++k) c.frames_q(k, 0) = q[static_cast<std::size_t>(k)];
  c.frames_qd = Eigen::MatrixXd::Zero(n, 1);
  c.base_v = Eigen::MatrixXd::Zero(n, 3);
  c.base_w = Eigen::VectorXd::Zero(n);
  c.contact = {ContactWindow{0.25, 0.2}, ContactWindow{0.75, 0.2}};
  c.period = period;
  recompute_velocities(c);
  return c;
}

std::vector<double> sawtooth(long n, double amplitude) {
  std::vector<double> q(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) q[static_cast<std::size_t>(k)] = amplitude * static_cast<double>(k) / static_cast<double>(n);
  return q;
}

double max_abs_velocity(const MotionClip& c) { return c.frames_qd.cwiseAbs().maxCoeff(); }

// Circular central difference at every frame, written out independently.
std::vector<double> circular_velocity(const MotionClip& c) {
  const long n = c.n_frames();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    v[static_cast<std::size_t>(k)] =
        (c.frames_q((k + 1) % n, 0) - c.frames_q((k + n - 1) % n, 0)) * static_cast<double>(n) / (2.0 * c.period);
  }
  return v;
}

RawCapture tile(const MotionClip& clip, int cycles, double rate_hz) {
  const long n = clip.n_frames();
  RawCapture raw;
  raw.q.resize(n * cycles, clip.dof());
  raw.base_v = Eigen::MatrixXd::Zero(n * cycles, 3);
  raw.base_w = Eigen::VectorXd::Zero(n * cycles);
  for (long r = 0; r < n * cycles; ++r) {
    raw.q.row(r) = clip.frames_q.row(r % n);
    raw.timestamps.push_back(static_cast<double>(r) / rate_hz);
    const double phase = static_cast<double>(r % n) / static_cast<double>(n);
    raw.contact.push_back({contact_at_phase(clip, Foot::kLeft, phase), contact_at_phase(clip, Foot::kRight, phase)});
  }
  return raw;
}

TEST(CircularDistance, MatchesDefinition) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double d = std::abs(a - b);
    EXPECT_DOUBLE_EQ(circular_distance(a, b), std::min(d, 1.0 - d));
  }
}

TEST(ContactAtPhase, WindowExamples) {
  EXPECT_TRUE(contact_at_phase(ContactWindow{0.25, 0.2}, 0.25));
  EXPECT_FALSE(contact_at_phase(ContactWindow{0.25, 0.2}, 0.50));
  EXPECT_TRUE(contact_at_phase(ContactWindow{0.05, 0.10}, 0.98));
  EXPECT_FALSE(contact_at_phase(ContactWindow{0.05, 0.10}, 0.90));
}

TEST(ContactAtPhase, DutyFactorIsTwiceSigma) {
  const int grid = 1000;
  for (double mu : {0.0, 0.1, 0.5, 0.93}) {
    for (double sigma : {0.05, 0.2, 0.35, 0.49}) {
      int on = 0;
      for (int i = 0; i < grid; ++i) on += contact_at_phase(ContactWindow{mu, sigma}, static_cast<double>(i) / grid);
      EXPECT_NEAR(static_cast<double>(on) / grid, 2.0 * sigma, 1.0 / grid + 1e-12) << mu << " " << sigma;
    }
  }
}

TEST(ExtractCycle, HundredFrameCycleFromTwoTouchdowns) {
  const long frames = 200;
  RawCapture raw;
  raw.q.resize(frames, 2);
  raw.base_v = Eigen::MatrixXd::Zero(frames, 3);
  raw.base_w = Eigen::VectorXd::Zero(frames);
  for (long r = 0; r < frames; ++r) {
    const double phase = static_cast<double>(r - 20) / 100.0;
    raw.q(r, 0) = std::sin(2 * std::numbers::pi * phase);
    raw.q(r, 1) = std::cos(2 * std::numbers::pi * phase);
    raw.timestamps.push_back(r / 100.0);
    const long local = ((r - 20) % 100 + 100) % 100;
    // Left stance covers the first 60 % of each cycle starting at a touchdown.
    raw.contact.push_back({r >= 20 && local < 60, local >= 50 && local < 95});
  }
  const CycleExtraction ex = extract_cycle(raw, 100.0);
  EXPECT_EQ(ex.clip.n_frames(), 100);
  EXPECT_DOUBLE_EQ(ex.clip.period, 1.0);
  EXPECT_DOUBLE_EQ(ex.clip.window(Foot::kLeft).mu, 0.3);
  EXPECT_DOUBLE_EQ(ex.clip.window(Foot::kLeft).sigma, 0.3);
  EXPECT_NEAR(ex.clip.frames_q(0, 0), 0.0, 1e-12);
  EXPECT_TRUE(ex.warnings.empty());
}

TEST(ExtractCycle, SingleTouchdownIsInsufficient) {
  RawCapture raw;
  raw.q = Eigen::MatrixXd::Zero(50, 1);
  raw.base_v = Eigen::MatrixXd::Zero(50, 3);
  raw.base_w = Eigen::VectorXd::Zero(50);
  for (int r = 0; r < 50; ++r) {
    raw.timestamps.push_back(r * 0.01);
    raw.contact.push_back({r >= 10, false});
  }
  try {
    extract_cycle(raw, 100.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient cycles"), std::string::npos);
  }
}

TEST(ExtractCycle, NonPeriodicCycleWarns) {
  const fixture::HumanoidSpec spec;
  MotionClip clip = fixture::gait_clip(spec, DynamicChannel::kVx);
  RawCapture raw = tile(clip, 3, 100.0);
  // Drift the joints so the next touchdown pose differs from the first.
  for (long r = 0; r < raw.n_frames(); ++r) raw.q(r, 2) += 0.002 * static_cast<double>(r);
  const CycleExtraction ex = extract_cycle(raw, 100.0);
  ASSERT_EQ(ex.warnings.size(), 1u);
  EXPECT_NE(ex.warnings[0].find("non-periodic"), std::string::npos);
}

TEST(ExtractCycle, TiledClipRecoversPeriodAndWindows) {
  const fixture::HumanoidSpec spec;
  const MotionClip clip = fixture::gait_clip(spec, DynamicChannel::kVx);
  const double quantum = 1.0 / static_cast<double>(clip.n_frames());
  for (int k : {2, 3, 5}) {
    const CycleExtraction ex = extract_cycle(tile(clip, k, 100.0), 100.0);
    EXPECT_EQ(ex.clip.n_frames(), clip.n_frames());
    EXPECT_NEAR(ex.clip.period, clip.period, 1e-12);
    // The extracted cycle starts at the left touchdown.
    const double touchdown = clip.window(Foot::kLeft).mu - clip.window(Foot::kLeft).sigma;
    for (Foot f : kFeet) {
      const double mu = wrap_phase(ex.clip.window(f).mu + touchdown);
      EXPECT_LE(circular_distance(mu, clip.window(f).mu), quantum) << foot_name(f);
      EXPECT_LE(std::abs(ex.clip.window(f).sigma - clip.window(f).sigma), quantum);
    }
  }
}

TEST(SmoothBoundary, ConstantIsUnchanged) {
  const MotionClip c = single_joint_clip(std::vector<double>(64, 0.7));
  const MotionClip s = smooth_boundary(c);
  for (long k = 0; k < 64; ++k) EXPECT_DOUBLE_EQ(s.frames_q(k, 0), 0.7);
  EXPECT_EQ(max_abs_velocity(s), 0.0);
}

TEST(SmoothBoundary, TinyKernelIsIdentity) {
  const MotionClip c = single_joint_clip(sawtooth(100, 1.0));
  const MotionClip s = smooth_boundary(c, 1e-3);
  EXPECT_LT((s.frames_q - c.frames_q).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SmoothBoundary, RejectsNonPositiveKernel) {
  const MotionClip c = single_joint_clip(sawtooth(16, 1.0));
  EXPECT_THROW(smooth_boundary(c, 0.0), Error);
}

TEST(SmoothBoundary, MatchesDirectConvolutionOracle) {
  const long n = 120;
  const double kstd = 3.0;
  std::vector<double> q = sawtooth(n, 0.8);
  for (long k = 0; k < n; ++k) q[static_cast<std::size_t>(k)] += 0.3 * std::sin(2 * std::numbers::pi * k / n);
  const MotionClip c = single_joint_clip(q);
  const MotionClip s = smooth_boundary(c, kstd);
  // Normalized truncated Gaussian, circular indexing, blended by the seam
  // weight exp(-m^2 / (2 (3 kstd)^2)) with m the distance to the wrap.
  const long radius = static_cast<long>(std::ceil(4 * kstd));
  double norm = 0.0;
  for (long j = -radius; j <= radius; ++j) norm += std::exp(-0.5 * (j / kstd) * (j / kstd));
  for (long k = 0; k < n; ++k) {
    double conv = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      conv += std::exp(-0.5 * (j / kstd) * (j / kstd)) / norm * q[static_cast<std::size_t>(((k + j) % n + n) % n)];
    }
    const double m = std::min(k + 0.5, n - k - 0.5);
    const double w = std::exp(-0.5 * std::pow(m / (3 * kstd), 2));
    const double expect = q[static_cast<std::size_t>(k)] + w * (conv - q[static_cast<std::size_t>(k)]);
    EXPECT_NEAR(s.frames_q(k, 0), expect, 1e-12) << k;
  }
  const std::vector<double> v = circular_velocity(s);
  for (long k = 0; k < n; ++k) EXPECT_NEAR(s.frames_qd(k, 0), v[static_cast<std::size_t>(k)], 1e-9);
}

TEST(SmoothBoundary, WideKernelReducesSawtoothSpikeTenfold) {
  // A unit jump smoothed by a Gaussian of std s has peak slope 1/(s sqrt(2 pi))
  // per frame against the raw 1/2, so a tenfold reduction needs s >= 8.
  const MotionClip c = single_joint_clip(sawtooth(400, 1.0));
  const MotionClip s = smooth_boundary(c, 10.0);
  EXPECT_GE(max_abs_velocity(c) / max_abs_velocity(s), 10.0);
}

TEST(SmoothBoundary, DefaultKernelRemovesSeamSpike) {
  const MotionClip c = single_joint_clip(sawtooth(100, 1.0));
  const MotionClip s = smooth_boundary(c);
  EXPECT_GT(max_abs_velocity(c) / max_abs_velocity(s), 3.0);
  EXPECT_LT(std::abs(s.frames_q(0, 0) - s.frames_q(99, 0)), std::abs(c.frames_q(0, 0) - c.frames_q(99, 0)));
}

TEST(SmoothBoundary, IdempotentOnClipAlreadySmoothAtSeam) {
  // Linear through the wrap for 40 frames either side, smooth turnaround in
  // the middle of the cycle.
  const long n = 200;
  std::vector<double> q(n);
  for (long k = 0; k < n; ++k) {
    const double x = static_cast<double>(k <= n / 2 ? k : k - n);
    q[static_cast<std::size_t>(k)] = 0.01 * x - 0.003 * std::pow(std::max(0.0, std::abs(x) - 45.0), 2) / 55.0 * (x > 0 ? 1 : -1);
  }
  const MotionClip c = single_joint_clip(q);
  const MotionClip once = smooth_boundary(c);
  const MotionClip twice = smooth_boundary(once);
  EXPECT_LT((twice.frames_q - once.frames_q).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SmoothBoundary, GaitClipSeamVelocityBoundedByInterior) {
  const long n = 100;
  std::vector<double> q = sawtooth(n, 0.5);
  const MotionClip raw = single_joint_clip(q);
  const MotionClip s = smooth_boundary(raw);
  const auto wrap_over_interior = [](const MotionClip& c) {
    const std::vector<double> v = circular_velocity(c);
    double interior = 0.0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) interior = std::max(interior, std::abs(v[k]));
    return std::max(std::abs(v.front()), std::abs(v.back())) / interior;
  };
  EXPECT_GE(wrap_over_interior(raw), 5.0);
  EXPECT_LE(wrap_over_interior(s), 1.2);
}

TEST(SampleClip, InterpolatesLinearlyWithWrap) {
  const MotionClip c = single_joint_clip({0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0});
  EXPECT_DOUBLE_EQ(sample_clip(c, 0.25).q[0], 2.0);
  EXPECT_DOUBLE_EQ(sample_clip(c, 0.25 + 0.0625).q[0], 2.5);
  // Between the last frame and the first.
  EXPECT_DOUBLE_EQ(sample_clip(c, 0.9375).q[0], 3.5);
  EXPECT_DOUBLE_EQ(sample_clip(c, 1.25).q[0], 2.0);
}

TEST(SampleStatic, ClampsAndInterpolates) {
  StaticClip s;
  s.channel = StaticChannel::kHeight;
  s.frames_q = (Eigen::MatrixXd(3, 1) << 1.0, 2.0, 4.0).finished();
  s.command_values = {0.6, 0.7, 0.8};
  EXPECT_DOUBLE_EQ(sample_static(s, 0.5)[0], 1.0);
  EXPECT_DOUBLE_EQ(sample_static(s, 0.9)[0], 4.0);
  EXPECT_NEAR(sample_static(s, 0.75)[0], 3.0, 1e-12);
}

TEST(Mirror, TwiceIsIdentity) {
  const fixture::HumanoidSpec spec;
  const MotionClip c = fixture::gait_clip(spec, DynamicChannel::kVy);
  const MirrorMap map = fixture::humanoid_mirror();
  const MotionClip m = mirror_clip(c, map);
  EXPECT_EQ(m.direction, -1);
  EXPECT_EQ(m.window(Foot::kLeft).mu, c.window(Foot::kRight).mu);
  EXPECT_EQ(m.base_v(3, 1), -c.base_v(3, 1));
  const MotionClip back = mirror_clip(m, map);
  EXPECT_EQ(back.frames_q, c.frames_q);
  EXPECT_EQ(back.base_v, c.base_v);
}

TEST(Mirror, MirroredFootTracksReflectedFoot) {
  const fixture::HumanoidSpec spec;
  const RobotModel model = fixture::humanoid_model(spec);
  const MotionClip c = fixture::gait_clip(spec, DynamicChannel::kVy);
  const MotionClip m = mirror_clip(c, fixture::humanoid_mirror());
  for (long k = 0; k < c.n_frames(); k += 7) {
    const Eigen::Vector3d left = fk_foot(model, c.frames_q.row(k).transpose(), Foot::kLeft);
    const Eigen::Vector3d right = fk_foot(model, m.frames_q.row(k).transpose(), Foot::kRight);
    EXPECT_LT((right - Eigen::Vector3d(left.x(), -left.y(), left.z())).norm(), 1e-12);
  }
}

TEST(ShiftPhase, WholeFrameShiftRotatesRows) {
  const MotionClip c = single_joint_clip({0, 1, 2, 3, 4, 5, 6, 7});
  const MotionClip s = shift_phase(c, 0.25);
  EXPECT_DOUBLE_EQ(s.frames_q(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.frames_q(7, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.window(Foot::kLeft).mu, 0.0);
  const MotionClip half = shift_phase(c, 0.0625);
  EXPECT_DOUBLE_EQ(half.frames_q(0, 0), 0.5);
}

TEST(ClipLibrary, MirroredVariantKeepsLeftStanceWindow) {
  const fixture::HumanoidSpec spec;
  const RobotModel model = fixture::humanoid_model(spec);
  const ClipLibrary lib(fixture::humanoid_clipset(spec), model);
  const MotionClip* pos = lib.dynamic(DynamicChannel::kVy, 1);
  const MotionClip* neg = lib.dynamic(DynamicChannel::kVy, -1);
  ASSERT_TRUE(pos && neg);
  EXPECT_NEAR(neg->window(Foot::kLeft).mu, pos->window(Foot::kLeft).mu, 1e-12);
  EXPECT_LT(neg->base_v(0, 1), 0.0);
  // Left stance foot still moves against the (now negative) base velocity.
  const long k = static_cast<long>(pos->window(Foot::kLeft).mu * neg->n_frames());
  const Eigen::Vector3d a = fk_foot(model, neg->frames_q.row(k).transpose(), Foot::kLeft);
  const Eigen::Vector3d b = fk_foot(model, neg->frames_q.row(k + 1).transpose(), Foot::kLeft);
  EXPECT_GT(b.y() - a.y(), 0.0);
  EXPECT_EQ(lib.dynamic(DynamicChannel::kVx, -1)->name, "vx_neg");
}

TEST(ClipSet, JsonRoundTripIsBitExact) {
  const fixture::HumanoidSpec spec;
  const auto dir = fixture::temp_dir("clipset");
  const ClipSet set = fixture::humanoid_clipset(spec);
  save_clipset(set, dir / "clips.json");
  const ClipSet back = load_clipset(dir / "clips.json");
  ASSERT_EQ(back.dynamic.size(), set.dynamic.size());
  for (std::size_t i = 0; i < set.dynamic.size(); ++i) {
    const MotionClip& a = set.dynamic[i];
    const MotionClip& b = back.dynamic[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.channel, b.channel);
    EXPECT_EQ(a.direction, b.direction);
    EXPECT_EQ(a.frames_q, b.frames_q);
    EXPECT_EQ(a.frames_qd, b.frames_qd);
    EXPECT_EQ(a.base_v, b.base_v);
    EXPECT_EQ(a.base_w, b.base_w);
    EXPECT_EQ(a.period, b.period);
    for (Foot f : kFeet) {
      EXPECT_EQ(a.window(f).mu, b.window(f).mu);
      EXPECT_EQ(a.window(f).sigma, b.window(f).sigma);
    }
  }
  ASSERT_EQ(back.statics.size(), set.statics.size());
  for (std::size_t i = 0; i < set.statics.size(); ++i) {
    EXPECT_EQ(back.statics[i].frames_q, set.statics[i].frames_q);
    EXPECT_EQ(back.statics[i].command_values, set.statics[i].command_values);
  }
  ASSERT_TRUE(back.mirror.has_value());
  EXPECT_EQ(back.mirror->permutation, set.mirror->permutation);
  EXPECT_EQ(back.mirror->sign, set.mirror->sign);
  std::filesystem::remove_all(dir);
}

TEST(ClipSet, SingleClipRoundTrip) {
  const auto dir = fixture::temp_dir("clip");
  const MotionClip c = fixture::gait_clip(fixture::HumanoidSpec{}, DynamicChannel::kWz);
  save_clip(c, dir / "wz.json");
  const MotionClip b = load_clip(dir / "wz.json");
  EXPECT_EQ(b.frames_q, c.frames_q);
  EXPECT_EQ(b.base_w, c.base_w);
  std::filesystem::remove_all(dir);
}

TEST(ClipSet, MissingChannelRejected) {
  ClipSet set = fixture::humanoid_clipset();
  std::erase_if(set.dynamic, [](const MotionClip& c) { return c.channel == DynamicChannel::kWz; });
  EXPECT_THROW(set.validate(), Error);
}

TEST(ClipSet, DofMismatchRejectedAtBind) {
  const ClipSet set = fixture::humanoid_clipset();
  RobotModel model = fixture::humanoid_model();
  model.joint_names.pop_back();
  model.q_stand.conservativeResize(11);
  model.chains[1].erase(model.chains[1].begin() + 5);
  EXPECT_THROW(ClipLibrary(set, model), Error);
}

TEST(RawCapture, LoadsCsvWithOptionalBaseColumns) {
  const auto dir = fixture::temp_dir("raw");
  {
    std::ofstream out(dir / "raw.csv");
    out << "t,q0,q1,contactL,contactR,vx,vy,vz,wz\n";
    for (int r = 0; r < 10; ++r) out << r * 0.01 << "," << r << "," << -r << "," << (r > 3) << "," << 0 << ",0.5,0,0,0.1\n";
  }
  const RawCapture raw = load_raw_capture(dir / "raw.csv");
  EXPECT_EQ(raw.n_frames(), 10);
  EXPECT_EQ(raw.q.cols(), 2);
  EXPECT_EQ(raw.q(4, 1), -4.0);
  EXPECT_TRUE(raw.contact[4][0]);
  EXPECT_FALSE(raw.contact[3][0]);
  EXPECT_DOUBLE_EQ(raw.base_v(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(raw.base_w[2], 0.1);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pmg
