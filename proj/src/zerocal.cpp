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

#include "pmg/zerocal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "pmg/error.hpp"

namespace pmg {
namespace {

using detail::Json;

constexpr double kSensitivityStep = 1e-6;

}  // namespace

ZeroCalibState ZeroCalibState::initial(std::size_t joints) {
  ZeroCalibState s;
  s.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(joints));
  return s;
}

void ZeroCalibState::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]", "alpha");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "must be > 0", "tau");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "must be > 0", "eps");
  if (consecutive < 1) throw Error(ErrorCode::kInvalidArgument, "must be >= 1", "consecutive");
  if (!z.allFinite()) throw Error(ErrorCode::kInvalidArgument, "offsets not finite", "z");
}

void PoseSample::validate() const {
  const std::string path = "pose " + std::to_string(pose_id);
  if (r.size() != q_sim.size()) {
    throw Error(ErrorCode::kInvalidArgument, "r and q_sim differ in length", path);
  }
  for (const Eigen::Vector3d* s : {&s_real, &s_sim}) {
    const double n = s->norm();
    if (!(n >= 0.9 && n <= 1.1)) {
      throw Error(ErrorCode::kInvalidArgument, "IMU signal is not normalized", path);
    }
  }
}

bool imu_aligned(const PoseSample& sample, double tau) {
  return (sample.s_real - sample.s_sim).norm() <= tau;
}

std::vector<PoseSample> gate_samples(const std::vector<PoseSample>& samples, double tau) {
  std::vector<PoseSample> out;
  for (const PoseSample& s : samples) {
    if (imu_aligned(s, tau)) out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd residuals(const std::vector<PoseSample>& samples, const Eigen::VectorXd& z) {
  if (samples.empty()) throw Error(ErrorCode::kState, "no aligned poses");
  Eigen::MatrixXd delta(z.size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const PoseSample& s = samples[k];
    if (s.r.size() != z.size() || s.q_sim.size() != z.size()) {
      throw Error(ErrorCode::kInvalidArgument, "joint count mismatch",
                  "pose " + std::to_string(s.pose_id));
    }
    delta.col(static_cast<Eigen::Index>(k)) = s.q_sim - (s.r + z);
  }
  return delta;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

Eigen::VectorXd aggregate(const Eigen::MatrixXd& delta) {
  if (delta.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "no poses to aggregate");
  Eigen::VectorXd out(delta.rows());
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(delta.cols()));
    for (Eigen::Index k = 0; k < delta.cols(); ++k) row[static_cast<std::size_t>(k)] = delta(i, k);
    out[i] = median(std::move(row));
  }
  return out;
}

ZeroCalibState update(ZeroCalibState state, const Eigen::VectorXd& delta) {
  if (delta.size() != state.z.size()) {
    throw Error(ErrorCode::kInvalidArgument, "delta size does not match offsets");
  }
  const Eigen::VectorXd step = state.alpha * delta;
  state.z += step;
  state.history.push_back(delta);
  ++state.iteration;
  const bool small = step.size() == 0 || step.cwiseAbs().maxCoeff() < state.epsilon;
  state.streak = small ? state.streak + 1 : 0;
  state.converged = state.streak >= state.consecutive;
  return state;
}

SimulatedLegSampler::SimulatedLegSampler(std::shared_ptr<const RobotModel> model, Foot foot,
                                         std::vector<Eigen::VectorXd> poses,
                                         Eigen::VectorXd z_true, SimulatedLegOptions options)
    : model_(std::move(model)),
      foot_(foot),
      poses_(std::move(poses)),
      z_true_(std::move(z_true)),
      options_(options),
      rng_(options.seed) {
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "null robot model");
  for (const ChainLink& link : model_->chain(foot_)) {
    if (!link.is_fixed()) joint_index_.push_back(link.joint);
  }
  const auto n = static_cast<Eigen::Index>(joint_index_.size());
  if (z_true_.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "injected offsets must have one entry per leg joint");
  }
  if (poses_.empty()) throw Error(ErrorCode::kInvalidArgument, "no default poses");
  for (const Eigen::VectorXd& p : poses_) {
    if (p.size() != n) throw Error(ErrorCode::kInvalidArgument, "pose size must match leg joints");
  }
}

Eigen::Vector3d SimulatedLegSampler::gravity(const Eigen::VectorXd& q_leg) const {
  Eigen::VectorXd q = model_->q_stand;
  for (std::size_t i = 0; i < joint_index_.size(); ++i) {
    q[joint_index_[i]] = q_leg[static_cast<Eigen::Index>(i)];
  }
  // With the sole flat on the ground the base orientation is the inverse of
  // the base-to-foot rotation.
  return fk_foot_pose(*model_, q, foot_).linear() * Eigen::Vector3d(0.0, 0.0, -1.0);
}

std::vector<PoseSample> SimulatedLegSampler::sample(const Eigen::VectorXd& z) {
  if (z.size() != z_true_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "offset vector has wrong size");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PoseSample> out;
  for (std::size_t k = 0; k < poses_.size(); ++k) {
    PoseSample s;
    s.pose_id = static_cast<int>(k);
    s.r = poses_[k] - z;
    const Eigen::VectorXd q_true = s.r + z_true_;
    s.q_sim = q_true;
    if (options_.sim_noise > 0.0) {
      for (Eigen::Index i = 0; i < s.q_sim.size(); ++i) s.q_sim[i] += options_.sim_noise * normal(rng_);
    }
    s.s_real = gravity(q_true) + options_.imu_bias;
    if (options_.imu_noise > 0.0) {
      for (int i = 0; i < 3; ++i) s.s_real[i] += options_.imu_noise * normal(rng_);
    }
    s.s_sim = gravity(s.q_sim);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<bool> SimulatedLegSampler::observable() const {
  std::vector<bool> out(joint_index_.size(), false);
  for (const Eigen::VectorXd& pose : poses_) {
    for (std::size_t i = 0; i < joint_index_.size(); ++i) {
      Eigen::VectorXd lo = pose, hi = pose;
      lo[static_cast<Eigen::Index>(i)] -= kSensitivityStep;
      hi[static_cast<Eigen::Index>(i)] += kSensitivityStep;
      const double sens = (gravity(hi) - gravity(lo)).norm() / (2.0 * kSensitivityStep);
      if (sens >= options_.observability_threshold) out[i] = true;
    }
  }
  return out;
}

FileSampler::FileSampler(std::vector<PoseSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorCode::kInvalidArgument, "no pose samples");
  for (const PoseSample& s : samples_) {
    s.validate();
    if (s.r.size() != samples_.front().r.size()) {
      throw Error(ErrorCode::kInvalidArgument, "inconsistent joint count",
                  "pose " + std::to_string(s.pose_id));
    }
  }
}

std::size_t FileSampler::joints() const { return static_cast<std::size_t>(samples_.front().r.size()); }

std::vector<PoseSample> FileSampler::sample(const Eigen::VectorXd& /*z*/) { return samples_; }

std::vector<PoseSample> parse_pose_samples(std::string_view json_text) {
  const Json doc = detail::parse_json_text(json_text, "pose samples");
  const Json* list = &doc;
  if (doc.is_object()) list = &detail::require_array(doc, "samples", "");
  if (!list->is_array()) throw Error(ErrorCode::kSchema, "expected a list of pose samples");
  std::vector<PoseSample> out;
  for (std::size_t k = 0; k < list->size(); ++k) {
    const Json& e = (*list)[k];
    const std::string path = detail::index_path("samples", k);
    PoseSample s;
    s.pose_id = detail::require_int(e, "pose_id", path);
    s.r = detail::as_vector(detail::require(e, "r", path), path + ".r");
    s.q_sim = detail::as_vector(detail::require(e, "q_sim", path), path + ".q_sim", s.r.size());
    s.s_real = detail::as_vector3(detail::require(e, "s_real", path), path + ".s_real");
    s.s_sim = detail::as_vector3(detail::require(e, "s_sim", path), path + ".s_sim");
    try {
      s.validate();
    } catch (const Error& err) {
      throw Error(ErrorCode::kSchema, err.what(), path);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PoseSample> load_pose_samples(const std::filesystem::path& path) {
  return parse_pose_samples(detail::read_text_file(path));
}

std::string pose_samples_to_json(const std::vector<PoseSample>& samples) {
  Json list = Json::array();
  for (const PoseSample& s : samples) {
    list.push_back({{"pose_id", s.pose_id},
                    {"r", detail::to_json(s.r)},
                    {"q_sim", detail::to_json(s.q_sim)},
                    {"s_real", detail::to_json(Eigen::VectorXd(s.s_real))},
                    {"s_sim", detail::to_json(Eigen::VectorXd(s.s_sim))}});
  }
  return list.dump(2) + "\n";
}

bool ZeroCalibReport::flagged(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::string ZeroCalibReport::to_json() const {
  Json doc;
  doc["offsets"] = detail::to_json(offsets);
  doc["iterations"] = iterations;
  doc["converged"] = converged;
  doc["flags"] = flags;
  doc["unobservable"] = unobservable;
  doc["accepted_poses"] = accepted;
  Json hist = Json::array();
  for (const Eigen::VectorXd& d : history) hist.push_back(detail::to_json(d));
  doc["delta_history"] = hist;
  doc["config"] = {{"alpha", state.alpha},
                   {"tau", state.tau},
                   {"eps", state.epsilon},
                   {"consecutive", state.consecutive}};
  return doc.dump(2) + "\n";
}

ZeroCalibReport calibrate(PoseSampler& sampler, ZeroCalibState state,
                          const CalibrateOptions& options) {
  const auto n = static_cast<Eigen::Index>(sampler.joints());
  if (state.z.size() == 0) state.z = Eigen::VectorXd::Zero(n);
  if (state.z.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "offset vector does not match sampler joints");
  }
  state.validate();
  if (options.max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iteration cap must be >= 1");
  }

  ZeroCalibReport report;
  const std::vector<bool> observable = sampler.observable();
  report.unobservable.assign(static_cast<std::size_t>(n), false);
  for (std::size_t i = 0; i < observable.size() && i < report.unobservable.size(); ++i) {
    report.unobservable[i] = !observable[i];
  }

  while (!state.converged && state.iteration < options.max_iterations) {
    const std::vector<PoseSample> samples = sampler.sample(state.z);
    std::set<int> ids;
    for (const PoseSample& s : samples) ids.insert(s.pose_id);
    if (static_cast<int>(ids.size()) < options.min_poses) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sampler must provide at least " + std::to_string(options.min_poses) +
                      " distinct poses");
    }
    const std::vector<PoseSample> accepted = gate_samples(samples, state.tau);
    report.accepted.push_back(static_cast<int>(accepted.size()));
    Eigen::VectorXd delta = aggregate(residuals(accepted, state.z));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (report.unobservable[static_cast<std::size_t>(i)]) delta[i] = 0.0;
    }
    state = update(std::move(state), delta);
  }

  report.offsets = state.z;
  report.iterations = state.iteration;
  report.converged = state.converged;
  report.history = state.history;
  if (!state.converged) report.flags.push_back("iteration_cap");
  if (std::any_of(report.unobservable.begin(), report.unobservable.end(), [](bool b) { return b; })) {
    report.flags.push_back("unobservable");
  }
  report.state = state;
  return report;
}

}  // namespace pmg
