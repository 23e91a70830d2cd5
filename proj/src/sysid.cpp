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

#include "pmg/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "csv.hpp"
#include "json_util.hpp"
#include "pmg/error.hpp"

namespace pmg {
namespace {

using detail::Json;

constexpr std::size_t kMinRecordLength = 100;
constexpr std::size_t kResidualSegments = 10;
constexpr std::size_t kMaxResidualPoints = 500;
constexpr double kOverfitRatio = 5.0;
constexpr double kResidualFloor = 1e-6;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Minimum-jerk blend 10s^3 - 15s^4 + 6s^5.
double quintic(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

bool log_scaled(const ParamBound& b) { return b.lower > 0.0; }

double to_param(const ParamBound& b, double x) {
  if (log_scaled(b)) return b.lower * std::pow(b.upper / b.lower, x);
  return b.lower + (b.upper - b.lower) * x;
}

MotorParams decode(const IdentifyConfig& config, const Eigen::VectorXd& x) {
  MotorParams m = config.fixed;
  for (std::size_t i = 0; i < config.bounds.size(); ++i) {
    set_param(m, config.bounds[i].param, to_param(config.bounds[i], x[static_cast<long>(i)]));
  }
  return m;
}

Json params_json(const MotorParams& m) {
  Json j;
  j["Kp"] = m.kp;
  j["Kd"] = m.kd;
  j["I"] = m.inertia;
  j["b"] = m.damping;
  j["f_c"] = m.coulomb;
  if (m.torque_limit) j["tau_max"] = *m.torque_limit;
  return j;
}

}  // namespace

void MotorParams::validate() const {
  if (!(kp > 0.0) || !(kd > 0.0) || !(inertia > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "Kp, Kd and I must be > 0");
  }
  if (damping < 0.0 || coulomb < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "damping and friction must be >= 0");
  }
  if (torque_limit && !(*torque_limit > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau_max must be > 0");
  }
}

std::string_view param_name(MotorParam p) {
  switch (p) {
    case MotorParam::kKp: return "Kp";
    case MotorParam::kKd: return "Kd";
    case MotorParam::kInertia: return "I";
    case MotorParam::kDamping: return "b";
    case MotorParam::kCoulomb: return "f_c";
  }
  return "?";
}

MotorParam parse_param(std::string_view name) {
  for (MotorParam p : {MotorParam::kKp, MotorParam::kKd, MotorParam::kInertia,
                       MotorParam::kDamping, MotorParam::kCoulomb}) {
    if (param_name(p) == name) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown motor parameter '" + std::string(name) + "'");
}

double get_param(const MotorParams& m, MotorParam p) {
  switch (p) {
    case MotorParam::kKp: return m.kp;
    case MotorParam::kKd: return m.kd;
    case MotorParam::kInertia: return m.inertia;
    case MotorParam::kDamping: return m.damping;
    case MotorParam::kCoulomb: return m.coulomb;
  }
  return 0.0;
}

void set_param(MotorParams& m, MotorParam p, double value) {
  switch (p) {
    case MotorParam::kKp: m.kp = value; break;
    case MotorParam::kKd: m.kd = value; break;
    case MotorParam::kInertia: m.inertia = value; break;
    case MotorParam::kDamping: m.damping = value; break;
    case MotorParam::kCoulomb: m.coulomb = value; break;
  }
}

void ResponseRecord::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "record dt must be > 0");
  if (q_cmd.size() != q_meas.size()) {
    throw Error(ErrorCode::kInvalidArgument, "q_cmd and q_meas differ in length");
  }
  if (q_cmd.size() < kMinRecordLength) {
    throw Error(ErrorCode::kInvalidArgument,
                "record needs at least " + std::to_string(kMinRecordLength) + " samples");
  }
}

ResponseRecord load_response_record(const std::filesystem::path& path) {
  const detail::CsvTable table = detail::read_csv(path);
  ResponseRecord r;
  std::vector<double> t;
  for (const auto& row : table.rows) {
    if (row.size() != 3) {
      throw Error(ErrorCode::kParse, path.string() + ": expected t,q_cmd,q_meas");
    }
    t.push_back(row[0]);
    r.q_cmd.push_back(row[1]);
    r.q_meas.push_back(row[2]);
  }
  if (t.size() < 2) throw Error(ErrorCode::kParse, path.string() + ": too few rows");
  r.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - r.dt) > 1e-6 * std::max(1.0, r.dt) + 1e-9) {
      throw Error(ErrorCode::kParse, path.string() + ": sample times are not uniform");
    }
  }
  r.validate();
  return r;
}

void save_response_record(const ResponseRecord& record,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "t,q_cmd,q_meas\n";
  for (std::size_t i = 0; i < record.size(); ++i) {
    detail::write_row(out, {static_cast<double>(i) * record.dt, record.q_cmd[i], record.q_meas[i]});
  }
}

std::vector<double> simulate_motor(const MotorParams& params,
                                   std::span<const double> q_cmd, double dt,
                                   double q0, double qd0) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  std::vector<double> out(q_cmd.size());
  if (q_cmd.empty()) return out;
  const double limit = params.torque_limit.value_or(std::numeric_limits<double>::infinity());
  const double inv_inertia = 1.0 / params.inertia;
  double q = q0;
  double qd = qd0;
  out[0] = q;
  for (std::size_t k = 0; k + 1 < q_cmd.size(); ++k) {
    const double pd = std::clamp(params.kp * (q_cmd[k] - q) - params.kd * qd, -limit, limit);
    const double torque = pd - params.damping * qd - params.coulomb * sign(qd);
    qd += dt * torque * inv_inertia;
    q += dt * qd;
    out[k + 1] = q;
  }
  return out;
}

double alignment_loss(const MotorParams& params, const ResponseRecord& record,
                      std::size_t begin, std::size_t end) {
  end = std::min(end, record.size());
  if (begin >= end) return 0.0;
  const std::vector<double> sim = simulate_motor(
      params, std::span<const double>(record.q_cmd.data(), end), record.dt,
      record.q_meas[0], 0.0);
  double loss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double e = sim[i] - record.q_meas[i];
    loss += e * e;
  }
  if (!std::isfinite(loss) || loss > kDivergedLoss) return kDivergedLoss;
  return loss;
}

Excitation excitation(const ExcitationConfig& config) {
  if (!(config.duration_s >= 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "excitation duration must be >= 2 s");
  }
  if (config.step_amplitudes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one step amplitude required");
  }
  if (!(config.rate_hz > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate must be > 0");

  Excitation ex;
  ex.dt = 1.0 / config.rate_hz;
  const auto total = static_cast<std::size_t>(std::llround(config.duration_s * config.rate_hz));
  const double max_amp = *std::max_element(config.step_amplitudes.begin(),
                                           config.step_amplitudes.end(),
                                           [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double amp = std::abs(max_amp);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto step_len = static_cast<std::size_t>(std::floor(config.step_fraction * static_cast<double>(total)));
  const auto quintic_len = static_cast<std::size_t>(std::floor(config.quintic_fraction * static_cast<double>(total)));
  const std::size_t sweep_len = total - step_len - quintic_len;

  // Steps: cycle through the amplitudes with random signs, largest first so
  // the full range is always covered.
  std::vector<double> amps = config.step_amplitudes;
  for (double& a : amps) a = std::abs(a);
  std::sort(amps.begin(), amps.end(), std::greater<>());
  const int n_steps = std::max(3, static_cast<int>(std::lround(
                                      config.step_fraction * config.duration_s / config.step_hold_s)));
  double level = 0.0;
  std::size_t cursor = 0;
  for (int s = 0; s < n_steps; ++s) {
    const std::size_t begin = cursor;
    const std::size_t end = step_len * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(n_steps);
    double next = amps[static_cast<std::size_t>(s) % amps.size()] * (unit(rng) < 0.5 ? -1.0 : 1.0);
    if (std::abs(next - level) < 1e-12) next = -next;
    level = next;
    ex.q_cmd.insert(ex.q_cmd.end(), end - begin, level);
    cursor = end;
  }
  ex.segments.push_back({"step", 0, cursor});

  // Minimum-jerk transitions between random targets, ending at zero so the
  // chirp starts continuously.
  const int n_quintic = std::max(1, config.quintic_segments);
  const std::size_t quintic_begin = cursor;
  for (int s = 0; s < n_quintic; ++s) {
    const std::size_t begin = cursor;
    const std::size_t end = quintic_begin + quintic_len * static_cast<std::size_t>(s + 1) /
                                                static_cast<std::size_t>(n_quintic);
    const double target = (s + 1 == n_quintic) ? 0.0 : amp * (2.0 * unit(rng) - 1.0);
    const double start = level;
    const std::size_t len = end - begin;
    for (std::size_t i = 0; i < len; ++i) {
      const double u = static_cast<double>(i + 1) / static_cast<double>(len);
      ex.q_cmd.push_back(start + (target - start) * quintic(u));
    }
    level = target;
    cursor = end;
  }
  ex.segments.push_back({"quintic", quintic_begin, cursor});

  const double sweep_t = static_cast<double>(sweep_len) * ex.dt;
  for (std::size_t i = 0; i < sweep_len; ++i) {
    const double t = static_cast<double>(i) * ex.dt;
    const double phase = 2.0 * std::numbers::pi *
                         (config.sweep_f0_hz * t +
                          0.5 * (config.sweep_f1_hz - config.sweep_f0_hz) * t * t / sweep_t);
    ex.q_cmd.push_back(amp * std::sin(phase));
  }
  ex.segments.push_back({"sweep", cursor, cursor + sweep_len});
  return ex;
}

int count_step_events(std::span<const double> q_cmd) {
  if (q_cmd.size() < 2) return 0;
  const auto [lo, hi] = std::minmax_element(q_cmd.begin(), q_cmd.end());
  const double range = *hi - *lo;
  if (range < 1e-9) return 0;
  int events = 0;
  for (std::size_t i = 1; i < q_cmd.size(); ++i) {
    if (std::abs(q_cmd[i] - q_cmd[i - 1]) > 0.1 * range) ++events;
  }
  return events;
}

void IdentifyConfig::validate() const {
  if (bounds.empty()) throw Error(ErrorCode::kInvalidArgument, "no parameters to identify");
  for (const ParamBound& b : bounds) {
    if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad bounds for " + std::string(param_name(b.param)));
    }
  }
  if (population < 4) throw Error(ErrorCode::kInvalidArgument, "population must be >= 4");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 0.9)) {
    throw Error(ErrorCode::kInvalidArgument, "holdout fraction must lie in [0, 0.9)");
  }
}

IdentifyConfig load_bounds(const std::filesystem::path& path) {
  const Json doc = detail::read_json_file(path);
  if (!doc.is_object()) throw Error(ErrorCode::kSchema, "expected object", path.string());
  IdentifyConfig config;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "fixed") continue;
    ParamBound b;
    try {
      b.param = parse_param(it.key());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema, e.what(), it.key());
    }
    const Eigen::VectorXd r = detail::as_vector(it.value(), it.key(), 2);
    b.lower = r[0];
    b.upper = r[1];
    config.bounds.push_back(b);
  }
  std::sort(config.bounds.begin(), config.bounds.end(),
            [](const ParamBound& a, const ParamBound& b) { return a.param < b.param; });
  if (doc.contains("fixed")) {
    const Json& fixed = doc["fixed"];
    for (auto it = fixed.begin(); it != fixed.end(); ++it) {
      const double v = detail::as_number(it.value(), "fixed." + it.key());
      if (it.key() == "tau_max") {
        config.fixed.torque_limit = v;
      } else {
        try {
          set_param(config.fixed, parse_param(it.key()), v);
        } catch (const Error& e) {
          throw Error(ErrorCode::kSchema, e.what(), "fixed." + it.key());
        }
      }
    }
  }
  config.validate();
  return config;
}

bool CalibrationReport::flagged(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::string CalibrationReport::to_json() const {
  Json doc;
  doc["eta_star"] = params_json(identified);
  doc["eta_initial"] = params_json(initial);
  doc["loss_before"] = loss_before;
  doc["loss_after"] = loss_after;
  doc["train_rms"] = train_rms;
  doc["validation_rms"] = validation_rms;
  doc["evaluations"] = evaluations;
  doc["generations"] = generations;
  doc["stop_reason"] = stop_reason;
  doc["step_events"] = step_events;
  doc["flags"] = flags;
  Json segs = Json::array();
  for (const SegmentResidual& s : segments) {
    segs.push_back({{"begin", s.begin}, {"end", s.end},
                    {"rms_before", s.rms_before}, {"rms_after", s.rms_after}});
  }
  doc["segments"] = segs;
  doc["residual_stride"] = residual_stride;
  doc["residuals"] = residual_series;
  doc["best_loss_history"] = best_loss_history;
  Json cfg;
  Json bounds;
  for (const ParamBound& b : config.bounds) {
    bounds[std::string(param_name(b.param))] = {b.lower, b.upper};
  }
  cfg["bounds"] = bounds;
  cfg["fixed"] = params_json(config.fixed);
  cfg["population"] = config.population;
  cfg["max_evaluations"] = config.max_evaluations;
  cfg["sigma0"] = config.sigma0;
  cfg["holdout_fraction"] = config.holdout_fraction;
  cfg["seed"] = config.seed;
  doc["config"] = cfg;
  return doc.dump(2) + "\n";
}

CalibrationReport identify_joint(const ResponseRecord& record,
                                 const IdentifyConfig& config) {
  record.validate();
  config.validate();
  CalibrationReport report;
  report.config = config;

  const std::size_t n = record.size();
  const auto split = static_cast<std::size_t>(
      std::floor((1.0 - config.holdout_fraction) * static_cast<double>(n)));
  report.step_events = count_step_events(record.q_cmd);
  if (report.step_events < 3) report.flags.push_back("unidentifiable");

  const auto dim = static_cast<long>(config.bounds.size());
  CmaesConfig cma;
  cma.population = config.population;
  cma.mean0 = Eigen::VectorXd::Constant(dim, 0.5);
  cma.sigma0 = config.sigma0;
  cma.lower = Eigen::VectorXd::Zero(dim);
  cma.upper = Eigen::VectorXd::Ones(dim);
  cma.max_evaluations = config.max_evaluations;
  cma.target_loss = config.target_loss;
  cma.seed = config.seed;
  cma.threads = config.threads;

  const auto objective = [&](const Eigen::VectorXd& x) {
    return alignment_loss(decode(config, x), record, 0, split);
  };
  const CmaesResult opt = cmaes_minimize(objective, cma);

  report.initial = decode(config, cma.mean0);
  report.identified = decode(config, opt.best_x);
  report.loss_before = objective(cma.mean0);
  report.loss_after = opt.best_loss;
  report.evaluations = opt.evaluations;
  report.generations = opt.generations;
  report.stop_reason = opt.stop_reason;
  for (const CmaesGeneration& g : opt.history) report.best_loss_history.push_back(g.best_loss);

  const std::vector<double> before = simulate_motor(report.initial, record.q_cmd, record.dt,
                                                    record.q_meas[0], 0.0);
  const std::vector<double> after = simulate_motor(report.identified, record.q_cmd, record.dt,
                                                   record.q_meas[0], 0.0);
  const auto rms = [&](const std::vector<double>& sim, std::size_t b, std::size_t e) {
    if (e <= b) return 0.0;
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += (sim[i] - record.q_meas[i]) * (sim[i] - record.q_meas[i]);
    return std::sqrt(s / static_cast<double>(e - b));
  };
  report.train_rms = rms(after, 0, split);
  report.validation_rms = rms(after, split, n);
  if (split < n &&
      report.validation_rms > kOverfitRatio * std::max(report.train_rms, kResidualFloor)) {
    report.flags.push_back("overfit");
  }
  if (!std::isfinite(report.loss_after) || report.loss_after >= kDivergedLoss) {
    report.flags.push_back("diverged");
  }
  for (std::size_t s = 0; s < kResidualSegments; ++s) {
    const std::size_t b = n * s / kResidualSegments;
    const std::size_t e = n * (s + 1) / kResidualSegments;
    report.segments.push_back({b, e, rms(before, b, e), rms(after, b, e)});
  }
  report.residual_stride = std::max<std::size_t>(1, (n + kMaxResidualPoints - 1) / kMaxResidualPoints);
  for (std::size_t i = 0; i < n; i += report.residual_stride) {
    report.residual_series.push_back(after[i] - record.q_meas[i]);
  }
  return report;
}

}  // namespace pmg
