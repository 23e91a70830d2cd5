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

#include "pmg/motion_data.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"
#include "json_util.hpp"
#include "pmg/error.hpp"

namespace pmg {
namespace {

using detail::Json;

constexpr int kSchemaVersion = 1;
constexpr long kMinFrames = 8;

std::size_t foot_index(Foot f) { return static_cast<std::size_t>(f); }
std::size_t direction_index(int direction) { return direction > 0 ? 0 : 1; }

// Longest circular run of true values: (start, length).
std::pair<long, long> longest_circular_run(const std::vector<bool>& flags) {
  const long n = static_cast<long>(flags.size());
  long count = std::count(flags.begin(), flags.end(), true);
  if (count == 0 || count == n) return {0, count};
  // Start scanning just after a false entry so no run straddles the scan
  // origin.
  long origin = 0;
  while (flags[static_cast<std::size_t>(origin)]) ++origin;
  long best_start = 0, best_len = 0, cur_start = 0, cur_len = 0;
  for (long i = 1; i <= n; ++i) {
    const long k = (origin + i) % n;
    if (flags[static_cast<std::size_t>(k)]) {
      if (cur_len == 0) cur_start = k;
      ++cur_len;
      if (cur_len > best_len) {
        best_len = cur_len;
        best_start = cur_start;
      }
    } else {
      cur_len = 0;
    }
  }
  return {best_start, best_len};
}

Json window_to_json(const ContactWindow& w) {
  return Json{{"mu", w.mu}, {"sigma", w.sigma}};
}

ContactWindow parse_window(const Json& v, const std::string& path) {
  return {detail::require_number(v, "mu", path),
          detail::require_number(v, "sigma", path)};
}

Json clip_doc(const MotionClip& clip) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = clip.name;
  doc["channel"] = std::string(channel_name(clip.channel));
  doc["direction"] = clip.direction;
  doc["dof"] = clip.dof();
  doc["n_frames"] = clip.n_frames();
  doc["T"] = clip.period;
  for (Foot f : kFeet) {
    doc["contact"][std::string(foot_name(f))] = window_to_json(clip.window(f));
  }
  doc["q"] = detail::to_json(clip.frames_q);
  doc["qd"] = detail::to_json(clip.frames_qd);
  doc["base_v"] = detail::to_json(clip.base_v);
  doc["base_w"] = detail::to_json(clip.base_w);
  return doc;
}

MotionClip parse_clip_doc(const Json& doc, const std::string& path) {
  MotionClip clip;
  clip.name = detail::require_string(doc, "name", path);
  try {
    clip.channel =
        parse_dynamic_channel(detail::require_string(doc, "channel", path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what(), detail::join_path(path, "channel"));
  }
  clip.direction = doc.contains("direction")
                       ? detail::require_int(doc, "direction", path)
                       : 1;
  if (clip.direction != 1 && clip.direction != -1) {
    throw Error(ErrorCode::kSchema, "must be +1 or -1",
                detail::join_path(path, "direction"));
  }
  const long dof = detail::require_int(doc, "dof", path);
  const long n = detail::require_int(doc, "n_frames", path);
  clip.period = detail::require_number(doc, "T", path);
  const Json& contact = detail::require(doc, "contact", path);
  for (Foot f : kFeet) {
    const std::string key(foot_name(f));
    clip.contact[foot_index(f)] =
        parse_window(detail::require(contact, key, detail::join_path(path, "contact")),
                     detail::join_path(path, "contact." + key));
  }
  clip.frames_q = detail::as_matrix(detail::require(doc, "q", path),
                                    detail::join_path(path, "q"), n, dof);
  if (doc.contains("qd")) {
    clip.frames_qd = detail::as_matrix(doc["qd"], detail::join_path(path, "qd"),
                                       n, dof);
  } else {
    clip.frames_qd = Eigen::MatrixXd::Zero(n, dof);
    if (n > 0 && clip.period > 0) recompute_velocities(clip);
  }
  clip.base_v = doc.contains("base_v")
                    ? detail::as_matrix(doc["base_v"],
                                        detail::join_path(path, "base_v"), n, 3)
                    : Eigen::MatrixXd::Zero(n, 3);
  clip.base_w = doc.contains("base_w")
                    ? detail::as_vector(doc["base_w"],
                                        detail::join_path(path, "base_w"), n)
                    : Eigen::VectorXd::Zero(n);
  try {
    clip.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what(), path);
  }
  return clip;
}

Json static_doc(const StaticClip& clip) {
  Json doc;
  doc["name"] = clip.name;
  doc["channel"] = std::string(channel_name(clip.channel));
  doc["command_values"] = clip.command_values;
  doc["q"] = detail::to_json(clip.frames_q);
  return doc;
}

StaticClip parse_static_doc(const Json& doc, const std::string& path) {
  StaticClip clip;
  clip.name = doc.value("name", std::string("static"));
  try {
    clip.channel =
        parse_static_channel(detail::require_string(doc, "channel", path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what(), detail::join_path(path, "channel"));
  }
  const Eigen::VectorXd values =
      detail::as_vector(detail::require(doc, "command_values", path),
                        detail::join_path(path, "command_values"));
  clip.command_values.assign(values.data(), values.data() + values.size());
  const Json& q = detail::require_array(doc, "q", path);
  const long cols = q.empty() || !q[0].is_array() ? 0 : static_cast<long>(q[0].size());
  clip.frames_q = detail::as_matrix(q, detail::join_path(path, "q"),
                                    static_cast<long>(values.size()), cols);
  try {
    clip.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, e.what(), path);
  }
  return clip;
}

}  // namespace

void MotionClip::validate() const {
  const long n = n_frames();
  if (n < kMinFrames) {
    throw Error(ErrorCode::kSchema, "clip needs at least " +
                                        std::to_string(kMinFrames) + " frames");
  }
  if (!(period > 0.0)) throw Error(ErrorCode::kSchema, "T must be > 0");
  if (frames_qd.rows() != n || frames_qd.cols() != dof() || base_v.rows() != n ||
      base_v.cols() != 3 || base_w.size() != n) {
    throw Error(ErrorCode::kSchema, "per-frame arrays disagree in size");
  }
  if (!frames_q.allFinite() || !frames_qd.allFinite() || !base_v.allFinite() ||
      !base_w.allFinite()) {
    throw Error(ErrorCode::kSchema, "non-finite frame data");
  }
  for (Foot f : kFeet) {
    const ContactWindow& w = window(f);
    if (!(w.mu >= 0.0 && w.mu < 1.0)) {
      throw Error(ErrorCode::kSchema, "contact mu must lie in [0, 1)",
                  "contact." + std::string(foot_name(f)) + ".mu");
    }
    if (!(w.sigma > 0.0 && w.sigma < 0.5)) {
      throw Error(ErrorCode::kSchema, "contact sigma must lie in (0, 0.5)",
                  "contact." + std::string(foot_name(f)) + ".sigma");
    }
  }
}

void StaticClip::validate() const {
  if (command_values.size() < 2) {
    throw Error(ErrorCode::kSchema, "static clip needs at least two frames");
  }
  for (std::size_t i = 1; i < command_values.size(); ++i) {
    if (!(command_values[i] > command_values[i - 1])) {
      throw Error(ErrorCode::kSchema, "command_values must be strictly increasing",
                  "command_values");
    }
  }
  if (frames_q.rows() != static_cast<long>(command_values.size())) {
    throw Error(ErrorCode::kSchema, "one frame per command value required");
  }
}

Eigen::VectorXd MirrorMap::apply(const Eigen::VectorXd& q) const {
  Eigen::VectorXd out(q.size());
  for (long i = 0; i < q.size(); ++i) {
    out[i] = sign[static_cast<std::size_t>(i)] *
             q[permutation[static_cast<std::size_t>(i)]];
  }
  return out;
}

const MotionClip* ClipSet::find(DynamicChannel channel, int direction) const {
  for (const MotionClip& c : dynamic) {
    if (c.channel == channel && c.direction == direction) return &c;
  }
  return nullptr;
}

const StaticClip* ClipSet::find(StaticChannel channel) const {
  for (const StaticClip& c : statics) {
    if (c.channel == channel) return &c;
  }
  return nullptr;
}

long ClipSet::dof() const {
  if (!dynamic.empty()) return dynamic.front().dof();
  if (!statics.empty()) return statics.front().dof();
  return 0;
}

void ClipSet::validate() const {
  for (DynamicChannel c : kDynamicChannels) {
    if (!find(c, 1) && !find(c, -1)) {
      throw Error(ErrorCode::kSchema,
                  "no clip for channel '" + std::string(channel_name(c)) + "'",
                  "dynamic");
    }
  }
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    const MotionClip& c = dynamic[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (dynamic[j].channel == c.channel && dynamic[j].direction == c.direction) {
        throw Error(ErrorCode::kSchema, "duplicate clip for channel/direction",
                    detail::index_path("dynamic", i));
      }
    }
  }
  const long n = dof();
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    if (dynamic[i].dof() != n) {
      throw Error(ErrorCode::kSchema, "DoF differs between clips",
                  detail::index_path("dynamic", i));
    }
  }
  for (std::size_t i = 0; i < statics.size(); ++i) {
    if (statics[i].dof() != n) {
      throw Error(ErrorCode::kSchema, "DoF differs between clips",
                  detail::index_path("static", i));
    }
  }
  if (mirror) {
    if (static_cast<long>(mirror->permutation.size()) != n ||
        static_cast<long>(mirror->sign.size()) != n) {
      throw Error(ErrorCode::kSchema, "mirror map must cover every joint",
                  "mirror");
    }
    std::vector<int> sorted = mirror->permutation;
    std::sort(sorted.begin(), sorted.end());
    for (long i = 0; i < n; ++i) {
      if (sorted[static_cast<std::size_t>(i)] != i) {
        throw Error(ErrorCode::kSchema, "not a permutation", "mirror.permutation");
      }
    }
  }
}

double wrap_phase(double phase) {
  double p = std::fmod(phase, 1.0);
  if (p < 0.0) p += 1.0;
  if (p >= 1.0) p = 0.0;
  return p;
}

double circular_distance(double a, double b) {
  const double d = std::abs(wrap_phase(a) - wrap_phase(b));
  return std::min(d, 1.0 - d);
}

bool contact_at_phase(const ContactWindow& window, double phase) {
  return circular_distance(phase, window.mu) <= window.sigma;
}

bool contact_at_phase(const MotionClip& clip, Foot foot, double phase) {
  return contact_at_phase(clip.window(foot), phase);
}

void recompute_velocities(MotionClip& clip) {
  const long n = clip.n_frames();
  const double scale = static_cast<double>(n) / clip.period;
  clip.frames_qd.resize(n, clip.dof());
  for (long k = 0; k < n; ++k) {
    const long next = (k + 1) % n;
    const long prev = (k + n - 1) % n;
    clip.frames_qd.row(k) =
        0.5 * scale * (clip.frames_q.row(next) - clip.frames_q.row(prev));
  }
}

CycleExtraction extract_cycle(const RawCapture& raw, double rate_hz,
                              const ExtractOptions& options) {
  if (!(rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rate must be > 0");
  }
  const long total = raw.n_frames();
  if (static_cast<long>(raw.contact.size()) != total) {
    throw Error(ErrorCode::kInvalidArgument,
                "contact flags and joint frames differ in length");
  }
  std::vector<long> touchdowns;
  for (long i = 1; i < total; ++i) {
    const auto& prev = raw.contact[static_cast<std::size_t>(i - 1)];
    const auto& cur = raw.contact[static_cast<std::size_t>(i)];
    if (!prev[0] && cur[0]) touchdowns.push_back(i);
  }
  if (touchdowns.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "insufficient cycles: need two left-foot touchdowns, found " +
                    std::to_string(touchdowns.size()));
  }
  const long begin = touchdowns[0];
  const long n = touchdowns[1] - begin;
  if (n < kMinFrames) {
    throw Error(ErrorCode::kInvalidArgument,
                "cycle too short: " + std::to_string(n) + " frames");
  }

  CycleExtraction result;
  MotionClip& clip = result.clip;
  clip.name = options.name;
  clip.channel = options.channel;
  clip.direction = options.direction;
  clip.frames_q = raw.q.middleRows(begin, n);
  clip.period = static_cast<double>(n) / rate_hz;
  clip.base_v = raw.base_v.rows() == total ? Eigen::MatrixXd(raw.base_v.middleRows(begin, n))
                                           : Eigen::MatrixXd::Zero(n, 3);
  clip.base_w = raw.base_w.size() == total ? Eigen::VectorXd(raw.base_w.segment(begin, n))
                                           : Eigen::VectorXd::Zero(n);

  for (Foot f : kFeet) {
    std::vector<bool> stance(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
      stance[static_cast<std::size_t>(k)] =
          raw.contact[static_cast<std::size_t>(begin + k)][foot_index(f)];
    }
    const auto [start, len] = longest_circular_run(stance);
    if (len == 0 || len == n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "foot " + std::string(foot_name(f)) +
                      (len == 0 ? " never touches down" : " never swings") +
                      " within the cycle");
    }
    const double dn = static_cast<double>(n);
    const double sigma = 0.5 * static_cast<double>(len) / dn;
    if (sigma >= 0.5) {
      throw Error(ErrorCode::kInvalidArgument,
                  "foot " + std::string(foot_name(f)) + " stance too long");
    }
    clip.contact[foot_index(f)] = {
        wrap_phase((static_cast<double>(start) + 0.5 * static_cast<double>(len)) / dn),
        sigma};
  }

  const double mismatch =
      (raw.q.row(begin + n) - raw.q.row(begin)).cwiseAbs().maxCoeff();
  if (mismatch > options.periodicity_tolerance) {
    result.warnings.push_back(
        "non-periodic cycle: start/end joint mismatch " +
        std::to_string(mismatch) + " rad exceeds " +
        std::to_string(options.periodicity_tolerance));
  }
  recompute_velocities(clip);
  clip.validate();
  return result;
}

MotionClip smooth_boundary(const MotionClip& clip, double kernel_std) {
  if (!(kernel_std > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel_std must be > 0");
  }
  const long n = clip.n_frames();
  const long radius = std::min<long>(
      static_cast<long>(std::ceil(4.0 * kernel_std)), (n - 1) / 2);
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long j = -radius; j <= radius; ++j) {
    const double x = static_cast<double>(j) / kernel_std;
    kernel[static_cast<std::size_t>(j + radius)] = std::exp(-0.5 * x * x);
  }
  double norm = 0.0;
  for (double g : kernel) norm += g;
  for (double& g : kernel) g /= norm;

  // Seam window: 1 next to the wrap, decaying into the cycle interior.
  const double window_std = 3.0 * kernel_std;
  MotionClip out = clip;
  for (long k = 0; k < n; ++k) {
    const double m = std::min(static_cast<double>(k) + 0.5,
                              static_cast<double>(n - k) - 0.5);
    const double w = std::exp(-0.5 * (m / window_std) * (m / window_std));
    if (w == 0.0) continue;
    Eigen::RowVectorXd filtered = Eigen::RowVectorXd::Zero(clip.dof());
    for (long j = -radius; j <= radius; ++j) {
      filtered += kernel[static_cast<std::size_t>(j + radius)] *
                  clip.frames_q.row(((k + j) % n + n) % n);
    }
    out.frames_q.row(k) = clip.frames_q.row(k) + w * (filtered - clip.frames_q.row(k));
  }
  recompute_velocities(out);
  return out;
}

ClipSample sample_clip(const MotionClip& clip, double phase) {
  const long n = clip.n_frames();
  const double x = wrap_phase(phase) * static_cast<double>(n);
  long i = static_cast<long>(std::floor(x));
  double frac = x - static_cast<double>(i);
  if (i >= n) {
    i = n - 1;
    frac = 1.0;
  }
  const long j = (i + 1) % n;
  ClipSample s;
  s.q = (1.0 - frac) * clip.frames_q.row(i).transpose() +
        frac * clip.frames_q.row(j).transpose();
  s.base_v = (1.0 - frac) * clip.base_v.row(i).transpose() +
             frac * clip.base_v.row(j).transpose();
  s.base_w = (1.0 - frac) * clip.base_w[i] + frac * clip.base_w[j];
  return s;
}

Eigen::VectorXd sample_static(const StaticClip& clip, double command_value) {
  const auto& values = clip.command_values;
  const double v = std::clamp(command_value, values.front(), values.back());
  auto it = std::upper_bound(values.begin(), values.end(), v);
  std::size_t hi = static_cast<std::size_t>(it - values.begin());
  if (hi >= values.size()) hi = values.size() - 1;
  const std::size_t lo = hi - 1;
  const double span = values[hi] - values[lo];
  const double frac = (v - values[lo]) / span;
  return (1.0 - frac) * clip.frames_q.row(static_cast<long>(lo)).transpose() +
         frac * clip.frames_q.row(static_cast<long>(hi)).transpose();
}

MotionClip mirror_clip(const MotionClip& clip, const MirrorMap& map) {
  MotionClip out = clip;
  out.direction = -clip.direction;
  out.name = clip.name + "_mirrored";
  for (long k = 0; k < clip.n_frames(); ++k) {
    out.frames_q.row(k) = map.apply(clip.frames_q.row(k).transpose()).transpose();
    out.frames_qd.row(k) = map.apply(clip.frames_qd.row(k).transpose()).transpose();
  }
  out.base_v.col(1) = -clip.base_v.col(1);
  out.base_w = -clip.base_w;
  out.contact = {clip.contact[1], clip.contact[0]};
  return out;
}

MotionClip shift_phase(const MotionClip& clip, double delta) {
  const long n = clip.n_frames();
  MotionClip out = clip;
  for (ContactWindow& w : out.contact) w.mu = wrap_phase(w.mu - delta);
  const double frames = wrap_phase(delta) * static_cast<double>(n);
  const double whole = std::round(frames);
  if (std::abs(frames - whole) < 1e-9) {
    const long s = static_cast<long>(whole) % n;
    for (long k = 0; k < n; ++k) {
      const long src = (k + s) % n;
      out.frames_q.row(k) = clip.frames_q.row(src);
      out.frames_qd.row(k) = clip.frames_qd.row(src);
      out.base_v.row(k) = clip.base_v.row(src);
      out.base_w[k] = clip.base_w[src];
    }
    return out;
  }
  for (long k = 0; k < n; ++k) {
    const ClipSample s = sample_clip(clip, static_cast<double>(k) / static_cast<double>(n) + delta);
    out.frames_q.row(k) = s.q.transpose();
    out.base_v.row(k) = s.base_v.transpose();
    out.base_w[k] = s.base_w;
  }
  recompute_velocities(out);
  return out;
}

RawCapture load_raw_capture(const std::filesystem::path& path) {
  const detail::CsvTable table = detail::read_csv(path);
  const int cl = table.column("contactL");
  const int cr = table.column("contactR");
  if (table.header.empty() || cl < 0 || cr < 0 || cr != cl + 1) {
    throw Error(ErrorCode::kParse,
                path.string() +
                    ": header must be t,q0..qN,contactL,contactR[,vx,vy,vz,wz]");
  }
  const long dof = cl - 1;
  if (dof <= 0) throw Error(ErrorCode::kParse, path.string() + ": no joint columns");
  const long n = static_cast<long>(table.rows.size());
  RawCapture raw;
  raw.q.resize(n, dof);
  raw.base_v = Eigen::MatrixXd::Zero(n, 3);
  raw.base_w = Eigen::VectorXd::Zero(n);
  const int vcols[3] = {table.column("vx"), table.column("vy"), table.column("vz")};
  const int wcol = table.column("wz");
  for (long r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    raw.timestamps.push_back(row[0]);
    for (long j = 0; j < dof; ++j) raw.q(r, j) = row[static_cast<std::size_t>(1 + j)];
    raw.contact.push_back({row[static_cast<std::size_t>(cl)] > 0.5,
                           row[static_cast<std::size_t>(cr)] > 0.5});
    for (int a = 0; a < 3; ++a) {
      if (vcols[a] >= 0) raw.base_v(r, a) = row[static_cast<std::size_t>(vcols[a])];
    }
    if (wcol >= 0) raw.base_w[r] = row[static_cast<std::size_t>(wcol)];
  }
  return raw;
}

std::string clip_to_json(const MotionClip& clip) { return clip_doc(clip).dump(2) + "\n"; }

MotionClip parse_clip(std::string_view json_text) {
  const Json doc = detail::parse_json_text(json_text, "clip");
  return parse_clip_doc(doc, "");
}

void save_clip(const MotionClip& clip, const std::filesystem::path& path) {
  detail::write_text_file(path, clip_to_json(clip));
}

MotionClip load_clip(const std::filesystem::path& path) {
  return parse_clip_doc(detail::read_json_file(path), "");
}

ClipSet parse_clipset(std::string_view json_text,
                      const std::filesystem::path& base_dir) {
  const Json doc = detail::parse_json_text(json_text, "clip set");
  const int version = detail::require_int(doc, "schema_version", "");
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::kSchema, "unsupported version " + std::to_string(version),
                "schema_version");
  }
  ClipSet set;
  set.robot_ref = doc.value("robot", std::string());
  const Json& dyn = detail::require_array(doc, "dynamic", "");
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    const std::string p = detail::index_path("dynamic", i);
    if (dyn[i].contains("file")) {
      const auto file = base_dir / detail::require_string(dyn[i], "file", p);
      set.dynamic.push_back(parse_clip_doc(detail::read_json_file(file), p));
    } else {
      set.dynamic.push_back(parse_clip_doc(dyn[i], p));
    }
  }
  if (doc.contains("static")) {
    const Json& st = detail::require_array(doc, "static", "");
    for (std::size_t i = 0; i < st.size(); ++i) {
      set.statics.push_back(parse_static_doc(st[i], detail::index_path("static", i)));
    }
  }
  if (doc.contains("mirror")) {
    const Json& m = doc["mirror"];
    MirrorMap map;
    const Json& perm = detail::require_array(m, "permutation", "mirror");
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (!perm[i].is_number_integer()) {
        throw Error(ErrorCode::kSchema, "expected integer",
                    detail::index_path("mirror.permutation", i));
      }
      map.permutation.push_back(perm[i].get<int>());
    }
    const Eigen::VectorXd sign =
        detail::as_vector(detail::require(m, "sign", "mirror"), "mirror.sign");
    map.sign.assign(sign.data(), sign.data() + sign.size());
    set.mirror = std::move(map);
  }
  set.validate();
  return set;
}

ClipSet load_clipset(const std::filesystem::path& path) {
  return parse_clipset(detail::read_text_file(path), path.parent_path());
}

std::string clipset_to_json(const ClipSet& set) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["robot"] = set.robot_ref;
  doc["dynamic"] = Json::array();
  for (const MotionClip& c : set.dynamic) {
    Json d = clip_doc(c);
    d.erase("schema_version");
    doc["dynamic"].push_back(d);
  }
  doc["static"] = Json::array();
  for (const StaticClip& c : set.statics) doc["static"].push_back(static_doc(c));
  if (set.mirror) {
    doc["mirror"]["permutation"] = set.mirror->permutation;
    doc["mirror"]["sign"] = set.mirror->sign;
  }
  return doc.dump(2) + "\n";
}

void save_clipset(const ClipSet& set, const std::filesystem::path& path) {
  detail::write_text_file(path, clipset_to_json(set));
}

ClipLibrary::ClipLibrary(ClipSet set, const RobotModel& model)
    : set_(std::move(set)) {
  set_.validate();
  if (set_.dof() != static_cast<long>(model.dof())) {
    throw Error(ErrorCode::kSchema,
                "clip set DoF " + std::to_string(set_.dof()) +
                    " does not match robot model DoF " +
                    std::to_string(model.dof()));
  }
  for (DynamicChannel c : kDynamicChannels) {
    auto& slots = dynamic_[static_cast<std::size_t>(c)];
    for (int direction : {1, -1}) {
      if (const MotionClip* clip = set_.find(c, direction)) {
        slots[direction_index(direction)] = *clip;
      }
    }
    // Only lateral and turning gaits are left/right symmetric.
    if (set_.mirror && c != DynamicChannel::kVx) {
      for (int direction : {1, -1}) {
        auto& slot = slots[direction_index(direction)];
        const auto& other = slots[direction_index(-direction)];
        if (!slot && other) {
          // Keep the left foot's stance window where the source clip has it
          // so mirrored and unmirrored clips blend phase-consistently.
          const MotionClip mirrored = mirror_clip(*other, *set_.mirror);
          const double delta = std::remainder(mirrored.contact[0].mu - other->contact[0].mu, 1.0);
          slot = shift_phase(mirrored, delta);
        }
      }
    }
  }
}

const MotionClip* ClipLibrary::dynamic(DynamicChannel channel,
                                       int direction) const {
  const auto& slot =
      dynamic_[static_cast<std::size_t>(channel)][direction_index(direction)];
  return slot ? &*slot : nullptr;
}

const StaticClip* ClipLibrary::posture(StaticChannel channel) const {
  return set_.find(channel);
}

}  // namespace pmg
