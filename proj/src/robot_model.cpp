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

#include "pmg/robot_model.hpp"

#include <cmath>
#include <set>

#include "json_util.hpp"
#include "pmg/error.hpp"

namespace pmg {
namespace {

using detail::Json;

constexpr int kSchemaVersion = 1;
constexpr double kAxisNormTolerance = 1e-9;

Range parse_range(const Json& v, const std::string& path) {
  const Eigen::VectorXd r = detail::as_vector(v, path, 2);
  if (!(r[0] < r[1])) throw Error(ErrorCode::kSchema, "min must be < max", path);
  return {r[0], r[1]};
}

Json range_to_json(const Range& r) { return Json::array({r.min, r.max}); }

std::vector<ChainLink> parse_chain(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw Error(ErrorCode::kSchema, "expected non-empty array", path);
  }
  std::vector<ChainLink> chain;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = detail::index_path(path, i);
    const Json& e = v[i];
    ChainLink link;
    link.offset = detail::as_vector3(detail::require(e, "offset", p),
                                     detail::join_path(p, "offset"));
    if (auto t = e.find("type"); t != e.end() && *t != "revolute") {
      throw Error(ErrorCode::kSchema, "only revolute joints are supported",
                  detail::join_path(p, "type"));
    }
    const bool has_joint = e.contains("joint") && !e["joint"].is_null();
    if (has_joint) {
      link.joint = detail::require_int(e, "joint", p);
      link.axis = detail::as_vector3(detail::require(e, "axis", p),
                                     detail::join_path(p, "axis"));
    } else if (e.contains("axis")) {
      throw Error(ErrorCode::kSchema, "axis given without joint",
                  detail::join_path(p, "axis"));
    }
    chain.push_back(link);
  }
  return chain;
}

Json chain_to_json(const std::vector<ChainLink>& chain) {
  Json out = Json::array();
  for (const ChainLink& link : chain) {
    Json e;
    e["offset"] = {link.offset.x(), link.offset.y(), link.offset.z()};
    if (!link.is_fixed()) {
      e["axis"] = {link.axis.x(), link.axis.y(), link.axis.z()};
      e["joint"] = link.joint;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::string_view foot_name(Foot foot) {
  return foot == Foot::kLeft ? "L" : "R";
}

Foot parse_foot(std::string_view name) {
  if (name == "L") return Foot::kLeft;
  if (name == "R") return Foot::kRight;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown foot id '" + std::string(name) + "'");
}

std::string_view channel_name(DynamicChannel channel) {
  switch (channel) {
    case DynamicChannel::kVx: return "vx";
    case DynamicChannel::kVy: return "vy";
    case DynamicChannel::kWz: return "wz";
  }
  return "?";
}

std::string_view channel_name(StaticChannel channel) {
  switch (channel) {
    case StaticChannel::kPitch: return "pitch";
    case StaticChannel::kRoll: return "roll";
    case StaticChannel::kHeight: return "height";
  }
  return "?";
}

DynamicChannel parse_dynamic_channel(std::string_view name) {
  for (DynamicChannel c : kDynamicChannels) {
    if (channel_name(c) == name) return c;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown dynamic channel '" + std::string(name) + "'");
}

StaticChannel parse_static_channel(std::string_view name) {
  for (StaticChannel c : kStaticChannels) {
    if (channel_name(c) == name) return c;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown static channel '" + std::string(name) + "'");
}

void RobotModel::validate() const {
  const auto n = static_cast<long>(dof());
  if (n == 0) throw Error(ErrorCode::kSchema, "no joints", "joints");
  if (q_stand.size() != n) {
    throw Error(ErrorCode::kSchema,
                "expected " + std::to_string(n) + " entries, got " +
                    std::to_string(q_stand.size()),
                "q_stand");
  }
  for (Foot foot : kFeet) {
    const std::string base = "chains." + std::string(foot_name(foot));
    std::set<int> seen;
    const auto& links = chain(foot);
    if (links.empty()) throw Error(ErrorCode::kSchema, "empty chain", base);
    for (std::size_t i = 0; i < links.size(); ++i) {
      const ChainLink& link = links[i];
      const std::string p = detail::index_path(base, i);
      if (!link.offset.allFinite()) {
        throw Error(ErrorCode::kSchema, "not finite", p + ".offset");
      }
      if (link.is_fixed()) continue;
      if (link.joint >= n) {
        throw Error(ErrorCode::kSchema, "joint index out of range", p + ".joint");
      }
      if (!seen.insert(link.joint).second) {
        throw Error(ErrorCode::kSchema, "joint index repeated in chain",
                    p + ".joint");
      }
      if (std::abs(link.axis.norm() - 1.0) > kAxisNormTolerance) {
        throw Error(ErrorCode::kSchema,
                    "rotation axis of chain element " + std::to_string(i) +
                        " is not unit norm",
                    p + ".axis");
      }
    }
  }
  for (DynamicChannel c : kDynamicChannels) {
    if (!(nominal_scale(c) > 0.0)) {
      throw Error(ErrorCode::kSchema, "must be > 0",
                  "nominal_scales." + std::string(channel_name(c)));
    }
  }
  for (StaticChannel c : kStaticChannels) {
    if (!posture_range(c).contains(posture_neutral(c))) {
      throw Error(ErrorCode::kSchema, "range excludes the neutral value",
                  "posture_ranges." + std::string(channel_name(c)));
    }
  }
  if (!(h_stand > 0.0)) throw Error(ErrorCode::kSchema, "must be > 0", "h_stand");
  if (!joint_limits.empty() && static_cast<long>(joint_limits.size()) != n) {
    throw Error(ErrorCode::kSchema, "one entry per joint required",
                "joint_limits");
  }
}

RobotModel parse_robot_model(std::string_view json_text) {
  const Json doc = detail::parse_json_text(json_text, "robot model");
  const int version = detail::require_int(doc, "schema_version", "");
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::kSchema, "unsupported version " +
                                        std::to_string(version),
                "schema_version");
  }
  RobotModel model;
  model.name = doc.value("name", std::string("robot"));
  const Json& joints = detail::require_array(doc, "joints", "");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (!joints[i].is_string()) {
      throw Error(ErrorCode::kSchema, "expected string",
                  detail::index_path("joints", i));
    }
    model.joint_names.push_back(joints[i].get<std::string>());
  }
  const Json& chains = detail::require(doc, "chains", "");
  for (Foot foot : kFeet) {
    const std::string key(foot_name(foot));
    model.chains[static_cast<std::size_t>(foot)] =
        parse_chain(detail::require(chains, key, "chains"), "chains." + key);
  }
  model.q_stand = detail::as_vector(detail::require(doc, "q_stand", ""),
                                    "q_stand");
  const Json& scales = detail::require(doc, "nominal_scales", "");
  for (DynamicChannel c : kDynamicChannels) {
    model.nominal_scales[static_cast<std::size_t>(c)] =
        detail::require_number(scales, channel_name(c), "nominal_scales");
  }
  model.h_ground = detail::require_number(doc, "h_ground", "");
  model.h_stand = doc.contains("h_stand")
                      ? detail::require_number(doc, "h_stand", "")
                      : -model.h_ground;
  const Json& ranges = detail::require(doc, "posture_ranges", "");
  for (StaticChannel c : kStaticChannels) {
    const std::string key(channel_name(c));
    model.posture_ranges[static_cast<std::size_t>(c)] = parse_range(
        detail::require(ranges, key, "posture_ranges"), "posture_ranges." + key);
  }
  if (doc.contains("joint_limits")) {
    const Json& limits = doc["joint_limits"];
    if (!limits.is_array()) {
      throw Error(ErrorCode::kSchema, "expected array", "joint_limits");
    }
    for (std::size_t i = 0; i < limits.size(); ++i) {
      model.joint_limits.push_back(
          parse_range(limits[i], detail::index_path("joint_limits", i)));
    }
  }
  model.validate();
  return model;
}

RobotModel load_robot_model(const std::filesystem::path& path) {
  return parse_robot_model(detail::read_text_file(path));
}

std::string robot_model_to_json(const RobotModel& model) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = model.name;
  doc["joints"] = model.joint_names;
  for (Foot foot : kFeet) {
    doc["chains"][std::string(foot_name(foot))] = chain_to_json(model.chain(foot));
  }
  doc["q_stand"] = detail::to_json(model.q_stand);
  for (DynamicChannel c : kDynamicChannels) {
    doc["nominal_scales"][std::string(channel_name(c))] = model.nominal_scale(c);
  }
  for (StaticChannel c : kStaticChannels) {
    doc["posture_ranges"][std::string(channel_name(c))] =
        range_to_json(model.posture_range(c));
  }
  doc["h_ground"] = model.h_ground;
  doc["h_stand"] = model.h_stand;
  if (!model.joint_limits.empty()) {
    Json limits = Json::array();
    for (const Range& r : model.joint_limits) limits.push_back(range_to_json(r));
    doc["joint_limits"] = limits;
  }
  return doc.dump(2) + "\n";
}

void save_robot_model(const RobotModel& model,
                      const std::filesystem::path& path) {
  detail::write_text_file(path, robot_model_to_json(model));
}

namespace {

void check_length(const RobotModel& model, const Eigen::VectorXd& v,
                  const char* what) {
  if (v.size() != static_cast<long>(model.dof())) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has " + std::to_string(v.size()) +
                    " entries, model DoF is " + std::to_string(model.dof()));
  }
}

}  // namespace

Eigen::Isometry3d fk_foot_pose(const RobotModel& model,
                               const Eigen::VectorXd& q, Foot foot) {
  check_length(model, q, "q");
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  for (const ChainLink& link : model.chain(foot)) {
    pose.translate(link.offset);
    if (!link.is_fixed()) pose.rotate(Eigen::AngleAxisd(q[link.joint], link.axis));
  }
  return pose;
}

Eigen::Vector3d fk_foot(const RobotModel& model, const Eigen::VectorXd& q,
                        Foot foot) {
  return fk_foot_pose(model, q, foot).translation();
}

FootState foot_state(const RobotModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qd, Foot foot) {
  check_length(model, q, "q");
  check_length(model, qd, "qd");
  // Joint origins and world axes along the chain, then sum the revolute
  // Jacobian columns w x (p_foot - p_joint).
  struct JointFrame {
    Eigen::Vector3d origin;
    Eigen::Vector3d axis;
    int joint;
  };
  std::vector<JointFrame> frames;
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  for (const ChainLink& link : model.chain(foot)) {
    pose.translate(link.offset);
    if (link.is_fixed()) continue;
    frames.push_back({pose.translation(), pose.linear() * link.axis, link.joint});
    pose.rotate(Eigen::AngleAxisd(q[link.joint], link.axis));
  }
  FootState state;
  state.position = pose.translation();
  for (const JointFrame& f : frames) {
    const double rate = qd[f.joint];
    state.linear_velocity += f.axis.cross(state.position - f.origin) * rate;
    state.yaw_rate += f.axis.z() * rate;
  }
  return state;
}

FootVelocity fk_foot_velocity(const RobotModel& model,
                              const Eigen::VectorXd& q,
                              const Eigen::VectorXd& qd, Foot foot) {
  const FootState s = foot_state(model, q, qd, foot);
  return {s.linear_velocity, s.yaw_rate};
}

bool within_joint_limits(const RobotModel& model, const Eigen::VectorXd& q) {
  if (model.joint_limits.empty()) return true;
  for (std::size_t i = 0; i < model.joint_limits.size(); ++i) {
    if (!model.joint_limits[i].contains(q[static_cast<long>(i)])) return false;
  }
  return true;
}

}  // namespace pmg
