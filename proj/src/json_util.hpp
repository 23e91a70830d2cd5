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

// Field accessors for schema-checked JSON documents. Every failure is
// reported as pmg::Error(kSchema) carrying the document path.

#ifndef PMG_SRC_JSON_UTIL_HPP_
#define PMG_SRC_JSON_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "pmg/error.hpp"

namespace pmg::detail {

using Json = nlohmann::json;

inline std::string join_path(const std::string& base, std::string_view key) {
  if (base.empty()) return std::string(key);
  return base + "." + std::string(key);
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline const Json& require(const Json& doc, std::string_view key,
                           const std::string& path) {
  if (!doc.is_object()) throw Error(ErrorCode::kSchema, "expected object", path);
  auto it = doc.find(std::string(key));
  if (it == doc.end()) {
    throw Error(ErrorCode::kSchema, "missing required field",
                join_path(path, key));
  }
  return *it;
}

inline double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw Error(ErrorCode::kSchema, "expected number", path);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::kSchema, "not finite", path);
  return d;
}

inline double require_number(const Json& doc, std::string_view key,
                             const std::string& path) {
  return as_number(require(doc, key, path), join_path(path, key));
}

inline int require_int(const Json& doc, std::string_view key,
                       const std::string& path) {
  const Json& v = require(doc, key, path);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kSchema, "expected integer", join_path(path, key));
  }
  return v.get<int>();
}

inline std::string require_string(const Json& doc, std::string_view key,
                                  const std::string& path) {
  const Json& v = require(doc, key, path);
  if (!v.is_string()) {
    throw Error(ErrorCode::kSchema, "expected string", join_path(path, key));
  }
  return v.get<std::string>();
}

inline const Json& require_array(const Json& doc, std::string_view key,
                                 const std::string& path) {
  const Json& v = require(doc, key, path);
  if (!v.is_array()) {
    throw Error(ErrorCode::kSchema, "expected array", join_path(path, key));
  }
  return v;
}

inline Eigen::VectorXd as_vector(const Json& v, const std::string& path,
                                 long expected_size = -1) {
  if (!v.is_array()) throw Error(ErrorCode::kSchema, "expected array", path);
  if (expected_size >= 0 && static_cast<long>(v.size()) != expected_size) {
    throw Error(ErrorCode::kSchema,
                "expected " + std::to_string(expected_size) + " entries, got " +
                    std::to_string(v.size()),
                path);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], index_path(path, i));
  }
  return out;
}

inline Eigen::Vector3d as_vector3(const Json& v, const std::string& path) {
  return as_vector(v, path, 3);
}

// Row-major matrix from an array of arrays.
inline Eigen::MatrixXd as_matrix(const Json& v, const std::string& path,
                                 long rows, long cols) {
  if (!v.is_array()) throw Error(ErrorCode::kSchema, "expected array", path);
  if (static_cast<long>(v.size()) != rows) {
    throw Error(ErrorCode::kSchema,
                "expected " + std::to_string(rows) + " rows, got " +
                    std::to_string(v.size()),
                path);
  }
  Eigen::MatrixXd out(rows, cols);
  for (long r = 0; r < rows; ++r) {
    out.row(r) = as_vector(v[static_cast<std::size_t>(r)],
                           index_path(path, static_cast<std::size_t>(r)), cols)
                     .transpose();
  }
  return out;
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  }
  return out;
}

Json parse_json_text(std::string_view text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& doc, const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace pmg::detail

#endif  // PMG_SRC_JSON_UTIL_HPP_
