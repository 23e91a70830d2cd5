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

// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
// cumulative step-size adaptation. Population members are sampled
// sequentially from one RNG stream, evaluated (possibly concurrently), then
// ranked by (loss, index), so results do not depend on thread count.

#ifndef PMG_CMAES_HPP_
#define PMG_CMAES_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pmg {

struct CmaesConfig {
  int population = 0;  // lambda; 0 selects 4 + floor(3 ln n)
  Eigen::VectorXd mean0;
  double sigma0 = 0.3;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  long max_evaluations = 10000;
  double target_loss = -std::numeric_limits<double>::infinity();
  double min_sigma = 1e-12;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  int dimension() const { return static_cast<int>(mean0.size()); }
  int effective_population() const;
  void validate() const;
};

struct CmaesGeneration {
  long evaluations = 0;
  double best_loss = 0.0;       // best so far
  double generation_best = 0.0;
  double sigma = 0.0;
};

struct CmaesResult {
  Eigen::VectorXd best_x;
  double best_loss = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  int generations = 0;
  std::string stop_reason;
  std::vector<CmaesGeneration> history;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// The objective must be pure (it may be called from several threads).
CmaesResult cmaes_minimize(const Objective& loss, const CmaesConfig& config);

}  // namespace pmg

#endif  // PMG_CMAES_HPP_
