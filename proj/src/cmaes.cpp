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

#include "pmg/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "pmg/error.hpp"

namespace pmg {
namespace {

constexpr int kMaxResample = 100;

void evaluate_all(const Objective& loss, const std::vector<Eigen::VectorXd>& xs,
                  std::vector<double>& out, int threads) {
  const std::size_t n = xs.size();
  out.assign(n, 0.0);
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = loss(xs[i]);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = loss(xs[i]);
    });
  }
  for (auto& t : pool) t.join();
}

bool inside(const Eigen::VectorXd& x, const CmaesConfig& c) {
  return (x.array() >= c.lower.array()).all() && (x.array() <= c.upper.array()).all();
}

}  // namespace

int CmaesConfig::effective_population() const {
  if (population > 0) return population;
  return 4 + static_cast<int>(std::floor(3.0 * std::log(std::max(dimension(), 1))));
}

void CmaesConfig::validate() const {
  const int n = dimension();
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "CMA-ES needs at least one dimension");
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "bounds must match the mean dimension");
  }
  if (!lower.allFinite() || !upper.allFinite() || !mean0.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "bounds and mean must be finite");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw Error(ErrorCode::kInvalidArgument, "each lower bound must be < upper bound");
  }
  if (effective_population() < 4) {
    throw Error(ErrorCode::kInvalidArgument, "population must be >= 4");
  }
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma0 must be > 0");
  if (max_evaluations < effective_population()) {
    throw Error(ErrorCode::kInvalidArgument, "max evaluations below one generation");
  }
}

CmaesResult cmaes_minimize(const Objective& loss, const CmaesConfig& config) {
  config.validate();
  const int n = config.dimension();
  const double dn = static_cast<double>(n);
  const int lambda = config.effective_population();
  const int mu = lambda / 2;

  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) {
    weights[i] = std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double cc = (4.0 + mu_eff / dn) / (dn + 4.0 + 2.0 * mu_eff / dn);
  const double cs = (mu_eff + 2.0) / (dn + mu_eff + 5.0);
  const double c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mu_eff);
  const double cmu = std::min(
      1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((dn + 2.0) * (dn + 2.0) + mu_eff));
  const double damps =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dn + 1.0)) - 1.0) + cs;
  const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

  const int threads = config.threads > 0
                          ? config.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd mean = config.mean0.cwiseMax(config.lower).cwiseMin(config.upper);
  double sigma = config.sigma0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd pc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ps = Eigen::VectorXd::Zero(n);

  CmaesResult result;
  result.best_x = mean;
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(lambda));
  std::vector<Eigen::VectorXd> ys(static_cast<std::size_t>(lambda));
  std::vector<double> fs;
  std::vector<int> order(static_cast<std::size_t>(lambda));

  while (true) {
    if (result.evaluations + lambda > config.max_evaluations) {
      result.stop_reason = "max_evaluations";
      break;
    }
    for (int k = 0; k < lambda; ++k) {
      Eigen::VectorXd x(n), y(n), z(n);
      bool ok = false;
      for (int attempt = 0; attempt < kMaxResample && !ok; ++attempt) {
        for (int i = 0; i < n; ++i) z[i] = normal(rng);
        y = B * D.asDiagonal() * z;
        x = mean + sigma * y;
        ok = inside(x, config);
      }
      if (!ok) {
        x = x.cwiseMax(config.lower).cwiseMin(config.upper);
        y = (x - mean) / sigma;
      }
      xs[static_cast<std::size_t>(k)] = x;
      ys[static_cast<std::size_t>(k)] = y;
    }
    evaluate_all(loss, xs, fs, threads);
    for (int k = 0; k < lambda; ++k) {
      if (!std::isfinite(fs[static_cast<std::size_t>(k)])) {
        throw Error(ErrorCode::kNumeric, "objective returned a non-finite value");
      }
    }
    result.evaluations += lambda;
    ++result.generations;

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double fa = fs[static_cast<std::size_t>(a)];
      const double fb = fs[static_cast<std::size_t>(b)];
      return fa < fb || (fa == fb && a < b);
    });
    const auto best = static_cast<std::size_t>(order[0]);
    if (fs[best] < result.best_loss) {
      result.best_loss = fs[best];
      result.best_x = xs[best];
    }

    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < mu; ++i) y_w += weights[i] * ys[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    mean += sigma * y_w;

    const Eigen::MatrixXd inv_sqrt_c = B * D.cwiseInverse().asDiagonal() * B.transpose();
    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mu_eff) * (inv_sqrt_c * y_w);
    const double ps_norm = ps.norm();
    const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * result.generations);
    const bool hsig = ps_norm / std::sqrt(decay) / chi_n < 1.4 + 2.0 / (dn + 1.0);
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mu_eff) : 0.0) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const auto& y = ys[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      rank_mu += weights[i] * y * y.transpose();
    }
    C = (1.0 - c1 - cmu) * C +
        c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * C) + cmu * rank_mu;
    C = 0.5 * (C + C.transpose());
    sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));

    result.history.push_back(
        {result.evaluations, result.best_loss, fs[best], sigma});

    if (result.best_loss <= config.target_loss) {
      result.stop_reason = "target_loss";
      break;
    }
    if (!(sigma >= config.min_sigma)) {
      result.stop_reason = "sigma_collapse";
      break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite()) {
      result.stop_reason = "covariance_breakdown";
      break;
    }
    B = eig.eigenvectors();
    D = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    if (sigma * D.maxCoeff() < config.min_sigma) {
      result.stop_reason = "sigma_collapse";
      break;
    }
  }
  return result;
}

}  // namespace pmg
