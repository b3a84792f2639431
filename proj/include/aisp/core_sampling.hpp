// Copyright 2026 The aisp Authors
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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aisp/random.hpp"
#include "aisp/reward.hpp"
#include "aisp/sequence_model.hpp"

namespace aisp {

/// Self-normalized importance weights: nonnegative, summing to one.
using WeightVector = Eigen::VectorXd;

/// Hyperparameters of one adaptive-importance-sampling run.
struct ControlConfig {
  double lambda = 1.0;       // KL temperature, > 0
  double alpha = 0.9999;     // relaxation of the proposal-correction penalty, in [0, 1]
  double sigma2 = 0.5;       // shared isotropic perturbation variance, > 0
  int n = 32;                // samples per iteration
  int kappa = 32;            // iterations
  int tau = 128;             // control horizon (perturbed positions)
  int max_new_tokens = 128;  // decode limit, >= tau
  std::uint64_t seed = 0;

  std::vector<std::string> validate() const {
    std::vector<std::string> errors;
    if (!(lambda > 0.0)) errors.push_back("control.lambda must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) errors.push_back("control.alpha must be in [0, 1]");
    if (!(sigma2 > 0.0)) errors.push_back("control.sigma2 must be > 0");
    if (n < 1) errors.push_back("control.n must be >= 1");
    if (kappa < 1) errors.push_back("control.kappa must be >= 1");
    if (tau < 1) errors.push_back("control.tau must be >= 1");
    if (max_new_tokens < 1) errors.push_back("control.max_new_tokens must be >= 1");
    if (tau >= 1 && max_new_tokens >= 1 && tau > max_new_tokens) {
      errors.push_back("control.tau must be <= control.max_new_tokens");
    }
    return errors;
  }

  void throw_if_invalid() const {
    const auto errors = validate();
    if (errors.empty()) return;
    std::string message = errors.front();
    for (std::size_t i = 1; i < errors.size(); ++i) message += "; " + errors[i];
    throw std::invalid_argument(message);
  }
};

/// One draw from the isotropic Gaussian around `mean`. Entries are filled
/// column by column (step by step), row order within each column.
inline Trajectory sample_trajectory(const MeanTrajectory& mean, double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  const double sigma = std::sqrt(sigma2);
  Trajectory v(mean.rows(), mean.cols());
  for (Eigen::Index c = 0; c < mean.cols(); ++c) {
    for (Eigen::Index r = 0; r < mean.rows(); ++r) {
      v(r, c) = mean(r, c) + sigma * rng.normal();
    }
  }
  return v;
}

/// n independent draws consumed sequentially from one stream; the same stream
/// state reproduces the same list bit for bit.
inline std::vector<Trajectory> sample_trajectories(const MeanTrajectory& mean,
                                                   double sigma2, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_trajectory(mean, sigma2, rng));
  return out;
}

/// log q(V | U, sigma^2) of the joint isotropic Gaussian over all columns:
/// -(d*tau/2) log(2 pi sigma^2) - (1 / 2 sigma^2) * sum_t ||v_t - u_t||^2.
inline double gaussian_log_density(const Trajectory& v, const MeanTrajectory& mean,
                                   double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  if (v.rows() != mean.rows() || v.cols() != mean.cols()) {
    throw std::invalid_argument("trajectory/mean shape mismatch");
  }
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double dim = static_cast<double>(v.rows() * v.cols());
  const double quadratic = (v - mean).squaredNorm();
  return -0.5 * dim * std::log(kTwoPi * sigma2) - quadratic / (2.0 * sigma2);
}

/// Proposal-correction exponent ((1 - alpha) / sigma^2) * sum_t u_t . v_t.
/// alpha = 1 switches the correction off exactly. The sum always runs over
/// the full horizon, even when decoding stopped early.
inline double correction_term(const Trajectory& v, const MeanTrajectory& mean,
                              double sigma2, double alpha) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  if (v.rows() != mean.rows() || v.cols() != mean.cols()) {
    throw std::invalid_argument("trajectory/mean shape mismatch");
  }
  if (alpha == 1.0) return 0.0;
  return (1.0 - alpha) / sigma2 * mean.cwiseProduct(v).sum();
}

/// Softmax over reward/lambda - correction, max-subtracted. With lambda down
/// at 0.1 and rewards around 10 the naive exponentials overflow; the shifted
/// form never does.
inline WeightVector compute_weights(const Eigen::VectorXd& rewards,
                                    const Eigen::VectorXd& corrections,
                                    double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (rewards.size() != corrections.size()) {
    throw std::invalid_argument("rewards/corrections length mismatch");
  }
  if (rewards.size() < 1) throw std::invalid_argument("need at least one sample");
  if (!rewards.allFinite() || !corrections.allFinite()) {
    throw std::invalid_argument("weight inputs must be finite");
  }
  const Eigen::ArrayXd logits = rewards.array() / lambda - corrections.array();
  const Eigen::ArrayXd shifted = (logits - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

/// Weighted convex combination of the trajectories, columnwise; the output
/// lies entrywise inside the hull of the inputs.
inline MeanTrajectory update_mean(const WeightVector& weights,
                                  const std::vector<Trajectory>& trajectories) {
  if (static_cast<std::size_t>(weights.size()) != trajectories.size()) {
    throw std::invalid_argument("weights/trajectories length mismatch");
  }
  if (trajectories.empty()) throw std::invalid_argument("need at least one trajectory");
  MeanTrajectory mean = MeanTrajectory::Zero(trajectories.front().rows(),
                                             trajectories.front().cols());
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].rows() != mean.rows() || trajectories[i].cols() != mean.cols()) {
      throw std::invalid_argument("trajectory shapes are not uniform");
    }
    mean += weights[static_cast<Eigen::Index>(i)] * trajectories[i];
  }
  return mean;
}

/// KL divergence of the shifted proposal from the zero-mean base, in closed
/// form: sum_t ||u_t||^2 / (2 sigma^2).
inline double kl_gaussian_closed_form(const MeanTrajectory& mean, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  return mean.squaredNorm() / (2.0 * sigma2);
}

/// Monte-Carlo free energy: log-mean-exp of reward/lambda under zero-mean
/// perturbations. -lambda times this lower-bounds the control objective.
inline double estimate_free_energy(const GeneratorModel& model, const RewardModel& reward,
                                   const TokenSequence& prompt, const ControlConfig& config,
                                   int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  config.throw_if_invalid();
  const MeanTrajectory zero = MeanTrajectory::Zero(model.d, config.tau);
  Eigen::VectorXd scaled(m);
  for (int j = 0; j < m; ++j) {
    const Trajectory v = sample_trajectory(zero, config.sigma2, rng);
    const DecodeRecord record =
        decode_greedy_perturbed(model, prompt, v, config.tau, config.max_new_tokens);
    scaled[j] = reward.score(prompt, record.response) / config.lambda;
  }
  return detail::log_sum_exp(scaled) - std::log(static_cast<double>(m));
}

/// Monte-Carlo control objective: negative mean reward under the proposal
/// plus lambda times the closed-form KL penalty.
inline double estimate_objective(const GeneratorModel& model, const RewardModel& reward,
                                 const TokenSequence& prompt, const MeanTrajectory& mean,
                                 const ControlConfig& config, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  config.throw_if_invalid();
  if (mean.rows() != model.d || mean.cols() != config.tau) {
    throw std::invalid_argument("mean shape does not match model dimension and tau");
  }
  double reward_sum = 0.0;
  for (int j = 0; j < m; ++j) {
    const Trajectory v = sample_trajectory(mean, config.sigma2, rng);
    const DecodeRecord record =
        decode_greedy_perturbed(model, prompt, v, config.tau, config.max_new_tokens);
    reward_sum += reward.score(prompt, record.response);
  }
  return -reward_sum / static_cast<double>(m) +
         config.lambda * kl_gaussian_closed_form(mean, config.sigma2);
}

}  // namespace aisp
