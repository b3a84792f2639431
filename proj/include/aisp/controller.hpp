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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aisp/core_sampling.hpp"
#include "aisp/random.hpp"
#include "aisp/reward.hpp"
#include "aisp/sequence_model.hpp"

namespace aisp {

// Substream tags. The trajectory for (iteration k, sample i) always comes
// from derive_seed(seed, kTrajectoryStream, k, i), with k = kappa + 1 for the
// final candidate round. run_bon_from_trajectories shares the k = 1 streams,
// which is what makes the best-of-n limit comparison exact.
namespace stream {
inline constexpr std::uint64_t kTrajectoryStream = 1;
inline constexpr std::uint64_t kNucleusStream = 2;
inline constexpr std::uint64_t kInstanceStream = 3;
}  // namespace stream

/// Per-iteration record backing the convergence curves.
struct IterationTrace {
  int k = 0;                  // 1-based iteration index
  Eigen::VectorXd rewards;    // n sampled rewards
  WeightVector weights;       // importance weights for the mean update
  double mean_reward = 0.0;   // average of rewards
  double best_at_k = 0.0;     // max of rewards
  double best_so_far = 0.0;   // running max including earlier iterations
  double ess = 0.0;           // 1 / sum w^2
};

struct AispResult {
  TokenSequence best_response;
  double best_reward = -std::numeric_limits<double>::infinity();
  MeanTrajectory final_mean;           // optimized mean after all updates
  std::vector<IterationTrace> traces;  // length kappa
  long long total_evaluations = 0;     // n * kappa + n final candidates
};

namespace detail {

// One adaptive-importance-sampling instance. Iterations are sequential (the
// mean update is a barrier); the n evaluations inside an iteration draw from
// disjoint substreams, so they could be dispatched concurrently without
// changing any output.
class AispInstance {
 public:
  AispInstance(const GeneratorModel& model, const RewardModel& reward,
               const TokenSequence& prompt, const ControlConfig& config)
      : model_(model), reward_(reward), prompt_(prompt), config_(config) {
    config_.throw_if_invalid();
    mean_ = MeanTrajectory::Zero(model.d, config.tau);
    result_.final_mean = mean_;
    result_.traces.reserve(static_cast<std::size_t>(config.kappa));
  }

  // Runs iteration k: sample n trajectories around the current mean, decode
  // and score them, fold the best into the running optimum, then move the
  // mean to the weighted combination.
  void run_iteration(int k) {
    const int n = config_.n;
    std::vector<Trajectory> trajectories;
    trajectories.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd rewards(n);
    Eigen::VectorXd corrections(n);
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(config_.seed, stream::kTrajectoryStream,
                          static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)));
      Trajectory v = sample_trajectory(mean_, config_.sigma2, rng);
      rewards[i] = evaluate(v);
      corrections[i] = correction_term(v, mean_, config_.sigma2, config_.alpha);
      trajectories.push_back(std::move(v));
    }
    const WeightVector weights = compute_weights(rewards, corrections, config_.lambda);

    IterationTrace trace;
    trace.k = k;
    trace.rewards = rewards;
    trace.weights = weights;
    trace.mean_reward = rewards.mean();
    trace.best_at_k = rewards.maxCoeff();
    trace.best_so_far = result_.best_reward;
    trace.ess = 1.0 / weights.squaredNorm();
    result_.traces.push_back(std::move(trace));

    mean_ = update_mean(weights, trajectories);
  }

  // Final candidate round: n fresh samples around the optimized mean compete
  // with the best seen so far.
  void run_final_round() {
    for (int i = 0; i < config_.n; ++i) {
      Rng rng(derive_seed(config_.seed, stream::kTrajectoryStream,
                          static_cast<std::uint64_t>(config_.kappa + 1),
                          static_cast<std::uint64_t>(i)));
      const Trajectory v = sample_trajectory(mean_, config_.sigma2, rng);
      evaluate(v);
    }
    result_.final_mean = mean_;
  }

  AispResult take_result() && { return std::move(result_); }

 private:
  double evaluate(const Trajectory& v) {
    const DecodeRecord record =
        decode_greedy_perturbed(model_, prompt_, v, config_.tau, config_.max_new_tokens);
    const double r = reward_.score(prompt_, record.response);
    ++result_.total_evaluations;
    if (r > result_.best_reward) {
      result_.best_reward = r;
      result_.best_response = record.response;
    }
    return r;
  }

  const GeneratorModel& model_;
  const RewardModel& reward_;
  const TokenSequence& prompt_;
  ControlConfig config_;
  MeanTrajectory mean_;
  AispResult result_;
};

}  // namespace detail

/// Adaptive importance sampling on pre-logits. Starting from a zero mean,
/// each iteration samples n perturbation trajectories, decodes them greedily,
/// scores the responses, reweights by softmax(reward/lambda - correction) and
/// moves the proposal mean to the weighted combination; a final round samples
/// n candidates around the optimized mean. Returns the best response over all
/// n * kappa + n evaluations. Fully reproducible from config.seed.
inline AispResult run_aisp(const GeneratorModel& model, const RewardModel& reward,
                           const TokenSequence& prompt, const ControlConfig& config) {
  detail::AispInstance instance(model, reward, prompt, config);
  for (int k = 1; k <= config.kappa; ++k) instance.run_iteration(k);
  instance.run_final_round();
  return std::move(instance).take_result();
}

struct BonResult {
  TokenSequence best_response;
  double best_reward = -std::numeric_limits<double>::infinity();
  std::vector<double> all_rewards;  // in draw order, for curve construction
};

/// Best-of-n over nucleus-sampled responses; ties go to the first occurrence.
inline BonResult run_bon(const GeneratorModel& model, const RewardModel& reward,
                         const TokenSequence& prompt, int n_samples, double temperature,
                         double top_p, int max_new_tokens, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  BonResult result;
  result.all_rewards.reserve(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) {
    Rng rng(derive_seed(seed, stream::kNucleusStream, static_cast<std::uint64_t>(j)));
    TokenSequence response = decode_top_p(model, prompt, temperature, top_p,
                                          max_new_tokens, rng);
    const double r = reward.score(prompt, response);
    result.all_rewards.push_back(r);
    if (r > result.best_reward) {
      result.best_reward = r;
      result.best_response = std::move(response);
    }
  }
  return result;
}

struct TrajectoryBonResult {
  TokenSequence best_response;
  double best_reward = -std::numeric_limits<double>::infinity();
};

/// Best-of-n over greedy-perturbed decodes of n trajectories sampled around
/// `mean` — the candidate set AISP collapses to in its small-lambda, single
/// iteration limit. Uses the same k = 1 substreams as run_aisp.
inline TrajectoryBonResult run_bon_from_trajectories(const GeneratorModel& model,
                                                     const RewardModel& reward,
                                                     const TokenSequence& prompt,
                                                     const MeanTrajectory& mean,
                                                     double sigma2, int n,
                                                     int max_new_tokens,
                                                     std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const int tau = static_cast<int>(mean.cols());
  TrajectoryBonResult result;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, stream::kTrajectoryStream, 1ULL,
                        static_cast<std::uint64_t>(i)));
    const Trajectory v = sample_trajectory(mean, sigma2, rng);
    const DecodeRecord record =
        decode_greedy_perturbed(model, prompt, v, tau, max_new_tokens);
    const double r = reward.score(prompt, record.response);
    if (r > result.best_reward) {
      result.best_reward = r;
      result.best_response = record.response;
    }
  }
  return result;
}

/// Runs one independent AISP instance per prompt in lockstep rounds, so each
/// round's n * b evaluations form one parallelizable batch. Instance j draws
/// from derive_seed(config.seed, kInstanceStream, j); per-prompt outputs are
/// identical to solo run_aisp calls with those seeds.
inline std::vector<AispResult> run_batched_aisp(const GeneratorModel& model,
                                                const RewardModel& reward,
                                                const std::vector<TokenSequence>& prompts,
                                                const ControlConfig& config) {
  if (prompts.empty()) throw std::invalid_argument("prompt list must not be empty");
  config.throw_if_invalid();

  std::vector<detail::AispInstance> instances;
  instances.reserve(prompts.size());
  for (std::size_t j = 0; j < prompts.size(); ++j) {
    ControlConfig instance_config = config;
    instance_config.seed =
        derive_seed(config.seed, stream::kInstanceStream, static_cast<std::uint64_t>(j));
    instances.emplace_back(model, reward, prompts[j], instance_config);
  }
  for (int k = 1; k <= config.kappa; ++k) {
    for (auto& instance : instances) instance.run_iteration(k);
  }
  std::vector<AispResult> results;
  results.reserve(instances.size());
  for (auto& instance : instances) {
    instance.run_final_round();
    results.push_back(std::move(instance).take_result());
  }
  return results;
}

}  // namespace aisp
