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

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aisp/controller.hpp"
#include "aisp/core_sampling.hpp"
#include "aisp/sequence_model.hpp"

namespace aisp {

/// Effective sample size of an importance-weight simplex: 1 / sum w_i^2.
/// Ranges from 1 (one-hot, degenerate) to n (uniform, ideal).
inline double effective_sample_size(const WeightVector& weights) {
  return 1.0 / weights.squaredNorm();
}

/// Plug-in KL divergence of the mean-shifted token process from the base
/// model on one greedily generated response: the response is decoded from the
/// shifted model, then the per-token log-probability gaps are summed. Shift
/// columns apply to the first mean.cols() positions only; later positions
/// contribute exactly zero. A zero mean therefore returns exactly 0.
inline double kl_divergence_empirical(const GeneratorModel& model,
                                      const MeanTrajectory& mean,
                                      const TokenSequence& prompt,
                                      int max_new_tokens) {
  if (mean.rows() != model.d) {
    throw std::invalid_argument("mean rows " + std::to_string(mean.rows()) +
                                " != model dimension " + std::to_string(model.d));
  }
  const int tau = static_cast<int>(mean.cols());
  const DecodeRecord record =
      decode_greedy_perturbed(model, prompt, mean, tau, max_new_tokens);

  std::vector<int> past = prompt.tokens;
  double kl = 0.0;
  const int shifted_steps = std::min(tau, record.length);
  for (int t = 1; t <= shifted_steps; ++t) {
    const int token = record.response.tokens[static_cast<std::size_t>(t - 1)];
    const Eigen::VectorXd shifted = next_token_log_probs(model, past, mean.col(t - 1));
    const Eigen::VectorXd base = next_token_log_probs(model, past);
    kl += shifted[token] - base[token];
    past.push_back(token);
  }
  return kl;
}

/// Cross-checks the Gaussian class-conditional / softmax correspondence: the
/// Bayes posterior from explicit Gaussian densities against the softmax of
/// the linear layer w_i = Sigma^-1 mu_i, b_i = -mu_i' Sigma^-1 mu_i / 2 +
/// log prior_i. Returns the maximum absolute difference between the two
/// posteriors at z.
inline double softmax_gaussian_check(const std::vector<Eigen::VectorXd>& means,
                                     const Eigen::MatrixXd& covariance,
                                     const Eigen::VectorXd& priors,
                                     const Eigen::VectorXd& z) {
  const int classes = static_cast<int>(means.size());
  if (classes < 1) throw std::invalid_argument("need at least one class mean");
  if (priors.size() != classes) throw std::invalid_argument("priors/means length mismatch");
  const Eigen::Index dim = z.size();
  for (const auto& mu : means) {
    if (mu.size() != dim) throw std::invalid_argument("class mean dimension mismatch");
  }
  if (covariance.rows() != dim || covariance.cols() != dim) {
    throw std::invalid_argument("covariance dimension mismatch");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw std::invalid_argument("covariance must be symmetric positive definite");
  }
  for (Eigen::Index i = 0; i < priors.size(); ++i) {
    if (priors[i] < 0.0) throw std::invalid_argument("priors must be nonnegative");
  }
  if (std::abs(priors.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("priors must sum to 1");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("covariance must be symmetric positive definite");
  }

  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double log_det = 0.0;
  const Eigen::MatrixXd chol = llt.matrixL();
  for (Eigen::Index i = 0; i < dim; ++i) log_det += 2.0 * std::log(chol(i, i));

  Eigen::VectorXd bayes_logits(classes);
  Eigen::VectorXd linear_logits(classes);
  for (int i = 0; i < classes; ++i) {
    const double log_prior =
        priors[i] > 0.0 ? std::log(priors[i]) : -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd residual = z - means[static_cast<std::size_t>(i)];
    const double quadratic = residual.dot(llt.solve(residual));
    bayes_logits[i] = log_prior - 0.5 * quadratic -
                      0.5 * (static_cast<double>(dim) * std::log(kTwoPi) + log_det);

    const Eigen::VectorXd w = llt.solve(means[static_cast<std::size_t>(i)]);
    linear_logits[i] =
        w.dot(z) - 0.5 * means[static_cast<std::size_t>(i)].dot(w) + log_prior;
  }

  const auto softmax = [](const Eigen::VectorXd& logits) {
    const Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
    return (shifted / shifted.sum()).matrix().eval();
  };
  return (softmax(bayes_logits) - softmax(linear_logits)).cwiseAbs().maxCoeff();
}

/// Convergence curves averaged over runs (prompts x repeat seeds), plus the
/// matched-budget best-of-n baseline when its reward lists are supplied.
struct ConvergenceCurves {
  int kappa = 0;
  int result_count = 0;               // aisp runs aggregated
  int bon_count = 0;                  // bon reward lists aggregated
  std::vector<double> mean_at_k;      // average over runs of mean sampled reward
  std::vector<double> best_at_k;      // average of per-iteration maxima
  std::vector<double> best_so_far;    // average running maxima, nondecreasing
  std::vector<double> bon_at_budget;  // average best of the first n*k bon draws
  std::vector<double> ess_mean;       // average effective sample size
};

inline ConvergenceCurves aggregate_curves(const std::vector<AispResult>& results,
                                          const std::vector<std::vector<double>>& bon_rewards,
                                          int n) {
  if (results.empty()) throw std::invalid_argument("need at least one result");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const std::size_t kappa = results.front().traces.size();
  for (const auto& result : results) {
    if (result.traces.size() != kappa) {
      throw std::invalid_argument("results have inconsistent iteration counts");
    }
  }
  for (const auto& rewards : bon_rewards) {
    if (rewards.size() < kappa * static_cast<std::size_t>(n)) {
      throw std::invalid_argument("bon reward list shorter than n * kappa");
    }
  }

  ConvergenceCurves curves;
  curves.kappa = static_cast<int>(kappa);
  curves.result_count = static_cast<int>(results.size());
  curves.bon_count = static_cast<int>(bon_rewards.size());
  curves.mean_at_k.assign(kappa, 0.0);
  curves.best_at_k.assign(kappa, 0.0);
  curves.best_so_far.assign(kappa, 0.0);
  curves.ess_mean.assign(kappa, 0.0);
  curves.bon_at_budget.assign(kappa, std::numeric_limits<double>::quiet_NaN());

  for (const auto& result : results) {
    for (std::size_t k = 0; k < kappa; ++k) {
      curves.mean_at_k[k] += result.traces[k].mean_reward;
      curves.best_at_k[k] += result.traces[k].best_at_k;
      curves.best_so_far[k] += result.traces[k].best_so_far;
      curves.ess_mean[k] += result.traces[k].ess;
    }
  }
  const double inv_results = 1.0 / static_cast<double>(results.size());
  for (std::size_t k = 0; k < kappa; ++k) {
    curves.mean_at_k[k] *= inv_results;
    curves.best_at_k[k] *= inv_results;
    curves.best_so_far[k] *= inv_results;
    curves.ess_mean[k] *= inv_results;
  }

  if (!bon_rewards.empty()) {
    for (std::size_t k = 0; k < kappa; ++k) {
      double sum = 0.0;
      for (const auto& rewards : bon_rewards) {
        double best = -std::numeric_limits<double>::infinity();
        const std::size_t budget = (k + 1) * static_cast<std::size_t>(n);
        for (std::size_t j = 0; j < budget; ++j) best = std::max(best, rewards[j]);
        sum += best;
      }
      curves.bon_at_budget[k] = sum / static_cast<double>(bon_rewards.size());
    }
  }
  return curves;
}

}  // namespace aisp
