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
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aisp/random.hpp"
#include "aisp/sequence_model.hpp"

namespace aisp {

/// Trajectory-level reward: deterministic, finite score for a full
/// (prompt, response) pair. No token-level rewards.
struct RewardModel {
  std::function<double(const TokenSequence& prompt, const TokenSequence& response)> score;
};

enum class RewardKind { target_count, embedding_match, sparse_terminal };

struct RewardParams {
  int target_token = 0;      // target_count: the token being counted
  int vocab_size = 0;        // embedding_match: size of the seeded weight vector
  std::vector<int> suffix;   // sparse_terminal: required response ending
  double bonus = 1.0;        // sparse_terminal: reward when the suffix matches
};

namespace detail {

// Content of a response: the trailing EOS terminator is not scored.
inline std::span<const int> content_tokens(const TokenSequence& response) {
  std::span<const int> tokens(response.tokens);
  if (response.terminated && !tokens.empty()) tokens = tokens.first(tokens.size() - 1);
  return tokens;
}

}  // namespace detail

/// Builds one of the deterministic synthetic rewards.
///
/// target_count: occurrences of the target token divided by response length.
/// embedding_match: dot product of the response token-frequency histogram
///   with a seeded weight vector, giving a dense landscape over sequences.
/// sparse_terminal: `bonus` iff the response ends with the configured suffix,
///   else 0 — the hard-exploration case.
inline RewardModel make_reward(RewardKind kind, const RewardParams& params,
                               std::uint64_t seed) {
  switch (kind) {
    case RewardKind::target_count: {
      const int target = params.target_token;
      return RewardModel{[target](const TokenSequence&, const TokenSequence& response) {
        const auto tokens = detail::content_tokens(response);
        if (tokens.empty()) return 0.0;
        long count = 0;
        for (int token : tokens) count += (token == target) ? 1 : 0;
        return static_cast<double>(count) / static_cast<double>(tokens.size());
      }};
    }
    case RewardKind::embedding_match: {
      if (params.vocab_size < 1) {
        throw std::invalid_argument("embedding_match requires vocab_size >= 1");
      }
      Rng rng(seed);
      Eigen::VectorXd weights(params.vocab_size);
      for (int i = 0; i < params.vocab_size; ++i) weights[i] = rng.normal();
      return RewardModel{[weights](const TokenSequence&, const TokenSequence& response) {
        const auto tokens = detail::content_tokens(response);
        if (tokens.empty()) return 0.0;
        double sum = 0.0;
        for (int token : tokens) {
          if (token >= 0 && token < weights.size()) sum += weights[token];
        }
        return sum / static_cast<double>(tokens.size());
      }};
    }
    case RewardKind::sparse_terminal: {
      if (params.suffix.empty()) {
        throw std::invalid_argument("sparse_terminal requires a non-empty suffix");
      }
      const std::vector<int> suffix = params.suffix;
      const double bonus = params.bonus;
      return RewardModel{[suffix, bonus](const TokenSequence&, const TokenSequence& response) {
        const auto tokens = detail::content_tokens(response);
        if (tokens.size() < suffix.size()) return 0.0;
        const auto tail = tokens.last(suffix.size());
        for (std::size_t i = 0; i < suffix.size(); ++i) {
          if (tail[i] != suffix[i]) return 0.0;
        }
        return bonus;
      }};
    }
  }
  throw std::invalid_argument("unknown reward kind");
}

}  // namespace aisp
