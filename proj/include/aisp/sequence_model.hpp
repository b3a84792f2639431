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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aisp/random.hpp"

namespace aisp {

/// Additive pre-logit perturbation, one column per controlled step (d x tau).
using Trajectory = Eigen::MatrixXd;
/// The mean being optimized; same shape as the trajectories drawn around it.
using MeanTrajectory = Eigen::MatrixXd;

struct TokenSequence {
  std::vector<int> tokens;
  bool terminated = false;  // true iff the final token is the EOS id

  bool operator==(const TokenSequence&) const = default;
};

/// Autoregressive generator: a deterministic pre-logit map (here a seeded
/// tanh recurrence over token embeddings) followed by a linear-softmax output
/// layer. Immutable after construction and safe to share across workers.
struct GeneratorModel {
  int vocab_size = 0;
  int d = 0;
  int eos_id = 0;
  double eos_bias = 0.0;            // added to the EOS logit at decode time
  Eigen::MatrixXd embedding;        // vocab_size x d
  Eigen::MatrixXd recurrence;       // d x d
  Eigen::MatrixXd output_weight;    // vocab_size x d
  Eigen::VectorXd output_bias;      // vocab_size

  Eigen::VectorXd advance_state(const Eigen::VectorXd& state, int token) const {
    return (recurrence * state + embedding.row(token).transpose()).array().tanh();
  }

  /// Pre-logit for the next position given all past tokens (prompt included).
  /// Equal pasts always yield equal vectors.
  Eigen::VectorXd prelogit(std::span<const int> past) const {
    Eigen::VectorXd state = Eigen::VectorXd::Zero(d);
    for (int token : past) state = advance_state(state, token);
    return state;
  }

  Eigen::VectorXd logits(const Eigen::VectorXd& prelogit_vec) const {
    Eigen::VectorXd out = output_weight * prelogit_vec + output_bias;
    out[eos_id] += eos_bias;
    return out;
  }
};

struct DecodeRecord {
  TokenSequence response;  // generated tokens only, EOS included when reached
  int prelogits_used = 0;  // steps where the perturbation applied, min(tau, length)
  int length = 0;
};

namespace detail {

// Argmax with ties broken toward the lowest token id, so decodes are a total
// order and golden outputs stay stable.
inline int argmax_lowest(const Eigen::VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline double log_sum_exp(const Eigen::VectorXd& values) {
  const double max_value = values.maxCoeff();
  return max_value + std::log((values.array() - max_value).exp().sum());
}

}  // namespace detail

/// Greedy decode with the pre-logit shifted by column t of `v` for the first
/// `tau` generated positions. The shift alters token selection only; the
/// recurrence state always evolves from the unperturbed map, so positions
/// past tau depend on `v` only through the tokens it selected.
inline DecodeRecord decode_greedy_perturbed(const GeneratorModel& model,
                                            const TokenSequence& prompt,
                                            const Trajectory& v, int tau,
                                            int max_new_tokens) {
  if (v.rows() != model.d) {
    throw std::invalid_argument("trajectory rows " + std::to_string(v.rows()) +
                                " != model dimension " + std::to_string(model.d));
  }
  if (v.cols() != tau) {
    throw std::invalid_argument("trajectory has " + std::to_string(v.cols()) +
                                " columns, expected tau = " + std::to_string(tau));
  }
  if (tau < 1 || tau > max_new_tokens) {
    throw std::invalid_argument("tau must lie in [1, max_new_tokens]");
  }

  Eigen::VectorXd state = Eigen::VectorXd::Zero(model.d);
  for (int token : prompt.tokens) state = model.advance_state(state, token);

  DecodeRecord record;
  record.response.tokens.reserve(static_cast<std::size_t>(max_new_tokens));
  for (int t = 1; t <= max_new_tokens; ++t) {
    Eigen::VectorXd pre = state;
    if (t <= tau) pre += v.col(t - 1);
    const int token = detail::argmax_lowest(model.logits(pre));
    record.response.tokens.push_back(token);
    if (token == model.eos_id) {
      record.response.terminated = true;
      break;
    }
    state = model.advance_state(state, token);
  }
  record.length = static_cast<int>(record.response.tokens.size());
  record.prelogits_used = std::min(tau, record.length);
  return record;
}

/// Nucleus sampling: each step keeps the smallest probability-ordered token
/// set whose cumulative mass reaches p, renormalizes, and samples from it.
inline TokenSequence decode_top_p(const GeneratorModel& model,
                                  const TokenSequence& prompt,
                                  double temperature, double p,
                                  int max_new_tokens, Rng& rng) {
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("p must be in (0, 1]");
  if (temperature <= 0.0) throw std::invalid_argument("temperature must be positive");

  Eigen::VectorXd state = Eigen::VectorXd::Zero(model.d);
  for (int token : prompt.tokens) state = model.advance_state(state, token);

  std::vector<int> order(static_cast<std::size_t>(model.vocab_size));
  TokenSequence response;
  for (int t = 0; t < max_new_tokens; ++t) {
    const Eigen::VectorXd scaled = model.logits(state) / temperature;
    const double max_logit = scaled.maxCoeff();
    const Eigen::VectorXd probs_unnorm = (scaled.array() - max_logit).exp();
    const Eigen::VectorXd probs = probs_unnorm / probs_unnorm.sum();

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return a < b;
    });

    std::size_t nucleus_size = order.size();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      cumulative += probs[order[i]];
      if (cumulative >= p) {
        nucleus_size = i + 1;
        break;
      }
    }
    double nucleus_mass = 0.0;
    for (std::size_t i = 0; i < nucleus_size; ++i) nucleus_mass += probs[order[i]];

    const double draw = rng.uniform() * nucleus_mass;
    int token = order[nucleus_size - 1];
    double running = 0.0;
    for (std::size_t i = 0; i < nucleus_size; ++i) {
      running += probs[order[i]];
      if (draw < running) {
        token = order[i];
        break;
      }
    }

    response.tokens.push_back(token);
    if (token == model.eos_id) {
      response.terminated = true;
      break;
    }
    state = model.advance_state(state, token);
  }
  return response;
}

/// Log-probabilities of the next token, optionally with the pre-logit shifted.
/// The output log-normalizes to zero.
inline Eigen::VectorXd next_token_log_probs(const GeneratorModel& model,
                                            std::span<const int> past,
                                            const Eigen::VectorXd& shift) {
  if (shift.size() != model.d) {
    throw std::invalid_argument("shift length " + std::to_string(shift.size()) +
                                " != model dimension " + std::to_string(model.d));
  }
  const Eigen::VectorXd raw = model.logits(model.prelogit(past) + shift);
  return raw.array() - detail::log_sum_exp(raw);
}

inline Eigen::VectorXd next_token_log_probs(const GeneratorModel& model,
                                            std::span<const int> past) {
  const Eigen::VectorXd raw = model.logits(model.prelogit(past));
  return raw.array() - detail::log_sum_exp(raw);
}

/// Desk-scale generator with seeded parameters. The recurrence is tanh
/// squashed so pre-logits stay bounded and typical logit gaps are O(1),
/// keeping greedy decodes responsive to perturbations with sigma in the
/// 0.1-0.7 range. Identical seeds produce identical models.
inline GeneratorModel make_toy_model(std::uint64_t seed, int d, int vocab_size,
                                     double eos_bias) {
  if (vocab_size < 2) throw std::invalid_argument("vocab_size must be >= 2");
  if (d < 1) throw std::invalid_argument("d must be >= 1");

  GeneratorModel model;
  model.vocab_size = vocab_size;
  model.d = d;
  model.eos_id = vocab_size - 1;
  model.eos_bias = eos_bias;
  model.recurrence.resize(d, d);
  model.embedding.resize(vocab_size, d);
  model.output_weight.resize(vocab_size, d);
  model.output_bias.resize(vocab_size);

  // Fill order is part of the model's identity: recurrence, embedding,
  // output_weight (row-major each), then output_bias.
  Rng rng(seed);
  const double recurrence_scale = 0.9 / std::sqrt(static_cast<double>(d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) model.recurrence(r, c) = rng.normal(0.0, recurrence_scale);
  for (int r = 0; r < vocab_size; ++r)
    for (int c = 0; c < d; ++c) model.embedding(r, c) = rng.normal();
  for (int r = 0; r < vocab_size; ++r)
    for (int c = 0; c < d; ++c) model.output_weight(r, c) = rng.normal();
  for (int r = 0; r < vocab_size; ++r) model.output_bias[r] = rng.normal(0.0, 0.3);
  return model;
}

namespace detail {

inline void write_matrix(std::ostream& out, const char* name,
                         const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buffer[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", m(r, c));
      out << buffer << (c + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

inline void expect_field(std::istream& in, const std::string& expected) {
  std::string word;
  if (!(in >> word) || word != expected) {
    throw std::runtime_error("model file parse error: expected field '" +
                             expected + "', got '" + word + "'");
  }
}

inline Eigen::MatrixXd read_matrix(std::istream& in, const std::string& name,
                                   Eigen::Index want_rows, Eigen::Index want_cols) {
  expect_field(in, name);
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols)) {
    throw std::runtime_error("model file parse error: missing dimensions for " + name);
  }
  if (rows != want_rows || cols != want_cols) {
    throw std::runtime_error("model file dimension error: " + name + " is " +
                             std::to_string(rows) + "x" + std::to_string(cols) +
                             ", expected " + std::to_string(want_rows) + "x" +
                             std::to_string(want_cols));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(in >> m(r, c))) {
        throw std::runtime_error("model file parse error: truncated data in " + name);
      }
    }
  }
  return m;
}

}  // namespace detail

/// Writes the model as a self-describing text document. Numbers carry 17
/// significant digits, so load_linear_model round-trips doubles exactly.
inline void save_linear_model(const GeneratorModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << "aisp-model v1\n";
  out << "vocab_size " << model.vocab_size << '\n';
  out << "d " << model.d << '\n';
  out << "eos_id " << model.eos_id << '\n';
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", model.eos_bias);
  out << "eos_bias " << buffer << '\n';
  detail::write_matrix(out, "embedding", model.embedding);
  detail::write_matrix(out, "recurrence", model.recurrence);
  detail::write_matrix(out, "output_weight", model.output_weight);
  detail::write_matrix(out, "output_bias", model.output_bias);
  if (!out) throw std::runtime_error("write failure on model file: " + path);
}

inline GeneratorModel load_linear_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model file not found: " + path);

  std::string magic, version;
  if (!(in >> magic >> version) || magic != "aisp-model" || version != "v1") {
    throw std::runtime_error("model file parse error: bad header in " + path);
  }

  GeneratorModel model;
  detail::expect_field(in, "vocab_size");
  if (!(in >> model.vocab_size) || model.vocab_size < 2) {
    throw std::runtime_error("model file parse error: invalid vocab_size");
  }
  detail::expect_field(in, "d");
  if (!(in >> model.d) || model.d < 1) {
    throw std::runtime_error("model file parse error: invalid d");
  }
  detail::expect_field(in, "eos_id");
  if (!(in >> model.eos_id)) {
    throw std::runtime_error("model file parse error: invalid eos_id");
  }
  if (model.eos_id < 0 || model.eos_id >= model.vocab_size) {
    throw std::runtime_error("model file dimension error: eos_id " +
                             std::to_string(model.eos_id) +
                             " out of range for vocab_size " +
                             std::to_string(model.vocab_size));
  }
  detail::expect_field(in, "eos_bias");
  if (!(in >> model.eos_bias)) {
    throw std::runtime_error("model file parse error: invalid eos_bias");
  }
  model.embedding = detail::read_matrix(in, "embedding", model.vocab_size, model.d);
  model.recurrence = detail::read_matrix(in, "recurrence", model.d, model.d);
  model.output_weight = detail::read_matrix(in, "output_weight", model.vocab_size, model.d);
  model.output_bias = detail::read_matrix(in, "output_bias", model.vocab_size, 1);
  return model;
}

/// Seeded uniform prompts over the non-EOS vocabulary.
inline std::vector<TokenSequence> make_synthetic_prompts(int count, int length,
                                                         int vocab_size, int eos_id,
                                                         std::uint64_t seed) {
  if (count < 1 || length < 1) {
    throw std::invalid_argument("prompt count and length must be >= 1");
  }
  std::vector<TokenSequence> prompts;
  prompts.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    TokenSequence prompt;
    prompt.tokens.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
      int token = static_cast<int>(rng.uniform() * (vocab_size - 1));
      token = std::min(token, vocab_size - 2);
      if (token >= eos_id) ++token;
      prompt.tokens.push_back(token);
    }
    prompts.push_back(std::move(prompt));
  }
  return prompts;
}

}  // namespace aisp
