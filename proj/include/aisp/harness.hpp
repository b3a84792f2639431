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

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aisp/analysis.hpp"
#include "aisp/controller.hpp"
#include "aisp/core_sampling.hpp"
#include "aisp/random.hpp"
#include "aisp/reward.hpp"
#include "aisp/sequence_model.hpp"

namespace aisp {

namespace stream {
inline constexpr std::uint64_t kExperimentStream = 4;
inline constexpr std::uint64_t kBatchStream = 5;
}  // namespace stream

/// Full experiment description: one sectioned key-value config file maps onto
/// this struct. Unset keys keep these defaults.
struct ExperimentConfig {
  std::uint64_t seed = 0;  // root seed; every run stream derives from it

  struct Model {
    std::string type = "toy";  // toy | file
    std::uint64_t seed = 7;
    int d = 4;
    int vocab_size = 16;
    double eos_bias = 1.0;
    std::string path;  // for type = file
  } model;

  ControlConfig control;

  struct Bon {
    int n_samples = 1024;
    double temperature = 0.8;
    double top_p = 0.9;
  } bon;

  struct Reward {
    std::string kind = "target_count";
    std::uint64_t seed = 11;
    int target_token = 0;
    std::vector<int> suffix;
    double bonus = 1.0;
  } reward;

  struct Prompts {
    int count = 4;
    int length = 6;
    std::uint64_t seed = 100;
  } prompts;

  struct Run {
    std::string method = "aisp";  // aisp | bon | batched | kl | curves | bon_equiv
    int repeats = 1;
    std::string output_dir = "out";
  } run;
};

struct ConfigValidation {
  ExperimentConfig config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Byte-stable decimal rendering with full round-trip precision.
inline std::string fmt17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

struct ConfigReader {
  std::map<std::string, std::string> values;  // "section.key" -> raw value
  std::vector<std::string> sections_present;
  std::vector<std::string>* errors = nullptr;

  bool has_section(const std::string& name) const {
    return std::find(sections_present.begin(), sections_present.end(), name) !=
           sections_present.end();
  }

  void get(const std::string& key, std::string& out) {
    const auto it = values.find(key);
    if (it != values.end()) out = it->second;
  }
  void get(const std::string& key, double& out) {
    const auto it = values.find(key);
    if (it == values.end()) return;
    try {
      std::size_t used = 0;
      const double parsed = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      out = parsed;
    } catch (...) {
      errors->push_back(key + " is not a number: '" + it->second + "'");
    }
  }
  void get(const std::string& key, int& out) {
    const auto it = values.find(key);
    if (it == values.end()) return;
    try {
      std::size_t used = 0;
      const long parsed = std::stol(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      out = static_cast<int>(parsed);
    } catch (...) {
      errors->push_back(key + " is not an integer: '" + it->second + "'");
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    const auto it = values.find(key);
    if (it == values.end()) return;
    try {
      // stoull would wrap a leading minus sign silently.
      if (!it->second.empty() && it->second.front() == '-') throw std::invalid_argument("");
      std::size_t used = 0;
      const unsigned long long parsed = std::stoull(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("");
      out = parsed;
    } catch (...) {
      errors->push_back(key + " is not an unsigned integer: '" + it->second + "'");
    }
  }
  void get(const std::string& key, std::vector<int>& out) {
    const auto it = values.find(key);
    if (it == values.end()) return;
    std::vector<int> parsed;
    std::stringstream ss(it->second);
    std::string item;
    bool bad = false;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        parsed.push_back(static_cast<int>(std::stol(item, &used)));
        if (used != item.size()) throw std::invalid_argument("");
      } catch (...) {
        bad = true;
      }
    }
    if (bad) {
      errors->push_back(key + " is not a comma-separated integer list: '" + it->second + "'");
    } else {
      out = std::move(parsed);
    }
  }
};

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "seed",
      "model.type", "model.seed", "model.d", "model.vocab_size", "model.eos_bias",
      "model.path",
      "control.lambda", "control.alpha", "control.sigma2", "control.n",
      "control.kappa", "control.tau", "control.max_new_tokens",
      "bon.n_samples", "bon.temperature", "bon.top_p",
      "reward.kind", "reward.seed", "reward.target_token", "reward.suffix",
      "reward.bonus",
      "prompts.count", "prompts.length", "prompts.seed",
      "run.method", "run.repeats", "run.output_dir",
  };
  return keys;
}

}  // namespace detail

/// Parses and validates a sectioned key=value config document. Returns the
/// fully defaulted config together with the complete list of violations; the
/// config is only meaningful when the list is empty.
inline ConfigValidation validate_config(const std::string& text) {
  ConfigValidation result;
  detail::ConfigReader reader;
  reader.errors = &result.errors;

  std::istringstream lines(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        result.errors.push_back("line " + std::to_string(line_number) +
                                ": unterminated section header");
        continue;
      }
      section = detail::trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) {
        result.errors.push_back("line " + std::to_string(line_number) + ": empty section name");
      } else {
        reader.sections_present.push_back(section);
      }
      continue;
    }
    const auto equals = stripped.find('=');
    if (equals == std::string::npos) {
      result.errors.push_back("line " + std::to_string(line_number) +
                              ": expected 'key = value', got '" + stripped + "'");
      continue;
    }
    const std::string key = detail::trim(stripped.substr(0, equals));
    const std::string value = detail::trim(stripped.substr(equals + 1));
    if (key.empty()) {
      result.errors.push_back("line " + std::to_string(line_number) + ": empty key");
      continue;
    }
    const std::string qualified = section.empty() ? key : section + "." + key;
    const auto& known = detail::known_config_keys();
    if (std::find(known.begin(), known.end(), qualified) == known.end()) {
      result.errors.push_back("unknown key: " + qualified);
      continue;
    }
    reader.values[qualified] = value;
  }

  ExperimentConfig& config = result.config;
  reader.get("seed", config.seed);
  reader.get("model.type", config.model.type);
  reader.get("model.seed", config.model.seed);
  reader.get("model.d", config.model.d);
  reader.get("model.vocab_size", config.model.vocab_size);
  reader.get("model.eos_bias", config.model.eos_bias);
  reader.get("model.path", config.model.path);
  reader.get("control.lambda", config.control.lambda);
  reader.get("control.alpha", config.control.alpha);
  reader.get("control.sigma2", config.control.sigma2);
  reader.get("control.n", config.control.n);
  reader.get("control.kappa", config.control.kappa);
  reader.get("control.tau", config.control.tau);
  reader.get("control.max_new_tokens", config.control.max_new_tokens);
  reader.get("bon.n_samples", config.bon.n_samples);
  reader.get("bon.temperature", config.bon.temperature);
  reader.get("bon.top_p", config.bon.top_p);
  reader.get("reward.kind", config.reward.kind);
  reader.get("reward.seed", config.reward.seed);
  reader.get("reward.target_token", config.reward.target_token);
  reader.get("reward.suffix", config.reward.suffix);
  reader.get("reward.bonus", config.reward.bonus);
  reader.get("prompts.count", config.prompts.count);
  reader.get("prompts.length", config.prompts.length);
  reader.get("prompts.seed", config.prompts.seed);
  reader.get("run.method", config.run.method);
  reader.get("run.repeats", config.run.repeats);
  reader.get("run.output_dir", config.run.output_dir);

  const std::string& method = config.run.method;
  const bool known_method = method == "aisp" || method == "bon" || method == "batched" ||
                            method == "kl" || method == "curves" || method == "bon_equiv";
  if (!known_method) {
    result.errors.push_back("run.method must be one of aisp|bon|batched|kl|curves|bon_equiv");
  }
  if (config.run.repeats < 1) result.errors.push_back("run.repeats must be >= 1");
  if (config.run.output_dir.empty()) result.errors.push_back("run.output_dir must not be empty");

  // Sections a method consumes must be spelled out in the file.
  const bool uses_control = method != "bon";
  const bool uses_bon = method == "bon" || method == "curves";
  if (known_method) {
    for (const char* required : {"model", "reward", "prompts"}) {
      if (!reader.has_section(required)) {
        result.errors.push_back("missing section: " + std::string(required) +
                                " (required for method=" + method + ")");
      }
    }
    if (uses_control && !reader.has_section("control")) {
      result.errors.push_back("missing section: control (required for method=" + method + ")");
    }
    if (uses_bon && !reader.has_section("bon")) {
      result.errors.push_back("missing section: bon (required for method=" + method + ")");
    }
  }

  if (config.model.type != "toy" && config.model.type != "file") {
    result.errors.push_back("model.type must be toy or file");
  }
  if (config.model.type == "toy") {
    if (config.model.d < 1) result.errors.push_back("model.d must be >= 1");
    if (config.model.vocab_size < 2) result.errors.push_back("model.vocab_size must be >= 2");
  }
  if (config.model.type == "file" && config.model.path.empty()) {
    result.errors.push_back("model.path must be set when model.type = file");
  }

  for (const auto& violation : config.control.validate()) result.errors.push_back(violation);

  if (config.bon.n_samples < 1) result.errors.push_back("bon.n_samples must be >= 1");
  if (!(config.bon.temperature > 0.0)) result.errors.push_back("bon.temperature must be > 0");
  if (!(config.bon.top_p > 0.0 && config.bon.top_p <= 1.0)) {
    result.errors.push_back("bon.top_p must be in (0, 1]");
  }

  const std::string& kind = config.reward.kind;
  if (kind != "target_count" && kind != "embedding_match" && kind != "sparse_terminal") {
    result.errors.push_back(
        "reward.kind must be one of target_count|embedding_match|sparse_terminal");
  }
  if (kind == "sparse_terminal" && config.reward.suffix.empty()) {
    result.errors.push_back("reward.suffix must be a non-empty token list for sparse_terminal");
  }
  if (config.reward.target_token < 0) {
    result.errors.push_back("reward.target_token must be >= 0");
  }

  if (config.prompts.count < 1) result.errors.push_back("prompts.count must be >= 1");
  if (config.prompts.length < 1) result.errors.push_back("prompts.length must be >= 1");

  return result;
}

namespace detail {

struct TranscriptRow {
  int prompt_id = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<int> tokens;
  double reward = 0.0;
  long long evaluations = 0;
};

struct Aggregate {
  double mean = 0.0;
  double std_dev = 0.0;
};

inline Aggregate aggregate_over(const std::vector<double>& values) {
  Aggregate out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std_dev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["model"] = {{"type", c.model.type},   {"seed", c.model.seed},
                {"d", c.model.d},         {"vocab_size", c.model.vocab_size},
                {"eos_bias", c.model.eos_bias}, {"path", c.model.path}};
  j["control"] = {{"lambda", c.control.lambda},
                  {"alpha", c.control.alpha},
                  {"sigma2", c.control.sigma2},
                  {"n", c.control.n},
                  {"kappa", c.control.kappa},
                  {"tau", c.control.tau},
                  {"max_new_tokens", c.control.max_new_tokens}};
  j["bon"] = {{"n_samples", c.bon.n_samples},
              {"temperature", c.bon.temperature},
              {"top_p", c.bon.top_p}};
  j["reward"] = {{"kind", c.reward.kind},
                 {"seed", c.reward.seed},
                 {"target_token", c.reward.target_token},
                 {"suffix", c.reward.suffix},
                 {"bonus", c.reward.bonus}};
  j["prompts"] = {{"count", c.prompts.count},
                  {"length", c.prompts.length},
                  {"seed", c.prompts.seed}};
  j["run"] = {{"method", c.run.method},
              {"repeats", c.run.repeats},
              {"output_dir", c.run.output_dir}};
  return j;
}

inline void write_curves_csv(const std::filesystem::path& path,
                             const ConvergenceCurves* curves) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "k,mean_at_k,best_at_k,best_so_far,bon_at_budget,ess_mean\n";
  if (curves != nullptr) {
    for (int k = 0; k < curves->kappa; ++k) {
      out << (k + 1) << ',' << fmt17(curves->mean_at_k[k]) << ','
          << fmt17(curves->best_at_k[k]) << ',' << fmt17(curves->best_so_far[k]) << ','
          << fmt17(curves->bon_at_budget[k]) << ',' << fmt17(curves->ess_mean[k]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failure: " + path.string());
}

inline void write_transcripts_jsonl(const std::filesystem::path& path,
                                    const std::vector<TranscriptRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["prompt_id"] = row.prompt_id;
    j["method"] = row.method;
    j["seed"] = row.seed;
    j["tokens"] = row.tokens;
    j["reward"] = row.reward;
    j["evaluations"] = row.evaluations;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failure: " + path.string());
}

}  // namespace detail

/// Executes the configured method over all prompts x repeats and writes
/// curves.csv, transcripts.jsonl and summary.json into run.output_dir.
/// Identical (config, seed) produce byte-identical files; wall time goes to
/// stderr so it cannot perturb them. Returns 0 on success.
inline int run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();

  GeneratorModel model;
  try {
    if (config.model.type == "toy") {
      model = make_toy_model(config.model.seed, config.model.d, config.model.vocab_size,
                             config.model.eos_bias);
    } else if (config.model.type == "file") {
      model = load_linear_model(config.model.path);
    } else {
      std::cerr << "error: model.type must be toy or file\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: model: " << e.what() << '\n';
    return 1;
  }

  RewardModel reward;
  try {
    RewardParams params;
    params.target_token = config.reward.target_token;
    params.vocab_size = model.vocab_size;
    params.suffix = config.reward.suffix;
    params.bonus = config.reward.bonus;
    RewardKind kind;
    if (config.reward.kind == "target_count") {
      kind = RewardKind::target_count;
    } else if (config.reward.kind == "embedding_match") {
      kind = RewardKind::embedding_match;
    } else if (config.reward.kind == "sparse_terminal") {
      kind = RewardKind::sparse_terminal;
    } else {
      std::cerr << "error: reward.kind is not a known reward\n";
      return 1;
    }
    reward = make_reward(kind, params, config.reward.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: reward: " << e.what() << '\n';
    return 1;
  }

  {
    const auto violations = config.control.validate();
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << "error: " << v << '\n';
      return 1;
    }
  }

  std::vector<TokenSequence> prompts;
  try {
    prompts = make_synthetic_prompts(config.prompts.count, config.prompts.length,
                                     model.vocab_size, model.eos_id, config.prompts.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: prompts: " << e.what() << '\n';
    return 1;
  }

  std::vector<detail::TranscriptRow> transcripts;
  std::optional<ConvergenceCurves> curves;
  nlohmann::ordered_json results_json;
  results_json["method"] = config.run.method;
  results_json["prompts"] = config.prompts.count;
  results_json["repeats"] = config.run.repeats;

  const int repeats = config.run.repeats;
  const std::string& method = config.run.method;
  try {
    if (method == "aisp" || method == "kl" || method == "curves" || method == "bon_equiv") {
      std::vector<AispResult> all_results;
      std::vector<std::vector<double>> bon_lists;
      std::vector<double> repeat_reward_means;
      std::vector<double> repeat_bon_means;
      std::vector<double> repeat_kl_means;
      long long equiv_matches = 0, equiv_total = 0;

      for (int rep = 0; rep < repeats; ++rep) {
        double reward_sum = 0.0, bon_sum = 0.0, kl_sum = 0.0;
        for (int p = 0; p < config.prompts.count; ++p) {
          const std::uint64_t run_seed =
              derive_seed(config.seed, stream::kExperimentStream,
                          static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep));
          ControlConfig control = config.control;
          control.seed = run_seed;
          if (method == "bon_equiv") {
            control.kappa = 1;
            control.alpha = 1.0;
            control.lambda = 1e-9;
          }
          AispResult result = run_aisp(model, reward, prompts[p], control);
          reward_sum += result.best_reward;
          transcripts.push_back({p, "aisp", run_seed, result.best_response.tokens,
                                 result.best_reward, result.total_evaluations});

          if (method == "curves") {
            const int budget = control.n * control.kappa;
            BonResult bon = run_bon(model, reward, prompts[p], budget,
                                    config.bon.temperature, config.bon.top_p,
                                    control.max_new_tokens, run_seed);
            bon_sum += bon.best_reward;
            transcripts.push_back({p, "bon", run_seed, bon.best_response.tokens,
                                   bon.best_reward, budget});
            bon_lists.push_back(std::move(bon.all_rewards));
          } else if (method == "kl") {
            kl_sum += kl_divergence_empirical(model, result.final_mean, prompts[p],
                                              control.max_new_tokens);
          } else if (method == "bon_equiv") {
            const MeanTrajectory zero = MeanTrajectory::Zero(model.d, control.tau);
            const TrajectoryBonResult baseline = run_bon_from_trajectories(
                model, reward, prompts[p], zero, control.sigma2, control.n,
                control.max_new_tokens, run_seed);
            ++equiv_total;
            if (baseline.best_response == result.best_response) ++equiv_matches;
          }
          all_results.push_back(std::move(result));
        }
        repeat_reward_means.push_back(reward_sum / config.prompts.count);
        if (method == "curves") repeat_bon_means.push_back(bon_sum / config.prompts.count);
        if (method == "kl") repeat_kl_means.push_back(kl_sum / config.prompts.count);
      }

      curves = aggregate_curves(all_results, bon_lists, config.control.n);
      const auto reward_stats = detail::aggregate_over(repeat_reward_means);
      results_json["reward_mean"] = reward_stats.mean;
      results_json["reward_std"] = reward_stats.std_dev;
      if (method == "curves") {
        const auto bon_stats = detail::aggregate_over(repeat_bon_means);
        results_json["bon_reward_mean"] = bon_stats.mean;
        results_json["bon_reward_std"] = bon_stats.std_dev;
      }
      if (method == "kl") {
        const auto kl_stats = detail::aggregate_over(repeat_kl_means);
        results_json["kl_mean"] = kl_stats.mean;
        results_json["kl_std"] = kl_stats.std_dev;
      }
      if (method == "bon_equiv") {
        results_json["instances"] = equiv_total;
        results_json["matches"] = equiv_matches;
        results_json["match_rate"] =
            equiv_total > 0 ? static_cast<double>(equiv_matches) / equiv_total : 0.0;
      }
    } else if (method == "bon") {
      std::vector<double> repeat_reward_means;
      for (int rep = 0; rep < repeats; ++rep) {
        double reward_sum = 0.0;
        for (int p = 0; p < config.prompts.count; ++p) {
          const std::uint64_t run_seed =
              derive_seed(config.seed, stream::kExperimentStream,
                          static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep));
          BonResult bon = run_bon(model, reward, prompts[p], config.bon.n_samples,
                                  config.bon.temperature, config.bon.top_p,
                                  config.control.max_new_tokens, run_seed);
          reward_sum += bon.best_reward;
          transcripts.push_back({p, "bon", run_seed, bon.best_response.tokens,
                                 bon.best_reward, config.bon.n_samples});
        }
        repeat_reward_means.push_back(reward_sum / config.prompts.count);
      }
      const auto reward_stats = detail::aggregate_over(repeat_reward_means);
      results_json["reward_mean"] = reward_stats.mean;
      results_json["reward_std"] = reward_stats.std_dev;
    } else if (method == "batched") {
      std::vector<AispResult> all_results;
      std::vector<double> repeat_reward_means;
      for (int rep = 0; rep < repeats; ++rep) {
        ControlConfig control = config.control;
        control.seed = derive_seed(config.seed, stream::kBatchStream,
                                   static_cast<std::uint64_t>(rep));
        std::vector<AispResult> batch = run_batched_aisp(model, reward, prompts, control);
        double reward_sum = 0.0;
        for (int p = 0; p < static_cast<int>(batch.size()); ++p) {
          const std::uint64_t instance_seed =
              derive_seed(control.seed, stream::kInstanceStream, static_cast<std::uint64_t>(p));
          reward_sum += batch[p].best_reward;
          transcripts.push_back({p, "batched", instance_seed,
                                 batch[p].best_response.tokens, batch[p].best_reward,
                                 batch[p].total_evaluations});
          all_results.push_back(std::move(batch[p]));
        }
        repeat_reward_means.push_back(reward_sum / config.prompts.count);
      }
      curves = aggregate_curves(all_results, {}, config.control.n);
      const auto reward_stats = detail::aggregate_over(repeat_reward_means);
      results_json["reward_mean"] = reward_stats.mean;
      results_json["reward_std"] = reward_stats.std_dev;
    } else {
      std::cerr << "error: run.method '" << method << "' is not implemented\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const std::filesystem::path out_dir(config.run.output_dir);
    std::filesystem::create_directories(out_dir);
    detail::write_curves_csv(out_dir / "curves.csv", curves ? &*curves : nullptr);
    detail::write_transcripts_jsonl(out_dir / "transcripts.jsonl", transcripts);

    nlohmann::ordered_json summary;
    summary["config"] = detail::config_to_json(config);
    summary["results"] = results_json;
    std::ofstream out(out_dir / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: summary.json");
    out << summary.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure: summary.json");
  } catch (const std::exception& e) {
    std::cerr << "error: output: " << e.what() << '\n';
    return 1;
  }

  const auto elapsed = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - started);
  std::cerr << "completed method=" << method << " in " << elapsed.count() << " s\n";
  return 0;
}

}  // namespace aisp
