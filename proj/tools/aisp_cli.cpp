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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "aisp/aisp.hpp"

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

constexpr const char* kConfigHelp = R"(Config file: sectioned key = value text. '#' starts a comment line.
Defaults in parentheses.

  seed = 0                        root seed; all run streams derive from it

  [model]
  type = toy                      toy | file (toy)
  seed = 7                        toy-model parameter seed (7)
  d = 4                           pre-logit dimension (4)
  vocab_size = 16                 vocabulary size incl. EOS (16)
  eos_bias = 1.0                  added to the EOS logit (1.0)
  path =                          model file for type = file

  [control]
  lambda = 1.0                    reward temperature, > 0 (1.0)
  alpha = 0.9999                  correction relaxation, in [0, 1] (0.9999)
  sigma2 = 0.5                    perturbation variance, > 0 (0.5)
  n = 32                          samples per iteration (32)
  kappa = 32                      iterations (32)
  tau = 128                       perturbed positions, <= max_new_tokens (128)
  max_new_tokens = 128            decode limit (128)

  [bon]
  n_samples = 1024                best-of-n budget (1024)
  temperature = 0.8               softmax temperature, > 0 (0.8)
  top_p = 0.9                     nucleus mass, in (0, 1] (0.9)

  [reward]
  kind = target_count             target_count | embedding_match | sparse_terminal
  seed = 11                       reward parameter seed (11)
  target_token = 0                target_count: counted token (0)
  suffix =                        sparse_terminal: comma-separated token ids
  bonus = 1.0                     sparse_terminal: reward on suffix match (1.0)

  [prompts]
  count = 4                       synthetic prompts (4)
  length = 6                      tokens per prompt (6)
  seed = 100                      prompt seed (100)

  [run]
  method = aisp                   aisp | bon | batched | kl | curves | bon_equiv
  repeats = 1                     repeat seeds per prompt (1)
  output_dir = out                where curves.csv, transcripts.jsonl, summary.json go

Outputs: curves.csv (k,mean_at_k,best_at_k,best_so_far,bon_at_budget,ess_mean;
bon_at_budget is nan unless method = curves), transcripts.jsonl (prompt_id,
method, seed, tokens, reward, evaluations), summary.json (config echo plus
aggregate rewards over repeats). Reruns of one config are byte-identical.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-steered decoding via adaptive importance sampling on pre-logits"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> output_dir_override;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--seed", seed_override, "override the root seed");
  run->add_option("--output-dir", output_dir_override, "override run.output_dir");

  CLI::App* validate = app.add_subcommand("validate", "Check a config file and report all violations");
  validate->add_option("--config", config_path, "config file path")->required();

  CLI::App* version = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::cout << "aisp " << aisp::kVersion << '\n';
    return 0;
  }

  const auto text = read_file(config_path);
  if (!text) {
    std::cerr << "error: cannot read config file: " << config_path << '\n';
    return 1;
  }
  aisp::ConfigValidation validation = aisp::validate_config(*text);
  if (!validation.ok()) {
    for (const auto& error : validation.errors) std::cerr << "error: " << error << '\n';
    return 1;
  }

  if (validate->parsed()) {
    std::cout << "config ok: method=" << validation.config.run.method
              << " prompts=" << validation.config.prompts.count
              << " repeats=" << validation.config.run.repeats
              << " seed=" << validation.config.seed << '\n';
    return 0;
  }

  if (seed_override) validation.config.seed = *seed_override;
  if (output_dir_override) validation.config.run.output_dir = *output_dir_override;
  return aisp::run_experiment(validation.config);
}
