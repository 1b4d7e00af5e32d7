// Copyright 2026 The GAAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gaae: generate data, train, protect, evaluate and sweep from one binary.
//
// Exit codes: 0 ok, 1 other error, 2 config, 3 data, 4 format, 5 training
// diverged, 6 sweep finished with failed cells.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gaae/cli/commands.hpp"
#include "gaae/cli/config.hpp"
#include "gaae/error.hpp"

namespace {

using gaae::cli::ExperimentConfig;
namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string log_level = "info";
  std::vector<std::string> overrides;
};

ExperimentConfig Resolve(const GlobalOptions& g, const std::vector<std::string>& extra) {
  ExperimentConfig cfg =
      g.config_path.empty() ? ExperimentConfig{} : gaae::cli::LoadConfig(g.config_path);
  for (const auto& o : g.overrides) gaae::cli::ApplyOverride(cfg, o);
  if (g.seed) cfg.seed = *g.seed;
  for (const auto& o : extra) gaae::cli::ApplyOverride(cfg, o);
  cfg.Validate();
  return cfg;
}

void SetLogLevel(const std::string& level) {
  auto logger = spdlog::stderr_color_mt("gaae");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gender-adversarial auto-encoder with local differential privacy"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the top-level seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_option("--set", g.overrides, "Override a config key: section.key=value");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen", "Generate synthetic embeddings, splits and trials");

  auto* train = app.add_subcommand("train", "Train the auto-encoder on aae_train.emb");
  std::string train_data;
  std::optional<std::string> train_eps;
  train->add_option("--data", train_data, "Directory written by gen")->required();
  train->add_option("--epsilon-tr", train_eps, "Training budget (number or inf)");

  auto* protect = app.add_subcommand("protect", "Write a protected copy of an embedding file");
  std::string ckpt, input, output, ledger;
  std::optional<std::string> protect_eps;
  protect->add_option("--checkpoint", ckpt)->required()->check(CLI::ExistingFile);
  protect->add_option("--input", input)->required()->check(CLI::ExistingFile);
  protect->add_option("--output", output)->required();
  protect->add_option("--epsilon-ts", protect_eps, "Release budget (number or inf)");
  protect->add_option("--ledger", ledger, "Budget ledger (default: privacy_ledger.tsv "
                                          "next to the output)");

  auto* evaluate = app.add_subcommand("eval", "Attacker AUC and ASV EER over an epsilon_ts list");
  std::string eval_ckpt, eval_data;
  std::optional<std::string> eval_eps;
  evaluate->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", eval_data)->required();
  evaluate->add_option("--epsilon-ts", eval_eps, "Comma separated, e.g. 15,35,inf");

  auto* sweep = app.add_subcommand("sweep", "Full factorial epsilon_tr x epsilon_ts x seed sweep");
  std::string sweep_data;
  std::optional<std::string> sweep_tr, sweep_ts, sweep_seeds;
  sweep->add_option("--data", sweep_data, "Existing data directory (default: generate)");
  sweep->add_option("--epsilon-tr", sweep_tr, "Comma separated grid");
  sweep->add_option("--epsilon-ts", sweep_ts, "Comma separated grid");
  sweep->add_option("--seeds", sweep_seeds, "Comma separated seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gaae::cli::kExitConfig;
  }

  try {
    SetLogLevel(g.log_level);
    const fs::path out(g.out);
    std::vector<std::string> extra;
    if (*gen) {
      gaae::cli::RunGen(Resolve(g, extra), out);
    } else if (*train) {
      if (train_eps) extra.push_back("dp.epsilon_tr=" + *train_eps);
      gaae::cli::RunTrain(Resolve(g, extra), train_data, out);
    } else if (*protect) {
      if (protect_eps) extra.push_back("dp.epsilon_ts=" + *protect_eps);
      const ExperimentConfig cfg = Resolve(g, extra);
      const fs::path out_file(output);
      const fs::path ledger_path =
          ledger.empty() ? out_file.parent_path() / gaae::cli::kLedgerFile : fs::path(ledger);
      gaae::cli::RunProtect(cfg, ckpt, input, cfg.epsilon_ts, out_file, ledger_path);
    } else if (*evaluate) {
      if (eval_eps) extra.push_back("eval.epsilon_ts=" + *eval_eps);
      gaae::cli::RunEval(Resolve(g, extra), eval_ckpt, eval_data, out);
    } else if (*sweep) {
      if (sweep_tr) extra.push_back("sweep.epsilon_tr=" + *sweep_tr);
      if (sweep_ts) extra.push_back("sweep.epsilon_ts=" + *sweep_ts);
      if (sweep_seeds) extra.push_back("sweep.seeds=" + *sweep_seeds);
      std::optional<fs::path> data;
      if (!sweep_data.empty()) data = sweep_data;
      const auto result = gaae::cli::RunSweep(Resolve(g, extra), data, out);
      if (!result.complete()) {
        for (const auto& f : result.failures) {
          std::cerr << "failed cell " << gaae::cli::CellName(f.epsilon_tr, f.seed) << ": "
                    << f.message << "\n";
        }
        return gaae::cli::kExitSweepIncomplete;
      }
    }
  } catch (const gaae::Error& e) {
    std::cerr << "gaae: " << e.what() << "\n";
    return gaae::cli::ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gaae: " << e.what() << "\n";
    return gaae::cli::kExitGeneric;
  }
  return gaae::cli::kExitOk;
}
