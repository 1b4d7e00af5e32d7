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

// Subcommand bodies. Each takes a resolved config and explicit paths so the
// test suites can drive them without spawning processes. Files written here
// carry no timestamps; those only go to the log.

#pragma once

#include <openssl/evp.h>

#include <spdlog/spdlog.h>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaae/byte_io.hpp"
#include "gaae/cli/config.hpp"
#include "gaae/data/embedding_file.hpp"
#include "gaae/data/splits.hpp"
#include "gaae/data/synthetic.hpp"
#include "gaae/data/trials.hpp"
#include "gaae/dp/ledger.hpp"
#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/attacker.hpp"
#include "gaae/eval/report.hpp"
#include "gaae/model/checkpoint.hpp"
#include "gaae/model/training.hpp"

namespace gaae::cli {

namespace fs = std::filesystem;

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitGeneric = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitFormat = 4,
  kExitTraining = 5,
  kExitSweepIncomplete = 6,
};

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kData:
    case ErrorKind::kDegenerate: return kExitData;
    case ErrorKind::kFormat: return kExitFormat;
    case ErrorKind::kTraining: return kExitTraining;
    default: return kExitGeneric;
  }
}

inline constexpr std::string_view kAaeTrainFile = "aae_train.emb";
inline constexpr std::string_view kAttackerTrainFile = "attacker_train.emb";
inline constexpr std::string_view kEvalEnrollFile = "eval_enroll.emb";
inline constexpr std::string_view kEvalTestFile = "eval_test.emb";
inline constexpr std::string_view kTrialsFile = "trials.txt";
inline constexpr std::string_view kManifestFile = "manifest.txt";
inline constexpr std::string_view kResolvedConfigFile = "config.resolved";
inline constexpr std::string_view kCheckpointFile = "checkpoint.gaae";
inline constexpr std::string_view kTraceFile = "trace.csv";
inline constexpr std::string_view kTrainSummaryFile = "train_summary.txt";
inline constexpr std::string_view kMetricsFile = "metrics.csv";
inline constexpr std::string_view kDoneMarker = "done";
inline constexpr std::string_view kLedgerFile = "privacy_ledger.tsv";

inline std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void EchoConfig(const ExperimentConfig& cfg, const fs::path& out_dir) {
  WriteFileBytes(out_dir / kResolvedConfigFile, SerializeConfig(cfg));
}

// Manifest: one "sha256  size  name" line per file, in the given order.
inline std::string BuildManifest(const fs::path& dir, const std::vector<std::string>& names) {
  std::string out;
  for (const auto& name : names) {
    const std::string bytes = ReadFileBytes(dir / name);
    out += Sha256Hex(bytes) + "  " + std::to_string(bytes.size()) + "  " + name + "\n";
  }
  return out;
}

// True when every file listed in dir/manifest.txt exists with its hash.
inline bool VerifyManifest(const fs::path& dir) {
  if (!fs::exists(dir / kManifestFile)) return false;
  std::istringstream in(ReadFileBytes(dir / kManifestFile));
  std::string hash, size, name;
  bool any = false;
  while (in >> hash >> size >> name) {
    any = true;
    if (!fs::exists(dir / name) || Sha256Hex(ReadFileBytes(dir / name)) != hash) return false;
  }
  return any;
}

// ---------------------------------------------------------------- gen

struct GenResult {
  std::size_t total_records = 0;
  std::size_t aae_records = 0;
  std::size_t attacker_records = 0;
  std::size_t enroll_records = 0;
  std::size_t test_records = 0;
  std::size_t trials = 0;
};

inline GenResult RunGen(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.Validate();
  data::SynthConfig synth = cfg.synth;
  synth.seed = cfg.seed;
  const data::EmbeddingFile all = data::GenerateSynthetic(synth);
  const data::Splits s = data::MakeSplits(all, cfg.split, cfg.SplitSeed());

  EnsureDir(out);
  data::WriteEmbeddingFile(out / kAaeTrainFile, s.aae_train);
  data::WriteEmbeddingFile(out / kAttackerTrainFile, s.attacker_train);
  data::WriteEmbeddingFile(out / kEvalEnrollFile, s.eval_enroll);
  data::WriteEmbeddingFile(out / kEvalTestFile, s.eval_test);
  data::WriteTrialFile(out / kTrialsFile, s.trials);
  EchoConfig(cfg, out);
  WriteFileBytes(out / kManifestFile,
                 BuildManifest(out, {std::string(kAaeTrainFile), std::string(kAttackerTrainFile),
                                     std::string(kEvalEnrollFile), std::string(kEvalTestFile),
                                     std::string(kTrialsFile)}));
  spdlog::info("gen: {} records -> {} aae, {} attacker, {} enroll, {} test, {} trials in {}",
               all.size(), s.aae_train.size(), s.attacker_train.size(), s.eval_enroll.size(),
               s.eval_test.size(), s.trials.size(), out.string());
  return {all.size(), s.aae_train.size(), s.attacker_train.size(), s.eval_enroll.size(),
          s.eval_test.size(), s.trials.size()};
}

// ---------------------------------------------------------------- train

inline std::string TraceCsv(const model::TrainTrace& trace) {
  std::string out = "epoch,warmup,steps,loss_disc,loss_adv,loss_rec\n";
  for (const auto& e : trace.epochs) {
    out += std::to_string(e.epoch) + "," + (e.warmup ? "1" : "0") + "," +
           std::to_string(e.steps) + "," + eval::FormatNumber(e.mean.disc) + "," +
           eval::FormatNumber(e.mean.adv) + "," + eval::FormatNumber(e.mean.rec) + "\n";
  }
  return out;
}

struct TrainResult {
  double clip_threshold = 0.0;
  model::TrainTrace trace;
};

inline model::GaaeModel TrainModel(const ExperimentConfig& cfg,
                                   const model::LabeledData& data, double epsilon_tr,
                                   std::uint64_t seed, model::TrainTrace* trace = nullptr) {
  model::GaaeModel m(cfg.Dims(data.x.cols()), seed);
  model::TrainTrace t = model::Train(m, data, cfg.TrainFor(epsilon_tr, seed));
  if (trace != nullptr) *trace = std::move(t);
  return m;
}

inline TrainResult RunTrain(const ExperimentConfig& cfg, const fs::path& data_dir,
                            const fs::path& out) {
  cfg.Validate();
  const data::EmbeddingFile train_file = data::ReadEmbeddingFile(data_dir / kAaeTrainFile);
  EnsureDir(out);
  EchoConfig(cfg, out);
  spdlog::info("train: {} samples, d={}, epsilon_tr={}, {} epochs", train_file.size(),
               train_file.dim, eval::FormatNumber(cfg.epsilon_tr), cfg.train.epochs);
  TrainResult result;
  model::GaaeModel m = TrainModel(cfg, data::ToLabeledData(train_file), cfg.epsilon_tr,
                                  cfg.seed, &result.trace);
  result.clip_threshold = result.trace.clip_threshold;
  model::SaveCheckpoint(out / kCheckpointFile, m);
  WriteFileBytes(out / kTraceFile, TraceCsv(result.trace));
  WriteFileBytes(out / kTrainSummaryFile,
                 "clip_threshold = " + eval::FormatNumber(result.clip_threshold) +
                     "\nepsilon_tr = " + eval::FormatNumber(cfg.epsilon_tr) +
                     "\nseed = " + std::to_string(cfg.seed) +
                     "\nepochs = " + std::to_string(cfg.train.epochs) +
                     "\nsteps = " + std::to_string(result.trace.steps.size()) + "\n");
  spdlog::info("train: C = {}, checkpoint {}", eval::FormatNumber(result.clip_threshold),
               (out / kCheckpointFile).string());
  return result;
}

// ---------------------------------------------------------------- protect

inline std::uint64_t ProtectSeed(std::uint64_t seed) { return DeriveSeed(seed, 0x9A); }

// Writes the protected copy of `input` to `output`. A finite ε_ts is recorded
// once per release (keyed by the output path) in the ledger file.
inline void RunProtect(const ExperimentConfig& cfg, const fs::path& checkpoint,
                       const fs::path& input, double epsilon_ts, const fs::path& output,
                       const fs::path& ledger_path) {
  if (!(epsilon_ts > 0.0)) throw ConfigError("epsilon_ts must be positive or inf");
  model::GaaeModel m = model::LoadCheckpoint(checkpoint);
  const data::EmbeddingFile in = data::ReadEmbeddingFile(input);
  if (in.dim != m.dims().input_dim) {
    throw FormatError(input.string() + ": embedding dimension " + std::to_string(in.dim) +
                          " does not match checkpoint dimension " +
                          std::to_string(m.dims().input_dim),
                      12);
  }
  const dp::NoiseSource noise(ProtectSeed(cfg.seed));
  const nn::Matrix protected_x = model::Protect(m, data::ToMatrix(in), epsilon_ts, noise);
  if (output.has_parent_path()) EnsureDir(output.parent_path());
  data::WriteEmbeddingFile(output, data::WithVectors(in, protected_x));
  if (std::isfinite(epsilon_ts)) {
    dp::BudgetLedger ledger = dp::BudgetLedger::Load(ledger_path);
    ledger.Record(output.string(), epsilon_ts);
    ledger.Save(ledger_path);
    spdlog::info("protect: ledger {} total epsilon {}", ledger_path.string(),
                 eval::FormatNumber(ledger.total()));
  }
  spdlog::info("protect: {} records at epsilon_ts={} -> {}", in.size(),
               eval::FormatNumber(epsilon_ts), output.string());
}

// ---------------------------------------------------------------- eval

struct DataDir {
  model::LabeledData aae;
  model::LabeledData attacker;
  eval::EvalData eval;
};

inline DataDir LoadDataDir(const fs::path& dir, bool with_aae = true) {
  DataDir d;
  if (with_aae) d.aae = data::ToLabeledData(data::ReadEmbeddingFile(dir / kAaeTrainFile));
  d.attacker = data::ToLabeledData(data::ReadEmbeddingFile(dir / kAttackerTrainFile));
  d.eval.enroll = data::ReadEmbeddingFile(dir / kEvalEnrollFile);
  d.eval.test = data::ReadEmbeddingFile(dir / kEvalTestFile);
  d.eval.trials = data::ReadTrialFile(dir / kTrialsFile);
  return d;
}

inline eval::AttackerClassifier TrainAttacker(const ExperimentConfig& cfg,
                                              const model::LabeledData& data,
                                              std::uint64_t seed) {
  eval::AttackerClassifier a(data.x.cols(), cfg.AttackerFor(seed));
  a.Train(data);
  return a;
}

// One row per ε_ts, in order, all sharing one clean baseline.
inline std::vector<eval::MetricsReport> EvaluateGrid(model::GaaeModel& m,
                                                     const eval::AttackerClassifier& attacker,
                                                     const eval::EvalData& d,
                                                     const std::vector<double>& epsilon_ts,
                                                     std::uint64_t seed) {
  const eval::Baseline clean = eval::CleanBaseline(attacker, d);
  std::vector<eval::MetricsReport> rows;
  for (double e : epsilon_ts) rows.push_back(eval::EvaluateCell(m, attacker, d, e, seed, clean));
  return rows;
}

inline std::vector<eval::MetricsReport> RunEval(const ExperimentConfig& cfg,
                                                const fs::path& checkpoint,
                                                const fs::path& data_dir, const fs::path& out) {
  cfg.Validate();
  model::GaaeModel m = model::LoadCheckpoint(checkpoint);
  const DataDir d = LoadDataDir(data_dir, /*with_aae=*/false);
  if (d.eval.enroll.dim != m.dims().input_dim || d.attacker.x.cols() != m.dims().input_dim) {
    throw FormatError("evaluation data dimension does not match checkpoint", 12);
  }
  const eval::AttackerClassifier attacker = TrainAttacker(cfg, d.attacker, cfg.seed);
  auto rows = EvaluateGrid(m, attacker, d.eval, cfg.eval_epsilon_ts, cfg.seed);
  EnsureDir(out);
  EchoConfig(cfg, out);
  WriteFileBytes(out / kMetricsFile, eval::ToCsv(rows));
  for (const auto& r : rows) spdlog::info("eval: {}", eval::ToCsvRow(r));
  return rows;
}

// ---------------------------------------------------------------- sweep

inline constexpr std::string_view kSweepCsvFile = "sweep.csv";
inline constexpr std::string_view kSweepSummaryFile = "sweep_summary.csv";
inline constexpr std::string_view kSweepManifestFile = "sweep_manifest.txt";
inline constexpr std::string_view kSweepFailuresFile = "failures.txt";

struct SweepFailure {
  double epsilon_tr = 0.0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::vector<eval::MetricsReport> rows;
  std::vector<eval::SummaryRow> summary;
  std::size_t computed_cells = 0;
  std::size_t reused_cells = 0;
  std::vector<SweepFailure> failures;

  bool complete() const { return failures.empty(); }
};

inline std::string CellName(double epsilon_tr, std::uint64_t seed) {
  return "tr_" + eval::FormatNumber(epsilon_tr) + "_seed_" + std::to_string(seed);
}

// Everything a cell's result depends on: all non-sweep settings, the data,
// the cell coordinates and the ε_ts grid.
inline std::string CellKey(const ExperimentConfig& cfg, const std::string& data_hash,
                           double epsilon_tr, std::uint64_t seed) {
  ExperimentConfig c = cfg;
  c.sweep_epsilon_tr = {epsilon_tr};
  c.sweep_seeds = {seed};
  c.seed = 0;
  return Sha256Hex(SerializeConfig(c) + "data " + data_hash + "\n");
}

// Trains one model per (ε_tr, seed) and evaluates it on the ε_ts grid.
// Cells whose done marker matches their key are read back instead of
// recomputed. Failed cells are listed; the others are still aggregated.
inline SweepResult RunSweep(const ExperimentConfig& cfg, std::optional<fs::path> data_dir,
                            const fs::path& out) {
  cfg.Validate();
  EnsureDir(out);
  EchoConfig(cfg, out);
  if (!data_dir) {
    data_dir = out / "data";
    if (!VerifyManifest(*data_dir)) RunGen(cfg, *data_dir);
  }
  const std::string data_hash = Sha256Hex(ReadFileBytes(*data_dir / kManifestFile));
  std::optional<DataDir> data;
  std::map<std::uint64_t, eval::AttackerClassifier> attackers;

  SweepResult result;
  std::string manifest;
  for (double eps_tr : cfg.sweep_epsilon_tr) {
    for (std::uint64_t seed : cfg.sweep_seeds) {
      const std::string name = CellName(eps_tr, seed);
      const fs::path cell = out / "cells" / name;
      const std::string key = CellKey(cfg, data_hash, eps_tr, seed);
      std::vector<eval::MetricsReport> rows;
      std::string status = "computed";
      try {
        const bool reusable = fs::exists(cell / kDoneMarker) &&
                              ReadFileBytes(cell / kDoneMarker) == key + "\n" &&
                              fs::exists(cell / kMetricsFile);
        if (reusable) {
          rows = eval::ParseMetricsCsv(ReadFileBytes(cell / kMetricsFile));
          status = "reused";
          ++result.reused_cells;
        } else {
          if (!data) data = LoadDataDir(*data_dir);
          auto it = attackers.find(seed);
          if (it == attackers.end()) {
            it = attackers.emplace(seed, TrainAttacker(cfg, data->attacker, seed)).first;
          }
          spdlog::info("sweep: training cell {}", name);
          fs::remove(cell / kDoneMarker);
          EnsureDir(cell);
          model::TrainTrace trace;
          model::GaaeModel m = TrainModel(cfg, data->aae, eps_tr, seed, &trace);
          model::SaveCheckpoint(cell / kCheckpointFile, m);
          WriteFileBytes(cell / kTraceFile, TraceCsv(trace));
          rows = EvaluateGrid(m, it->second, data->eval, cfg.sweep_epsilon_ts, seed);
          WriteFileBytes(cell / kMetricsFile, eval::ToCsv(rows));
          WriteFileBytes(cell / kDoneMarker, key + "\n");
          ++result.computed_cells;
        }
      } catch (const std::exception& e) {
        spdlog::error("sweep: cell {} failed: {}", name, e.what());
        result.failures.push_back({eps_tr, seed, e.what()});
        manifest += "failed  " + name + "\n";
        continue;
      }
      manifest += status + "  " + name + "  " +
                  Sha256Hex(ReadFileBytes(cell / kMetricsFile)) + "\n";
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
  }

  result.summary = eval::Summarize(result.rows);
  WriteFileBytes(out / kSweepCsvFile, eval::ToCsv(result.rows));
  WriteFileBytes(out / kSweepSummaryFile, eval::ToSummaryCsv(result.summary));
  WriteFileBytes(out / kSweepManifestFile, manifest);
  if (!result.failures.empty()) {
    std::string text;
    for (const auto& f : result.failures) {
      text += CellName(f.epsilon_tr, f.seed) + "\t" + f.message + "\n";
    }
    WriteFileBytes(out / kSweepFailuresFile, text);
  } else {
    fs::remove(out / kSweepFailuresFile);
  }
  spdlog::info("sweep: {} cells computed, {} reused, {} failed", result.computed_cells,
               result.reused_cells, result.failures.size());
  return result;
}

}  // namespace gaae::cli
