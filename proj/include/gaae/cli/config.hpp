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

// Experiment configuration: a versioned, sectioned key = value text file.
//
//   # comment
//   version = 1
//   seed = 0
//
//   [data]
//   n_speakers = 200
//   ...
//   [sweep]
//   epsilon_tr = 5, 10, 15, inf
//
// Every key has a default, unknown sections and keys are rejected, and a key
// may appear at most once. Lists are comma separated; "inf" spells +∞.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaae/byte_io.hpp"
#include "gaae/data/splits.hpp"
#include "gaae/data/synthetic.hpp"
#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/attacker.hpp"
#include "gaae/eval/report.hpp"
#include "gaae/model/gaae_model.hpp"
#include "gaae/model/training.hpp"

namespace gaae::cli {

inline constexpr std::uint32_t kConfigVersion = 1;

struct ExperimentConfig {
  std::uint32_t version = kConfigVersion;
  std::uint64_t seed = 0;

  data::SynthConfig synth;
  data::SplitSpec split;

  std::size_t latent_dim = 64;
  std::size_t disc_hidden = 32;

  // epsilon_tr and seed inside `train` are ignored; they come from the
  // [dp] section and the top-level seed.
  model::TrainConfig train;

  double epsilon_tr = dp::kInfinity;
  double epsilon_ts = dp::kInfinity;

  eval::AttackerConfig attacker;
  std::vector<double> eval_epsilon_ts{dp::kInfinity};

  std::vector<double> sweep_epsilon_tr{5, 10, 15, 20, 50, 100, 200, dp::kInfinity};
  std::vector<double> sweep_epsilon_ts{15, 20, 35, 40, 100, dp::kInfinity};
  std::vector<std::uint64_t> sweep_seeds{0, 1, 2};

  model::ModelDims Dims(std::size_t input_dim) const {
    return {input_dim, latent_dim, disc_hidden};
  }

  model::TrainConfig TrainFor(double eps_tr, std::uint64_t run_seed) const {
    model::TrainConfig t = train;
    t.epsilon_tr = eps_tr;
    t.seed = run_seed;
    return t;
  }

  // The attacker depends only on the seed, so every ε_tr sharing a seed
  // shares one clean baseline.
  eval::AttackerConfig AttackerFor(std::uint64_t run_seed) const {
    eval::AttackerConfig a = attacker;
    a.seed = DeriveSeed(run_seed, 0xA7);
    return a;
  }

  std::uint64_t SplitSeed() const { return DeriveSeed(seed, 0x5E); }

  void Validate() const;
};

namespace internal {

inline std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(Trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

inline std::uint64_t ParseUnsigned(std::string_view text, std::uint64_t max) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("not a nonnegative integer: '" + std::string(text) + "'");
  }
  if (v > max) throw ConfigError("value out of range: '" + std::string(text) + "'");
  return v;
}

inline std::string JoinNumbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += eval::FormatNumber(v[i]);
  }
  return out;
}

inline std::string JoinIntegers(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  std::string section;  // empty for top-level keys
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <typename T>
Field UnsignedField(std::string section, std::string key, T ExperimentConfig::*member) {
  return {std::move(section), std::move(key),
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [member](ExperimentConfig& c, std::string_view v) {
            c.*member = static_cast<T>(ParseUnsigned(v, std::numeric_limits<T>::max()));
          }};
}

// Nested member access without a zoo of pointer-to-member overloads.
template <typename T, typename Get>
Field NestedUnsigned(std::string section, std::string key, Get get) {
  return {std::move(section), std::move(key),
          [get](const ExperimentConfig& c) {
            return std::to_string(get(const_cast<ExperimentConfig&>(c)));
          },
          [get](ExperimentConfig& c, std::string_view v) {
            get(c) = static_cast<T>(ParseUnsigned(v, std::numeric_limits<T>::max()));
          }};
}

template <typename Get>
Field NestedNumber(std::string section, std::string key, Get get) {
  return {std::move(section), std::move(key),
          [get](const ExperimentConfig& c) {
            return eval::FormatNumber(get(const_cast<ExperimentConfig&>(c)));
          },
          [get](ExperimentConfig& c, std::string_view v) {
            get(c) = eval::ParseNumber(v);
          }};
}

template <typename Get>
Field NumberList(std::string section, std::string key, Get get) {
  return {std::move(section), std::move(key),
          [get](const ExperimentConfig& c) {
            return JoinNumbers(get(const_cast<ExperimentConfig&>(c)));
          },
          [get](ExperimentConfig& c, std::string_view v) {
            std::vector<double> out;
            for (const auto& item : SplitList(v)) out.push_back(eval::ParseNumber(item));
            get(c) = std::move(out);
          }};
}

inline const std::vector<Field>& Fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> fields = {
      UnsignedField("", "version", &C::version),
      UnsignedField("", "seed", &C::seed),

      NestedUnsigned<std::uint32_t>("data", "n_speakers",
                                    [](C& c) -> auto& { return c.synth.n_speakers; }),
      NestedUnsigned<std::uint32_t>("data", "segments_per_speaker",
                                    [](C& c) -> auto& { return c.synth.segments_per_speaker; }),
      NestedUnsigned<std::uint32_t>("data", "dim", [](C& c) -> auto& { return c.synth.dim; }),
      NestedNumber("data", "gender_gap", [](C& c) -> auto& { return c.synth.gender_gap; }),
      NestedNumber("data", "speaker_spread",
                   [](C& c) -> auto& { return c.synth.speaker_spread; }),
      NestedNumber("data", "segment_noise", [](C& c) -> auto& { return c.synth.segment_noise; }),
      NestedNumber("data", "aae_fraction", [](C& c) -> auto& { return c.split.aae_fraction; }),
      NestedNumber("data", "attacker_fraction",
                   [](C& c) -> auto& { return c.split.attacker_fraction; }),
      NestedUnsigned<std::uint32_t>("data", "enroll_segments",
                                    [](C& c) -> auto& { return c.split.enroll_segments; }),
      NestedUnsigned<std::uint32_t>("data", "target_trials",
                                    [](C& c) -> auto& { return c.split.target_trials; }),
      NestedNumber("data", "nontarget_ratio",
                   [](C& c) -> auto& { return c.split.nontarget_ratio; }),

      UnsignedField("model", "latent_dim", &C::latent_dim),
      UnsignedField("model", "disc_hidden", &C::disc_hidden),

      NestedNumber("train", "lr", [](C& c) -> auto& { return c.train.lr; }),
      NestedUnsigned<std::size_t>("train", "batch_size",
                                  [](C& c) -> auto& { return c.train.batch_size; }),
      NestedUnsigned<std::size_t>("train", "epochs", [](C& c) -> auto& { return c.train.epochs; }),
      NestedUnsigned<std::size_t>("train", "warmup_epochs",
                                  [](C& c) -> auto& { return c.train.warmup_epochs; }),
      NestedNumber("train", "adv_weight", [](C& c) -> auto& { return c.train.adv_weight; }),

      NestedNumber("dp", "epsilon_tr", [](C& c) -> auto& { return c.epsilon_tr; }),
      NestedNumber("dp", "epsilon_ts", [](C& c) -> auto& { return c.epsilon_ts; }),

      NestedUnsigned<std::size_t>("eval", "attacker_hidden",
                                  [](C& c) -> auto& { return c.attacker.hidden; }),
      NestedNumber("eval", "attacker_lr", [](C& c) -> auto& { return c.attacker.lr; }),
      NestedUnsigned<std::size_t>("eval", "attacker_batch_size",
                                  [](C& c) -> auto& { return c.attacker.batch_size; }),
      NestedUnsigned<std::size_t>("eval", "attacker_epochs",
                                  [](C& c) -> auto& { return c.attacker.epochs; }),
      NumberList("eval", "epsilon_ts", [](C& c) -> auto& { return c.eval_epsilon_ts; }),

      NumberList("sweep", "epsilon_tr", [](C& c) -> auto& { return c.sweep_epsilon_tr; }),
      NumberList("sweep", "epsilon_ts", [](C& c) -> auto& { return c.sweep_epsilon_ts; }),
      {"sweep", "seeds",
       [](const C& c) { return JoinIntegers(c.sweep_seeds); },
       [](C& c, std::string_view v) {
         std::vector<std::uint64_t> out;
         for (const auto& item : SplitList(v)) {
           out.push_back(ParseUnsigned(item, std::numeric_limits<std::uint64_t>::max()));
         }
         c.sweep_seeds = std::move(out);
       }},
  };
  return fields;
}

inline const Field& FindField(std::string_view section, std::string_view key) {
  for (const auto& f : Fields()) {
    if (f.section == section && f.key == key) return f;
  }
  const std::string where = section.empty() ? std::string(key)
                                            : std::string(section) + "." + std::string(key);
  throw ConfigError("unknown key '" + where + "'");
}

inline bool KnownSection(std::string_view section) {
  for (const auto& f : Fields()) {
    if (f.section == section) return true;
  }
  return false;
}

inline void CheckEpsilons(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + " must not be empty");
  for (double e : v) {
    if (!(e > 0.0)) throw ConfigError(std::string(what) + " values must be positive or inf");
  }
}

}  // namespace internal

inline void ExperimentConfig::Validate() const {
  if (version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(version));
  }
  synth.Validate();
  split.Validate();
  if (latent_dim == 0 || disc_hidden == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  TrainFor(epsilon_tr, seed).Validate();
  if (!(epsilon_ts > 0.0)) throw ConfigError("dp.epsilon_ts must be positive or inf");
  if (attacker.hidden == 0 || attacker.batch_size == 0 || attacker.epochs == 0 ||
      !(attacker.lr > 0.0) || !std::isfinite(attacker.lr)) {
    throw ConfigError("attacker settings must be positive");
  }
  internal::CheckEpsilons(eval_epsilon_ts, "eval.epsilon_ts");
  internal::CheckEpsilons(sweep_epsilon_tr, "sweep.epsilon_tr");
  internal::CheckEpsilons(sweep_epsilon_ts, "sweep.epsilon_ts");
  if (sweep_seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
  if (std::set<std::uint64_t>(sweep_seeds.begin(), sweep_seeds.end()).size() !=
      sweep_seeds.size()) {
    throw ConfigError("sweep.seeds contains duplicates");
  }
}

// Applies one "section.key=value" (or "key=value" for top-level keys).
inline void ApplyOverride(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must look like section.key=value: '" +
                      std::string(assignment) + "'");
  }
  const std::string path = internal::Trim(assignment.substr(0, eq));
  const std::string value = internal::Trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
  const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
  internal::FindField(section, key).set(cfg, value);
}

inline ExperimentConfig ParseConfig(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = internal::Trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = internal::Trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty() || !internal::KnownSection(section)) {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = internal::Trim(std::string_view(line).substr(0, eq));
    const std::string value = internal::Trim(std::string_view(line).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!seen.insert(full).second) throw ConfigError(where + "duplicate key '" + full + "'");
    try {
      internal::FindField(section, key).set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.message());
    }
  }
  return cfg;
}

inline std::string SerializeConfig(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : internal::Fields()) {
    if (f.section != section) {
      section = f.section;
      out += "\n[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

inline ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  try {
    return ParseConfig(ReadFileBytes(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.message());
  }
}

}  // namespace gaae::cli
