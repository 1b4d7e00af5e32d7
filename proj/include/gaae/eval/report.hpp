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

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaae/data/embedding_file.hpp"
#include "gaae/data/trials.hpp"
#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/asv.hpp"
#include "gaae/eval/attacker.hpp"
#include "gaae/model/training.hpp"
#include "gaae/random.hpp"

namespace gaae::eval {

// Shortest round-trip decimal, "inf" for +∞.
inline std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double ParseNumber(std::string_view text) {
  if (text == "inf" || text == "+inf" || text == "infinity") return dp::kInfinity;
  if (text == "-inf") return -dp::kInfinity;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

// One evaluated (ε_tr, ε_ts) cell.
struct MetricsReport {
  double epsilon_tr = dp::kInfinity;
  double epsilon_ts = dp::kInfinity;
  double clip = 0.0;
  double auc_clean = 0.0;
  double auc_protected = 0.0;
  double eer_clean = 0.0;
  double eer_protected = 0.0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kMetricsCsvHeader =
    "epsilon_tr,epsilon_ts,C,auc_clean,auc_protected,eer_clean,eer_protected,"
    "n_trials,seed";

inline std::string ToCsvRow(const MetricsReport& r) {
  return FormatNumber(r.epsilon_tr) + "," + FormatNumber(r.epsilon_ts) + "," +
         FormatNumber(r.clip) + "," + FormatNumber(r.auc_clean) + "," +
         FormatNumber(r.auc_protected) + "," + FormatNumber(r.eer_clean) + "," +
         FormatNumber(r.eer_protected) + "," + std::to_string(r.n_trials) + "," +
         std::to_string(r.seed);
}

inline std::string ToCsv(const std::vector<MetricsReport>& rows) {
  std::string out(kMetricsCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += ToCsvRow(r) + "\n";
  return out;
}

inline std::vector<MetricsReport> ParseMetricsCsv(std::string_view text) {
  std::vector<MetricsReport> rows;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != kMetricsCsvHeader) throw DataError("unexpected metrics CSV header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) throw DataError("metrics CSV row needs 9 fields");
    MetricsReport r;
    r.epsilon_tr = ParseNumber(f[0]);
    r.epsilon_ts = ParseNumber(f[1]);
    r.clip = ParseNumber(f[2]);
    r.auc_clean = ParseNumber(f[3]);
    r.auc_protected = ParseNumber(f[4]);
    r.eer_clean = ParseNumber(f[5]);
    r.eer_protected = ParseNumber(f[6]);
    r.n_trials = static_cast<std::size_t>(ParseNumber(f[7]));
    r.seed = static_cast<std::uint64_t>(ParseNumber(f[8]));
    rows.push_back(r);
  }
  if (header) throw DataError("metrics CSV is missing its header");
  return rows;
}

struct EvalData {
  data::EmbeddingFile enroll;
  data::EmbeddingFile test;
  data::TrialList trials;
};

// Attacker AUC is measured on every evaluation embedding (enrollment and
// test); ASV EER uses both sides protected.
struct Baseline {
  double auc = 0.0;
  double eer = 0.0;
};

inline model::LabeledData EvalLabeled(const EvalData& d) {
  model::LabeledData out;
  const std::size_t n = d.enroll.size() + d.test.size();
  out.x = nn::Matrix(n, d.enroll.dim);
  std::size_t row = 0;
  for (const auto* f : {&d.enroll, &d.test}) {
    for (const auto& r : f->records) {
      std::copy(r.vector.begin(), r.vector.end(), out.x.row(row++).begin());
      out.y.push_back(r.gender);
    }
  }
  return out;
}

inline Baseline CleanBaseline(const AttackerClassifier& attacker,
                              const EvalData& d) {
  return {attacker.Auc(EvalLabeled(d)), AsvEer(d.enroll, d.test, d.trials)};
}

inline MetricsReport EvaluateCell(model::GaaeModel& model,
                                  const AttackerClassifier& attacker,
                                  const EvalData& d, double epsilon_ts,
                                  std::uint64_t seed,
                                  const std::optional<Baseline>& baseline = {}) {
  const Baseline clean = baseline ? *baseline : CleanBaseline(attacker, d);
  const dp::NoiseSource enroll_noise(DeriveSeed(seed, 0xE0));
  const dp::NoiseSource test_noise(DeriveSeed(seed, 0xE1));
  const EvalData prot{
      data::WithVectors(d.enroll, model::Protect(model, data::ToMatrix(d.enroll),
                                                 epsilon_ts, enroll_noise)),
      data::WithVectors(d.test, model::Protect(model, data::ToMatrix(d.test),
                                               epsilon_ts, test_noise)),
      d.trials};
  MetricsReport r;
  r.epsilon_tr = model.epsilon_tr();
  r.epsilon_ts = epsilon_ts;
  r.clip = model.train_dp() ? model.train_dp()->clip() : 0.0;
  r.auc_clean = clean.auc;
  r.eer_clean = clean.eer;
  r.auc_protected = attacker.Auc(EvalLabeled(prot));
  r.eer_protected = AsvEer(prot.enroll, prot.test, prot.trials);
  r.n_trials = d.trials.size();
  r.seed = seed;
  return r;
}

// Mean and sample standard deviation across seeds of one (ε_tr, ε_ts) cell.
struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct SummaryRow {
  double epsilon_tr = dp::kInfinity;
  double epsilon_ts = dp::kInfinity;
  std::size_t n_seeds = 0;
  SummaryStat auc_clean;
  SummaryStat auc_protected;
  SummaryStat eer_clean;
  SummaryStat eer_protected;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "epsilon_tr,epsilon_ts,n_seeds,auc_clean_mean,auc_clean_std,"
    "auc_protected_mean,auc_protected_std,eer_clean_mean,eer_clean_std,"
    "eer_protected_mean,eer_protected_std";

inline SummaryStat MeanStd(const std::vector<double>& v) {
  SummaryStat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Groups rows by (ε_tr, ε_ts) in order of first appearance.
inline std::vector<SummaryRow> Summarize(const std::vector<MetricsReport>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<const MetricsReport*>> groups;
  for (const auto& r : rows) {
    std::size_t g = 0;
    while (g < out.size() && !(out[g].epsilon_tr == r.epsilon_tr &&
                               out[g].epsilon_ts == r.epsilon_ts)) {
      ++g;
    }
    if (g == out.size()) {
      SummaryRow row;
      row.epsilon_tr = r.epsilon_tr;
      row.epsilon_ts = r.epsilon_ts;
      out.push_back(row);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    auto collect = [&](double MetricsReport::*field) {
      std::vector<double> v;
      for (const auto* r : groups[g]) v.push_back(r->*field);
      return MeanStd(v);
    };
    out[g].n_seeds = groups[g].size();
    out[g].auc_clean = collect(&MetricsReport::auc_clean);
    out[g].auc_protected = collect(&MetricsReport::auc_protected);
    out[g].eer_clean = collect(&MetricsReport::eer_clean);
    out[g].eer_protected = collect(&MetricsReport::eer_protected);
  }
  return out;
}

inline std::string ToSummaryCsv(const std::vector<SummaryRow>& rows) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += FormatNumber(r.epsilon_tr) + "," + FormatNumber(r.epsilon_ts) + "," +
           std::to_string(r.n_seeds);
    for (const SummaryStat* s :
         {&r.auc_clean, &r.auc_protected, &r.eer_clean, &r.eer_protected}) {
      out += "," + FormatNumber(s->mean) + "," + FormatNumber(s->stddev);
    }
    out += '\n';
  }
  return out;
}

}  // namespace gaae::eval
