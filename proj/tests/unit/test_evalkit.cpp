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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "gaae/data/splits.hpp"
#include "gaae/data/synthetic.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/asv.hpp"
#include "gaae/eval/attacker.hpp"
#include "gaae/eval/metrics.hpp"
#include "gaae/eval/report.hpp"
#include "gaae/model/training.hpp"
#include "gaae/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace gaae::eval {
namespace {

ScoreSet Make(const std::vector<double>& scores, const std::vector<int>& labels) {
  ScoreSet s;
  for (std::size_t i = 0; i < scores.size(); ++i) s.Add(scores[i], labels[i] != 0);
  return s;
}

// Random score set with both classes; `levels` > 0 quantizes scores to force ties.
ScoreSet RandomScores(Rng& rng, std::size_t n, int levels) {
  ScoreSet s;
  for (std::size_t i = 0; i < n; ++i) {
    double v = UniformOpen01(rng);
    if (levels > 0) v = std::floor(v * levels) / levels;
    s.Add(v, i < 2 ? i == 0 : (rng() & 1) != 0);
  }
  return s;
}

TEST(RocAuc, Examples) {
  EXPECT_EQ(RocAuc(Make({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})), 1.0);
  EXPECT_EQ(RocAuc(Make({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1})), 0.5);
  EXPECT_EQ(RocAuc(Make({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1})), 0.75);
}

TEST(RocAuc, MatchesPairwiseOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    const int levels = trial % 3 == 0 ? 0 : static_cast<int>(2 + rng() % 20);
    const ScoreSet s = RandomScores(rng, n, levels);
    ASSERT_NEAR(RocAuc(s), testing::BruteForceAuc(s), 1e-12) << trial;
  }
}

TEST(RocAuc, NegatedScoresComplement) {
  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    ScoreSet s = RandomScores(rng, 50, 0);
    ScoreSet neg = s;
    for (double& v : neg.scores) v = -v;
    EXPECT_EQ(RocAuc(s) + RocAuc(neg), 1.0);
  }
}

TEST(RocAuc, SingleClassIsMetricError) {
  EXPECT_THROW(RocAuc(Make({0.1, 0.2}, {1, 1})), MetricError);
  EXPECT_THROW(RocAuc(ScoreSet{}), MetricError);
}

TEST(Eer, Examples) {
  EXPECT_EQ(Eer(Make({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(Eer(Make({0.9, 0.6, 0.7, 0.2}, {1, 1, 0, 0})), 0.25);
  EXPECT_EQ(Eer(Make({0.1, 0.2, 0.9, 0.8}, {1, 1, 0, 0})), 0.5);
}

TEST(Eer, MatchesExhaustiveOracle) {
  Rng rng(19);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + rng() % 150;
    const int levels = trial % 2 == 0 ? 0 : static_cast<int>(2 + rng() % 10);
    const ScoreSet s = RandomScores(rng, n, levels);
    ASSERT_NEAR(Eer(s), testing::BruteForceRocchEer(s), 1e-12) << trial;
  }
}

TEST(Eer, InvariantUnderIncreasingTransforms) {
  Rng rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoreSet s = RandomScores(rng, 80, trial % 2 == 0 ? 0 : 7);
    ScoreSet t = s;
    for (double& v : t.scores) v = std::exp(3.0 * v) - 2.0;
    EXPECT_EQ(Eer(s), Eer(t));
    EXPECT_EQ(RocAuc(s), RocAuc(t));
  }
}

TEST(Eer, ShuffledLabelsNearHalf) {
  Rng rng(21);
  const ScoreSet s = RandomScores(rng, 20000, 0);
  EXPECT_NEAR(Eer(s), 0.5, 0.05);
  EXPECT_NEAR(RocAuc(s), 0.5, 0.05);
}

TEST(Eer, InRangeAndSingleClassIsMetricError) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const double e = Eer(RandomScores(rng, 30, 4));
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 0.5);
  }
  EXPECT_THROW(Eer(Make({0.3, 0.4}, {0, 0})), MetricError);
}

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(SpearmanCorrelation({1, 2, 3, 4}, {10, 20, 25, 100}), 1.0);
  EXPECT_DOUBLE_EQ(SpearmanCorrelation({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(SpearmanCorrelation({1, 2, 3}, {5, 5, 5}), 0.0);
  // Ranks with ties: (1.5, 1.5, 3) against (1, 2, 3).
  EXPECT_NEAR(SpearmanCorrelation({1, 1, 2}, {1, 2, 3}), std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_THROW(SpearmanCorrelation({1, 2}, {1}), MetricError);
  EXPECT_THROW(SpearmanCorrelation({1}, {1}), MetricError);
}

data::EmbeddingFile FileOf(const std::vector<std::tuple<std::uint32_t, std::uint32_t,
                                                        std::vector<double>>>& rows) {
  data::EmbeddingFile f;
  f.dim = static_cast<std::uint32_t>(std::get<2>(rows.front()).size());
  for (const auto& [spk, seg, v] : rows) {
    f.records.push_back({.speaker_id = spk, .segment_id = seg, .gender = 0, .vector = v});
  }
  return f;
}

TEST(SpeakerModels, MeanThenNormalize) {
  auto models = BuildSpeakerModels(FileOf({{1, 0, {3.0, 4.0, 0.0}}}));
  EXPECT_DOUBLE_EQ(models.at(1)[0], 0.6);
  EXPECT_DOUBLE_EQ(models.at(1)[1], 0.8);
  models = BuildSpeakerModels(FileOf({{2, 0, {1.0, 0.0, 0.0}}, {2, 1, {0.0, 1.0, 0.0}}}));
  EXPECT_NEAR(models.at(2)[0], 0.70710678118654752, 1e-15);
  EXPECT_NEAR(models.at(2)[1], 0.70710678118654752, 1e-15);
  EXPECT_EQ(models.at(2)[2], 0.0);
  EXPECT_THROW(BuildSpeakerModels(FileOf({{3, 0, {1.0, 2.0}}, {3, 1, {-1.0, -2.0}}})),
               DataError);
}

TEST(ScoreTrials, CosineScoresInTrialOrder) {
  const auto enroll = FileOf({{1, 0, {1.0, 0.0}}, {2, 0, {0.0, 2.0}}});
  const auto test = FileOf({{1, 5, {3.0, 0.0}}, {2, 6, {0.0, 1.0}}});
  const data::TrialList trials{{2, 1, 5, data::TrialLabel::kNontarget},
                               {1, 1, 5, data::TrialLabel::kTarget},
                               {2, 2, 6, data::TrialLabel::kTarget}};
  const ScoreSet s = ScoreTrials(BuildSpeakerModels(enroll), test, trials);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.scores[0], 0.0);
  EXPECT_DOUBLE_EQ(s.scores[1], 1.0);
  EXPECT_DOUBLE_EQ(s.scores[2], 1.0);
  EXPECT_EQ(s.labels, (std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(ScoreTrials, MissingIdsAreDataErrors) {
  const auto enroll = FileOf({{1, 0, {1.0, 0.0}}});
  const auto test = FileOf({{1, 5, {3.0, 0.0}}});
  const auto models = BuildSpeakerModels(enroll);
  EXPECT_THROW(ScoreTrials(models, test, {{9, 1, 5, data::TrialLabel::kTarget}}), DataError);
  EXPECT_THROW(ScoreTrials(models, test, {{1, 1, 6, data::TrialLabel::kTarget}}), DataError);
}

data::Splits SmallSplits(std::uint64_t seed, std::uint32_t segments = 6) {
  data::SynthConfig cfg;
  cfg.n_speakers = 40;
  cfg.segments_per_speaker = segments;
  cfg.dim = 24;
  cfg.seed = seed;
  data::SplitSpec spec;
  spec.enroll_segments = segments == 2 ? 1 : 5;
  return data::MakeSplits(data::GenerateSynthetic(cfg), spec, seed);
}

TEST(ScoreTrials, ScaleInvariantInTestEmbeddings) {
  const data::Splits s = SmallSplits(1);
  data::EmbeddingFile scaled = s.eval_test;
  Rng rng(2);
  for (auto& r : scaled.records) {
    const double k = 0.1 + 10.0 * UniformOpen01(rng);
    for (double& v : r.vector) v *= k;
  }
  const auto models = BuildSpeakerModels(s.eval_enroll);
  const ScoreSet a = ScoreTrials(models, s.eval_test, s.trials);
  const ScoreSet b = ScoreTrials(models, scaled, s.trials);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.scores[i], b.scores[i], 1e-14);
}

TEST(ScoreTrials, SingleEnrollmentReproducesRawCosine) {
  const data::Splits s = SmallSplits(3, 2);
  const auto models = BuildSpeakerModels(s.eval_enroll);
  const ScoreSet scores = ScoreTrials(models, s.eval_test, s.trials);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    const auto& t = s.trials[i];
    const std::vector<double>* enroll = nullptr;
    const std::vector<double>* test = nullptr;
    for (const auto& r : s.eval_enroll.records) {
      if (r.speaker_id == t.enroll_speaker) enroll = &r.vector;
    }
    for (const auto& r : s.eval_test.records) {
      if (r.speaker_id == t.test_speaker && r.segment_id == t.test_segment) test = &r.vector;
    }
    ASSERT_NE(enroll, nullptr);
    ASSERT_NE(test, nullptr);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < enroll->size(); ++k) {
      dot += (*enroll)[k] * (*test)[k];
      na += (*enroll)[k] * (*enroll)[k];
      nb += (*test)[k] * (*test)[k];
    }
    EXPECT_NEAR(scores.scores[i], dot / std::sqrt(na * nb), 1e-15);
  }
}

model::LabeledData Labeled(double gap, std::uint64_t seed) {
  data::SynthConfig cfg;
  cfg.n_speakers = 100;
  cfg.segments_per_speaker = 10;
  cfg.gender_gap = gap;
  cfg.seed = seed;
  return data::ToLabeledData(data::GenerateSynthetic(cfg));
}

TEST(Attacker, SeparableDataGivesHighHeldOutAuc) {
  AttackerClassifier clf(192, {.epochs = 5, .seed = 1});
  clf.Train(Labeled(0.6, 1));
  EXPECT_TRUE(clf.trained());
  EXPECT_GT(clf.Auc(Labeled(0.6, 2)), 0.95);
}

TEST(Attacker, ShuffledLabelsGiveChanceHeldOutAuc) {
  model::LabeledData train = Labeled(0.6, 1);
  model::LabeledData test = Labeled(0.6, 2);
  Rng rng(3);
  for (auto* d : {&train, &test}) {
    std::shuffle(d->y.begin(), d->y.end(), rng);
  }
  AttackerClassifier clf(192, {.epochs = 5, .seed = 1});
  clf.Train(train);
  const double auc = clf.Auc(test);
  EXPECT_GE(auc, 0.4);
  EXPECT_LE(auc, 0.6);
}

TEST(Attacker, DeterministicUnderSeed) {
  const model::LabeledData train = Labeled(0.6, 1);
  const model::LabeledData test = Labeled(0.6, 2);
  AttackerClassifier a(192, {.epochs = 2, .seed = 5});
  AttackerClassifier b(192, {.epochs = 2, .seed = 5});
  a.Train(train);
  b.Train(train);
  EXPECT_EQ(a.Logits(test.x), b.Logits(test.x));
}

TEST(Attacker, SingleClassIsDataError) {
  model::LabeledData d = Labeled(0.6, 1);
  std::fill(d.y.begin(), d.y.end(), 0.0);
  AttackerClassifier clf(192, {});
  EXPECT_THROW(clf.Train(d), DataError);
}

TEST(Report, NumbersRoundTripIncludingInfinity) {
  for (double v : {0.1, 1.0 / 3.0, 15.0, 1e-300, dp::kInfinity}) {
    EXPECT_EQ(ParseNumber(FormatNumber(v)), v);
  }
  EXPECT_EQ(FormatNumber(dp::kInfinity), "inf");
  EXPECT_THROW(ParseNumber("12x"), ConfigError);
}

TEST(Report, MetricsCsvRoundTrip) {
  const std::vector<MetricsReport> rows{
      {.epsilon_tr = 15, .epsilon_ts = dp::kInfinity, .clip = 18.25, .auc_clean = 0.99,
       .auc_protected = 0.55, .eer_clean = 0.011, .eer_protected = 0.081, .n_trials = 4000,
       .seed = 2},
      {.epsilon_tr = dp::kInfinity, .epsilon_ts = 35, .clip = 1.0 / 3.0, .auc_clean = 1,
       .auc_protected = 0.5, .eer_clean = 0, .eer_protected = 0.5, .n_trials = 10,
       .seed = 0}};
  const std::string csv = ToCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsCsvHeader);
  const auto back = ParseMetricsCsv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(ToCsv(back), csv);
  EXPECT_EQ(back[1].clip, 1.0 / 3.0);
  EXPECT_THROW(ParseMetricsCsv("a,b\n"), DataError);
  EXPECT_THROW(ParseMetricsCsv(""), DataError);
}

TEST(Report, SummaryGroupsCellsAcrossSeeds) {
  std::vector<MetricsReport> rows;
  for (std::uint64_t seed : {0, 1, 2}) {
    for (double ts : {15.0, dp::kInfinity}) {
      rows.push_back({.epsilon_tr = 15, .epsilon_ts = ts, .auc_protected = 0.5 + 0.1 * seed,
                      .eer_protected = ts, .seed = seed});
    }
  }
  const auto summary = Summarize(rows);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].epsilon_ts, 15.0);
  EXPECT_EQ(summary[1].epsilon_ts, dp::kInfinity);
  EXPECT_EQ(summary[0].n_seeds, 3u);
  EXPECT_NEAR(summary[0].auc_protected.mean, 0.6, 1e-15);
  EXPECT_NEAR(summary[0].auc_protected.stddev, 0.1, 1e-15);
  EXPECT_EQ(summary[0].auc_clean.stddev, 0.0);
  const std::string csv = ToSummaryCsv(summary);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSummaryCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

// Small trained pipeline shared by the cell-level tests.
struct Pipeline {
  model::GaaeModel model{model::ModelDims{}, 3};
  std::optional<AttackerClassifier> attacker;
  EvalData eval;
};

Pipeline& SharedPipeline() {
  static Pipeline* p = [] {
    auto* out = new Pipeline;
    data::SynthConfig cfg;
    cfg.n_speakers = 200;
    cfg.segments_per_speaker = 10;
    const data::Splits s = data::MakeSplits(data::GenerateSynthetic(cfg), {}, 0);
    model::TrainConfig tc;
    tc.epochs = 3;
    tc.epsilon_tr = 50.0;
    model::Train(out->model, data::ToLabeledData(s.aae_train), tc);
    out->attacker.emplace(192, AttackerConfig{.epochs = 20, .seed = 4});
    out->attacker->Train(data::ToLabeledData(s.attacker_train));
    out->eval = {s.eval_enroll, s.eval_test, s.trials};
    return out;
  }();
  return *p;
}

TEST(EvaluateCell, ReportsCleanAndProtectedMetrics) {
  Pipeline& p = SharedPipeline();
  const MetricsReport r = EvaluateCell(p.model, *p.attacker, p.eval, 35.0, 1);
  EXPECT_EQ(r.epsilon_tr, 50.0);
  EXPECT_EQ(r.epsilon_ts, 35.0);
  EXPECT_EQ(r.clip, p.model.train_dp()->clip());
  EXPECT_EQ(r.n_trials, p.eval.trials.size());
  EXPECT_EQ(r.seed, 1u);
  EXPECT_GT(r.auc_clean, 0.95);
  EXPECT_LT(r.eer_clean, 0.05);
  const Baseline b = CleanBaseline(*p.attacker, p.eval);
  const MetricsReport again = EvaluateCell(p.model, *p.attacker, p.eval, 35.0, 1, b);
  EXPECT_EQ(ToCsvRow(again), ToCsvRow(r));
}

// The flipped-label objective can leave a single model with gender inverted
// (protected AUC well below 0.5), and release noise then pulls AUC up toward
// 0.5. The direction therefore holds in expectation over trained models, and
// per model for the leakage |AUC - 0.5|.
TEST(EvaluateCell, SmallerReleaseEpsilonLowersAttackerAuc) {
  Pipeline& p = SharedPipeline();
  data::SynthConfig cfg;
  cfg.n_speakers = 200;
  cfg.segments_per_speaker = 10;
  const data::Splits s = data::MakeSplits(data::GenerateSynthetic(cfg), {}, 0);
  const Baseline b = CleanBaseline(*p.attacker, p.eval);
  const std::vector<double> grid{5.0, 15.0, 50.0, dp::kInfinity};
  const std::vector<double> rank_grid{0, 1, 2, 3};
  const std::size_t n_models = 6;
  std::vector<double> mean_auc(grid.size(), 0.0);
  for (std::uint64_t m = 0; m < n_models; ++m) {
    model::GaaeModel gaae(model::ModelDims{}, 3 + m);
    model::TrainConfig tc;
    tc.epochs = 3;
    tc.epsilon_tr = 50.0;
    tc.seed = 3 + m;
    model::Train(gaae, data::ToLabeledData(s.aae_train), tc);
    std::vector<double> leakage;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        total += EvaluateCell(gaae, *p.attacker, p.eval, grid[i], seed, b).auc_protected;
      }
      mean_auc[i] += total / 5.0 / n_models;
      leakage.push_back(std::abs(total / 5.0 - 0.5));
    }
    EXPECT_GT(SpearmanCorrelation(rank_grid, leakage), 0.0) << "model " << m;
  }
  EXPECT_GT(SpearmanCorrelation(rank_grid, mean_auc), 0.0)
      << mean_auc[0] << " " << mean_auc[1] << " " << mean_auc[2] << " " << mean_auc[3];
}

}  // namespace
}  // namespace gaae::eval
