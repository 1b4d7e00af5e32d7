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

#include <cmath>
#include <cstring>
#include <set>
#include <string>
#include <vector>

#include "gaae/data/embedding_file.hpp"
#include "gaae/data/splits.hpp"
#include "gaae/data/synthetic.hpp"
#include "gaae/data/trials.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/asv.hpp"
#include "gaae/eval/attacker.hpp"
#include "gaae/random.hpp"
#include "test_support.hpp"

namespace gaae::data {
namespace {

EmbeddingFile RandomFile(std::uint64_t seed, std::size_t count, std::uint32_t dim) {
  Rng rng(seed);
  EmbeddingFile file;
  file.dim = dim;
  for (std::size_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.speaker_id = static_cast<std::uint32_t>(i / 7);
    r.segment_id = static_cast<std::uint32_t>(i % 7);
    r.gender = static_cast<std::uint8_t>(rng() & 1);
    r.vector.resize(dim);
    for (double& v : r.vector) v = std::ldexp(UniformSymmetric(rng, 1.0), static_cast<int>(rng() % 40) - 20);
    file.records.push_back(std::move(r));
  }
  return file;
}

std::uint64_t FormatErrorOffset(const std::string& bytes) {
  try {
    DecodeEmbeddings(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "expected FormatError";
  return ~std::uint64_t{0};
}

TEST(EmbeddingFile, EmptyFileRoundTrips) {
  EmbeddingFile file;
  file.dim = 192;
  const std::string bytes = EncodeEmbeddings(file);
  EXPECT_EQ(bytes.size(), kEmbeddingHeaderBytes);
  EXPECT_EQ(DecodeEmbeddings(bytes), file);
}

TEST(EmbeddingFile, SingleRecordLayout) {
  EmbeddingFile file;
  file.dim = 2;
  file.records.push_back({.speaker_id = 3, .segment_id = 4, .gender = 1, .vector = {0.0, 1.0}});
  const std::string bytes = EncodeEmbeddings(file);
  ASSERT_EQ(bytes.size(), 41u);
  EXPECT_EQ(EncodedSize(2, 1), 41u);
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[16], 3);
  EXPECT_EQ(bytes[20], 4);
  EXPECT_EQ(bytes[24], 1);
  double second = 0.0;
  std::memcpy(&second, bytes.data() + 33, 8);
  EXPECT_EQ(second, 1.0);
  EXPECT_EQ(DecodeEmbeddings(bytes), file);
}

TEST(EmbeddingFile, TenThousandRecordsRoundTripBitExactly) {
  const EmbeddingFile file = RandomFile(5, 10000, 8);
  const std::string bytes = EncodeEmbeddings(file);
  EXPECT_EQ(bytes.size(), EncodedSize(8, 10000));
  const EmbeddingFile back = DecodeEmbeddings(bytes);
  EXPECT_EQ(back, file);
  EXPECT_EQ(EncodeEmbeddings(back), bytes);
}

TEST(EmbeddingFile, DiskRoundTrip) {
  testing::TempDir dir("emb");
  const EmbeddingFile file = RandomFile(6, 50, 3);
  WriteEmbeddingFile(dir / "a.emb", file);
  EXPECT_EQ(ReadEmbeddingFile(dir / "a.emb"), file);
}

TEST(EmbeddingFile, CorruptionsAreLocated) {
  const std::string good = EncodeEmbeddings(RandomFile(7, 10, 2));
  const std::size_t record = 9 + 16;
  std::string bad = good;
  bad[1] = 'X';
  EXPECT_EQ(FormatErrorOffset(bad), 0u);
  bad = good;
  bad[4] = 2;
  EXPECT_EQ(FormatErrorOffset(bad), 4u);
  EXPECT_EQ(FormatErrorOffset(good.substr(0, 10)), 8u);
  EXPECT_EQ(FormatErrorOffset(good.substr(0, good.size() - 1)), 16u);
  EXPECT_EQ(FormatErrorOffset(good + "zz"), good.size());
  bad = good;
  bad[16 + 2 * record + 8] = 2;
  EXPECT_EQ(FormatErrorOffset(bad), 16 + 2 * record + 8);
  bad = good;
  const double inf = std::numeric_limits<double>::infinity();
  std::memcpy(bad.data() + 16 + 3 * record + 9, &inf, 8);
  EXPECT_EQ(FormatErrorOffset(bad), 16 + 3 * record);
  bad = good;
  std::memcpy(bad.data() + 16 + 5 * record, bad.data() + 16 + 4 * record, 8);
  EXPECT_EQ(FormatErrorOffset(bad), 16 + 5 * record);
}

TEST(EmbeddingFile, ErrorsFromDiskNameTheFile) {
  testing::TempDir dir("emb_bad");
  WriteFileBytes(dir / "bad.emb", "EMB2xxxxxxxxxxxx");
  try {
    ReadEmbeddingFile(dir / "bad.emb");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad.emb"), std::string::npos);
    EXPECT_NE(what.find("byte offset 0"), std::string::npos);
  }
}

TEST(EmbeddingFile, InvalidRecordsRejectedOnWrite) {
  EmbeddingFile file = RandomFile(8, 3, 2);
  file.records[1].vector.push_back(0.0);
  EXPECT_THROW(EncodeEmbeddings(file), DataError);
  file = RandomFile(8, 3, 2);
  file.records[2].segment_id = file.records[1].segment_id;
  EXPECT_THROW(EncodeEmbeddings(file), DataError);
  file = RandomFile(8, 3, 2);
  file.records[0].gender = 3;
  EXPECT_THROW(EncodeEmbeddings(file), DataError);
  file = RandomFile(8, 3, 2);
  file.records[0].vector[0] = std::nan("");
  EXPECT_THROW(EncodeEmbeddings(file), DataError);
}

TEST(EmbeddingFile, MissingFileIsIoError) {
  EXPECT_THROW(ReadEmbeddingFile("/nonexistent/dir/x.emb"), IoError);
}

SynthConfig SmallSynth() {
  SynthConfig cfg;
  cfg.n_speakers = 21;
  cfg.segments_per_speaker = 6;
  cfg.dim = 16;
  return cfg;
}

TEST(Synthetic, VectorsAreUnitNorm) {
  for (const auto& r : GenerateSynthetic(SmallSynth()).records) {
    EXPECT_NEAR(nn::L2Norm(r.vector), 1.0, 1e-10);
  }
}

TEST(Synthetic, GenderClassesBalancedWithinOneSpeaker) {
  for (std::uint32_t n : {2u, 3u, 21u, 200u}) {
    SynthConfig cfg = SmallSynth();
    cfg.n_speakers = n;
    std::set<std::uint32_t> male, female;
    for (const auto& r : GenerateSynthetic(cfg).records) {
      (r.gender == 0 ? male : female).insert(r.speaker_id);
    }
    const long diff = static_cast<long>(male.size()) - static_cast<long>(female.size());
    EXPECT_LE(std::abs(diff), 1) << n;
    EXPECT_FALSE(male.empty());
    EXPECT_FALSE(female.empty());
  }
}

TEST(Synthetic, DeterministicUnderSeed) {
  const SynthConfig cfg = SmallSynth();
  EXPECT_EQ(EncodeEmbeddings(GenerateSynthetic(cfg)), EncodeEmbeddings(GenerateSynthetic(cfg)));
  SynthConfig other = cfg;
  other.seed = 1;
  EXPECT_NE(GenerateSynthetic(cfg), GenerateSynthetic(other));
}

TEST(Synthetic, InvalidConfigsAreConfigErrors) {
  SynthConfig cfg = SmallSynth();
  cfg.n_speakers = 1;
  EXPECT_THROW(GenerateSynthetic(cfg), ConfigError);
  cfg = SmallSynth();
  cfg.segments_per_speaker = 0;
  EXPECT_THROW(GenerateSynthetic(cfg), ConfigError);
  cfg = SmallSynth();
  cfg.gender_gap = -1.0;
  EXPECT_THROW(GenerateSynthetic(cfg), ConfigError);
  cfg = SmallSynth();
  cfg.speaker_spread = 0.0;
  EXPECT_THROW(GenerateSynthetic(cfg), ConfigError);
}

double HeldOutAttackerAuc(double gap) {
  SynthConfig cfg;
  cfg.n_speakers = 100;
  cfg.segments_per_speaker = 10;
  cfg.gender_gap = gap;
  const auto train = ToLabeledData(GenerateSynthetic(cfg));
  cfg.seed = 99;
  const auto test = ToLabeledData(GenerateSynthetic(cfg));
  eval::AttackerClassifier clf(cfg.dim, {.epochs = 5, .seed = 4});
  clf.Train(train);
  return clf.Auc(test);
}

TEST(Synthetic, ZeroGapCarriesNoGenderSignal) {
  const double auc = HeldOutAttackerAuc(0.0);
  EXPECT_GE(auc, 0.4);
  EXPECT_LE(auc, 0.6);
}

TEST(Synthetic, DefaultGapIsSeparable) {
  EXPECT_GT(HeldOutAttackerAuc(0.6), 0.95);
}

TEST(Synthetic, ZeroNoiseGivesPerfectVerification) {
  SynthConfig cfg = SmallSynth();
  cfg.n_speakers = 40;
  cfg.segment_noise = 0.0;
  const Splits s = MakeSplits(GenerateSynthetic(cfg), SplitSpec{}, 3);
  EXPECT_EQ(eval::AsvEer(s.eval_enroll, s.eval_test, s.trials), 0.0);
}

std::set<std::uint32_t> Speakers(const EmbeddingFile& f) {
  std::set<std::uint32_t> out;
  for (const auto& r : f.records) out.insert(r.speaker_id);
  return out;
}

bool Disjoint(const std::set<std::uint32_t>& a, const std::set<std::uint32_t>& b) {
  for (auto v : a) {
    if (b.count(v) != 0) return false;
  }
  return true;
}

TEST(Splits, RolesAreSpeakerDisjointForEverySeed) {
  const EmbeddingFile file = GenerateSynthetic(SmallSynth());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Splits s = MakeSplits(file, SplitSpec{}, seed);
    const auto aae = Speakers(s.aae_train);
    const auto att = Speakers(s.attacker_train);
    const auto enroll = Speakers(s.eval_enroll);
    const auto test = Speakers(s.eval_test);
    ASSERT_TRUE(Disjoint(aae, att)) << seed;
    ASSERT_TRUE(Disjoint(aae, enroll)) << seed;
    ASSERT_TRUE(Disjoint(att, enroll)) << seed;
    ASSERT_TRUE(Disjoint(aae, test)) << seed;
    ASSERT_TRUE(Disjoint(att, test)) << seed;
    ASSERT_EQ(enroll, test) << seed;
    ASSERT_EQ(s.aae_train.size() + s.attacker_train.size() + s.eval_enroll.size() +
                  s.eval_test.size(),
              file.size());
  }
}

TEST(Splits, FourSpeakersFillEveryRole) {
  SynthConfig cfg = SmallSynth();
  cfg.n_speakers = 4;
  const Splits s = MakeSplits(GenerateSynthetic(cfg), SplitSpec{}, 0);
  EXPECT_FALSE(s.aae_train.records.empty());
  EXPECT_FALSE(s.attacker_train.records.empty());
  EXPECT_FALSE(s.eval_enroll.records.empty());
  EXPECT_FALSE(s.eval_test.records.empty());
  EXPECT_FALSE(s.trials.empty());
}

TEST(Splits, TooFewSpeakersIsConfigError) {
  SynthConfig cfg = SmallSynth();
  cfg.n_speakers = 3;
  EXPECT_THROW(MakeSplits(GenerateSynthetic(cfg), SplitSpec{}, 0), ConfigError);
}

TEST(Splits, SameSeedSameSplits) {
  const EmbeddingFile file = GenerateSynthetic(SmallSynth());
  const Splits a = MakeSplits(file, SplitSpec{}, 12);
  const Splits b = MakeSplits(file, SplitSpec{}, 12);
  EXPECT_EQ(a.aae_train, b.aae_train);
  EXPECT_EQ(a.attacker_train, b.attacker_train);
  EXPECT_EQ(a.eval_enroll, b.eval_enroll);
  EXPECT_EQ(a.eval_test, b.eval_test);
  EXPECT_EQ(a.trials, b.trials);
}

TEST(Splits, TrialsReferenceEvaluationDataWithRequestedRatio) {
  SynthConfig cfg = SmallSynth();
  cfg.n_speakers = 60;
  cfg.segments_per_speaker = 20;
  SplitSpec spec;
  spec.target_trials = 50;
  const Splits s = MakeSplits(GenerateSynthetic(cfg), spec, 1);
  const auto enroll = Speakers(s.eval_enroll);
  std::set<std::pair<std::uint32_t, std::uint32_t>> test;
  for (const auto& r : s.eval_test.records) test.emplace(r.speaker_id, r.segment_id);
  std::size_t targets = 0;
  for (const auto& t : s.trials) {
    EXPECT_EQ(enroll.count(t.enroll_speaker), 1u);
    EXPECT_EQ(test.count({t.test_speaker, t.test_segment}), 1u);
    const bool same = t.enroll_speaker == t.test_speaker;
    EXPECT_EQ(same, t.label == TrialLabel::kTarget);
    targets += same;
  }
  EXPECT_EQ(targets, 50u);
  EXPECT_EQ(s.trials.size(), 100u);
}

TEST(Splits, InconsistentSpeakerGenderIsDataError) {
  EmbeddingFile file = GenerateSynthetic(SmallSynth());
  file.records[1].gender ^= 1;
  EXPECT_THROW(MakeSplits(file, SplitSpec{}, 0), DataError);
}

TEST(Splits, InvalidSpecIsConfigError) {
  SplitSpec spec;
  spec.aae_fraction = 0.9;
  spec.attacker_fraction = 0.1;
  EXPECT_THROW(MakeSplits(GenerateSynthetic(SmallSynth()), spec, 0), ConfigError);
}

TEST(Trials, TextRoundTrip) {
  const TrialList trials{{1, 1, 4, TrialLabel::kTarget}, {1, 7, 0, TrialLabel::kNontarget}};
  const std::string text = FormatTrials(trials);
  EXPECT_EQ(text, "1\t1\t4\ttarget\n1\t7\t0\tnontarget\n");
  EXPECT_EQ(ParseTrials(text), trials);
  testing::TempDir dir("trials");
  WriteTrialFile(dir / "t.txt", trials);
  EXPECT_EQ(ReadTrialFile(dir / "t.txt"), trials);
}

TEST(Trials, MalformedLinesAreDataErrors) {
  EXPECT_THROW(ParseTrials("1\t2\t3\n"), DataError);
  EXPECT_THROW(ParseTrials("1\t2\tx\ttarget\n"), DataError);
  EXPECT_THROW(ParseTrials("1\t2\t3\tmaybe\n"), DataError);
  EXPECT_THROW(ParseTrials("-1\t2\t3\ttarget\n"), DataError);
  EXPECT_EQ(ParseTrials("\n1\t2\t3\ttarget\r\n").size(), 1u);
}

}  // namespace
}  // namespace gaae::data
