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

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gaae/data/embedding_file.hpp"
#include "gaae/data/trials.hpp"
#include "gaae/error.hpp"
#include "gaae/eval/metrics.hpp"
#include "gaae/nn/loss.hpp"
#include "gaae/nn/matrix.hpp"

namespace gaae::eval {

using SpeakerModels = std::map<std::uint32_t, std::vector<double>>;

// Speaker model = L2-normalized mean of the speaker's enrollment vectors.
inline SpeakerModels BuildSpeakerModels(const data::EmbeddingFile& enroll) {
  std::map<std::uint32_t, std::pair<std::vector<double>, std::size_t>> sums;
  for (const auto& r : enroll.records) {
    auto& [sum, count] = sums[r.speaker_id];
    if (sum.empty()) sum.assign(r.vector.size(), 0.0);
    if (sum.size() != r.vector.size()) {
      throw DataError("enrollment vectors of speaker " +
                      std::to_string(r.speaker_id) + " differ in dimension");
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r.vector[i];
    ++count;
  }
  SpeakerModels models;
  for (auto& [spk, acc] : sums) {
    auto& [sum, count] = acc;
    for (double& v : sum) v /= static_cast<double>(count);
    const double norm = nn::L2Norm(sum);
    if (!(norm > 1e-12)) {
      throw DataError("speaker " + std::to_string(spk) +
                      " has a zero-norm mean enrollment vector");
    }
    for (double& v : sum) v /= norm;
    models.emplace(spk, std::move(sum));
  }
  return models;
}

// Cosine score per trial, in trial order. Target trials are positives.
inline ScoreSet ScoreTrials(const SpeakerModels& models,
                            const data::EmbeddingFile& test,
                            const data::TrialList& trials) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index;
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    index.emplace(std::make_pair(test.records[i].speaker_id,
                                 test.records[i].segment_id),
                  i);
  }
  ScoreSet out;
  out.scores.reserve(trials.size());
  out.labels.reserve(trials.size());
  for (const auto& t : trials) {
    const auto model = models.find(t.enroll_speaker);
    if (model == models.end()) {
      throw DataError("trial references unknown enrollment speaker " +
                      std::to_string(t.enroll_speaker));
    }
    const auto seg = index.find({t.test_speaker, t.test_segment});
    if (seg == index.end()) {
      throw DataError("trial references unknown test segment (" +
                      std::to_string(t.test_speaker) + ", " +
                      std::to_string(t.test_segment) + ")");
    }
    out.Add(nn::CosineSimilarity(model->second, test.records[seg->second].vector),
            t.label == data::TrialLabel::kTarget);
  }
  return out;
}

inline double AsvEer(const data::EmbeddingFile& enroll,
                     const data::EmbeddingFile& test,
                     const data::TrialList& trials) {
  return Eer(ScoreTrials(BuildSpeakerModels(enroll), test, trials));
}

}  // namespace gaae::eval
