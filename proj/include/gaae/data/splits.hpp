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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "gaae/data/embedding_file.hpp"
#include "gaae/data/trials.hpp"
#include "gaae/error.hpp"
#include "gaae/random.hpp"

namespace gaae::data {

// Speaker-disjoint role assignment. The AAE training, attacker training and
// evaluation speaker sets never overlap; evaluation speakers contribute
// their first `enroll_segments` (after shuffling) to enrollment and the
// rest to test.
struct SplitSpec {
  double aae_fraction = 0.5;
  double attacker_fraction = 0.2;
  std::uint32_t enroll_segments = 5;
  std::uint32_t target_trials = 2000;
  double nontarget_ratio = 1.0;

  void Validate() const {
    if (!(aae_fraction > 0.0) || !(attacker_fraction > 0.0) ||
        !(aae_fraction + attacker_fraction < 1.0)) {
      throw ConfigError(
          "aae and attacker fractions must be positive and leave room for "
          "evaluation speakers");
    }
    if (enroll_segments == 0) throw ConfigError("enroll_segments must be positive");
    if (target_trials == 0) throw ConfigError("target_trials must be positive");
    if (!(nontarget_ratio > 0.0) || !std::isfinite(nontarget_ratio)) {
      throw ConfigError("nontarget_ratio must be positive");
    }
  }
};

struct Splits {
  EmbeddingFile aae_train;
  EmbeddingFile attacker_train;
  EmbeddingFile eval_enroll;
  EmbeddingFile eval_test;
  TrialList trials;
};

inline constexpr std::size_t kMinSplitSpeakers = 4;

namespace internal {

inline std::size_t RoundCount(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace internal

inline Splits MakeSplits(const EmbeddingFile& file, const SplitSpec& spec,
                         std::uint64_t seed) {
  spec.Validate();
  std::map<std::uint32_t, std::vector<std::size_t>> by_speaker;
  std::map<std::uint32_t, std::uint8_t> gender_of;
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const auto& r = file.records[i];
    by_speaker[r.speaker_id].push_back(i);
    const auto [it, fresh] = gender_of.emplace(r.speaker_id, r.gender);
    if (!fresh && it->second != r.gender) {
      throw DataError("speaker " + std::to_string(r.speaker_id) +
                      " has inconsistent gender labels");
    }
  }
  const std::size_t n = by_speaker.size();
  if (n < kMinSplitSpeakers) {
    throw ConfigError("need at least " + std::to_string(kMinSplitSpeakers) +
                      " speakers for disjoint aae/attacker/eval roles, got " +
                      std::to_string(n));
  }

  // Shuffle each gender separately and interleave so every role receives a
  // near-balanced share.
  Rng rng(DeriveSeed(seed, 0x5157));
  std::vector<std::uint32_t> male, female;
  for (const auto& [spk, g] : gender_of) (g == 0 ? male : female).push_back(spk);
  Shuffle(male.begin(), male.end(), rng);
  Shuffle(female.begin(), female.end(), rng);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < std::max(male.size(), female.size()); ++i) {
    if (i < female.size()) order.push_back(female[i]);
    if (i < male.size()) order.push_back(male[i]);
  }

  const std::size_t n_eval = std::max<std::size_t>(
      2, internal::RoundCount(1.0 - spec.aae_fraction - spec.attacker_fraction, n));
  const std::size_t n_att = std::max<std::size_t>(
      1, internal::RoundCount(spec.attacker_fraction, n));
  if (n_eval + n_att >= n) {
    throw ConfigError("not enough speakers (" + std::to_string(n) +
                      ") for disjoint roles");
  }
  const std::size_t n_aae = n - n_eval - n_att;

  Splits out;
  for (auto* f : {&out.aae_train, &out.attacker_train, &out.eval_enroll,
                  &out.eval_test}) {
    f->dim = file.dim;
  }
  auto add_speaker = [&](EmbeddingFile& dst, std::uint32_t spk) {
    for (std::size_t i : by_speaker[spk]) dst.records.push_back(file.records[i]);
  };
  for (std::size_t i = 0; i < n_aae; ++i) add_speaker(out.aae_train, order[i]);
  for (std::size_t i = n_aae; i < n_aae + n_att; ++i) {
    add_speaker(out.attacker_train, order[i]);
  }

  std::vector<std::uint32_t> eval_speakers(order.begin() + n_aae + n_att,
                                           order.end());
  std::sort(eval_speakers.begin(), eval_speakers.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> test_keys;
  for (std::uint32_t spk : eval_speakers) {
    std::vector<std::size_t> segs = by_speaker[spk];
    if (segs.size() < 2) {
      throw ConfigError("evaluation speaker " + std::to_string(spk) +
                        " needs at least 2 segments for enroll and test");
    }
    Shuffle(segs.begin(), segs.end(), rng);
    const std::size_t n_enroll =
        std::min<std::size_t>(spec.enroll_segments, segs.size() - 1);
    std::sort(segs.begin(), segs.begin() + n_enroll);
    std::sort(segs.begin() + n_enroll, segs.end());
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& rec = file.records[segs[i]];
      if (i < n_enroll) {
        out.eval_enroll.records.push_back(rec);
      } else {
        out.eval_test.records.push_back(rec);
        test_keys.emplace_back(rec.speaker_id, rec.segment_id);
      }
    }
  }

  std::vector<Trial> targets, nontargets;
  for (std::uint32_t enroll : eval_speakers) {
    for (const auto& [spk, seg] : test_keys) {
      Trial t{enroll, spk, seg,
              spk == enroll ? TrialLabel::kTarget : TrialLabel::kNontarget};
      (spk == enroll ? targets : nontargets).push_back(t);
    }
  }
  Shuffle(targets.begin(), targets.end(), rng);
  Shuffle(nontargets.begin(), nontargets.end(), rng);
  const std::size_t n_target = std::min<std::size_t>(spec.target_trials, targets.size());
  const std::size_t n_nontarget = std::min<std::size_t>(
      std::max<std::size_t>(1, internal::RoundCount(spec.nontarget_ratio, n_target)),
      nontargets.size());
  out.trials.assign(targets.begin(), targets.begin() + n_target);
  out.trials.insert(out.trials.end(), nontargets.begin(),
                    nontargets.begin() + n_nontarget);
  std::sort(out.trials.begin(), out.trials.end(), [](const Trial& a, const Trial& b) {
    return std::tie(a.enroll_speaker, a.test_speaker, a.test_segment) <
           std::tie(b.enroll_speaker, b.test_speaker, b.test_segment);
  });
  return out;
}

}  // namespace gaae::data
