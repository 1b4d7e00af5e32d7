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

// Synthetic speaker embeddings with two controllable factors: a per-speaker
// identity direction and a shared gender axis (the first coordinate).
//
//   v = spread · u_s + gap · g_s · e₀ + noise · ξ / sqrt(d),   x = v / ‖v‖₂
//
// u_s is uniform on the unit sphere, g_s = +1 for female and -1 for male,
// ξ ~ N(0, I) per segment. Speakers alternate gender so both classes are
// represented and their counts differ by at most one.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gaae/data/embedding_file.hpp"
#include "gaae/error.hpp"
#include "gaae/nn/matrix.hpp"
#include "gaae/random.hpp"

namespace gaae::data {

struct SynthConfig {
  std::uint32_t n_speakers = 200;
  std::uint32_t segments_per_speaker = 20;
  std::uint32_t dim = 192;
  double gender_gap = 0.8;
  double speaker_spread = 1.0;
  double segment_noise = 1.0;
  std::uint64_t seed = 0;

  void Validate() const {
    if (n_speakers < 2) {
      throw ConfigError("need at least 2 speakers to represent both genders");
    }
    if (segments_per_speaker == 0) throw ConfigError("segments_per_speaker must be positive");
    if (dim < 2) throw ConfigError("dim must be at least 2");
    if (!(gender_gap >= 0.0) || !std::isfinite(gender_gap)) {
      throw ConfigError("gender_gap must be a nonnegative finite number");
    }
    if (!(speaker_spread > 0.0) || !std::isfinite(speaker_spread)) {
      throw ConfigError("speaker_spread must be positive");
    }
    if (!(segment_noise >= 0.0) || !std::isfinite(segment_noise)) {
      throw ConfigError("segment_noise must be a nonnegative finite number");
    }
  }
};

inline EmbeddingFile GenerateSynthetic(const SynthConfig& cfg) {
  cfg.Validate();
  EmbeddingFile file;
  file.dim = cfg.dim;
  file.records.reserve(static_cast<std::size_t>(cfg.n_speakers) *
                       cfg.segments_per_speaker);
  const double noise_scale =
      cfg.segment_noise / std::sqrt(static_cast<double>(cfg.dim));
  for (std::uint32_t s = 0; s < cfg.n_speakers; ++s) {
    Rng rng(DeriveSeed(cfg.seed, s));
    const std::uint8_t gender = static_cast<std::uint8_t>(s % 2);
    std::vector<double> identity(cfg.dim);
    for (double& v : identity) v = StandardNormal(rng);
    const double norm = nn::L2Norm(identity);
    for (double& v : identity) v *= cfg.speaker_spread / norm;
    identity[0] += cfg.gender_gap * (gender == 1 ? 1.0 : -1.0);

    for (std::uint32_t seg = 0; seg < cfg.segments_per_speaker; ++seg) {
      EmbeddingRecord rec{.speaker_id = s, .segment_id = seg, .gender = gender, .vector = identity};
      if (noise_scale > 0.0) {
        for (double& v : rec.vector) v += noise_scale * StandardNormal(rng);
      }
      const double n = nn::L2Norm(rec.vector);
      if (n == 0.0) throw DataError("generated a zero vector");
      for (double& v : rec.vector) v /= n;
      file.records.push_back(std::move(rec));
    }
  }
  return file;
}

}  // namespace gaae::data
