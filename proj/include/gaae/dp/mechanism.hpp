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

// Local differential privacy for latent vectors: L1 clipping followed by
// per-component Laplace noise calibrated to the clipped sensitivity.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gaae/error.hpp"
#include "gaae/nn/matrix.hpp"
#include "gaae/random.hpp"

namespace gaae::dp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Clipping threshold C and privacy budget ε. Sensitivity is the worst case
// 2C over any pair of clipped inputs; the Laplace scale is 2C / ε, and
// ε = ∞ means clip only.
class DpConfig {
 public:
  DpConfig() = default;
  DpConfig(double clip, double epsilon) : clip_(clip), epsilon_(epsilon) {
    if (!(clip > 0.0) || !std::isfinite(clip)) {
      throw ConfigError("clipping threshold must be positive and finite, got " +
                        std::to_string(clip));
    }
    if (!(epsilon > 0.0)) {
      throw ConfigError("epsilon must be positive (or inf), got " +
                        std::to_string(epsilon));
    }
  }

  double clip() const { return clip_; }
  double epsilon() const { return epsilon_; }
  double sensitivity() const { return 2.0 * clip_; }
  double scale() const {
    return std::isinf(epsilon_) ? 0.0 : sensitivity() / epsilon_;
  }
  bool noiseless() const { return std::isinf(epsilon_); }

  DpConfig WithEpsilon(double epsilon) const { return {clip_, epsilon}; }

 private:
  double clip_ = 1.0;
  double epsilon_ = kInfinity;
};

// Seeded stream of Laplace draws. Copies continue the same stream; use
// Fork() to obtain an independent sub-stream.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  NoiseSource Fork(std::uint64_t stream) const {
    return NoiseSource(DeriveSeed(seed_, stream));
  }

  // Inverse-CDF draw: -b · sign(u) · ln(1 - 2|u|), u ~ U(-1/2, 1/2).
  double Laplace(double scale) {
    const double u = UniformOpen01(rng_) - 0.5;
    ++position_;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
  }

 private:
  std::uint64_t seed_;
  Rng rng_;
  std::uint64_t position_ = 0;
};

// dim independent Laplace(0, scale) draws; scale 0 yields zeros without
// consuming the stream.
inline std::vector<double> LaplaceSample(NoiseSource& source, double scale,
                                         std::size_t dim) {
  if (!(scale >= 0.0)) {
    throw ConfigError("laplace scale must be nonnegative, got " +
                      std::to_string(scale));
  }
  std::vector<double> out(dim, 0.0);
  if (scale == 0.0) return out;
  for (double& v : out) v = source.Laplace(scale);
  return out;
}

// 1 / max(1, ‖z‖₁ / C).
inline double ClipFactor(std::span<const double> z, double clip) {
  return 1.0 / std::max(1.0, nn::L1Norm(z) / clip);
}

inline std::vector<double> ClipL1(std::span<const double> z, double clip) {
  if (!(clip > 0.0)) {
    throw ConfigError("clipping threshold must be positive");
  }
  double denom = std::max(1.0, nn::L1Norm(z) / clip);
  std::vector<double> out(z.begin(), z.end());
  if (denom == 1.0) return out;
  // Rounding can leave the scaled norm a few ulps above C; nudge the divisor
  // until it is not, so that clipping a clipped vector is the identity.
  for (;;) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] / denom;
    if (nn::L1Norm(out) <= clip) return out;
    denom = std::nextafter(denom, std::numeric_limits<double>::infinity());
  }
}

// clip(z) + n, n ~ Laplace(0, 2C/ε)^dim.
inline std::vector<double> DpApply(std::span<const double> z,
                                   const DpConfig& cfg, NoiseSource& source) {
  std::vector<double> out = ClipL1(z, cfg.clip());
  const auto noise = LaplaceSample(source, cfg.scale(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise[i];
  return out;
}

// Row-wise clip-and-noise layer for batches. It has no parameters; the
// backward pass scales each row's gradient by that row's clip factor and
// passes the additive noise through unchanged.
class DpLayer {
 public:
  explicit DpLayer(DpConfig cfg) : cfg_(cfg) {}

  const DpConfig& config() const { return cfg_; }
  const std::vector<double>& clip_factors() const { return factors_; }
  const std::vector<double>& input_norms() const { return norms_; }

  nn::Matrix Forward(const nn::Matrix& z, NoiseSource& source) {
    nn::Matrix out(z.rows(), z.cols());
    factors_.assign(z.rows(), 1.0);
    norms_.assign(z.rows(), 0.0);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const auto src = z.row(r);
      norms_[r] = nn::L1Norm(src);
      const auto noisy = DpApply(src, cfg_, source);
      factors_[r] = ClipFactor(src, cfg_.clip());
      std::copy(noisy.begin(), noisy.end(), out.row(r).begin());
    }
    return out;
  }

  nn::Matrix Backward(const nn::Matrix& grad_out) const {
    if (grad_out.rows() != factors_.size()) {
      throw StateError("dp layer backward without a matching forward pass");
    }
    nn::Matrix grad_in = grad_out;
    for (std::size_t r = 0; r < grad_in.rows(); ++r) {
      for (double& g : grad_in.row(r)) g *= factors_[r];
    }
    return grad_in;
  }

 private:
  DpConfig cfg_;
  std::vector<double> factors_;
  std::vector<double> norms_;
};

// Single-vector backward for callers outside a batched model.
inline std::vector<double> DpBackward(std::span<const double> z, double clip,
                                      std::span<const double> grad_out) {
  const double factor = ClipFactor(z, clip);
  std::vector<double> out(grad_out.begin(), grad_out.end());
  for (double& g : out) g *= factor;
  return out;
}

}  // namespace gaae::dp
