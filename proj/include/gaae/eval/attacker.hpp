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
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gaae/error.hpp"
#include "gaae/eval/metrics.hpp"
#include "gaae/model/training.hpp"
#include "gaae/nn/adam.hpp"
#include "gaae/nn/layers.hpp"
#include "gaae/nn/loss.hpp"
#include "gaae/random.hpp"

namespace gaae::eval {

struct AttackerConfig {
  std::size_t hidden = 100;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

// External gender classifier σ(W₂ ReLU(W₁x + b₁) + b₂), trained with the
// unflipped binary cross-entropy on clean embeddings.
class AttackerClassifier {
 public:
  AttackerClassifier(std::size_t input_dim, const AttackerConfig& cfg)
      : cfg_(cfg), hidden_(input_dim, cfg.hidden), out_(cfg.hidden, 1) {
    Rng rng(DeriveSeed(cfg.seed, 0xA77));
    hidden_.Initialize(rng);
    out_.Initialize(rng);
  }

  std::size_t input_dim() const { return hidden_.in_features(); }

  void Train(const model::LabeledData& data) {
    if (data.size() < 2 || !model::HasBothClasses(data.y)) {
      throw DataError("attacker training needs both gender classes");
    }
    std::vector<nn::ParamRef> params;
    hidden_.AppendParams(params);
    out_.AppendParams(params);
    nn::AdamState opt(nn::TotalSize(params), {.lr = cfg_.lr});
    Rng shuffle(DeriveSeed(cfg_.seed, 0xA78));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t e = 0; e < cfg_.epochs; ++e) {
      Shuffle(order.begin(), order.end(), shuffle);
      for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
        const std::size_t count = std::min(cfg_.batch_size, order.size() - start);
        const std::span<const std::size_t> idx(order.data() + start, count);
        const nn::Matrix x = nn::GatherRows(data.x, idx);
        std::vector<double> y(count);
        for (std::size_t i = 0; i < count; ++i) y[i] = data.y[idx[i]];

        const nn::Matrix pre = hidden_.Forward(x);
        const nn::Matrix act = nn::ActivationForward(nn::Activation::kRelu, pre);
        const nn::Matrix logit = out_.Forward(act);
        std::vector<double> p(count);
        for (std::size_t b = 0; b < count; ++b) {
          p[b] = nn::ActivationValue(nn::Activation::kSigmoid, logit(b, 0));
        }
        const nn::BceResult loss = nn::BceLoss(p, y, /*flipped=*/false);
        nn::Matrix grad_p(count, 1);
        for (std::size_t b = 0; b < count; ++b) grad_p(b, 0) = loss.grad[b];

        hidden_.ZeroGrad();
        out_.ZeroGrad();
        const nn::Matrix grad_act = out_.Backward(
            act, nn::ActivationBackward(nn::Activation::kSigmoid, logit, grad_p));
        hidden_.AccumulateGrad(
            x, nn::ActivationBackward(nn::Activation::kRelu, pre, grad_act));
        opt.Step(params);
      }
    }
    trained_ = true;
  }

  bool trained() const { return trained_; }

  // Pre-sigmoid score per row; ranking by it avoids ties from saturation.
  std::vector<double> Logits(const nn::Matrix& x) const {
    const nn::Matrix act =
        nn::ActivationForward(nn::Activation::kRelu, hidden_.Forward(x));
    const nn::Matrix logit = out_.Forward(act);
    return {logit.values().begin(), logit.values().end()};
  }

  // Probability of the "female" class per row.
  std::vector<double> Predict(const nn::Matrix& x) const {
    auto p = Logits(x);
    for (double& v : p) v = nn::ActivationValue(nn::Activation::kSigmoid, v);
    return p;
  }

  double Auc(const model::LabeledData& data) const {
    ScoreSet s;
    const auto scores = Logits(data.x);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s.Add(scores[i], data.y[i] == 1.0);
    }
    return RocAuc(s);
  }

 private:
  AttackerConfig cfg_;
  nn::Linear hidden_;
  nn::Linear out_;
  bool trained_ = false;
};

}  // namespace gaae::eval
