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

// Alternating adversarial training of the auto-encoder and protected
// inference.
//
// One training step on a minibatch (x, y):
//   1. φ-update: forward through encoder → dp layer → decoder and
//      discriminator, minimize adv_weight·L_adv + L_rec over φ only.
//   2. θ-update: fresh forward with new noise (φ frozen, batch-norm running
//      statistics untouched), minimize L_disc over θ only.
//
// Before the main loop, warm-up epochs run the same alternation with the
// dp layer bypassed; the median L1 norm of every latent row seen during
// warm-up becomes the clipping threshold C for the rest of training.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gaae/dp/ledger.hpp"
#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/model/gaae_model.hpp"
#include "gaae/nn/adam.hpp"
#include "gaae/nn/loss.hpp"
#include "gaae/random.hpp"

namespace gaae::model {

// Embedding matrix (one row per sample) with binary gender labels.
struct LabeledData {
  nn::Matrix x;
  std::vector<double> y;

  std::size_t size() const { return x.rows(); }
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double epsilon_tr = dp::kInfinity;
  std::size_t warmup_epochs = 1;
  double adv_weight = 1.0;

  void Validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
      throw ConfigError("learning rate must be positive");
    }
    if (batch_size < 2) {
      throw ConfigError("batch size must be at least 2 for batch norm");
    }
    if (!(epsilon_tr > 0.0)) {
      throw ConfigError("epsilon_tr must be positive or inf");
    }
    if (warmup_epochs == 0) {
      throw ConfigError("at least one warm-up epoch is needed to fix C");
    }
    if (!(adv_weight >= 0.0) || !std::isfinite(adv_weight)) {
      throw ConfigError("adv_weight must be a nonnegative finite number");
    }
  }
};

struct StepLosses {
  double disc = 0.0;
  double adv = 0.0;
  double rec = 0.0;
};

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  bool warmup = false;
  StepLosses losses;
  double z_l1_mean = 0.0;
  double z_l1_min = 0.0;
  double z_l1_max = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  bool warmup = false;
  std::size_t steps = 0;
  StepLosses mean;
};

struct TrainTrace {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  double clip_threshold = 0.0;
};

// Exact median; the mean of the two middle values for even counts.
inline double Median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

inline bool HasBothClasses(std::span<const double> y) {
  bool zero = false;
  bool one = false;
  for (double v : y) {
    if (v == 0.0) zero = true;
    else if (v == 1.0) one = true;
    else throw DataError("gender labels must be 0 or 1");
  }
  return zero && one;
}

// Owns the optimizer states, noise stream and shuffling stream of one
// training run so that the run is a pure function of (model, data, config).
class Trainer {
 public:
  Trainer(GaaeModel& model, const TrainConfig& cfg)
      : model_(model),
        cfg_(cfg),
        phi_opt_(TotalSize(model.PhiParams()), {.lr = cfg.lr}),
        theta_opt_(TotalSize(model.ThetaParams()), {.lr = cfg.lr}),
        noise_(DeriveSeed(cfg.seed, 2)),
        shuffle_(DeriveSeed(cfg.seed, 1)) {
    cfg_.Validate();
  }

  const TrainTrace& trace() const { return trace_; }
  TrainTrace TakeTrace() { return std::move(trace_); }
  const nn::AdamState& phi_optimizer() const { return phi_opt_; }
  const nn::AdamState& theta_optimizer() const { return theta_opt_; }

  // One φ-update followed by one θ-update. `norms`, if given, receives the
  // L1 norm of every unclipped latent row seen in the φ forward pass.
  StepLosses Step(const nn::Matrix& x, std::span<const double> y,
                  LatentMode mode, std::vector<double>* norms = nullptr) {
    if (x.rows() < 2) {
      throw DegenerateInputError("training step needs a batch of at least 2");
    }
    if (x.rows() != y.size()) {
      throw ShapeError("batch has " + std::to_string(x.rows()) + " rows but " +
                       std::to_string(y.size()) + " labels");
    }
    const dp::DpConfig* cfg = nullptr;
    if (mode == LatentMode::kDp) {
      if (!model_.train_dp()) {
        throw StateError("dp training requested before the clip threshold is set");
      }
      cfg = &*model_.train_dp();
    }
    model_.encoder_norm().set_mode(nn::NormMode::kTrain);

    StepLosses losses;
    // Phase 1: φ.
    {
      ForwardPass f = model_.Forward(x, mode, cfg, &noise_, true, true);
      if (norms != nullptr) {
        for (std::size_t r = 0; r < f.z.rows(); ++r) {
          norms->push_back(nn::L1Norm(f.z.row(r)));
        }
      }
      last_z_ = f.z;
      const nn::BceResult adv = nn::BceLoss(f.p, y, /*flipped=*/true);
      const nn::CosineLossResult rec = nn::CosineLoss(f.x, f.x_hat);
      losses.adv = adv.value;
      losses.rec = rec.value;
      std::vector<double> grad_p = adv.grad;
      for (double& g : grad_p) g *= cfg_.adv_weight;
      model_.ZeroPhiGrad();
      model_.BackwardPhi(f, rec.grad_x_hat, grad_p);
      auto phi = model_.PhiParams();
      phi_opt_.Step(phi);
    }
    // Phase 2: θ.
    {
      ForwardPass f = model_.Forward(x, mode, cfg, &noise_, false, true);
      const nn::BceResult disc = nn::BceLoss(f.p, y, /*flipped=*/false);
      losses.disc = disc.value;
      model_.ZeroThetaGrad();
      model_.BackwardTheta(f, disc.grad);
      auto theta = model_.ThetaParams();
      theta_opt_.Step(theta);
    }
    return losses;
  }

  // Runs the warm-up epochs with the dp layer bypassed and fixes C to the
  // median latent L1 norm observed.
  double EstimateClipThreshold(const LabeledData& data) {
    CheckData(data);
    std::vector<double> norms;
    for (std::size_t e = 0; e < cfg_.warmup_epochs; ++e) {
      RunEpoch(data, /*warmup=*/true, &norms);
    }
    if (norms.empty()) throw DataError("warm-up saw no latent vectors");
    const double c = Median(std::move(norms));
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw TrainingError("estimated clip threshold is not positive: " +
                          std::to_string(c));
    }
    model_.set_train_dp(dp::DpConfig(c, cfg_.epsilon_tr));
    model_.set_epsilon_tr(cfg_.epsilon_tr);
    trace_.clip_threshold = c;
    return c;
  }

  void RunEpoch(const LabeledData& data, bool warmup,
                std::vector<double>* norms = nullptr) {
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Shuffle(order.begin(), order.end(), shuffle_);
    const LatentMode mode = warmup ? LatentMode::kBypass : LatentMode::kDp;

    EpochRecord epoch{.epoch = epoch_index_, .warmup = warmup, .steps = 0, .mean = {}};
    for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
      const std::size_t count = std::min(cfg_.batch_size, n - start);
      if (count < 2) break;
      const std::span<const std::size_t> idx(order.data() + start, count);
      const nn::Matrix x = nn::GatherRows(data.x, idx);
      std::vector<double> y(count);
      for (std::size_t i = 0; i < count; ++i) y[i] = data.y[idx[i]];

      StepLosses l;
      try {
        l = Step(x, y, mode, norms);
      } catch (const DegenerateInputError& e) {
        throw TrainingError(std::string(e.what()) + " at step " +
                            std::to_string(trace_.steps.size()) + "\n" + TraceTail());
      }
      StepRecord rec{.epoch = epoch_index_,
                     .step = trace_.steps.size(),
                     .warmup = warmup,
                     .losses = l};
      RecordNorms(rec);
      trace_.steps.push_back(rec);
      if (!std::isfinite(l.disc) || !std::isfinite(l.adv) ||
          !std::isfinite(l.rec) || !last_z_.AllFinite()) {
        throw TrainingError("non-finite loss at step " +
                            std::to_string(rec.step) + "\n" + TraceTail());
      }
      epoch.mean.disc += l.disc;
      epoch.mean.adv += l.adv;
      epoch.mean.rec += l.rec;
      ++epoch.steps;
    }
    if (epoch.steps > 0) {
      const double inv = 1.0 / static_cast<double>(epoch.steps);
      epoch.mean.disc *= inv;
      epoch.mean.adv *= inv;
      epoch.mean.rec *= inv;
    }
    trace_.epochs.push_back(epoch);
    ++epoch_index_;
  }

 private:
  void CheckData(const LabeledData& data) const {
    if (data.size() < 2) throw DataError("training needs at least 2 samples");
    if (data.x.cols() != model_.dims().input_dim) {
      throw ShapeError("training data has dimension " +
                       std::to_string(data.x.cols()) + ", model expects " +
                       std::to_string(model_.dims().input_dim));
    }
    if (!data.x.AllFinite()) throw DataError("training data contains non-finite values");
    if (data.y.size() != data.size()) {
      throw DataError("label count does not match sample count");
    }
    if (!HasBothClasses(data.y)) {
      throw DataError("training data must contain both gender classes");
    }
  }

  void RecordNorms(StepRecord& rec) const {
    double sum = 0.0;
    double lo = dp::kInfinity;
    double hi = 0.0;
    for (std::size_t r = 0; r < last_z_.rows(); ++r) {
      const double v = nn::L1Norm(last_z_.row(r));
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rec.z_l1_mean = sum / static_cast<double>(last_z_.rows());
    rec.z_l1_min = lo;
    rec.z_l1_max = hi;
  }

  std::string TraceTail() const {
    std::ostringstream out;
    out << "last steps (epoch step disc adv rec |z|1_mean):\n";
    const std::size_t n = trace_.steps.size();
    for (std::size_t i = n > 5 ? n - 5 : 0; i < n; ++i) {
      const auto& s = trace_.steps[i];
      out << "  " << s.epoch << ' ' << s.step << ' ' << s.losses.disc << ' '
          << s.losses.adv << ' ' << s.losses.rec << ' ' << s.z_l1_mean << '\n';
    }
    return out.str();
  }

  GaaeModel& model_;
  TrainConfig cfg_;
  nn::AdamState phi_opt_;
  nn::AdamState theta_opt_;
  dp::NoiseSource noise_;
  Rng shuffle_;
  TrainTrace trace_;
  nn::Matrix last_z_;
  std::size_t epoch_index_ = 0;

};

// Warm-up, clip-threshold estimation, then cfg.epochs epochs with the dp
// layer at ε_tr. The discriminator stays in the model (for checkpoints);
// export drops it.
inline TrainTrace Train(GaaeModel& model, const LabeledData& data,
                        const TrainConfig& cfg) {
  Trainer trainer(model, cfg);
  trainer.EstimateClipThreshold(data);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    trainer.RunEpoch(data, /*warmup=*/false);
  }
  model.encoder_norm().set_mode(nn::NormMode::kEval);
  model.set_trained(true);
  return trainer.TakeTrace();
}

// Encoder output with frozen batch-norm statistics.
inline nn::Matrix EncodeEval(GaaeModel& model, const nn::Matrix& x) {
  model.encoder_norm().set_mode(nn::NormMode::kEval);
  const nn::Matrix pre = model.encoder().Forward(x);
  return model.encoder_norm().Forward(
      nn::ActivationForward(nn::Activation::kRelu, pre), nullptr, false);
}

inline nn::Matrix Decode(const GaaeModel& model, const nn::Matrix& latent) {
  return nn::ActivationForward(nn::Activation::kTanh,
                               model.decoder().Forward(latent));
}

// x̃ = d(dp(e(x))) at ε_ts, row r drawing noise from noise.Fork(r). With
// ε_ts = ∞ only clipping is applied and the map is deterministic. Every
// noisy row spends ε_ts in `ledger` when one is given. The discriminator
// is never evaluated here.
inline nn::Matrix Protect(GaaeModel& model, const nn::Matrix& x,
                          double epsilon_ts, const dp::NoiseSource& noise,
                          dp::BudgetLedger* ledger = nullptr,
                          const std::string& release_prefix = "row") {
  if (!model.trained() || !model.train_dp()) {
    throw StateError("protect requires a trained model with a clip threshold");
  }
  const dp::DpConfig cfg = model.train_dp()->WithEpsilon(epsilon_ts);
  nn::Matrix latent = EncodeEval(model, x);
  for (std::size_t r = 0; r < latent.rows(); ++r) {
    dp::NoiseSource row_noise = noise.Fork(r);
    const auto out = dp::DpApply(latent.row(r), cfg, row_noise);
    std::copy(out.begin(), out.end(), latent.row(r).begin());
    if (ledger != nullptr && !cfg.noiseless()) {
      ledger->Record(release_prefix + ":" + std::to_string(r), epsilon_ts);
    }
  }
  return Decode(model, latent);
}

}  // namespace gaae::model
