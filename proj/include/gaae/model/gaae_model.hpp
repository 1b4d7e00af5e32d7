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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/nn/adam.hpp"
#include "gaae/nn/layers.hpp"
#include "gaae/nn/loss.hpp"
#include "gaae/nn/matrix.hpp"
#include "gaae/random.hpp"

namespace gaae::model {

struct ModelDims {
  std::size_t input_dim = 192;
  std::size_t latent_dim = 64;
  std::size_t disc_hidden = 32;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// How the latent code is treated between encoder and decoder/discriminator.
enum class LatentMode {
  kBypass,  // z passed through untouched (warm-up before C is known)
  kDp,      // clip to C and add Laplace noise at the configured ε
};

// Everything the backward passes need from one forward evaluation.
struct ForwardPass {
  nn::Matrix x;
  nn::Matrix enc_pre;
  nn::Matrix enc_act;
  nn::BatchNorm::Cache norm;
  nn::Matrix z;
  std::optional<dp::DpLayer> dp_layer;
  nn::Matrix z_dp;
  nn::Matrix dec_pre;
  nn::Matrix x_hat;
  nn::Matrix disc_pre;
  nn::Matrix disc_act;
  nn::Matrix disc_logit;
  std::vector<double> p;  // discriminator probability of "female"
};

// Encoder e(x) = BN(ReLU(W₁x + b₁)), decoder d(z) = tanh(W₂z + b₂),
// discriminator c(z) = σ(W₄ ReLU(W₃z + b₃) + b₄). Encoder and decoder form
// the φ group; the discriminator is the θ group.
class GaaeModel {
 public:
  GaaeModel() = default;
  GaaeModel(ModelDims dims, std::uint64_t init_seed)
      : dims_(dims),
        encoder_(dims.input_dim, dims.latent_dim),
        encoder_norm_(dims.latent_dim),
        decoder_(dims.latent_dim, dims.input_dim),
        disc_hidden_(dims.latent_dim, dims.disc_hidden),
        disc_out_(dims.disc_hidden, 1) {
    if (dims.input_dim == 0 || dims.latent_dim == 0 || dims.disc_hidden == 0) {
      throw ConfigError("model dimensions must be positive");
    }
    Rng rng(init_seed);
    encoder_.Initialize(rng);
    decoder_.Initialize(rng);
    disc_hidden_.Initialize(rng);
    disc_out_.Initialize(rng);
  }

  const ModelDims& dims() const { return dims_; }

  nn::Linear& encoder() { return encoder_; }
  nn::BatchNorm& encoder_norm() { return encoder_norm_; }
  nn::Linear& decoder() { return decoder_; }
  nn::Linear& disc_hidden() { return disc_hidden_; }
  nn::Linear& disc_out() { return disc_out_; }
  const nn::Linear& encoder() const { return encoder_; }
  const nn::BatchNorm& encoder_norm() const { return encoder_norm_; }
  const nn::Linear& decoder() const { return decoder_; }
  const nn::Linear& disc_hidden() const { return disc_hidden_; }
  const nn::Linear& disc_out() const { return disc_out_; }

  // Training-time dp configuration; empty until the clip threshold is fixed.
  const std::optional<dp::DpConfig>& train_dp() const { return train_dp_; }
  void set_train_dp(dp::DpConfig cfg) { train_dp_ = cfg; }
  double epsilon_tr() const { return epsilon_tr_; }
  void set_epsilon_tr(double eps) { epsilon_tr_ = eps; }

  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }
  bool has_discriminator() const { return has_discriminator_; }

  // Deployment drops c_θ; afterwards only the protection path is usable.
  void RemoveDiscriminator() {
    has_discriminator_ = false;
    disc_hidden_ = nn::Linear(dims_.latent_dim, dims_.disc_hidden);
    disc_out_ = nn::Linear(dims_.disc_hidden, 1);
  }
  void MarkDiscriminatorPresent() { has_discriminator_ = true; }

  std::uint64_t discriminator_evaluations() const { return disc_calls_; }

  std::vector<nn::ParamRef> PhiParams() {
    std::vector<nn::ParamRef> out;
    encoder_.AppendParams(out);
    encoder_norm_.AppendParams(out);
    decoder_.AppendParams(out);
    return out;
  }

  std::vector<nn::ParamRef> ThetaParams() {
    std::vector<nn::ParamRef> out;
    disc_hidden_.AppendParams(out);
    disc_out_.AppendParams(out);
    return out;
  }

  void ZeroPhiGrad() {
    encoder_.ZeroGrad();
    encoder_norm_.ZeroGrad();
    decoder_.ZeroGrad();
  }

  void ZeroThetaGrad() {
    disc_hidden_.ZeroGrad();
    disc_out_.ZeroGrad();
  }

  // Runs the encoder, latent treatment, decoder and (optionally) the
  // discriminator. `dp_cfg` is required for LatentMode::kDp.
  ForwardPass Forward(const nn::Matrix& x, LatentMode mode,
                      const dp::DpConfig* dp_cfg, dp::NoiseSource* noise,
                      bool update_norm_stats, bool with_discriminator) {
    if (x.cols() != dims_.input_dim) {
      throw ShapeError("model expects " + std::to_string(dims_.input_dim) +
                       "-dim inputs, got " + nn::ShapeString(x));
    }
    ForwardPass f;
    f.x = x;
    f.enc_pre = encoder_.Forward(x);
    f.enc_act = nn::ActivationForward(nn::Activation::kRelu, f.enc_pre);
    f.z = encoder_norm_.Forward(f.enc_act, &f.norm, update_norm_stats);
    if (mode == LatentMode::kDp) {
      if (dp_cfg == nullptr || noise == nullptr) {
        throw StateError("dp latent mode needs a configuration and a noise source");
      }
      f.dp_layer.emplace(*dp_cfg);
      f.z_dp = f.dp_layer->Forward(f.z, *noise);
    } else {
      f.z_dp = f.z;
    }
    f.dec_pre = decoder_.Forward(f.z_dp);
    f.x_hat = nn::ActivationForward(nn::Activation::kTanh, f.dec_pre);
    if (with_discriminator) RunDiscriminator(f);
    return f;
  }

  // Gradients of L_adv·adv_weight + L_rec into the φ group. The gradient
  // flows through the discriminator without touching θ's accumulators.
  void BackwardPhi(const ForwardPass& f, const nn::Matrix& grad_x_hat,
                   std::span<const double> grad_p) {
    nn::Matrix grad_z_dp = decoder_.Backward(
        f.z_dp,
        nn::ActivationBackward(nn::Activation::kTanh, f.dec_pre, grad_x_hat));
    if (!grad_p.empty()) {
      const nn::Matrix grad_disc_z = DiscriminatorInputGrad(f, grad_p);
      auto dst = grad_z_dp.values();
      const auto src = grad_disc_z.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    const nn::Matrix grad_z =
        f.dp_layer ? f.dp_layer->Backward(grad_z_dp) : grad_z_dp;
    const nn::Matrix grad_act = encoder_norm_.Backward(f.norm, grad_z);
    encoder_.AccumulateGrad(
        f.x, nn::ActivationBackward(nn::Activation::kRelu, f.enc_pre, grad_act));
  }

  // Gradients of L_disc into the θ group.
  void BackwardTheta(const ForwardPass& f, std::span<const double> grad_p) {
    const nn::Matrix grad_logit = LogitGrad(f, grad_p);
    const nn::Matrix grad_act = disc_out_.Backward(f.disc_act, grad_logit);
    disc_hidden_.AccumulateGrad(
        f.z_dp,
        nn::ActivationBackward(nn::Activation::kRelu, f.disc_pre, grad_act));
  }

  // Discriminator probabilities for latent codes (diagnostics and tests).
  std::vector<double> Discriminate(const nn::Matrix& latent) {
    ForwardPass f;
    f.z_dp = latent;
    RunDiscriminator(f);
    return f.p;
  }

 private:
  void RunDiscriminator(ForwardPass& f) {
    if (!has_discriminator_) {
      throw StateError("discriminator was removed from this model");
    }
    ++disc_calls_;
    f.disc_pre = disc_hidden_.Forward(f.z_dp);
    f.disc_act = nn::ActivationForward(nn::Activation::kRelu, f.disc_pre);
    f.disc_logit = disc_out_.Forward(f.disc_act);
    f.p.resize(f.disc_logit.rows());
    for (std::size_t b = 0; b < f.p.size(); ++b) {
      f.p[b] = nn::ActivationValue(nn::Activation::kSigmoid, f.disc_logit(b, 0));
    }
  }

  nn::Matrix LogitGrad(const ForwardPass& f, std::span<const double> grad_p) const {
    if (grad_p.size() != f.disc_logit.rows()) {
      throw ShapeError("discriminator gradient has " +
                       std::to_string(grad_p.size()) + " entries for " +
                       std::to_string(f.disc_logit.rows()) + " rows");
    }
    nn::Matrix g(grad_p.size(), 1);
    for (std::size_t b = 0; b < grad_p.size(); ++b) g(b, 0) = grad_p[b];
    return nn::ActivationBackward(nn::Activation::kSigmoid, f.disc_logit, g);
  }

  nn::Matrix DiscriminatorInputGrad(const ForwardPass& f,
                                    std::span<const double> grad_p) const {
    const nn::Matrix grad_act = disc_out_.BackwardInput(LogitGrad(f, grad_p));
    return disc_hidden_.BackwardInput(
        nn::ActivationBackward(nn::Activation::kRelu, f.disc_pre, grad_act));
  }

  ModelDims dims_;
  nn::Linear encoder_;
  nn::BatchNorm encoder_norm_;
  nn::Linear decoder_;
  nn::Linear disc_hidden_;
  nn::Linear disc_out_;
  std::optional<dp::DpConfig> train_dp_;
  double epsilon_tr_ = dp::kInfinity;
  bool trained_ = false;
  bool has_discriminator_ = true;
  std::uint64_t disc_calls_ = 0;
};

}  // namespace gaae::model
