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

// GAAE checkpoint container (see docs/checkpoint_format.md). Little-endian:
//
//   0   4  magic "GAAE"
//   4   4  u32 version (= 1)
//   8   4  u32 d (input dim)
//   12  4  u32 l (latent dim)
//   16  4  u32 h (discriminator hidden width)
//   20  8  f64 C (0 when no threshold has been estimated)
//   28  8  f64 ε_tr (+inf allowed)
//   36  1  u8 flags: bit0 discriminator present, bit1 trained, bit2 C set
//   37  8  f64 batch-norm momentum
//   45  8  f64 batch-norm eps
//   53  .. f64 tensors in order:
//          encoder W (l×d), encoder b (l), bn γ (l), bn β (l),
//          bn running mean (l), bn running var (l), decoder W (d×l),
//          decoder b (d), and when bit0 is set: disc W₁ (h×l), disc b₁ (h),
//          disc W₂ (1×h), disc b₂ (1).

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "gaae/byte_io.hpp"
#include "gaae/dp/mechanism.hpp"
#include "gaae/error.hpp"
#include "gaae/model/gaae_model.hpp"

namespace gaae::model {

inline constexpr std::string_view kCheckpointMagic = "GAAE";
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum CheckpointFlags : std::uint8_t {
  kHasDiscriminator = 1u << 0,
  kTrained = 1u << 1,
  kHasClip = 1u << 2,
};

inline std::string EncodeCheckpoint(const GaaeModel& model,
                                    bool include_discriminator = true) {
  const bool with_disc = include_discriminator && model.has_discriminator();
  const ModelDims& dims = model.dims();
  ByteWriter w;
  w.Bytes(kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(dims.input_dim));
  w.U32(static_cast<std::uint32_t>(dims.latent_dim));
  w.U32(static_cast<std::uint32_t>(dims.disc_hidden));
  w.F64(model.train_dp() ? model.train_dp()->clip() : 0.0);
  w.F64(model.epsilon_tr());
  std::uint8_t flags = 0;
  if (with_disc) flags |= kHasDiscriminator;
  if (model.trained()) flags |= kTrained;
  if (model.train_dp()) flags |= kHasClip;
  w.U8(flags);
  const auto& bn = model.encoder_norm();
  w.F64(bn.momentum());
  w.F64(bn.eps());
  w.F64s(model.encoder().weight().values());
  w.F64s(model.encoder().bias());
  w.F64s(bn.gamma());
  w.F64s(bn.beta());
  w.F64s(bn.running_mean());
  w.F64s(bn.running_var());
  w.F64s(model.decoder().weight().values());
  w.F64s(model.decoder().bias());
  if (with_disc) {
    w.F64s(model.disc_hidden().weight().values());
    w.F64s(model.disc_hidden().bias());
    w.F64s(model.disc_out().weight().values());
    w.F64s(model.disc_out().bias());
  }
  return w.Release();
}

namespace internal {

inline void ReadTensor(ByteReader& r, std::span<double> out, const char* what) {
  const std::uint64_t at = r.offset();
  r.F64s(out, what);
  for (double v : out) {
    if (!std::isfinite(v)) {
      throw FormatError(std::string("non-finite value in ") + what, at);
    }
  }
}

}  // namespace internal

inline GaaeModel DecodeCheckpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4, "magic") != kCheckpointMagic) {
    throw FormatError("bad magic, expected GAAE", 0);
  }
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.U32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version),
                      version_at);
  }
  const std::uint64_t dims_at = r.offset();
  ModelDims dims;
  dims.input_dim = r.U32("input dim");
  dims.latent_dim = r.U32("latent dim");
  dims.disc_hidden = r.U32("discriminator width");
  if (dims.input_dim == 0 || dims.latent_dim == 0 || dims.disc_hidden == 0) {
    throw FormatError("zero model dimension", dims_at);
  }
  const std::uint64_t clip_at = r.offset();
  const double clip = r.F64("clip threshold");
  const double eps_tr = r.F64("epsilon_tr");
  const std::uint64_t flags_at = r.offset();
  const std::uint8_t flags = r.U8("flags");
  if ((flags & ~(kHasDiscriminator | kTrained | kHasClip)) != 0) {
    throw FormatError("unknown flag bits", flags_at);
  }
  if (!(eps_tr > 0.0)) throw FormatError("epsilon_tr must be positive", clip_at + 8);
  if ((flags & kHasClip) != 0 && !(clip > 0.0 && std::isfinite(clip))) {
    throw FormatError("clip threshold must be positive", clip_at);
  }
  const std::uint64_t bn_at = r.offset();
  const double momentum = r.F64("bn momentum");
  const double bn_eps = r.F64("bn eps");
  if (!(momentum > 0.0 && momentum < 1.0) || !(bn_eps > 0.0)) {
    throw FormatError("batch-norm constants out of range", bn_at);
  }

  GaaeModel model(dims, 0);
  model.encoder_norm() = nn::BatchNorm(dims.latent_dim, momentum, bn_eps);
  internal::ReadTensor(r, model.encoder().weight().values(), "encoder weight");
  internal::ReadTensor(r, model.encoder().bias(), "encoder bias");
  auto& bn = model.encoder_norm();
  internal::ReadTensor(r, bn.gamma(), "bn gamma");
  internal::ReadTensor(r, bn.beta(), "bn beta");
  internal::ReadTensor(r, bn.running_mean(), "bn running mean");
  const std::uint64_t var_at = r.offset();
  internal::ReadTensor(r, bn.running_var(), "bn running var");
  for (double v : bn.running_var()) {
    if (v < 0.0) throw FormatError("negative running variance", var_at);
  }
  internal::ReadTensor(r, model.decoder().weight().values(), "decoder weight");
  internal::ReadTensor(r, model.decoder().bias(), "decoder bias");
  if ((flags & kHasDiscriminator) != 0) {
    internal::ReadTensor(r, model.disc_hidden().weight().values(), "disc weight 1");
    internal::ReadTensor(r, model.disc_hidden().bias(), "disc bias 1");
    internal::ReadTensor(r, model.disc_out().weight().values(), "disc weight 2");
    internal::ReadTensor(r, model.disc_out().bias(), "disc bias 2");
  } else {
    model.RemoveDiscriminator();
  }
  r.ExpectEnd();

  if ((flags & kHasClip) != 0) model.set_train_dp(dp::DpConfig(clip, eps_tr));
  model.set_epsilon_tr(eps_tr);
  model.set_trained((flags & kTrained) != 0);
  bn.set_mode(model.trained() ? nn::NormMode::kEval : nn::NormMode::kTrain);
  return model;
}

inline void SaveCheckpoint(const std::filesystem::path& path,
                           const GaaeModel& model,
                           bool include_discriminator = true) {
  WriteFileBytes(path, EncodeCheckpoint(model, include_discriminator));
}

inline GaaeModel LoadCheckpoint(const std::filesystem::path& path) {
  const std::string bytes = ReadFileBytes(path);
  try {
    return DecodeCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

}  // namespace gaae::model
