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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gaae/error.hpp"
#include "gaae/nn/matrix.hpp"
#include "gaae/random.hpp"

namespace gaae::nn {

// A trainable tensor and its gradient accumulator, as seen by an optimizer.
struct ParamRef {
  std::span<double> value;
  std::span<double> grad;
};

// Fully-connected layer computing input · Wᵀ + b. Weight is out×in.
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_features, std::size_t out_features)
      : weight_(out_features, in_features),
        bias_(out_features, 0.0),
        grad_weight_(out_features, in_features),
        grad_bias_(out_features, 0.0) {}

  std::size_t in_features() const { return weight_.cols(); }
  std::size_t out_features() const { return weight_.rows(); }

  Matrix& weight() { return weight_; }
  const Matrix& weight() const { return weight_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }
  const Matrix& grad_weight() const { return grad_weight_; }
  const std::vector<double>& grad_bias() const { return grad_bias_; }

  // Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero bias.
  void Initialize(Rng& rng) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(in_features() + out_features()));
    for (double& w : weight_.values()) w = UniformSymmetric(rng, limit);
    std::fill(bias_.begin(), bias_.end(), 0.0);
    ZeroGrad();
  }

  Matrix Forward(const Matrix& input) const {
    if (input.cols() != in_features()) {
      throw ShapeError("linear forward expects " +
                       std::to_string(in_features()) + " input columns, got " +
                       ShapeString(input));
    }
    Matrix out(input.rows(), out_features());
    for (std::size_t b = 0; b < input.rows(); ++b) {
      const auto x = input.row(b);
      auto y = out.row(b);
      for (std::size_t o = 0; o < out_features(); ++o) {
        y[o] = Dot(x, weight_.row(o)) + bias_[o];
      }
    }
    return out;
  }

  // Gradient with respect to the input only; parameter gradients untouched.
  Matrix BackwardInput(const Matrix& grad_out) const {
    if (grad_out.cols() != out_features()) {
      throw ShapeError("linear backward expects " +
                       std::to_string(out_features()) +
                       " gradient columns, got " + ShapeString(grad_out));
    }
    Matrix grad_in(grad_out.rows(), in_features());
    for (std::size_t b = 0; b < grad_out.rows(); ++b) {
      auto gi = grad_in.row(b);
      const auto go = grad_out.row(b);
      for (std::size_t o = 0; o < out_features(); ++o) {
        const double g = go[o];
        if (g == 0.0) continue;
        const auto w = weight_.row(o);
        for (std::size_t i = 0; i < in_features(); ++i) gi[i] += g * w[i];
      }
    }
    return grad_in;
  }

  // grad_weight += grad_outᵀ · input, grad_bias += column sums of grad_out.
  void AccumulateGrad(const Matrix& input, const Matrix& grad_out) {
    if (input.rows() != grad_out.rows() || input.cols() != in_features() ||
        grad_out.cols() != out_features()) {
      throw ShapeError("linear gradient shapes " + ShapeString(input) +
                       " and " + ShapeString(grad_out) +
                       " do not match layer " + std::to_string(in_features()) +
                       "->" + std::to_string(out_features()));
    }
    for (std::size_t b = 0; b < input.rows(); ++b) {
      const auto x = input.row(b);
      const auto go = grad_out.row(b);
      for (std::size_t o = 0; o < out_features(); ++o) {
        const double g = go[o];
        grad_bias_[o] += g;
        if (g == 0.0) continue;
        auto gw = grad_weight_.row(o);
        for (std::size_t i = 0; i < in_features(); ++i) gw[i] += g * x[i];
      }
    }
  }

  Matrix Backward(const Matrix& input, const Matrix& grad_out) {
    AccumulateGrad(input, grad_out);
    return BackwardInput(grad_out);
  }

  void ZeroGrad() {
    grad_weight_.Fill(0.0);
    std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
  }

  void AppendParams(std::vector<ParamRef>& out) {
    out.push_back({weight_.values(), grad_weight_.values()});
    out.push_back({bias_, grad_bias_});
  }

 private:
  Matrix weight_;
  std::vector<double> bias_;
  Matrix grad_weight_;
  std::vector<double> grad_bias_;
};

enum class Activation { kRelu, kTanh, kSigmoid };

inline double ActivationValue(Activation kind, double x) {
  switch (kind) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

inline Matrix ActivationForward(Activation kind, const Matrix& input) {
  Matrix out(input.rows(), input.cols());
  auto dst = out.values();
  const auto src = input.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = ActivationValue(kind, src[i]);
  }
  return out;
}

// grad_out ⊙ f'(input). The derivative is evaluated from the pre-activation.
inline Matrix ActivationBackward(Activation kind, const Matrix& input,
                                 const Matrix& grad_out) {
  if (input.rows() != grad_out.rows() || input.cols() != grad_out.cols()) {
    throw ShapeError("activation backward shapes " + ShapeString(input) +
                     " vs " + ShapeString(grad_out));
  }
  Matrix out(input.rows(), input.cols());
  auto dst = out.values();
  const auto x = input.values();
  const auto g = grad_out.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = 0.0;
    switch (kind) {
      case Activation::kRelu:
        d = x[i] > 0.0 ? 1.0 : 0.0;
        break;
      case Activation::kTanh: {
        const double t = std::tanh(x[i]);
        d = 1.0 - t * t;
        break;
      }
      case Activation::kSigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        d = s * (1.0 - s);
        break;
      }
    }
    dst[i] = g[i] * d;
  }
  return out;
}

enum class NormMode { kTrain, kEval };

// Batch normalization over the batch dimension with learnable affine terms.
class BatchNorm {
 public:
  struct Cache {
    Matrix normalized;             // x̂ before the affine map
    std::vector<double> inv_std;   // 1 / sqrt(var + eps) per column
    NormMode mode = NormMode::kTrain;
  };

  BatchNorm() = default;
  explicit BatchNorm(std::size_t features, double momentum = 0.1,
                     double eps = 1e-5)
      : gamma_(features, 1.0),
        beta_(features, 0.0),
        running_mean_(features, 0.0),
        running_var_(features, 1.0),
        grad_gamma_(features, 0.0),
        grad_beta_(features, 0.0),
        momentum_(momentum),
        eps_(eps) {}

  std::size_t features() const { return gamma_.size(); }
  NormMode mode() const { return mode_; }
  void set_mode(NormMode mode) { mode_ = mode; }
  double momentum() const { return momentum_; }
  double eps() const { return eps_; }

  std::vector<double>& gamma() { return gamma_; }
  std::vector<double>& beta() { return beta_; }
  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }
  const std::vector<double>& gamma() const { return gamma_; }
  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }
  const std::vector<double>& grad_gamma() const { return grad_gamma_; }
  const std::vector<double>& grad_beta() const { return grad_beta_; }

  // In train mode normalizes with batch statistics (biased variance) and,
  // when update_running is set, folds them into the running estimates with
  // the unbiased variance. Eval mode reads the running estimates only.
  Matrix Forward(const Matrix& input, Cache* cache,
                 bool update_running = true) {
    if (input.cols() != features()) {
      throw ShapeError("batch norm expects " + std::to_string(features()) +
                       " columns, got " + ShapeString(input));
    }
    const std::size_t n = input.rows();
    const std::size_t f = features();
    std::vector<double> mean(f, 0.0);
    std::vector<double> var(f, 0.0);
    if (mode_ == NormMode::kTrain) {
      if (n < 2) {
        throw DegenerateInputError(
            "batch norm in train mode needs at least 2 rows, got " +
            std::to_string(n));
      }
      for (std::size_t b = 0; b < n; ++b) {
        const auto x = input.row(b);
        for (std::size_t j = 0; j < f; ++j) mean[j] += x[j];
      }
      for (double& m : mean) m /= static_cast<double>(n);
      for (std::size_t b = 0; b < n; ++b) {
        const auto x = input.row(b);
        for (std::size_t j = 0; j < f; ++j) {
          const double d = x[j] - mean[j];
          var[j] += d * d;
        }
      }
      for (double& v : var) v /= static_cast<double>(n);
      if (update_running) {
        const double unbias =
            static_cast<double>(n) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < f; ++j) {
          running_mean_[j] =
              (1.0 - momentum_) * running_mean_[j] + momentum_ * mean[j];
          running_var_[j] =
              (1.0 - momentum_) * running_var_[j] + momentum_ * var[j] * unbias;
        }
      }
    } else {
      mean = running_mean_;
      var = running_var_;
    }

    Cache local;
    Cache& c = cache != nullptr ? *cache : local;
    c.mode = mode_;
    c.inv_std.resize(f);
    for (std::size_t j = 0; j < f; ++j) c.inv_std[j] = 1.0 / std::sqrt(var[j] + eps_);
    c.normalized = Matrix(n, f);
    Matrix out(n, f);
    for (std::size_t b = 0; b < n; ++b) {
      const auto x = input.row(b);
      auto xh = c.normalized.row(b);
      auto y = out.row(b);
      for (std::size_t j = 0; j < f; ++j) {
        xh[j] = (x[j] - mean[j]) * c.inv_std[j];
        y[j] = gamma_[j] * xh[j] + beta_[j];
      }
    }
    return out;
  }

  // Accumulates gamma/beta gradients and returns the input gradient.
  Matrix Backward(const Cache& cache, const Matrix& grad_out) {
    const std::size_t n = grad_out.rows();
    const std::size_t f = features();
    if (grad_out.cols() != f || cache.normalized.rows() != n) {
      throw ShapeError("batch norm backward shape " + ShapeString(grad_out));
    }
    std::vector<double> sum_g(f, 0.0);
    std::vector<double> sum_gx(f, 0.0);
    for (std::size_t b = 0; b < n; ++b) {
      const auto g = grad_out.row(b);
      const auto xh = cache.normalized.row(b);
      for (std::size_t j = 0; j < f; ++j) {
        sum_g[j] += g[j];
        sum_gx[j] += g[j] * xh[j];
      }
    }
    for (std::size_t j = 0; j < f; ++j) {
      grad_gamma_[j] += sum_gx[j];
      grad_beta_[j] += sum_g[j];
    }
    Matrix grad_in(n, f);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t b = 0; b < n; ++b) {
      const auto g = grad_out.row(b);
      const auto xh = cache.normalized.row(b);
      auto gi = grad_in.row(b);
      for (std::size_t j = 0; j < f; ++j) {
        const double scale = gamma_[j] * cache.inv_std[j];
        if (cache.mode == NormMode::kTrain) {
          gi[j] = scale * (g[j] - inv_n * sum_g[j] - xh[j] * inv_n * sum_gx[j]);
        } else {
          gi[j] = scale * g[j];
        }
      }
    }
    return grad_in;
  }

  void ZeroGrad() {
    std::fill(grad_gamma_.begin(), grad_gamma_.end(), 0.0);
    std::fill(grad_beta_.begin(), grad_beta_.end(), 0.0);
  }

  void AppendParams(std::vector<ParamRef>& out) {
    out.push_back({gamma_, grad_gamma_});
    out.push_back({beta_, grad_beta_});
  }

 private:
  std::vector<double> gamma_;
  std::vector<double> beta_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
  std::vector<double> grad_gamma_;
  std::vector<double> grad_beta_;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  NormMode mode_ = NormMode::kTrain;
};

}  // namespace gaae::nn
