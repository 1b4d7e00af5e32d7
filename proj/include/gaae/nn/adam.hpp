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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaae/error.hpp"
#include "gaae/nn/layers.hpp"

namespace gaae::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for one parameter group, laid out as the concatenation of
// the group's tensors in registration order.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t size, AdamOptions options)
      : m_(size, 0.0), v_(size, 0.0), options_(options) {}

  std::size_t size() const { return m_.size(); }
  std::uint64_t step() const { return t_; }
  const AdamOptions& options() const { return options_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

  // Bias-corrected Adam update of `params` in place; increments t once.
  void Step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != m_.size()) {
      throw ShapeError("adam: state holds " + std::to_string(m_.size()) +
                       " entries, got " + std::to_string(params.size()) +
                       " params and " + std::to_string(grads.size()) +
                       " grads");
    }
    Begin();
    Apply(0, params, grads);
  }

  // Same update applied across several tensors that share one step counter.
  void Step(std::span<const ParamRef> group) {
    std::size_t total = 0;
    for (const auto& p : group) {
      if (p.value.size() != p.grad.size()) {
        throw ShapeError("adam: parameter/gradient size mismatch");
      }
      total += p.value.size();
    }
    if (total != m_.size()) {
      throw ShapeError("adam: state holds " + std::to_string(m_.size()) +
                       " entries, group has " + std::to_string(total));
    }
    Begin();
    std::size_t offset = 0;
    for (const auto& p : group) {
      Apply(offset, p.value, p.grad);
      offset += p.value.size();
    }
  }

 private:
  void Begin() {
    ++t_;
    const double td = static_cast<double>(t_);
    correction1_ = 1.0 - std::pow(options_.beta1, td);
    correction2_ = 1.0 - std::pow(options_.beta2, td);
  }

  void Apply(std::size_t offset, std::span<double> params,
             std::span<const double> grads) {
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      double& m = m_[offset + i];
      double& v = v_[offset + i];
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      const double m_hat = m / correction1_;
      const double v_hat = v / correction2_;
      params[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }

  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
  AdamOptions options_;
  double correction1_ = 1.0;
  double correction2_ = 1.0;
};

inline std::size_t TotalSize(std::span<const ParamRef> group) {
  std::size_t total = 0;
  for (const auto& p : group) total += p.value.size();
  return total;
}

}  // namespace gaae::nn
