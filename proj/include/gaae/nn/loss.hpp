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
#include <span>
#include <string>
#include <vector>

#include "gaae/error.hpp"
#include "gaae/nn/matrix.hpp"

namespace gaae::nn {

// Probabilities are clamped to [kProbabilityFloor, 1 - kProbabilityFloor]
// before any logarithm.
inline constexpr double kProbabilityFloor = 1e-7;

inline double ClampProbability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

struct BceResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d p, batch mean already applied
};

// Batch-mean binary cross-entropy.
//   flipped = false:  -y log p       - (1 - y) log(1 - p)
//   flipped = true:   -y log(1 - p)  - (1 - y) log p
// The flipped form is the encoder's objective against the discriminator.
inline BceResult BceLoss(std::span<const double> p, std::span<const double> y,
                         bool flipped) {
  if (p.size() != y.size()) {
    throw ShapeError("bce: " + std::to_string(p.size()) +
                     " probabilities vs " + std::to_string(y.size()) +
                     " labels");
  }
  if (p.empty()) throw ShapeError("bce: empty batch");
  const double inv_n = 1.0 / static_cast<double>(p.size());
  BceResult out;
  out.grad.resize(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = ClampProbability(p[i]);
    const double yi = y[i];
    double term = 0.0;
    double grad = 0.0;
    if (!flipped) {
      term = -yi * std::log(q) - (1.0 - yi) * std::log(1.0 - q);
      grad = -yi / q + (1.0 - yi) / (1.0 - q);
    } else {
      term = -yi * std::log(1.0 - q) - (1.0 - yi) * std::log(q);
      grad = yi / (1.0 - q) - (1.0 - yi) / q;
    }
    total += term;
    out.grad[i] = grad * inv_n;
  }
  out.value = total * inv_n;
  return out;
}

struct CosineLossResult {
  double value = 0.0;
  Matrix grad_x_hat;  // batch mean already applied
};

// Batch mean of 1 - cos(x_b, x_hat_b), with the gradient wrt x_hat.
inline CosineLossResult CosineLoss(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw ShapeError("cosine loss shapes " + ShapeString(x) + " vs " +
                     ShapeString(x_hat));
  }
  if (x.rows() == 0) throw ShapeError("cosine loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  CosineLossResult out;
  out.grad_x_hat = Matrix(x.rows(), x.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto a = x.row(b);
    const auto h = x_hat.row(b);
    const double na = L2Norm(a);
    const double nh = L2Norm(h);
    if (na == 0.0 || nh == 0.0) {
      throw DegenerateInputError("cosine loss: zero-norm vector in row " +
                                 std::to_string(b));
    }
    const double cos = Dot(a, h) / (na * nh);
    total += 1.0 - cos;
    // d(-cos)/dh = -(a / (|a||h|) - cos · h / |h|²)
    auto g = out.grad_x_hat.row(b);
    for (std::size_t j = 0; j < a.size(); ++j) {
      g[j] = -(a[j] / (na * nh) - cos * h[j] / (nh * nh)) * inv_n;
    }
  }
  out.value = total * inv_n;
  return out;
}

inline double CosineSimilarity(std::span<const double> a,
                               std::span<const double> b) {
  const double na = L2Norm(a);
  const double nb = L2Norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine similarity of a zero-norm vector");
  }
  return Dot(a, b) / (na * nb);
}

}  // namespace gaae::nn
