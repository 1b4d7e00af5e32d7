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
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gaae/error.hpp"

namespace gaae::eval {

// Detection scores with binary labels (1 = positive / target).
struct ScoreSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void Add(double score, bool positive) {
    scores.push_back(score);
    labels.push_back(positive ? 1 : 0);
  }

  std::size_t size() const { return scores.size(); }

  std::pair<std::size_t, std::size_t> ClassCounts() const {
    if (scores.size() != labels.size()) {
      throw MetricError("score and label counts differ");
    }
    std::size_t pos = 0;
    for (auto l : labels) pos += l != 0;
    return {labels.size() - pos, pos};
  }
};

namespace internal {

inline std::pair<std::size_t, std::size_t> RequireBothClasses(const ScoreSet& s,
                                                              const char* what) {
  const auto counts = s.ClassCounts();
  if (counts.first == 0 || counts.second == 0) {
    throw MetricError(std::string(what) + " needs both classes present");
  }
  return counts;
}

// Indices sorted by score ascending, ties in a stable order.
inline std::vector<std::size_t> SortedOrder(const ScoreSet& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] < s.scores[b];
  });
  return order;
}

}  // namespace internal

// Area under the ROC curve via the Mann–Whitney statistic: the fraction of
// (negative, positive) pairs ranked correctly, ties counting one half.
// Counting is done in integer half-units so the result is a single rounding.
inline double RocAuc(const ScoreSet& s) {
  const auto [n0, n1] = internal::RequireBothClasses(s, "roc_auc");
  const auto order = internal::SortedOrder(s);
  // twice_u = Σ over positives of 2·(#negatives below) + (#negatives tied).
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::uint64_t neg = 0;
    std::uint64_t pos = 0;
    while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) {
      (s.labels[order[j]] != 0 ? pos : neg) += 1;
      ++j;
    }
    twice_u += pos * (2 * negatives_below + neg);
    negatives_below += neg;
    i = j;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(n0) * static_cast<double>(n1));
}

// Equal error rate on the ROC convex hull (ROCCH-EER). Operating points
// (P_fa, P_miss) are taken at every distinct threshold, the lower convex hull
// is built, and the EER is where the hull segment crosses P_fa = P_miss,
// linearly interpolated between the two adjacent hull vertices.
inline double Eer(const ScoreSet& s) {
  const auto [n_non, n_tar] = internal::RequireBothClasses(s, "eer");
  const auto order = internal::SortedOrder(s);

  // Sweep the threshold upward from below the minimum: everything accepted
  // (P_fa = 1, P_miss = 0) to nothing accepted (P_fa = 0, P_miss = 1).
  std::vector<std::pair<double, double>> points;  // (p_fa, p_miss)
  std::size_t tar_below = 0;
  std::size_t non_below = 0;
  points.emplace_back(1.0, 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && s.scores[order[j]] == s.scores[order[i]]) {
      (s.labels[order[j]] != 0 ? tar_below : non_below) += 1;
      ++j;
    }
    points.emplace_back(
        static_cast<double>(n_non - non_below) / static_cast<double>(n_non),
        static_cast<double>(tar_below) / static_cast<double>(n_tar));
    i = j;
  }
  std::reverse(points.begin(), points.end());  // p_fa ascending

  // Lower convex hull (Andrew's monotone chain).
  std::vector<std::pair<double, double>> hull;
  auto cross = [](const std::pair<double, double>& o,
                  const std::pair<double, double>& a,
                  const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  for (const auto& p : points) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }

  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const auto& a = hull[k];
    const auto& b = hull[k + 1];
    const double da = a.second - a.first;  // p_miss - p_fa, decreasing
    const double db = b.second - b.first;
    if (da >= 0.0 && db <= 0.0) {
      if (da == db) return a.first;
      const double t = da / (da - db);
      return a.first + t * (b.first - a.first);
    }
  }
  // Unreachable: the hull runs from (0, 1) to (1, 0).
  return 0.5;
}

// Spearman rank correlation with average ranks for ties.
inline double SpearmanCorrelation(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw MetricError("spearman needs two equal-length series of length >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
      for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
      i = j;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - ma) * (rb[k] - mb);
    saa += (ra[k] - ma) * (ra[k] - ma);
    sbb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace gaae::eval
