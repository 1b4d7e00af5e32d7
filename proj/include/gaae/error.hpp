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
#include <stdexcept>
#include <string>

namespace gaae {

enum class ErrorKind {
  kShape,
  kDegenerate,
  kData,
  kConfig,
  kFormat,
  kTraining,
  kState,
  kBudget,
  kMetric,
  kIo,
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kTraining: return "training diverged";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kBudget: return "budget error";
    case ErrorKind::kMetric: return "metric error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

// Root of every exception thrown by the library. The kind drives CLI exit
// codes; the concrete subclasses below exist so callers can catch narrowly.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

template <ErrorKind K>
class KindError : public Error {
 public:
  explicit KindError(const std::string& message) : Error(K, message) {}
};

using ShapeError = KindError<ErrorKind::kShape>;
using DegenerateInputError = KindError<ErrorKind::kDegenerate>;
using DataError = KindError<ErrorKind::kData>;
using ConfigError = KindError<ErrorKind::kConfig>;
using TrainingError = KindError<ErrorKind::kTraining>;
using StateError = KindError<ErrorKind::kState>;
using BudgetError = KindError<ErrorKind::kBudget>;
using MetricError = KindError<ErrorKind::kMetric>;
using IoError = KindError<ErrorKind::kIo>;

// Binary decoding failure, located at the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::uint64_t offset)
      : Error(ErrorKind::kFormat,
              message + " (at byte offset " + std::to_string(offset) + ")"),
        detail_(message),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same error with a location prefix such as the file path.
  FormatError WithContext(const std::string& context) const {
    return FormatError(context + ": " + detail_, offset_);
  }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

}  // namespace gaae
