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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gaae/error.hpp"

namespace gaae::data {

enum class TrialLabel : std::uint8_t { kNontarget = 0, kTarget = 1 };

// Enrollment speaker model vs one test segment.
struct Trial {
  std::uint32_t enroll_speaker = 0;
  std::uint32_t test_speaker = 0;
  std::uint32_t test_segment = 0;
  TrialLabel label = TrialLabel::kNontarget;

  friend bool operator==(const Trial&, const Trial&) = default;
};

using TrialList = std::vector<Trial>;

// One trial per line:
//   enroll_speaker_id<TAB>test_speaker_id<TAB>test_segment_id<TAB>target|nontarget
inline std::string FormatTrials(const TrialList& trials) {
  std::string out;
  for (const auto& t : trials) {
    out += std::to_string(t.enroll_speaker);
    out += '\t';
    out += std::to_string(t.test_speaker);
    out += '\t';
    out += std::to_string(t.test_segment);
    out += '\t';
    out += t.label == TrialLabel::kTarget ? "target" : "nontarget";
    out += '\n';
  }
  return out;
}

namespace internal {

inline std::uint32_t ParseId(std::string_view field, std::size_t line_no) {
  std::uint32_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw DataError("trial line " + std::to_string(line_no) + ": bad id '" +
                    std::string(field) + "'");
  }
  return v;
}

}  // namespace internal

inline TrialList ParseTrials(std::string_view text) {
  TrialList trials;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw DataError("trial line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected 4");
    }
    Trial t;
    t.enroll_speaker = internal::ParseId(fields[0], line_no);
    t.test_speaker = internal::ParseId(fields[1], line_no);
    t.test_segment = internal::ParseId(fields[2], line_no);
    if (fields[3] == "target") {
      t.label = TrialLabel::kTarget;
    } else if (fields[3] == "nontarget") {
      t.label = TrialLabel::kNontarget;
    } else {
      throw DataError("trial line " + std::to_string(line_no) +
                      ": label must be target or nontarget");
    }
    trials.push_back(t);
  }
  return trials;
}

inline void WriteTrialFile(const std::filesystem::path& path,
                           const TrialList& trials) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << FormatTrials(trials);
}

inline TrialList ReadTrialFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseTrials(ss.str());
}

}  // namespace gaae::data
