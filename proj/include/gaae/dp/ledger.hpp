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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gaae/error.hpp"

namespace gaae::dp {

// Append-only record of privacy budget spent, composed sequentially.
class BudgetLedger {
 public:
  struct Entry {
    std::string release_id;
    double epsilon = 0.0;
  };

  void Record(std::string release_id, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw BudgetError("release '" + release_id +
                        "' must spend a positive finite epsilon, got " +
                        std::to_string(epsilon));
    }
    entries_.push_back({std::move(release_id), epsilon});
    total_ += epsilon;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  double total() const { return total_; }
  std::size_t size() const { return entries_.size(); }

  // Text form: one "release_id<TAB>epsilon" line per entry.
  std::string Serialize() const {
    std::string out;
    for (const auto& e : entries_) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), e.epsilon);
      out += e.release_id;
      out += '\t';
      out.append(buf, res.ptr);
      out += '\n';
    }
    return out;
  }

  static BudgetLedger Parse(const std::string& text) {
    BudgetLedger ledger;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw DataError("ledger line " + std::to_string(line_no) +
                        " has no tab separator");
      }
      double eps = 0.0;
      const char* first = line.data() + tab + 1;
      const char* last = line.data() + line.size();
      auto res = std::from_chars(first, last, eps);
      if (res.ec != std::errc() || res.ptr != last) {
        throw DataError("ledger line " + std::to_string(line_no) +
                        " has an unparsable epsilon");
      }
      ledger.Record(line.substr(0, tab), eps);
    }
    return ledger;
  }

  static BudgetLedger Load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    std::ifstream in(path);
    if (!in) throw IoError("cannot read ledger " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return Parse(ss.str());
  }

  void Save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write ledger " + path.string());
    out << Serialize();
  }

 private:
  std::vector<Entry> entries_;
  double total_ = 0.0;
};

}  // namespace gaae::dp
