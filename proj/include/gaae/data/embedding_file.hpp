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

// EMB1 embedding container. All integers and floats little-endian:
//
//   offset  size  field
//   0       4     magic "EMB1"
//   4       4     u32 version (= 1)
//   8       4     u32 record count N
//   12      4     u32 dimension d
//   16      ...   N records of {u32 speaker_id, u32 segment_id, u8 gender,
//                 d × f64 vector}
//
// A record therefore takes 9 + 8d bytes.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaae/byte_io.hpp"
#include "gaae/error.hpp"
#include "gaae/model/training.hpp"
#include "gaae/nn/matrix.hpp"

namespace gaae::data {

inline constexpr std::string_view kEmbeddingMagic = "EMB1";
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

struct EmbeddingRecord {
  std::uint32_t speaker_id = 0;
  std::uint32_t segment_id = 0;
  std::uint8_t gender = 0;  // 0 male, 1 female
  std::vector<double> vector;

  friend bool operator==(const EmbeddingRecord&,
                         const EmbeddingRecord&) = default;
};

struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::vector<EmbeddingRecord> records;

  std::size_t size() const { return records.size(); }
  friend bool operator==(const EmbeddingFile&, const EmbeddingFile&) = default;
};

inline std::size_t EncodedSize(std::uint32_t dim, std::size_t count) {
  return kEmbeddingHeaderBytes + count * (9 + 8 * static_cast<std::size_t>(dim));
}

inline void ValidateRecords(const EmbeddingFile& file) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> keys;
  for (const auto& r : file.records) {
    if (r.vector.size() != file.dim) {
      throw DataError("record (" + std::to_string(r.speaker_id) + ", " +
                      std::to_string(r.segment_id) + ") has dimension " +
                      std::to_string(r.vector.size()) + ", file has " +
                      std::to_string(file.dim));
    }
    if (r.gender > 1) throw DataError("gender label must be 0 or 1");
    for (double v : r.vector) {
      if (!std::isfinite(v)) throw DataError("non-finite embedding value");
    }
    if (!keys.emplace(r.speaker_id, r.segment_id).second) {
      throw DataError("duplicate (speaker, segment) = (" +
                      std::to_string(r.speaker_id) + ", " +
                      std::to_string(r.segment_id) + ")");
    }
  }
}

inline std::string EncodeEmbeddings(const EmbeddingFile& file) {
  ValidateRecords(file);
  ByteWriter w;
  w.Bytes(kEmbeddingMagic);
  w.U32(kEmbeddingVersion);
  w.U32(static_cast<std::uint32_t>(file.records.size()));
  w.U32(file.dim);
  for (const auto& r : file.records) {
    w.U32(r.speaker_id);
    w.U32(r.segment_id);
    w.U8(r.gender);
    w.F64s(r.vector);
  }
  return w.Release();
}

inline EmbeddingFile DecodeEmbeddings(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4, "magic") != kEmbeddingMagic) {
    throw FormatError("bad magic, expected EMB1", 0);
  }
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.U32("version");
  if (version != kEmbeddingVersion) {
    throw FormatError("unsupported EMB version " + std::to_string(version),
                      version_at);
  }
  const std::uint32_t count = r.U32("record count");
  EmbeddingFile file;
  file.dim = r.U32("dimension");
  const std::size_t record_bytes = 9 + 8 * static_cast<std::size_t>(file.dim);
  if (r.remaining() / record_bytes < count) {
    throw FormatError("truncated input: header declares " +
                          std::to_string(count) + " records of " +
                          std::to_string(record_bytes) + " bytes",
                      r.offset());
  }
  file.records.reserve(count);
  std::set<std::pair<std::uint32_t, std::uint32_t>> keys;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t at = r.offset();
    EmbeddingRecord rec;
    rec.speaker_id = r.U32("speaker id");
    rec.segment_id = r.U32("segment id");
    rec.gender = r.U8("gender");
    if (rec.gender > 1) {
      throw FormatError("gender byte must be 0 or 1", r.offset() - 1);
    }
    rec.vector.resize(file.dim);
    r.F64s(rec.vector, "vector");
    for (double v : rec.vector) {
      if (!std::isfinite(v)) throw FormatError("non-finite vector entry", at);
    }
    if (!keys.emplace(rec.speaker_id, rec.segment_id).second) {
      throw FormatError("duplicate (speaker, segment) record", at);
    }
    file.records.push_back(std::move(rec));
  }
  r.ExpectEnd();
  return file;
}

inline void WriteEmbeddingFile(const std::filesystem::path& path,
                               const EmbeddingFile& file) {
  WriteFileBytes(path, EncodeEmbeddings(file));
}

inline EmbeddingFile ReadEmbeddingFile(const std::filesystem::path& path) {
  const std::string bytes = ReadFileBytes(path);
  try {
    return DecodeEmbeddings(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

inline nn::Matrix ToMatrix(const EmbeddingFile& file) {
  nn::Matrix m(file.records.size(), file.dim);
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    std::copy(file.records[i].vector.begin(), file.records[i].vector.end(),
              m.row(i).begin());
  }
  return m;
}

inline std::vector<double> GenderLabels(const EmbeddingFile& file) {
  std::vector<double> y;
  y.reserve(file.records.size());
  for (const auto& r : file.records) y.push_back(r.gender);
  return y;
}

inline model::LabeledData ToLabeledData(const EmbeddingFile& file) {
  return {ToMatrix(file), GenderLabels(file)};
}

// Same ids and labels as `like`, vectors replaced row by row.
inline EmbeddingFile WithVectors(const EmbeddingFile& like,
                                 const nn::Matrix& vectors) {
  if (vectors.rows() != like.records.size()) {
    throw ShapeError("replacement has " + std::to_string(vectors.rows()) +
                     " rows for " + std::to_string(like.records.size()) +
                     " records");
  }
  EmbeddingFile out;
  out.dim = static_cast<std::uint32_t>(vectors.cols());
  out.records = like.records;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const auto row = vectors.row(i);
    out.records[i].vector.assign(row.begin(), row.end());
  }
  return out;
}

}  // namespace gaae::data
