/*
 * Copyright 2026 The mvr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/** \file index.hpp
 *  \brief Immutable corpus of multi-vectors and the MVEC v1 file format.
 *
 * MVEC v1 layout, all integers little-endian:
 *
 *     "MVEC" | version u32 = 1 | dtype u8 (0 f32, 1 f16) | dim u32
 *     | doc_count u64 | meta_len u32 | meta (UTF-8 JSON object of strings)
 *     then per document:
 *     id_len u16 | id (UTF-8) | n_vectors u32 | n_vectors * dim values
 *
 * Values are row-major IEEE 754 binary16 or binary32.
 */

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "mvr/core.hpp"
#include "mvr/error.hpp"
#include "mvr/half.hpp"

namespace mvr {

inline constexpr char kMagic[4] = {'M', 'V', 'E', 'C'};
inline constexpr std::uint32_t kVersionPlain = 1;
inline constexpr std::uint32_t kVersionCompressed = 2;

inline constexpr const char* kMetaGridRows = "grid_rows";
inline constexpr const char* kMetaGridCols = "grid_cols";

using Metadata = std::map<std::string, std::string>;

struct PatchGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t cells() const noexcept { return rows * cols; }
  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

/// Parses "RxC" (e.g. "32x32").
inline PatchGrid parse_grid(std::string_view text) {
  const auto x = text.find_first_of("xX");
  const auto bad = [&] {
    return Error(ErrorCode::kInvalidArgument, "grid must look like RxC, got '" + std::string(text) + "'");
  };
  if (x == std::string_view::npos || x == 0 || x + 1 >= text.size()) throw bad();
  try {
    std::size_t used = 0;
    const std::string rows(text.substr(0, x)), cols(text.substr(x + 1));
    const unsigned long r = std::stoul(rows, &used);
    if (used != rows.size()) throw bad();
    const unsigned long c = std::stoul(cols, &used);
    if (used != cols.size()) throw bad();
    if (r == 0 || c == 0) throw bad();
    return {r, c};
  } catch (const std::logic_error&) {
    throw bad();
  }
}

/// Square grid for a square patch count (1024 -> 32x32), nullopt otherwise.
inline std::optional<PatchGrid> default_grid(std::size_t patches) {
  auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(patches))));
  if (side == 0 || side * side != patches) return std::nullopt;
  return PatchGrid{side, side};
}

/// Immutable collection of same-dim, same-dtype documents with unique ids.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  CorpusIndex(std::vector<MultiVector> docs, std::size_t dim, Dtype dtype, Metadata meta = {})
      : docs_(std::move(docs)), dim_(dim), dtype_(dtype), meta_(std::move(meta)) {
    std::unordered_set<std::string_view> seen;
    const auto grid = this->grid();
    for (const auto& doc : docs_) {
      if (!seen.insert(doc.id()).second) {
        throw Error(ErrorCode::kDuplicateId, "document id '" + doc.id() + "' appears twice");
      }
      if (doc.dim() != dim_) {
        throw Error(ErrorCode::kDimensionMismatch, "document '" + doc.id() + "' dim " +
                                                       std::to_string(doc.dim()) +
                                                       " vs corpus dim " + std::to_string(dim_));
      }
      if (doc.dtype() != dtype_) {
        throw Error(ErrorCode::kInvalidArgument, "document '" + doc.id() + "' dtype " +
                                                     std::string(dtype_name(doc.dtype())) +
                                                     " vs corpus dtype " +
                                                     std::string(dtype_name(dtype_)));
      }
      if (grid && grid->cells() != doc.rows()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "document '" + doc.id() + "' has " + std::to_string(doc.rows()) +
                        " vectors but the patch grid is " + std::to_string(grid->rows) + "x" +
                        std::to_string(grid->cols));
      }
    }
  }

  /// Builds an index whose dim and dtype come from the documents.
  static CorpusIndex from_docs(std::vector<MultiVector> docs, Metadata meta = {}) {
    if (docs.empty()) return CorpusIndex({}, 0, Dtype::kBinary32, std::move(meta));
    const std::size_t dim = docs.front().dim();
    const Dtype dtype = docs.front().dtype();
    return CorpusIndex(std::move(docs), dim, dtype, std::move(meta));
  }

  const std::vector<MultiVector>& docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  Dtype dtype() const noexcept { return dtype_; }
  const Metadata& meta() const noexcept { return meta_; }

  std::size_t total_rows() const noexcept {
    std::size_t n = 0;
    for (const auto& d : docs_) n += d.rows();
    return n;
  }

  const MultiVector* find(std::string_view id) const noexcept {
    for (const auto& d : docs_) {
      if (d.id() == id) return &d;
    }
    return nullptr;
  }

  /// Patch grid declared in metadata, if any.
  std::optional<PatchGrid> grid() const {
    const auto r = meta_.find(kMetaGridRows);
    const auto c = meta_.find(kMetaGridCols);
    if (r == meta_.end() || c == meta_.end()) return std::nullopt;
    return parse_grid(r->second + "x" + c->second);
  }

  friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;

 private:
  std::vector<MultiVector> docs_;
  std::size_t dim_ = 0;
  Dtype dtype_ = Dtype::kBinary32;
  Metadata meta_;
};

namespace detail {

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  template <typename T>
  void le(T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }
  void u8(std::uint8_t v) { le(v); }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void string16(const std::string& s, const char* what) {
    if (s.size() > 0xffff) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " longer than 65535 bytes");
    }
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint64_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::uint64_t n, const char* what) const {
    if (n > remaining()) {
      throw Error(ErrorCode::kFormat,
                  std::string("truncated ") + what + ": need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_) + ", " +
                      std::to_string(remaining()) + " available",
                  pos_);
    }
  }
  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(T(data_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return value;
  }
  std::uint8_t u8(const char* what) { return le<std::uint8_t>(what); }
  std::uint16_t u16(const char* what) { return le<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return le<std::uint64_t>(what); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> span(std::uint64_t n, const char* what) {
    need(n, what);
    auto s = data_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::uint64_t pos_ = 0;
};

inline std::string encode_meta(const Metadata& meta) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j.dump();
}

inline Metadata decode_meta(const std::string& text, std::uint64_t offset) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("metadata is not valid JSON: ") + e.what(), offset);
  }
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "metadata must be a JSON object", offset);
  Metadata meta;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kFormat, "metadata value for '" + k + "' is not a string", offset);
    }
    meta[k] = v.get<std::string>();
  }
  return meta;
}

struct Header {
  std::uint32_t version = 0;
  Dtype dtype = Dtype::kBinary32;
  std::uint32_t dim = 0;
  std::uint64_t doc_count = 0;
  Metadata meta;
};

inline void write_header(ByteWriter& w, std::uint32_t version, Dtype dtype, std::size_t dim,
                         std::size_t doc_count, const Metadata& meta) {
  if (dim > 0xffffffffu) throw Error(ErrorCode::kInvalidArgument, "dim does not fit in u32");
  w.bytes(kMagic, 4);
  w.u32(version);
  w.u8(static_cast<std::uint8_t>(dtype));
  w.u32(static_cast<std::uint32_t>(dim));
  w.u64(doc_count);
  const std::string blob = encode_meta(meta);
  w.u32(static_cast<std::uint32_t>(blob.size()));
  w.bytes(blob.data(), blob.size());
}

inline Header read_header(ByteReader& r) {
  r.need(4, "magic");
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormat, "magic mismatch: expected \"MVEC\" at offset 0", 0);
  }
  Header h;
  const auto version_at = r.offset();
  h.version = r.u32("version");
  if (h.version != kVersionPlain && h.version != kVersionCompressed) {
    throw Error(ErrorCode::kFormat, "unsupported version " + std::to_string(h.version) +
                                        " at offset " + std::to_string(version_at),
                version_at);
  }
  const auto dtype_at = r.offset();
  const std::uint8_t dtype = r.u8("dtype");
  if (dtype > 1) {
    throw Error(ErrorCode::kFormat, "bad dtype byte " + std::to_string(dtype) + " at offset " +
                                        std::to_string(dtype_at),
                dtype_at);
  }
  h.dtype = static_cast<Dtype>(dtype);
  h.dim = r.u32("dim");
  h.doc_count = r.u64("doc_count");
  const std::uint32_t meta_len = r.u32("meta_len");
  const auto meta_at = r.offset();
  h.meta = decode_meta(r.str(meta_len, "metadata"), meta_at);
  if (h.doc_count > 0 && h.dim == 0) {
    throw Error(ErrorCode::kFormat, "dim 0 with a non-empty corpus", dtype_at + 1);
  }
  return h;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

inline void check_finite_payload(const MultiVector& doc) {
  for (std::size_t i = 0; i < doc.data().size(); ++i) {
    if (!std::isfinite(doc.data()[i])) {
      throw Error(ErrorCode::kNonFinite, "document '" + doc.id() + "' value " + std::to_string(i));
    }
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_index(const CorpusIndex& index) {
  detail::ByteWriter w;
  detail::write_header(w, kVersionPlain, index.dtype(), index.dim(), index.size(), index.meta());
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : index.docs()) {
    if (!seen.insert(doc.id()).second) {
      throw Error(ErrorCode::kDuplicateId, "document id '" + doc.id() + "' appears twice");
    }
    detail::check_finite_payload(doc);
    w.string16(doc.id(), "document id");
    w.u32(static_cast<std::uint32_t>(doc.rows()));
    if (index.dtype() == Dtype::kBinary16) {
      for (float v : doc.data()) w.u16(float_to_half_bits(v));
    } else {
      for (float v : doc.data()) w.f32(v);
    }
  }
  return w.take();
}

namespace detail {

inline CorpusIndex decode_plain_body(ByteReader& r, const Header& h) {
  std::vector<MultiVector> docs;
  const std::size_t value_size = dtype_size(h.dtype);
  for (std::uint64_t d = 0; d < h.doc_count; ++d) {
    const std::uint16_t id_len = r.u16("document id length");
    std::string id = r.str(id_len, "document id");
    const std::uint32_t n = r.u32("vector count");
    if (n == 0) {
      throw Error(ErrorCode::kFormat, "document '" + id + "' has zero vectors",
                  r.offset() - 4);
    }
    const std::uint64_t count = std::uint64_t{n} * h.dim;
    const auto payload_at = r.offset();
    const auto payload = r.span(count * value_size, "vector payload");
    std::vector<float> values(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint8_t* p = payload.data() + i * value_size;
      if (h.dtype == Dtype::kBinary16) {
        values[i] = half_bits_to_float(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
      } else {
        const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                   (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
        values[i] = std::bit_cast<float>(bits);
      }
      if (!std::isfinite(values[i])) {
        const auto at = payload_at + i * value_size;
        throw Error(ErrorCode::kNonFinite,
                    "document '" + id + "' has a NaN/Inf value at offset " + std::to_string(at), at);
      }
    }
    docs.emplace_back(std::move(id), h.dim, std::move(values), h.dtype);
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kFormat,
                std::to_string(r.remaining()) + " trailing bytes at offset " + std::to_string(r.offset()),
                r.offset());
  }
  try {
    return CorpusIndex(std::move(docs), h.dim, h.dtype, h.meta);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, e.what(), r.offset());
  }
}

}  // namespace detail

inline CorpusIndex decode_index(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const detail::Header h = detail::read_header(r);
  if (h.version != kVersionPlain) {
    throw Error(ErrorCode::kFormat, "expected an uncompressed (version 1) index, found version " +
                                        std::to_string(h.version),
                4);
  }
  return detail::decode_plain_body(r, h);
}

inline void write_index(const CorpusIndex& index, const std::filesystem::path& path) {
  const auto bytes = encode_index(index);
  detail::write_file(path, bytes);
}

inline CorpusIndex read_index(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_index(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.offset());
  }
}

/// Storage accounting for one document.
struct DocFootprint {
  std::string id;
  std::size_t rows = 0;
  std::uint64_t payload_bytes = 0;
};

struct FootprintReport {
  std::vector<DocFootprint> docs;
  std::uint64_t payload_bytes = 0;  // vectors only
  std::uint64_t file_bytes = 0;     // full MVEC encoding incl. header, metadata and ids
};

inline FootprintReport footprint(const CorpusIndex& index) {
  FootprintReport report;
  report.file_bytes = 4 + 4 + 1 + 4 + 8 + 4 + detail::encode_meta(index.meta()).size();
  for (const auto& doc : index.docs()) {
    const std::uint64_t bytes = std::uint64_t{doc.rows()} * doc.dim() * dtype_size(index.dtype());
    report.docs.push_back({doc.id(), doc.rows(), bytes});
    report.payload_bytes += bytes;
    report.file_bytes += 2 + doc.id().size() + 4 + bytes;
  }
  return report;
}

}  // namespace mvr
