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

/** \file compress.hpp
 *  \brief Centroid quantization of a corpus index.
 *
 * All document rows of the corpus are pooled and clustered with k-means
 * (k-means++ seeding, a fixed number of Lloyd iterations). Each row is then
 * stored as a u32 centroid id, optionally with a binary16 residual.
 *
 * MVEC v2 layout, little-endian:
 *
 *     "MVEC" | version u32 = 2 | dtype u8 (source dtype) | dim u32
 *     | doc_count u64 | meta_len u32 | meta
 *     | K u32 | K * dim binary32 centroids
 *     then per document:
 *     id_len u16 | id | n_vectors u32 | n_vectors * u32 assignments
 *     | residual flag u8 (0 none, 1 binary16) | [n_vectors * dim binary16]
 */

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mvr/core.hpp"
#include "mvr/error.hpp"
#include "mvr/half.hpp"
#include "mvr/index.hpp"
#include "mvr/random.hpp"

namespace mvr {

enum class ResidualDtype : std::uint8_t { kNone = 0, kBinary16 = 1 };

struct KMeansResult {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;         // k * dim, row-major
  std::vector<std::uint32_t> assignment;  // one per point
  std::size_t iterations_run = 0;
};

namespace detail {

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = static_cast<double>(a[c]) - b[c];
    s += diff * diff;
  }
  return s;
}

inline std::uint32_t nearest_centroid(std::span<const float> point, std::span<const float> centroids,
                                      std::size_t k, std::size_t dim) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centroids.subspan(c * dim, dim));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

}  // namespace detail

/// Lloyd's k-means over `points` (n * dim, row-major) with k-means++ seeding.
/// Deterministic for a given seed; empty clusters keep their previous centroid.
inline KMeansResult kmeans(std::span<const float> points, std::size_t dim, std::size_t k,
                           std::size_t iters, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "k-means needs dim >= 1");
  const std::size_t n = points.size() / dim;
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (iters == 0) throw Error(ErrorCode::kInvalidArgument, "iters must be >= 1");
  if (k > n) {
    throw Error(ErrorCode::kInvalidArgument, "K = " + std::to_string(k) + " exceeds the " +
                                                 std::to_string(n) + " available rows");
  }
  const auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };

  KMeansResult out;
  out.k = k;
  out.dim = dim;
  out.centroids.reserve(k * dim);
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen[first] = true;
  out.centroids.insert(out.centroids.end(), point(first).begin(), point(first).end());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::squared_distance(point(i), point(first));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (d2[i] > 0.0 && cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the tail
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    const auto p = point(pick);
    out.centroids.insert(out.centroids.end(), p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], detail::squared_distance(point(i), p));
    }
  }

  out.assignment.assign(n, 0);
  const auto assign_all = [&] {
    detail::parallel_for(n, configured_threads(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        out.assignment[i] = detail::nearest_centroid(point(i), out.centroids, k, dim);
      }
    });
  };

  std::vector<std::uint32_t> previous;
  assign_all();
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = out.assignment[i];
      ++counts[c];
      const auto p = point(i);
      for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        out.centroids[c * dim + j] =
            static_cast<float>(sums[c * dim + j] / static_cast<double>(counts[c]));
      }
    }
    previous = out.assignment;
    assign_all();
    out.iterations_run = it + 1;
    if (previous == out.assignment) break;  // fixed point reached
  }
  return out;
}

/// Centroid-quantized corpus.
struct CompressedIndex {
  struct Doc {
    std::string id;
    std::vector<std::uint32_t> assignments;  // one centroid id per row
    std::vector<std::uint16_t> residuals;    // rows * dim binary16 bits, empty without residuals

    friend bool operator==(const Doc&, const Doc&) = default;
  };

  std::size_t dim = 0;
  Dtype source_dtype = Dtype::kBinary32;
  Metadata meta;
  std::size_t k = 0;
  std::vector<float> centroids;  // k * dim binary32
  ResidualDtype residual = ResidualDtype::kNone;
  std::vector<Doc> docs;

  std::span<const float> centroid(std::size_t c) const {
    return std::span<const float>(centroids).subspan(c * dim, dim);
  }

  friend bool operator==(const CompressedIndex&, const CompressedIndex&) = default;
};

inline CompressedIndex compress(const CorpusIndex& index, std::size_t k, std::size_t iters,
                                std::uint64_t seed, ResidualDtype residual = ResidualDtype::kNone) {
  const std::size_t dim = index.dim();
  const std::size_t total = index.total_rows();
  if (k > total || total == 0) {
    throw Error(ErrorCode::kInvalidArgument, "K = " + std::to_string(k) + " exceeds the " +
                                                 std::to_string(total) + " rows in the corpus");
  }
  std::vector<float> pooled;
  pooled.reserve(total * dim);
  for (const auto& doc : index.docs()) pooled.insert(pooled.end(), doc.data().begin(), doc.data().end());
  const KMeansResult km = kmeans(pooled, dim, k, iters, seed);

  CompressedIndex out;
  out.dim = dim;
  out.source_dtype = index.dtype();
  out.meta = index.meta();
  out.k = k;
  out.centroids = km.centroids;
  out.residual = residual;
  std::size_t row = 0;
  for (const auto& doc : index.docs()) {
    CompressedIndex::Doc cd;
    cd.id = doc.id();
    cd.assignments.assign(km.assignment.begin() + static_cast<std::ptrdiff_t>(row),
                          km.assignment.begin() + static_cast<std::ptrdiff_t>(row + doc.rows()));
    if (residual == ResidualDtype::kBinary16) {
      cd.residuals.reserve(doc.rows() * dim);
      for (std::size_t i = 0; i < doc.rows(); ++i) {
        const auto c = out.centroid(cd.assignments[i]);
        const auto r = doc.row(i);
        for (std::size_t j = 0; j < dim; ++j) cd.residuals.push_back(float_to_half_bits(r[j] - c[j]));
      }
    }
    row += doc.rows();
    out.docs.push_back(std::move(cd));
  }
  return out;
}

/// Rebuilds a binary32 index: each row is its centroid plus the residual, if stored.
inline CorpusIndex decompress(const CompressedIndex& c) {
  if (c.centroids.size() != c.k * c.dim) {
    throw Error(ErrorCode::kInvalidArgument, "centroid block does not hold K * dim values");
  }
  std::vector<MultiVector> docs;
  docs.reserve(c.docs.size());
  for (const auto& doc : c.docs) {
    const std::size_t rows = doc.assignments.size();
    const bool with_residual = c.residual == ResidualDtype::kBinary16;
    if (with_residual && doc.residuals.size() != rows * c.dim) {
      throw Error(ErrorCode::kInvalidArgument, "document '" + doc.id + "' residual size mismatch");
    }
    std::vector<float> values;
    values.reserve(rows * c.dim);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::uint32_t a = doc.assignments[i];
      if (a >= c.k) {
        throw Error(ErrorCode::kOutOfRange, "document '" + doc.id + "' row " + std::to_string(i) +
                                                " assigned to centroid " + std::to_string(a) +
                                                " but K = " + std::to_string(c.k));
      }
      const auto centroid = c.centroid(a);
      for (std::size_t j = 0; j < c.dim; ++j) {
        float v = centroid[j];
        if (with_residual) v += half_bits_to_float(doc.residuals[i * c.dim + j]);
        values.push_back(v);
      }
    }
    docs.emplace_back(doc.id, c.dim, std::move(values), Dtype::kBinary32);
  }
  return CorpusIndex(std::move(docs), c.dim, Dtype::kBinary32, c.meta);
}

struct CompressedFootprint {
  std::uint64_t centroid_bytes = 0;
  std::uint64_t assignment_bytes = 0;
  std::uint64_t residual_bytes = 0;
  std::uint64_t payload_bytes = 0;  // sum of the three above
  std::uint64_t file_bytes = 0;     // full MVEC v2 encoding
};

inline CompressedFootprint footprint(const CompressedIndex& c) {
  CompressedFootprint f;
  f.centroid_bytes = std::uint64_t{c.k} * c.dim * 4;
  f.file_bytes = 4 + 4 + 1 + 4 + 8 + 4 + detail::encode_meta(c.meta).size() + 4 + f.centroid_bytes;
  for (const auto& doc : c.docs) {
    const std::uint64_t a = std::uint64_t{doc.assignments.size()} * 4;
    const std::uint64_t r = std::uint64_t{doc.residuals.size()} * 2;
    f.assignment_bytes += a;
    f.residual_bytes += r;
    f.file_bytes += 2 + doc.id.size() + 4 + a + 1 + r;
  }
  f.payload_bytes = f.centroid_bytes + f.assignment_bytes + f.residual_bytes;
  return f;
}

inline std::vector<std::uint8_t> encode_compressed(const CompressedIndex& c) {
  if (c.k == 0 || c.k > 0xffffffffu) throw Error(ErrorCode::kInvalidArgument, "K must fit in u32 and be >= 1");
  detail::ByteWriter w;
  detail::write_header(w, kVersionCompressed, c.source_dtype, c.dim, c.docs.size(), c.meta);
  w.u32(static_cast<std::uint32_t>(c.k));
  for (float v : c.centroids) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "centroid value");
    w.f32(v);
  }
  for (const auto& doc : c.docs) {
    w.string16(doc.id, "document id");
    w.u32(static_cast<std::uint32_t>(doc.assignments.size()));
    for (std::uint32_t a : doc.assignments) {
      if (a >= c.k) throw Error(ErrorCode::kOutOfRange, "document '" + doc.id + "' assignment out of range");
      w.u32(a);
    }
    w.u8(static_cast<std::uint8_t>(c.residual));
    for (std::uint16_t h : doc.residuals) w.u16(h);
  }
  return w.take();
}

inline CompressedIndex decode_compressed(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const detail::Header h = detail::read_header(r);
  if (h.version != kVersionCompressed) {
    throw Error(ErrorCode::kFormat, "expected a compressed (version 2) index, found version " +
                                        std::to_string(h.version),
                4);
  }
  CompressedIndex c;
  c.dim = h.dim;
  c.source_dtype = h.dtype;
  c.meta = h.meta;
  const auto k_at = r.offset();
  c.k = r.u32("centroid count");
  if (c.k == 0) throw Error(ErrorCode::kFormat, "K = 0 at offset " + std::to_string(k_at), k_at);
  r.need(std::uint64_t{c.k} * c.dim * 4, "centroid block");
  c.centroids.resize(c.k * c.dim);
  for (auto& v : c.centroids) {
    const auto at = r.offset();
    v = r.f32("centroid block");
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "centroid NaN/Inf at offset " + std::to_string(at), at);
    }
  }
  for (std::uint64_t d = 0; d < h.doc_count; ++d) {
    CompressedIndex::Doc doc;
    doc.id = r.str(r.u16("document id length"), "document id");
    const std::uint32_t n = r.u32("vector count");
    r.need(std::uint64_t{n} * 4, "assignments");
    doc.assignments.resize(n);
    for (auto& a : doc.assignments) {
      const auto at = r.offset();
      a = r.u32("assignments");
      if (a >= c.k) {
        throw Error(ErrorCode::kFormat, "assignment " + std::to_string(a) + " >= K at offset " +
                                            std::to_string(at),
                    at);
      }
    }
    const auto flag_at = r.offset();
    const std::uint8_t flag = r.u8("residual flag");
    if (flag > 1) throw Error(ErrorCode::kFormat, "bad residual flag", flag_at);
    const auto residual = static_cast<ResidualDtype>(flag);
    if (d == 0) {
      c.residual = residual;
    } else if (residual != c.residual) {
      throw Error(ErrorCode::kFormat, "documents disagree on residual storage", flag_at);
    }
    if (residual == ResidualDtype::kBinary16) {
      r.need(std::uint64_t{n} * c.dim * 2, "residual payload");
      doc.residuals.resize(std::size_t{n} * c.dim);
      for (auto& bits : doc.residuals) {
        const auto at = r.offset();
        bits = r.u16("residual payload");
        if (!std::isfinite(half_bits_to_float(bits))) {
          throw Error(ErrorCode::kNonFinite, "residual NaN/Inf at offset " + std::to_string(at), at);
        }
      }
    }
    c.docs.push_back(std::move(doc));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kFormat, "trailing bytes at offset " + std::to_string(r.offset()), r.offset());
  }
  return c;
}

inline void write_compressed(const CompressedIndex& c, const std::filesystem::path& path) {
  detail::write_file(path, encode_compressed(c));
}

inline CompressedIndex read_compressed(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_compressed(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.offset());
  }
}

/// Reads either MVEC version; compressed indexes come back decompressed.
inline CorpusIndex read_any_index(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    if (bytes.size() >= 8) {
      detail::ByteReader r(bytes);
      r.str(4, "magic");
      if (r.u32("version") == kVersionCompressed) return decompress(decode_compressed(bytes));
    }
    return decode_index(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.offset());
  }
}

}  // namespace mvr
