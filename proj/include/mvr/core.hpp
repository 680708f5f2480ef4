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

/** \file core.hpp
 *  \brief Multi-vector types and the late-interaction (MaxSim) scorer.
 *
 * A document or query is a bag of D-dimensional rows. The late-interaction
 * score sums, over query rows, the best dot product against any document
 * row. Vectors are never normalized here; callers that want cosine MaxSim
 * must normalize before building the MultiVector.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "mvr/error.hpp"
#include "mvr/half.hpp"

namespace mvr {

/// Storage precision. The numeric values match the on-disk dtype byte.
enum class Dtype : std::uint8_t { kBinary32 = 0, kBinary16 = 1 };

constexpr std::size_t dtype_size(Dtype dtype) { return dtype == Dtype::kBinary16 ? 2 : 4; }

inline std::string_view dtype_name(Dtype dtype) {
  return dtype == Dtype::kBinary16 ? "f16" : "f32";
}

inline Dtype parse_dtype(std::string_view name) {
  if (name == "f16" || name == "binary16") return Dtype::kBinary16;
  if (name == "f32" || name == "binary32") return Dtype::kBinary32;
  throw Error(ErrorCode::kInvalidArgument, "unknown dtype '" + std::string(name) + "'");
}

/// One document's or query's embedding matrix, n rows by dim columns.
///
/// Values are held as binary32. With Dtype::kBinary16 every value is rounded
/// to the nearest binary16 at construction, so the float held here converts
/// back to the identical half bit pattern.
class MultiVector {
 public:
  MultiVector() = default;

  MultiVector(std::string id, std::size_t dim, std::vector<float> data,
              Dtype dtype = Dtype::kBinary32)
      : id_(std::move(id)), dim_(dim), data_(std::move(data)), dtype_(dtype) {
    if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "multivector '" + id_ + "' has dim 0");
    if (data_.empty()) throw Error(ErrorCode::kEmptyInput, "multivector '" + id_ + "' has no rows");
    if (data_.size() % dim_ != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "multivector '" + id_ + "': " + std::to_string(data_.size()) +
                      " values is not a multiple of dim " + std::to_string(dim_));
    }
    if (dtype_ == Dtype::kBinary16) {
      for (float& v : data_) v = round_to_half(v);
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw Error(ErrorCode::kNonFinite, "multivector '" + id_ + "' row " +
                                               std::to_string(i / dim_) + " col " +
                                               std::to_string(i % dim_));
      }
    }
  }

  static MultiVector from_rows(std::string id, const std::vector<std::vector<float>>& rows,
                               Dtype dtype = Dtype::kBinary32) {
    if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "multivector '" + id + "' has no rows");
    const std::size_t dim = rows.front().size();
    std::vector<float> data;
    data.reserve(rows.size() * dim);
    for (const auto& row : rows) {
      if (row.size() != dim) {
        throw Error(ErrorCode::kDimensionMismatch, "ragged rows in multivector '" + id + "'");
      }
      data.insert(data.end(), row.begin(), row.end());
    }
    return MultiVector(std::move(id), dim, std::move(data), dtype);
  }

  const std::string& id() const noexcept { return id_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  Dtype dtype() const noexcept { return dtype_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
  }

  MultiVector with_dtype(Dtype dtype) const { return MultiVector(id_, dim_, data_, dtype); }
  MultiVector with_id(std::string id) const {
    MultiVector copy = *this;
    copy.id_ = std::move(id);
    return copy;
  }

  friend bool operator==(const MultiVector&, const MultiVector&) = default;

 private:
  std::string id_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  Dtype dtype_ = Dtype::kBinary32;
};

/// Single-vector (bi-encoder) representation.
struct PooledVector {
  std::string id;
  std::vector<float> vector;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Dot product over binary32 inputs with eight binary64 partial sums, rounded
/// once to binary32. Each product is exact in binary64, so the result is
/// within a rounding of the true value. Fixed reduction order, so results do
/// not depend on the caller or thread.
inline float dot(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t n = a.size();
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += static_cast<double>(a[i + l]) * b[i + l];
  }
  for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += static_cast<double>(a[i]) * b[i];
  return static_cast<float>(((acc[0] + acc[4]) + (acc[1] + acc[5])) +
                            ((acc[2] + acc[6]) + (acc[3] + acc[7])));
}

struct MaxSimHit {
  std::size_t index = 0;
  float value = 0.0f;
};

/// Best-matching document row for one query row; lowest index wins ties.
inline MaxSimHit maxsim(std::span<const float> query_row, const MultiVector& doc) noexcept {
  MaxSimHit best{0, dot(query_row, doc.row(0))};
  for (std::size_t j = 1; j < doc.rows(); ++j) {
    const float s = dot(query_row, doc.row(j));
    if (s > best.value) best = {j, s};
  }
  return best;
}

inline void check_same_dim(const MultiVector& query, const MultiVector& doc) {
  if (query.rows() == 0 || doc.rows() == 0) {
    throw Error(ErrorCode::kEmptyInput, "late interaction needs non-empty query and document");
  }
  if (query.dim() != doc.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query '" + query.id() + "' dim " + std::to_string(query.dim()) + " vs doc '" +
                    doc.id() + "' dim " + std::to_string(doc.dim()));
  }
}

namespace detail {

// The per-row maxima are summed in ascending order so that the result is
// exactly invariant to the order of the query rows. The running sum is kept
// in double and rounded once.
inline float sum_sorted(std::vector<float>& terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (float t : terms) total += t;
  return static_cast<float>(total);
}

inline float late_interaction_unchecked(const MultiVector& query, const MultiVector& doc,
                                        std::vector<float>& scratch) {
  scratch.resize(query.rows());
  for (std::size_t i = 0; i < query.rows(); ++i) scratch[i] = maxsim(query.row(i), doc).value;
  return sum_sorted(scratch);
}

}  // namespace detail

/// Sum over query rows of the maximum dot product against any document row.
inline float late_interaction(const MultiVector& query, const MultiVector& doc) {
  check_same_dim(query, doc);
  std::vector<float> scratch;
  return detail::late_interaction_unchecked(query, doc, scratch);
}

inline PooledVector mean_pool(const MultiVector& mv) {
  if (mv.rows() == 0) throw Error(ErrorCode::kEmptyInput, "cannot pool an empty multivector");
  std::vector<double> sums(mv.dim(), 0.0);
  for (std::size_t i = 0; i < mv.rows(); ++i) {
    const auto row = mv.row(i);
    for (std::size_t c = 0; c < mv.dim(); ++c) sums[c] += row[c];
  }
  PooledVector out{mv.id(), std::vector<float>(mv.dim())};
  const double n = static_cast<double>(mv.rows());
  for (std::size_t c = 0; c < mv.dim(); ++c) out.vector[c] = static_cast<float>(sums[c] / n);
  return out;
}

/// Cosine similarity, clamped to [-1, 1].
inline double pooled_score(const PooledVector& query, const PooledVector& doc) {
  if (query.vector.size() != doc.vector.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pooled query '" + query.id + "' dim " + std::to_string(query.vector.size()) +
                    " vs doc '" + doc.id + "' dim " + std::to_string(doc.vector.size()));
  }
  double qq = 0.0, dd = 0.0, qd = 0.0;
  for (std::size_t c = 0; c < query.vector.size(); ++c) {
    const double q = query.vector[c], d = doc.vector[c];
    qq += q * q;
    dd += d * d;
    qd += q * d;
  }
  if (qq == 0.0 || dd == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cosine undefined for zero-norm vector ('" + (qq == 0.0 ? query.id : doc.id) + "')");
  }
  return std::clamp(qd / (std::sqrt(qq) * std::sqrt(dd)), -1.0, 1.0);
}

/// Worker count for corpus scans: MVR_THREADS if set, else hardware threads.
inline unsigned configured_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MVR_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

namespace detail {

template <typename ScoreFn>
void parallel_for(std::size_t n, unsigned threads, ScoreFn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1 || n < 64) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

// Descending score, then ascending id.
inline std::vector<ScoredDoc> top_k(std::vector<ScoredDoc> scored, std::size_t k) {
  const auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  return scored;
}

}  // namespace detail

/// Exhaustive late-interaction ranking. Returns the best min(k, corpus size)
/// documents, score descending, ties by ascending doc id. Output is the same
/// for any thread count.
inline std::vector<ScoredDoc> rank_corpus(const MultiVector& query,
                                          std::span<const MultiVector> corpus, std::size_t k,
                                          unsigned threads = configured_threads()) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (corpus.empty()) return {};
  for (const auto& doc : corpus) check_same_dim(query, doc);

  std::vector<ScoredDoc> scored(corpus.size());
  detail::parallel_for(corpus.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<float> scratch;
    for (std::size_t d = begin; d < end; ++d) {
      scored[d] = {corpus[d].id(),
                   detail::late_interaction_unchecked(query, corpus[d], scratch)};
    }
  });
  return detail::top_k(std::move(scored), k);
}

/// Bi-encoder baseline: cosine between mean-pooled query and documents.
inline std::vector<ScoredDoc> rank_pooled(const PooledVector& query,
                                          std::span<const PooledVector> corpus, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<ScoredDoc> scored;
  scored.reserve(corpus.size());
  for (const auto& doc : corpus) scored.push_back({doc.id, pooled_score(query, doc)});
  return detail::top_k(std::move(scored), k);
}

}  // namespace mvr
