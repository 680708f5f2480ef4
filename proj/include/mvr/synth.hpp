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

// Synthetic corpora with planted query signal, for end-to-end runs without
// an embedding model.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mvr/core.hpp"
#include "mvr/error.hpp"
#include "mvr/eval.hpp"
#include "mvr/index.hpp"
#include "mvr/random.hpp"

namespace mvr {

struct SynthParams {
  std::size_t n_docs = 200;
  std::size_t n_queries = 50;
  std::size_t dim = 128;
  std::size_t n_patches = 64;
  std::size_t query_tokens = 4;  // 4 planted rows among 64 patches = 1:15 signal to noise
  double plant_strength = 1.0;   // 1 copies query rows verbatim, 0 leaves pure noise
  std::uint64_t seed = 0;
  Dtype dtype = Dtype::kBinary32;
};

struct SynthCorpus {
  CorpusIndex index;
  std::vector<MultiVector> queries;
  Qrels qrels;  // queries[i] -> docs[i], relevance 1
};

/// Zero-padded id, e.g. make_id("doc", 7, 200) == "doc-0007".
inline std::string make_id(const std::string& prefix, std::size_t i, std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(count).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + "-" + digits;
}

/// Appends `rows` random unit-norm rows to `out`.
inline void random_unit_rows(Rng& rng, std::size_t rows, std::size_t dim, std::vector<float>& out) {
  std::vector<double> v(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = rng.normal();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double x : v) out.push_back(static_cast<float>(x / norm));
  }
}

/// Documents of random unit rows; query i's rows are blended into randomly
/// chosen patches of document i:  row = s * query_row + (1 - s) * noise_row.
inline SynthCorpus synth_corpus(const SynthParams& p) {
  if (p.n_docs == 0 || p.dim == 0 || p.n_patches == 0 || p.query_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus sizes must be >= 1");
  }
  if (p.n_queries > p.n_docs) {
    throw Error(ErrorCode::kInvalidArgument, "n_queries (" + std::to_string(p.n_queries) +
                                                 ") exceeds n_docs (" + std::to_string(p.n_docs) + ")");
  }
  if (p.query_tokens > p.n_patches) {
    throw Error(ErrorCode::kInvalidArgument, "query_tokens exceeds n_patches; cannot plant every row");
  }
  if (!(p.plant_strength >= 0.0 && p.plant_strength <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "plant strength must lie in [0, 1]");
  }

  Rng rng(p.seed);
  std::vector<std::vector<float>> doc_rows(p.n_docs);
  for (auto& rows : doc_rows) random_unit_rows(rng, p.n_patches, p.dim, rows);

  SynthCorpus out;
  const auto s = static_cast<float>(p.plant_strength);
  for (std::size_t q = 0; q < p.n_queries; ++q) {
    std::vector<float> qrows;
    random_unit_rows(rng, p.query_tokens, p.dim, qrows);

    // Partial Fisher-Yates picks distinct target patches.
    std::vector<std::size_t> slots(p.n_patches);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    for (std::size_t t = 0; t < p.query_tokens; ++t) {
      const std::size_t pick = t + static_cast<std::size_t>(rng.below(p.n_patches - t));
      std::swap(slots[t], slots[pick]);
      float* row = doc_rows[q].data() + slots[t] * p.dim;
      for (std::size_t c = 0; c < p.dim; ++c) {
        row[c] = s * qrows[t * p.dim + c] + (1.0f - s) * row[c];
      }
    }
    const std::string qid = make_id("q", q, p.n_queries);
    out.queries.emplace_back(qid, p.dim, std::move(qrows), p.dtype);
    out.qrels.add(qid, make_id("doc", q, p.n_docs), 1);
  }

  std::vector<MultiVector> docs;
  docs.reserve(p.n_docs);
  for (std::size_t d = 0; d < p.n_docs; ++d) {
    docs.emplace_back(make_id("doc", d, p.n_docs), p.dim, std::move(doc_rows[d]), p.dtype);
  }
  Metadata meta{{"corpus", "synthetic"}, {"seed", std::to_string(p.seed)}};
  if (const auto grid = default_grid(p.n_patches)) {
    meta[kMetaGridRows] = std::to_string(grid->rows);
    meta[kMetaGridCols] = std::to_string(grid->cols);
  }
  out.index = CorpusIndex(std::move(docs), p.dim, p.dtype, std::move(meta));
  return out;
}

}  // namespace mvr
