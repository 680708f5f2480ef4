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

/** \file loss.hpp
 *  \brief Contrastive training objectives over late-interaction scores.
 *
 * Two objectives over a batch of b (query, positive page) pairs, where
 * every other page in the batch acts as a negative:
 *
 *  - pairwise CE: mean over k of softplus(s_k^- - s_k^+), s_k^- being the
 *    hardest in-batch negative score for query k.
 *  - in-batch negatives: mean over k of the cross-entropy of
 *    softmax_l(LI(q_k, d_l)) against target k.
 *
 * Both return analytic (sub)gradients with respect to every query and
 * document row. MaxSim selections and the hardest-negative choice break ties
 * toward the lowest index. Everything runs in binary64.
 */

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mvr/core.hpp"
#include "mvr/error.hpp"

namespace mvr {

/// Dense row-major binary64 matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Matrix from(const MultiVector& mv) {
    Matrix m(mv.rows(), mv.dim());
    const auto src = mv.data();
    for (std::size_t i = 0; i < src.size(); ++i) m.data[i] = src[i];
    return m;
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

/// b query/page pairs; docs[k] is the positive page for queries[k].
struct Batch {
  std::vector<Matrix> queries;
  std::vector<Matrix> docs;

  Batch() = default;
  Batch(std::vector<Matrix> q, std::vector<Matrix> d) : queries(std::move(q)), docs(std::move(d)) {}

  static Batch from(std::span<const MultiVector> queries, std::span<const MultiVector> docs) {
    Batch batch;
    for (const auto& q : queries) batch.queries.push_back(Matrix::from(q));
    for (const auto& d : docs) batch.docs.push_back(Matrix::from(d));
    return batch;
  }

  std::size_t size() const noexcept { return queries.size(); }

  void validate() const {
    if (queries.size() != docs.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::to_string(queries.size()) + " queries vs " + std::to_string(docs.size()) +
                      " documents in batch");
    }
    if (queries.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, "batch needs b >= 2 pairs, got " +
                                                   std::to_string(queries.size()));
    }
    const std::size_t dim = queries.front().cols;
    const auto check = [dim](const Matrix& m, const char* what, std::size_t k) {
      if (m.rows == 0) {
        throw Error(ErrorCode::kEmptyInput, std::string(what) + " " + std::to_string(k) + " is empty");
      }
      if (m.cols != dim || m.data.size() != m.rows * m.cols) {
        throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " " + std::to_string(k) +
                                                       " dim " + std::to_string(m.cols) +
                                                       " vs batch dim " + std::to_string(dim));
      }
    };
    for (std::size_t k = 0; k < queries.size(); ++k) {
      check(queries[k], "query", k);
      check(docs[k], "document", k);
    }
  }
};

struct LossResult {
  double value = 0.0;
  std::vector<Matrix> grad_queries;
  std::vector<Matrix> grad_docs;
};

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

struct PairScore {
  double value = 0.0;
  std::vector<std::size_t> selected;  // argmax doc row per query row
};

inline PairScore late_interaction_f64(const Matrix& q, const Matrix& d) {
  PairScore out;
  out.selected.resize(q.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    double best = 0.0;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < d.rows; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) s += q.at(i, c) * d.at(j, c);
      if (j == 0 || s > best) {
        best = s;
        best_j = j;
      }
    }
    out.selected[i] = best_j;
    out.value += best;
  }
  return out;
}

class ScoreGrid {
 public:
  explicit ScoreGrid(const Batch& batch) : b_(batch.size()), pairs_(b_ * b_) {
    for (std::size_t k = 0; k < b_; ++k) {
      for (std::size_t l = 0; l < b_; ++l) {
        pairs_[k * b_ + l] = late_interaction_f64(batch.queries[k], batch.docs[l]);
      }
    }
  }
  double score(std::size_t k, std::size_t l) const { return pairs_[k * b_ + l].value; }
  const PairScore& pair(std::size_t k, std::size_t l) const { return pairs_[k * b_ + l]; }

 private:
  std::size_t b_;
  std::vector<PairScore> pairs_;
};

// Pushes dL/dLI(q_k, d_l) = coeff through the MaxSim selections.
inline void accumulate_pair_grad(const Batch& batch, const ScoreGrid& grid, std::size_t k,
                                 std::size_t l, double coeff, LossResult& out) {
  if (coeff == 0.0) return;
  const Matrix& q = batch.queries[k];
  const Matrix& d = batch.docs[l];
  Matrix& gq = out.grad_queries[k];
  Matrix& gd = out.grad_docs[l];
  const auto& selected = grid.pair(k, l).selected;
  for (std::size_t i = 0; i < q.rows; ++i) {
    const std::size_t j = selected[i];
    for (std::size_t c = 0; c < q.cols; ++c) {
      gq.at(i, c) += coeff * d.at(j, c);
      gd.at(j, c) += coeff * q.at(i, c);
    }
  }
}

inline LossResult zero_result(const Batch& batch) {
  LossResult out;
  for (const auto& q : batch.queries) out.grad_queries.emplace_back(q.rows, q.cols);
  for (const auto& d : batch.docs) out.grad_docs.emplace_back(d.rows, d.cols);
  return out;
}

}  // namespace detail

/// Mean softplus(s_k^- - s_k^+) with s_k^- the hardest in-batch negative.
inline LossResult pairwise_ce_loss(const Batch& batch) {
  batch.validate();
  const std::size_t b = batch.size();
  const detail::ScoreGrid grid(batch);
  LossResult out = detail::zero_result(batch);

  for (std::size_t k = 0; k < b; ++k) {
    std::size_t hardest = k == 0 ? 1 : 0;
    for (std::size_t l = hardest + 1; l < b; ++l) {
      if (l != k && grid.score(k, l) > grid.score(k, hardest)) hardest = l;
    }
    const double margin = grid.score(k, hardest) - grid.score(k, k);
    out.value += softplus(margin);
    const double g = sigmoid(margin) / static_cast<double>(b);
    detail::accumulate_pair_grad(batch, grid, k, hardest, g, out);
    detail::accumulate_pair_grad(batch, grid, k, k, -g, out);
  }
  out.value /= static_cast<double>(b);
  return out;
}

/// Mean cross-entropy of softmax over all b pages, target = the paired page.
inline LossResult inbatch_negatives_loss(const Batch& batch) {
  batch.validate();
  const std::size_t b = batch.size();
  const detail::ScoreGrid grid(batch);
  LossResult out = detail::zero_result(batch);

  std::vector<double> probs(b);
  for (std::size_t k = 0; k < b; ++k) {
    double top = grid.score(k, 0);
    for (std::size_t l = 1; l < b; ++l) top = std::max(top, grid.score(k, l));
    double z = 0.0;
    for (std::size_t l = 0; l < b; ++l) {
      probs[l] = std::exp(grid.score(k, l) - top);
      z += probs[l];
    }
    out.value += top + std::log(z) - grid.score(k, k);
    for (std::size_t l = 0; l < b; ++l) {
      const double coeff = (probs[l] / z - (l == k ? 1.0 : 0.0)) / static_cast<double>(b);
      detail::accumulate_pair_grad(batch, grid, k, l, coeff, out);
    }
  }
  out.value /= static_cast<double>(b);
  return out;
}

}  // namespace mvr
