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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "mvr/core.hpp"
#include "test_support.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using mvr::MultiVector;
using mvr::testing::close;
using mvr::testing::oracle_late_interaction;
using mvr::testing::random_mv;

TEST_CASE("late_interaction hand examples") {
  const auto q = MultiVector::from_rows("q", {{1, 0}});
  const auto d = MultiVector::from_rows("d", {{1, 0}, {0, 1}});
  CHECK(mvr::late_interaction(q, d) == 1.0f);

  const auto q2 = MultiVector::from_rows("q", {{1, 0}, {0, 1}});
  const auto d2 = MultiVector::from_rows("d", {{0.5f, 0.5f}});
  CHECK(mvr::late_interaction(q2, d2) == 1.0f);
}

TEST_CASE("late_interaction matches the triple-loop oracle on a seeded instance") {
  mvr::Rng rng(20240607);
  const auto q = random_mv(rng, "q", 3, 4);
  const auto d = random_mv(rng, "d", 5, 4);
  const double expected = oracle_late_interaction(q, d);
  CHECK_THAT(mvr::late_interaction(q, d), WithinAbs(expected, 1e-6));
}

TEST_CASE("late_interaction errors") {
  const auto q = MultiVector::from_rows("q", {{1, 0, 0}});
  const auto d = MultiVector::from_rows("doc-7", {{1, 0}});
  CHECK_THROWS_WITH(mvr::late_interaction(q, d), ContainsSubstring("dim 3") && ContainsSubstring("dim 2"));
  try {
    mvr::late_interaction(q, d);
  } catch (const mvr::Error& e) {
    CHECK(e.code() == mvr::ErrorCode::kDimensionMismatch);
  }
  CHECK_THROWS_AS(mvr::late_interaction(MultiVector{}, d), mvr::Error);
  CHECK_THROWS_AS(MultiVector("e", 4, {}), mvr::Error);
}

TEST_CASE("MultiVector validation and binary16 storage") {
  CHECK_THROWS_AS(MultiVector("x", 2, {1.0f, std::numeric_limits<float>::quiet_NaN()}), mvr::Error);
  CHECK_THROWS_AS(MultiVector("x", 2, {1.0f, std::numeric_limits<float>::infinity()}), mvr::Error);
  CHECK_THROWS_AS(MultiVector("x", 3, {1.0f, 2.0f}), mvr::Error);
  CHECK_THROWS_AS(MultiVector("x", 0, {1.0f}), mvr::Error);
  // Beyond the binary16 range the value becomes Inf and is rejected.
  CHECK_THROWS_AS(MultiVector("x", 1, {70000.0f}, mvr::Dtype::kBinary16), mvr::Error);

  const MultiVector h("h", 2, {0.1f, 1.0f / 3.0f}, mvr::Dtype::kBinary16);
  CHECK(h.data()[0] == mvr::round_to_half(0.1f));
  CHECK(h.data()[1] == mvr::round_to_half(1.0f / 3.0f));
  CHECK(h.rows() == 1);
  CHECK(h.with_dtype(mvr::Dtype::kBinary16) == h);
}

TEST_CASE("pooled_score examples") {
  const mvr::PooledVector a{"a", {1, 0}}, b{"b", {0, 1}};
  CHECK(mvr::pooled_score(a, a) == 1.0);
  CHECK(mvr::pooled_score(a, b) == 0.0);
  CHECK_THAT(mvr::pooled_score({"q", {3, 4}}, {"d", {4, 3}}), WithinAbs(24.0 / 25.0, 1e-12));
  CHECK_THROWS_AS(mvr::pooled_score({"z", {0, 0}}, a), mvr::Error);
  CHECK_THROWS_AS(mvr::pooled_score({"q", {1, 0, 0}}, a), mvr::Error);
}

TEST_CASE("mean_pool examples") {
  CHECK(mvr::mean_pool(MultiVector::from_rows("m", {{1, 0}, {0, 1}})).vector == std::vector<float>{0.5f, 0.5f});
  const auto single = mvr::mean_pool(MultiVector::from_rows("s", {{2, 3}}));
  CHECK(single.vector == std::vector<float>{2, 3});
  CHECK(single.id == "s");
  CHECK_THROWS_AS(mvr::mean_pool(MultiVector{}), mvr::Error);

  mvr::Rng rng(99);
  const auto mv = random_mv(rng, "r", 7, 5);
  const auto pooled = mvr::mean_pool(mv);
  for (std::size_t c = 0; c < 5; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < 7; ++r) sum += mv.row(r)[c];
    CHECK_THAT(pooled.vector[c], WithinAbs(sum / 7.0, 1e-7));
  }
}

TEST_CASE("rank_corpus examples") {
  mvr::Rng rng(5);
  SECTION("planted exact match ranks first") {
    const auto q = random_mv(rng, "q", 4, 16);
    std::vector<MultiVector> docs;
    for (int i = 0; i < 20; ++i) docs.push_back(random_mv(rng, "doc-" + std::to_string(100 + i), 8, 16));
    // doc-107 holds the query rows verbatim plus noise rows.
    std::vector<float> planted(q.data().begin(), q.data().end());
    const auto noise = mvr::testing::uniform_values(rng, 4 * 16);
    planted.insert(planted.end(), noise.begin(), noise.end());
    docs[7] = MultiVector("doc-107", 16, planted);
    const auto ranking = mvr::rank_corpus(q, docs, 3);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking.front().doc_id == "doc-107");
  }
  SECTION("identical documents tie-break by ascending id") {
    const auto d = random_mv(rng, "x", 3, 8);
    const std::vector<MultiVector> docs = {d.with_id("b"), d.with_id("c"), d.with_id("a")};
    const auto ranking = mvr::rank_corpus(random_mv(rng, "q", 2, 8), docs, 3);
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0].doc_id == "a");
    CHECK(ranking[1].doc_id == "b");
    CHECK(ranking[2].doc_id == "c");
  }
  SECTION("matches a brute-force score-and-sort oracle") {
    const auto q = random_mv(rng, "q", 5, 12);
    std::vector<MultiVector> docs;
    for (int i = 0; i < 50; ++i) docs.push_back(random_mv(rng, "d" + std::to_string(i), 6, 12));
    const auto ranking = mvr::rank_corpus(q, docs, 5);
    const auto expected = mvr::testing::oracle_rank(q, docs, 5);
    REQUIRE(ranking.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(ranking[i].doc_id == expected[i].first);
      CHECK(close(ranking[i].score, expected[i].second, 1e-6));
    }
  }
  SECTION("edge cases") {
    const auto q = random_mv(rng, "q", 2, 4);
    CHECK(mvr::rank_corpus(q, std::vector<MultiVector>{}, 5).empty());
    const std::vector<MultiVector> two = {random_mv(rng, "a", 2, 4), random_mv(rng, "b", 2, 4)};
    CHECK(mvr::rank_corpus(q, two, 10).size() == 2);
    CHECK_THROWS_AS(mvr::rank_corpus(q, two, 0), mvr::Error);
    const std::vector<MultiVector> bad = {random_mv(rng, "ok", 2, 4), random_mv(rng, "wrong-dim", 2, 5)};
    CHECK_THROWS_WITH(mvr::rank_corpus(q, bad, 1), ContainsSubstring("wrong-dim"));
  }
}

TEST_CASE("rank_corpus is independent of thread count") {
  mvr::Rng rng(11);
  const auto q = random_mv(rng, "q", 6, 32);
  std::vector<MultiVector> docs;
  for (int i = 0; i < 300; ++i) docs.push_back(random_mv(rng, "d" + std::to_string(i), 10, 32));
  const auto one = mvr::rank_corpus(q, docs, 300, 1);
  const auto many = mvr::rank_corpus(q, docs, 300, 7);
  CHECK(one == many);
}

TEST_CASE("late_interaction properties", "[property]") {
  mvr::Rng rng(424242);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nq = 1 + rng.below(32), nd = 1 + rng.below(32), dim = 1 + rng.below(64);
    const auto q = random_mv(rng, "q", nq, dim);
    const auto d = random_mv(rng, "d", nd, dim);
    const float li = mvr::late_interaction(q, d);
    INFO("trial " << trial << " nq=" << nq << " nd=" << nd << " dim=" << dim);

    REQUIRE(close(li, oracle_late_interaction(q, d), 1e-6));

    // Row permutations on either side leave the score bit-identical.
    std::vector<std::size_t> perm_d(nd), perm_q(nq);
    for (std::size_t i = 0; i < nd; ++i) perm_d[i] = nd - 1 - i;
    for (std::size_t i = 0; i < nq; ++i) perm_q[i] = (i + 1) % nq;
    const auto permute = [](const MultiVector& mv, const std::vector<std::size_t>& p) {
      std::vector<float> out;
      for (std::size_t i : p) out.insert(out.end(), mv.row(i).begin(), mv.row(i).end());
      return MultiVector(mv.id(), mv.dim(), out);
    };
    REQUIRE(mvr::late_interaction(q, permute(d, perm_d)) == li);
    REQUIRE(mvr::late_interaction(permute(q, perm_q), d) == li);

    // Appending a document row never lowers the score.
    std::vector<float> grown(d.data().begin(), d.data().end());
    const auto extra = mvr::testing::uniform_values(rng, dim);
    grown.insert(grown.end(), extra.begin(), extra.end());
    REQUIRE(mvr::late_interaction(q, MultiVector("d", dim, grown)) >= li);

    // Splitting the query splits the score.
    if (nq >= 2) {
      const std::size_t cut = 1 + rng.below(nq - 1);
      const auto data = q.data();
      const MultiVector head("h", dim, {data.begin(), data.begin() + static_cast<std::ptrdiff_t>(cut * dim)});
      const MultiVector tail("t", dim, {data.begin() + static_cast<std::ptrdiff_t>(cut * dim), data.end()});
      REQUIRE(close(mvr::late_interaction(head, d) + mvr::late_interaction(tail, d), li, 1e-6));
    }

    // Power-of-two scaling is exact in binary32.
    std::vector<float> scaled(d.data().begin(), d.data().end());
    for (auto& v : scaled) v *= 4.0f;
    REQUIRE(mvr::late_interaction(q, MultiVector("d", dim, scaled)) == 4.0f * li);
  }
}

TEST_CASE("uniform positive scaling keeps the corpus ranking", "[property]") {
  mvr::Rng rng(31337);
  const auto q = random_mv(rng, "q", 4, 16);
  std::vector<MultiVector> docs, scaled;
  for (int i = 0; i < 40; ++i) {
    docs.push_back(random_mv(rng, "d" + std::to_string(i), 5, 16));
    std::vector<float> s(docs.back().data().begin(), docs.back().data().end());
    for (auto& v : s) v *= 2.5f;
    scaled.emplace_back(docs.back().id(), 16, s);
  }
  const auto a = mvr::rank_corpus(q, docs, 40);
  const auto b = mvr::rank_corpus(q, scaled, 40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].doc_id == b[i].doc_id);
    CHECK(close(b[i].score, 2.5 * a[i].score, 1e-6));
  }
}

TEST_CASE("rank_corpus output is sorted and duplicate free", "[property]") {
  mvr::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 1 + rng.below(8);
    const auto q = random_mv(rng, "q", 1 + rng.below(4), dim);
    std::vector<MultiVector> docs;
    const std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) docs.push_back(random_mv(rng, "d" + std::to_string(i), 1 + rng.below(5), dim));
    const auto ranking = mvr::rank_corpus(q, docs, 1 + rng.below(70));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      REQUIRE(ids.insert(ranking[i].doc_id).second);
      if (i > 0) REQUIRE(ranking[i - 1].score >= ranking[i].score);
    }
  }
}

TEST_CASE("pooled ranking ties by id") {
  const std::vector<mvr::PooledVector> docs = {{"b", {1, 0}}, {"a", {2, 0}}, {"c", {0, 1}}};
  const auto ranking = mvr::rank_pooled({"q", {1, 0}}, docs, 3);
  CHECK(ranking[0].doc_id == "a");
  CHECK(ranking[1].doc_id == "b");
  CHECK(ranking[2].doc_id == "c");
}
