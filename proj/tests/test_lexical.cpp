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
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lexical_oracle.hpp"
#include "mvr/lexical.hpp"
#include "mvr/random.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using mvr::LexicalCorpus;
using mvr::RawChunk;
using mvr::testing::textbook_bm25;
using Tokens = std::vector<std::string>;

namespace {

std::string join(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

const Tokens kVocab = {"solar", "wind", "grid", "energy", "hourly", "load", "coal", "price"};

std::vector<Tokens> random_chunks(mvr::Rng& rng, std::size_t n) {
  std::vector<Tokens> chunks(n);
  for (auto& c : chunks) {
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t i = 0; i < len; ++i) c.push_back(kVocab[rng.below(kVocab.size())]);
  }
  return chunks;
}

std::vector<RawChunk> as_raw(const std::vector<Tokens>& chunks, std::size_t pages) {
  std::vector<RawChunk> raw;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    raw.push_back({"c" + std::to_string(i), "p" + std::to_string(i % pages), join(chunks[i])});
  }
  return raw;
}

}  // namespace

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
  CHECK(mvr::tokenize("Hourly Energy, 2030!") == Tokens{"hourly", "energy", "2030"});
  CHECK(mvr::tokenize("").empty());
  CHECK(mvr::tokenize("  ,;!  ").empty());
  CHECK(mvr::tokenize("Énergie-éolienne") == Tokens{"énergie", "éolienne"});
  CHECK(mvr::tokenize("ΑΘΗΝΑ Москва Երևան") == Tokens{"αθηνα", "москва", "երևան"});
  CHECK(mvr::tokenize("a—b c") == Tokens{"a", "b", "c"});
  CHECK(mvr::tokenize("x\xff y") == Tokens{"x", "y"});
}

TEST_CASE("stemming and stopwords are opt-in") {
  const mvr::TokenizerConfig both{true, true};
  CHECK(mvr::tokenize("The Batteries of the Plants", both) == Tokens{"battery", "plant"});
  CHECK(mvr::tokenize("The Batteries", {}) == Tokens{"the", "batteries"});
  CHECK(mvr::s_stem("glasses") == "glasse");
  CHECK(mvr::s_stem("bus") == "bus");
  CHECK(mvr::s_stem("class") == "class");
  CHECK(mvr::s_stem("toes") == "toe");
  CHECK(mvr::s_stem("does") == "doe");
  CHECK(mvr::s_stem("aes") == "ae");
}

TEST_CASE("single-chunk corpus gives ln(4/3)") {
  const std::vector<RawChunk> raw = {{"c", "p", "solar"}};
  const LexicalCorpus corpus(raw);
  const Tokens q = {"solar"};
  CHECK_THAT(corpus.bm25_score(q, "c"), WithinAbs(std::log(4.0 / 3.0), 1e-12));
  CHECK_THAT(corpus.bm25_score(q, "c"), WithinAbs(0.2877, 1e-4));
}

TEST_CASE("absent terms contribute nothing") {
  const std::vector<RawChunk> raw = {{"c1", "p", "solar wind"}, {"c2", "p", "grid"}};
  const LexicalCorpus corpus(raw);
  CHECK(corpus.bm25_score(Tokens{"nuclear"}, "c1") == 0.0);
  CHECK(corpus.bm25_score(Tokens{"nuclear", "tidal"}, "c2") == 0.0);
}

TEST_CASE("three-chunk toy corpus matches the textbook formula") {
  const std::vector<Tokens> chunks = {{"solar", "energy", "solar", "grid"},
                                      {"wind", "energy"},
                                      {"hourly", "load", "energy", "grid", "price", "load"}};
  const LexicalCorpus corpus(as_raw(chunks, 3));
  CHECK(corpus.df("energy") == 3);
  CHECK(corpus.df("grid") == 2);
  CHECK_THAT(corpus.avgdl(), WithinAbs(4.0, 0.0));
  for (const Tokens& q : {Tokens{"solar"}, Tokens{"energy", "grid"}, Tokens{"load", "load", "wind"},
                          Tokens{"price", "solar", "missing"}}) {
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      CHECK_THAT(corpus.bm25_score(q, "c" + std::to_string(c)), WithinAbs(textbook_bm25(chunks, q, c), 1e-9));
    }
  }
}

TEST_CASE("random corpora match the textbook formula", "[property]") {
  mvr::Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto chunks = random_chunks(rng, 1 + rng.below(15));
    const LexicalCorpus corpus(as_raw(chunks, 3));
    Tokens q;
    for (std::size_t i = 0, n = 1 + rng.below(4); i < n; ++i) q.push_back(kVocab[rng.below(kVocab.size())]);
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const double s = corpus.bm25_score(q, "c" + std::to_string(c));
      REQUIRE(s >= 0.0);
      REQUIRE_THAT(s, WithinAbs(textbook_bm25(chunks, q, c), 1e-9));
    }
  }
}

TEST_CASE("adding a term occurrence follows the closed form", "[property]") {
  mvr::Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto chunks = random_chunks(rng, 2 + rng.below(6));
    const Tokens q = {kVocab[rng.below(kVocab.size())]};
    const std::size_t target = rng.below(chunks.size());
    chunks[target].push_back(q[0]);
    const LexicalCorpus after(as_raw(chunks, 2));
    REQUIRE_THAT(after.bm25_score(q, "c" + std::to_string(target)),
                 WithinAbs(textbook_bm25(chunks, q, target), 1e-9));
  }
}

TEST_CASE("custom k1 and b") {
  const std::vector<Tokens> chunks = {{"solar", "solar", "wind"}, {"grid"}, {"solar", "grid", "grid", "grid"}};
  const LexicalCorpus corpus(as_raw(chunks, 1), {}, {2.0, 0.3});
  const Tokens q = {"solar", "grid"};
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK_THAT(corpus.bm25_score(q, "c" + std::to_string(c)), WithinAbs(textbook_bm25(chunks, q, c, 2.0, 0.3), 1e-9));
  }
  CHECK_THROWS_AS(LexicalCorpus(as_raw(chunks, 1), {}, {1.2, 1.5}), mvr::Error);
}

TEST_CASE("page score is the best chunk") {
  // Chunk a2 scores higher than a1 for "solar" (shorter, same tf).
  const std::vector<RawChunk> raw = {{"a1", "A", "solar wind grid coal coal coal"},
                                     {"a2", "A", "solar"},
                                     {"b1", "B", "wind"}};
  const LexicalCorpus corpus(raw);
  const Tokens q = {"solar"};
  const double s1 = corpus.bm25_score(q, "a1"), s2 = corpus.bm25_score(q, "a2");
  REQUIRE(s1 < s2);
  CHECK(corpus.page_score(q, "A") == s2);
  CHECK(corpus.page_score(q, "B") == corpus.bm25_score(q, "b1"));
  CHECK_THROWS_AS(corpus.page_score(q, "Z"), mvr::Error);
  CHECK_THROWS_AS(corpus.bm25_score(q, "zz"), mvr::Error);
  CHECK_THROWS_AS(corpus.bm25_score(Tokens{}, "a1"), mvr::Error);
}

TEST_CASE("page ranking equals brute-force max pooling", "[property]") {
  mvr::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t pages = 1 + rng.below(6);
    const auto chunks = random_chunks(rng, pages + rng.below(20));
    const LexicalCorpus corpus(as_raw(chunks, pages));
    const Tokens q = {kVocab[rng.below(kVocab.size())], kVocab[rng.below(kVocab.size())]};
    std::map<std::string, double> best;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const std::string page = "p" + std::to_string(c % pages);
      const double s = corpus.bm25_score(q, "c" + std::to_string(c));
      best[page] = best.contains(page) ? std::max(best[page], s) : s;
    }
    std::vector<std::pair<std::string, double>> expected(best.begin(), best.end());
    std::stable_sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const auto ranked = corpus.rank_pages(q, pages);
    REQUIRE(ranked.size() == expected.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      REQUIRE(ranked[i].doc_id == expected[i].first);
      REQUIRE(ranked[i].score == expected[i].second);
      REQUIRE(corpus.page_score(q, ranked[i].doc_id) == expected[i].second);
    }
  }
}

TEST_CASE("chunk order does not change scores", "[property]") {
  mvr::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto chunks = random_chunks(rng, 3 + rng.below(10));
    auto raw = as_raw(chunks, 3);
    const LexicalCorpus a(raw);
    for (std::size_t i = raw.size() - 1; i > 0; --i) std::swap(raw[i], raw[rng.below(i + 1)]);
    const LexicalCorpus b(raw);
    const Tokens q = {kVocab[rng.below(kVocab.size())]};
    for (const auto& page : {"p0", "p1", "p2"}) REQUIRE(a.page_score(q, page) == b.page_score(q, page));
  }
}

TEST_CASE("empty chunks are dropped and duplicate ids rejected") {
  const std::vector<RawChunk> raw = {{"c1", "p", "solar"}, {"c2", "p", "  ...  "}, {"c3", "q", "wind"}};
  const LexicalCorpus corpus(raw);
  CHECK(corpus.size() == 2);
  CHECK(corpus.dropped_chunks() == std::vector<std::string>{"c2"});
  CHECK(corpus.avgdl() == 1.0);
  const std::vector<RawChunk> dup = {{"c1", "p", "solar"}, {"c1", "q", "wind"}};
  CHECK_THROWS_AS(LexicalCorpus(dup), mvr::Error);
  const std::vector<RawChunk> dup_empty = {{"c1", "p", "!!"}, {"c1", "q", "wind"}};
  CHECK_THROWS_AS(LexicalCorpus(dup_empty), mvr::Error);
}

TEST_CASE("JSON-lines chunk ingestion") {
  mvr::testing::TempDir dir("lex");
  {
    std::ofstream out(dir / "chunks.jsonl");
    out << R"({"chunk_id": "c1", "page_id": "p1", "text": "Solar Energy"})" << "\n\n"
        << R"({"chunk_id": "c2", "page_id": "p1", "text": "wind"})" << "\n";
  }
  const auto chunks = mvr::read_chunks_jsonl(dir / "chunks.jsonl");
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].text == "Solar Energy");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"chunk_id": "c1"})" << "\n";
  }
  CHECK_THROWS_AS(mvr::read_chunks_jsonl(dir / "bad.jsonl"), mvr::Error);
}
