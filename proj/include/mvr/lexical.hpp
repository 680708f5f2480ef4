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

/** \file lexical.hpp
 *  \brief Okapi BM25 over text chunks with page-level max-pooling.
 *
 * Chunks are the scoring unit: document frequencies and the average length
 * are computed over chunks, and a page scores as its best chunk.
 *
 *     score(q, c) = sum_{t in q} idf(t) * f(t,c) * (k1 + 1)
 *                   / (f(t,c) + k1 * (1 - b + b * |c| / avgdl))
 *     idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
 *
 * Repeated query tokens contribute once per occurrence.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "mvr/core.hpp"
#include "mvr/error.hpp"

namespace mvr {

struct TokenizerConfig {
  bool remove_stopwords = false;
  bool stem = false;  // Harman "S" plural stemmer
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

namespace detail {

// Decodes one code point; malformed input yields U+FFFD and consumes one byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char c0 = byte(i);
  if (c0 < 0x80) {
    ++i;
    return c0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((c0 & 0xe0) == 0xc0) {
    len = 2;
    cp = c0 & 0x1f;
  } else if ((c0 & 0xf0) == 0xe0) {
    len = 3;
    cp = c0 & 0x0f;
  } else if ((c0 & 0xf8) == 0xf0) {
    len = 4;
    cp = c0 & 0x07;
  } else {
    ++i;
    return 0xfffd;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xfffd;
  }
  for (std::size_t k = 1; k < len; ++k) {
    if ((byte(i + k) & 0xc0) != 0x80) {
      ++i;
      return 0xfffd;
    }
    cp = (cp << 6) | (byte(i + k) & 0x3f);
  }
  i += len;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

/// Letters, digits and combining marks. Outside ASCII this excludes the
/// punctuation, symbol, space and emoji blocks and accepts everything else.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp < 0xc0) return cp == 0xaa || cp == 0xb5 || cp == 0xba;
  if (cp == 0xd7 || cp == 0xf7) return false;
  if (cp >= 0x2000 && cp <= 0x2bff) return false;  // punctuation, symbols, arrows, shapes
  if (cp >= 0x2e00 && cp <= 0x2e7f) return false;
  if (cp >= 0x3000 && cp <= 0x303f) return false;  // CJK punctuation
  if (cp >= 0xfe30 && cp <= 0xfe6f) return false;
  if (cp == 0xfeff || cp == 0xfffd) return false;
  if ((cp >= 0xff00 && cp <= 0xff0f) || (cp >= 0xff1a && cp <= 0xff20) ||
      (cp >= 0xff3b && cp <= 0xff40) || (cp >= 0xff5b && cp <= 0xff65)) {
    return false;
  }
  if (cp >= 0x1f000 && cp <= 0x1faff) return false;  // emoji and pictographs
  return true;
}

/// Simple (1:1) lowercase mapping for Latin, Greek, Cyrillic and Armenian.
inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xc0) return cp;
  if (cp <= 0xde) return cp == 0xd7 ? cp : cp + 0x20;
  if (cp == 0x130) return U'i';
  if (cp == 0x178) return 0xff;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14a && cp <= 0x177)) return cp % 2 == 0 ? cp + 1 : cp;
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17e)) return cp % 2 == 1 ? cp + 1 : cp;
  if (cp == 0x386) return 0x3ac;
  if (cp >= 0x388 && cp <= 0x38a) return cp + 0x25;
  if (cp == 0x38c) return 0x3cc;
  if (cp == 0x38e || cp == 0x38f) return cp + 0x3f;
  if (cp >= 0x391 && cp <= 0x3a9 && cp != 0x3a2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48a && cp <= 0x4bf)) return cp % 2 == 0 ? cp + 1 : cp;
  if (cp >= 0x531 && cp <= 0x556) return cp + 0x30;
  if ((cp >= 0x1e00 && cp <= 0x1e95) || (cp >= 0x1ea0 && cp <= 0x1eff)) return cp % 2 == 0 ? cp + 1 : cp;
  if (cp >= 0xff21 && cp <= 0xff3a) return cp + 0x20;
  return cp;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline const std::unordered_set<std::string_view>& english_stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",    "an",   "and",  "are",  "as",    "at",   "be",   "but",   "by",   "for",
      "from", "has",  "have", "he",   "her",   "his",  "i",    "if",    "in",   "into",
      "is",   "it",   "its",  "no",   "not",   "of",   "on",   "or",    "she",  "such",
      "that", "the",  "their", "then", "there", "these", "they", "this", "to",  "was",
      "we",   "were", "what", "when", "where", "which", "who",  "will",  "with", "you"};
  return words;
}

}  // namespace detail

/// Harman S-stemmer: ies -> y, es -> e, s -> "" with the usual exceptions.
inline std::string s_stem(std::string word) {
  using detail::ends_with;
  if (ends_with(word, "ies") && !ends_with(word, "eies") && !ends_with(word, "aies")) {
    word.replace(word.size() - 3, 3, "y");
  } else if (ends_with(word, "es") && !ends_with(word, "aes") && !ends_with(word, "ees") &&
             !ends_with(word, "oes")) {
    word.pop_back();
  } else if (ends_with(word, "s") && !ends_with(word, "us") && !ends_with(word, "ss")) {
    word.pop_back();
  }
  return word;
}

/// Lowercases, splits on anything that is not a letter, digit or combining
/// mark, and drops empty tokens.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {}) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (current.empty()) return;
    if (config.remove_stopwords && detail::english_stopwords().contains(current)) {
      current.clear();
      return;
    }
    tokens.push_back(config.stem ? s_stem(std::move(current)) : std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = detail::next_code_point(text, i);
    if (detail::is_word_char(cp)) {
      detail::append_utf8(current, detail::to_lower(cp));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

/// One chunk as ingested, before tokenization.
struct RawChunk {
  std::string chunk_id;
  std::string page_id;
  std::string text;
};

/// Reads `{"chunk_id", "page_id", "text"}` objects, one per line. Blank lines are skipped.
inline std::vector<RawChunk> read_chunks_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<RawChunk> chunks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      chunks.push_back({j.at("chunk_id").get<std::string>(), j.at("page_id").get<std::string>(),
                        j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return chunks;
}

/// Immutable BM25 corpus over tokenized chunks grouped by page.
class LexicalCorpus {
 public:
  struct Chunk {
    std::string chunk_id;
    std::string page_id;
    std::size_t length = 0;
    std::unordered_map<std::string, std::uint32_t> tf;
  };

  /// Chunks with no tokens after filtering are dropped (see dropped_chunks()).
  explicit LexicalCorpus(std::span<const RawChunk> raw, TokenizerConfig tokenizer = {},
                         Bm25Params params = {})
      : tokenizer_(tokenizer), params_(params) {
    if (params_.k1 < 0.0 || params_.b < 0.0 || params_.b > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "BM25 needs k1 >= 0 and b in [0, 1]");
    }
    std::size_t total_length = 0;
    std::unordered_set<std::string_view> seen;
    for (const auto& r : raw) {
      if (!seen.insert(r.chunk_id).second) {
        throw Error(ErrorCode::kDuplicateId, "chunk id '" + r.chunk_id + "' appears twice");
      }
      auto tokens = tokenize(r.text, tokenizer_);
      if (tokens.empty()) {
        dropped_.push_back(r.chunk_id);
        continue;
      }
      Chunk chunk{r.chunk_id, r.page_id, tokens.size(), {}};
      for (auto& t : tokens) ++chunk.tf[std::move(t)];
      for (const auto& [term, _] : chunk.tf) ++df_[term];
      total_length += chunk.length;
      chunk_index_.emplace(chunk.chunk_id, chunks_.size());
      auto [page, inserted] = pages_.try_emplace(chunk.page_id);
      if (inserted) page_order_.push_back(chunk.page_id);
      page->second.push_back(chunks_.size());
      chunks_.push_back(std::move(chunk));
    }
    avgdl_ = chunks_.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(chunks_.size());
  }

  std::size_t size() const noexcept { return chunks_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  const Bm25Params& params() const noexcept { return params_; }
  const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }
  const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
  const std::vector<std::string>& page_ids() const noexcept { return page_order_; }
  const std::vector<std::string>& dropped_chunks() const noexcept { return dropped_; }

  std::size_t df(const std::string& term) const {
    const auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
  }

  double idf(const std::string& term) const {
    const double n = static_cast<double>(chunks_.size());
    const double d = static_cast<double>(df(term));
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
  }

  std::vector<std::string> tokenize_query(std::string_view text) const {
    return tokenize(text, tokenizer_);
  }

  double bm25_score(std::span<const std::string> query, std::string_view chunk_id) const {
    const auto it = chunk_index_.find(std::string(chunk_id));
    if (it == chunk_index_.end()) {
      throw Error(ErrorCode::kNotFound, "unknown chunk '" + std::string(chunk_id) + "'");
    }
    return score_chunk(query, chunks_[it->second]);
  }

  /// Best chunk score on the page.
  double page_score(std::span<const std::string> query, std::string_view page_id) const {
    const auto it = pages_.find(std::string(page_id));
    if (it == pages_.end()) {
      throw Error(ErrorCode::kNotFound, "unknown page '" + std::string(page_id) + "'");
    }
    double best = 0.0;
    bool first = true;
    for (std::size_t c : it->second) {
      const double s = score_chunk(query, chunks_[c]);
      if (first || s > best) best = s;
      first = false;
    }
    return best;
  }

  /// Top-k pages by max-pooled chunk score, ties by ascending page id.
  std::vector<ScoredDoc> rank_pages(std::span<const std::string> query, std::size_t k) const {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    std::vector<ScoredDoc> scored;
    scored.reserve(page_order_.size());
    for (const auto& page : page_order_) scored.push_back({page, page_score(query, page)});
    return detail::top_k(std::move(scored), k);
  }

 private:
  double score_chunk(std::span<const std::string> query, const Chunk& chunk) const {
    if (query.empty()) throw Error(ErrorCode::kEmptyInput, "BM25 query has no tokens");
    const double norm =
        params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(chunk.length) / avgdl_);
    double score = 0.0;
    for (const auto& term : query) {
      const auto it = chunk.tf.find(term);
      if (it == chunk.tf.end()) continue;
      const double f = it->second;
      score += idf(term) * f * (params_.k1 + 1.0) / (f + norm);
    }
    return score;
  }

  TokenizerConfig tokenizer_;
  Bm25Params params_;
  std::vector<Chunk> chunks_;
  std::unordered_map<std::string, std::size_t> chunk_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> pages_;
  std::vector<std::string> page_order_;
  std::unordered_map<std::string, std::size_t> df_;
  std::vector<std::string> dropped_;
  double avgdl_ = 0.0;
};

}  // namespace mvr
