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

/** \file eval.hpp
 *  \brief NDCG@k, Recall@k and MRR over TREC-style runs and qrels.
 *
 * Conventions:
 *  - gain is 2^rel - 1, discount log2(rank + 1);
 *  - a run's list order is authoritative, scores are never re-sorted;
 *  - judged queries absent from the run score 0 and count in the mean;
 *  - queries without any rel > 0 judgment are excluded with a warning.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "mvr/core.hpp"
#include "mvr/error.hpp"

namespace mvr {

/// Relevance judgments: query id -> (doc id -> grade >= 0).
class Qrels {
 public:
  void add(const std::string& query_id, const std::string& doc_id, int relevance) {
    if (relevance < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative relevance for (" + query_id + ", " + doc_id + ")");
    }
    judgments_[query_id][doc_id] = relevance;
  }

  const std::map<std::string, std::map<std::string, int>>& judgments() const noexcept {
    return judgments_;
  }

  const std::map<std::string, int>* find(const std::string& query_id) const {
    const auto it = judgments_.find(query_id);
    return it == judgments_.end() ? nullptr : &it->second;
  }

  int relevance(const std::string& query_id, const std::string& doc_id) const {
    const auto* q = find(query_id);
    if (q == nullptr) return 0;
    const auto it = q->find(doc_id);
    return it == q->end() ? 0 : it->second;
  }

 private:
  std::map<std::string, std::map<std::string, int>> judgments_;
};

/// Ranked lists per query. Order within a list is the ranking.
class RetrievalRun {
 public:
  void set(const std::string& query_id, std::vector<ScoredDoc> ranking) {
    std::unordered_set<std::string> seen;
    for (const auto& d : ranking) {
      if (!seen.insert(d.doc_id).second) {
        throw Error(ErrorCode::kDuplicateId,
                    "document '" + d.doc_id + "' ranked twice for query '" + query_id + "'");
      }
    }
    rankings_[query_id] = std::move(ranking);
  }

  const std::map<std::string, std::vector<ScoredDoc>>& rankings() const noexcept { return rankings_; }

  const std::vector<ScoredDoc>* find(const std::string& query_id) const {
    const auto it = rankings_.find(query_id);
    return it == rankings_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, std::vector<ScoredDoc>> rankings_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(std::move(f));
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const std::filesystem::path& path, std::size_t lineno) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::kFormat,
                path.string() + ":" + std::to_string(lineno) + ": bad number '" + text + "'");
  }
  return value;
}

/// Shortest decimal that round-trips.
template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

}  // namespace detail

/// TREC qrels: `query_id iteration doc_id relevance`.
inline Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  Qrels qrels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto f = detail::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 4) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) +
                                          ": expected 4 fields, got " + std::to_string(f.size()));
    }
    const int rel = detail::parse_number<int>(f[3], path, lineno);
    if (rel < 0) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) + ": negative relevance");
    }
    qrels.add(f[0], f[2], rel);
  }
  return qrels;
}

inline void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  for (const auto& [q, docs] : qrels.judgments()) {
    for (const auto& [d, rel] : docs) out << q << " 0 " << d << ' ' << rel << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

/// TREC run: `query_id Q0 doc_id rank score tag`. Lists are ordered by the
/// rank column; equal ranks keep file order.
inline RetrievalRun read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  struct Line {
    long rank;
    std::size_t order;
    ScoredDoc doc;
  };
  std::map<std::string, std::vector<Line>> grouped;
  std::string line;
  std::size_t order = 0;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto f = detail::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) +
                                          ": expected 6 fields, got " + std::to_string(f.size()));
    }
    const long rank = detail::parse_number<long>(f[3], path, lineno);
    const double score = detail::parse_number<double>(f[4], path, lineno);
    grouped[f[0]].push_back({rank, order++, {f[2], score}});
  }
  RetrievalRun run;
  for (auto& [q, lines] : grouped) {
    std::stable_sort(lines.begin(), lines.end(),
                     [](const Line& a, const Line& b) { return a.rank < b.rank; });
    std::vector<ScoredDoc> ranking;
    ranking.reserve(lines.size());
    for (auto& l : lines) ranking.push_back(std::move(l.doc));
    run.set(q, std::move(ranking));
  }
  return run;
}

inline std::string encode_run(const RetrievalRun& run, const std::string& tag = "mvr") {
  std::string out;
  for (const auto& [q, ranking] : run.rankings()) {
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      out += q + " Q0 " + ranking[r].doc_id + ' ' + std::to_string(r + 1) + ' ' +
             detail::format_number(ranking[r].score) + ' ' + tag + '\n';
    }
  }
  return out;
}

inline void write_run(const RetrievalRun& run, const std::filesystem::path& path,
                      const std::string& tag = "mvr") {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << encode_run(run, tag);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

// Per-query metric definitions. `judged` maps doc id to grade.

inline double dcg_at_k(std::span<const ScoredDoc> ranking, const std::map<std::string, int>& judged,
                       std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, ranking.size());
  for (std::size_t r = 0; r < n; ++r) {
    const auto it = judged.find(ranking[r].doc_id);
    const int rel = it == judged.end() ? 0 : it->second;
    if (rel > 0) dcg += (std::exp2(rel) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg;
}

inline double query_ndcg(std::span<const ScoredDoc> ranking, const std::map<std::string, int>& judged,
                         std::size_t k) {
  std::vector<int> grades;
  for (const auto& [_, rel] : judged) {
    if (rel > 0) grades.push_back(rel);
  }
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, grades.size()); ++r) {
    ideal += (std::exp2(grades[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  if (ideal == 0.0) return 0.0;
  return dcg_at_k(ranking, judged, k) / ideal;
}

inline double query_recall(std::span<const ScoredDoc> ranking, const std::map<std::string, int>& judged,
                           std::size_t k) {
  std::size_t relevant = 0;
  for (const auto& [_, rel] : judged) relevant += rel > 0;
  if (relevant == 0) return 0.0;
  std::size_t found = 0;
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    const auto it = judged.find(ranking[r].doc_id);
    found += it != judged.end() && it->second > 0;
  }
  return static_cast<double>(found) / static_cast<double>(relevant);
}

inline double query_reciprocal_rank(std::span<const ScoredDoc> ranking,
                                    const std::map<std::string, int>& judged) {
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const auto it = judged.find(ranking[r].doc_id);
    if (it != judged.end() && it->second > 0) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

/// One metric over the evaluated query set.
struct MetricSlice {
  std::string name;
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

struct MetricReport {
  std::vector<std::size_t> ks;
  std::map<std::string, double> aggregate;                       // metric -> mean
  std::map<std::string, std::map<std::string, double>> per_query;  // query -> metric -> value
  std::vector<std::string> warnings;

  std::size_t num_queries() const noexcept { return per_query.size(); }
  double at(const std::string& metric) const {
    const auto it = aggregate.find(metric);
    if (it == aggregate.end()) throw Error(ErrorCode::kNotFound, "metric '" + metric + "' not in report");
    return it->second;
  }
};

namespace detail {

// Queries with at least one relevant judgment, in id order.
inline std::vector<std::string> evaluable_queries(const RetrievalRun& run, const Qrels& qrels,
                                                  std::vector<std::string>* warnings) {
  std::vector<std::string> out;
  for (const auto& [q, judged] : qrels.judgments()) {
    const bool any = std::any_of(judged.begin(), judged.end(), [](const auto& p) { return p.second > 0; });
    if (!any) {
      if (warnings) warnings->push_back("query '" + q + "' has no relevant documents; excluded");
      continue;
    }
    if (warnings && run.find(q) == nullptr) {
      warnings->push_back("query '" + q + "' missing from run; scored 0");
    }
    out.push_back(q);
  }
  if (warnings) {
    for (const auto& [q, _] : run.rankings()) {
      if (qrels.find(q) == nullptr) warnings->push_back("query '" + q + "' has no judgments; ignored");
    }
  }
  return out;
}

template <typename Fn>
MetricSlice compute_slice(std::string name, const RetrievalRun& run, const Qrels& qrels, Fn&& fn) {
  MetricSlice slice{std::move(name), {}, 0.0};
  const auto queries = evaluable_queries(run, qrels, nullptr);
  double total = 0.0;
  for (const auto& q : queries) {
    const auto* ranking = run.find(q);
    const double v = ranking == nullptr ? 0.0 : fn(std::span<const ScoredDoc>(*ranking), *qrels.find(q));
    slice.per_query[q] = v;
    total += v;
  }
  slice.mean = queries.empty() ? 0.0 : total / static_cast<double>(queries.size());
  return slice;
}

}  // namespace detail

inline MetricSlice ndcg_at_k(const RetrievalRun& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  return detail::compute_slice("ndcg@" + std::to_string(k), run, qrels,
                               [k](auto ranking, const auto& judged) { return query_ndcg(ranking, judged, k); });
}

inline MetricSlice recall_at_k(const RetrievalRun& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  return detail::compute_slice("recall@" + std::to_string(k), run, qrels,
                               [k](auto ranking, const auto& judged) { return query_recall(ranking, judged, k); });
}

inline MetricSlice mrr(const RetrievalRun& run, const Qrels& qrels) {
  return detail::compute_slice("mrr", run, qrels, [](auto ranking, const auto& judged) {
    return query_reciprocal_rank(ranking, judged);
  });
}

inline MetricReport evaluate(const RetrievalRun& run, const Qrels& qrels, std::vector<std::size_t> ks) {
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "need at least one cutoff k");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  MetricReport report;
  report.ks = ks;
  const auto queries = detail::evaluable_queries(run, qrels, &report.warnings);
  for (const auto& q : queries) report.per_query[q];

  std::vector<MetricSlice> slices;
  for (std::size_t k : ks) {
    slices.push_back(ndcg_at_k(run, qrels, k));
    slices.push_back(recall_at_k(run, qrels, k));
  }
  slices.push_back(mrr(run, qrels));
  for (const auto& s : slices) {
    report.aggregate[s.name] = s.mean;
    for (const auto& [q, v] : s.per_query) report.per_query[q][s.name] = v;
  }
  return report;
}

/// JSON with sorted keys: {aggregate, k, num_queries, per_query, warnings}.
inline nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j;
  j["k"] = report.ks;
  j["num_queries"] = report.num_queries();
  j["aggregate"] = report.aggregate;
  j["per_query"] = report.per_query;
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace mvr
