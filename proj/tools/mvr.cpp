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

// mvr: command-line driver for indexing, querying, evaluation, benchmarking
// and similarity-map export. Exit codes: 0 success, 1 runtime failure,
// 2 usage error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvr/mvr.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string mib(std::uint64_t bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f MiB", static_cast<double>(bytes) / (1024.0 * 1024.0));
  return buf;
}

// Validates "RxC" at parse time so malformed grids are usage errors.
const auto kGridValidator = CLI::Validator(
    [](std::string& text) -> std::string {
      try {
        mvr::parse_grid(text);
        return {};
      } catch (const mvr::Error& e) {
        return e.what();
      }
    },
    "RxC", "GRID");

const auto kParentDirExists = CLI::Validator(
    [](std::string& text) -> std::string {
      const fs::path parent = fs::path(text).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) return "directory does not exist: " + parent.string();
      return {};
    },
    "PATH", "OUTPUT");

struct IndexConfig {
  std::string input;
  std::string index;
  std::string dtype = "f16";
  std::string grid;
  std::string name;
};

struct QueryConfig {
  std::string index;
  std::string queries;
  std::string run;
  std::size_t k = 100;
  std::string tag = "mvr";
  bool pooled = false;
};

struct EvalConfig {
  std::string run;
  std::string qrels;
  std::vector<std::size_t> ks = {1, 5, 10};
  std::string out;
};

struct BenchConfig {
  std::string index;
  std::size_t n_queries = 0;
  std::uint64_t seed = 0;
  std::size_t query_tokens = 16;
  std::size_t k = 10;
  std::size_t repeats = 3;
};

struct SimmapConfig {
  std::string index;
  std::string queries;
  std::string query_id;
  std::string doc;
  std::size_t token = 0;
  std::string format = "pgm";
  std::string out;
  std::string grid;
  std::string normalize = "raw";
};

struct CompressConfig {
  std::string index;
  std::string out;
  std::size_t centroids = 0;
  std::size_t iters = 20;
  std::uint64_t seed = 0;
  std::string residual = "none";
};

struct SynthConfig {
  mvr::SynthParams params;
  std::string dtype = "f32";
  std::string out_index;
  std::string out_queries;
  std::string out_qrels;
};

struct Bm25Config {
  std::string chunks;
  std::string queries;
  std::string run;
  std::size_t k = 100;
  double k1 = 1.2;
  double b = 0.75;
  bool stem = false;
  bool stopwords = false;
};

int cmd_index(const IndexConfig& cfg) {
  const mvr::Dtype dtype = mvr::parse_dtype(cfg.dtype);
  mvr::CorpusIndex input;
  if (fs::file_size(cfg.input) > 0) input = mvr::read_any_index(cfg.input);

  mvr::Metadata meta = input.meta();
  if (!cfg.name.empty()) meta["corpus"] = cfg.name;
  std::vector<mvr::MultiVector> docs;
  docs.reserve(input.size());
  for (const auto& d : input.docs()) docs.push_back(d.with_dtype(dtype));

  if (!cfg.grid.empty()) {
    const auto g = mvr::parse_grid(cfg.grid);
    meta[mvr::kMetaGridRows] = std::to_string(g.rows);
    meta[mvr::kMetaGridCols] = std::to_string(g.cols);
  } else if (!meta.contains(mvr::kMetaGridRows) && !docs.empty()) {
    const std::size_t n = docs.front().rows();
    const bool uniform = std::all_of(docs.begin(), docs.end(), [n](const auto& d) { return d.rows() == n; });
    if (const auto g = mvr::default_grid(n); uniform && g) {
      meta[mvr::kMetaGridRows] = std::to_string(g->rows);
      meta[mvr::kMetaGridCols] = std::to_string(g->cols);
    }
  }
  const mvr::CorpusIndex index(std::move(docs), input.dim(), dtype, std::move(meta));
  mvr::write_index(index, cfg.index);

  const auto report = mvr::footprint(index);
  for (const auto& d : report.docs) {
    std::cout << "doc " << d.id << ": " << d.rows << " x " << index.dim() << " "
              << mvr::dtype_name(index.dtype()) << " = " << d.payload_bytes << " bytes\n";
  }
  std::cout << "documents: " << index.size() << "\n"
            << "total payload: " << report.payload_bytes << " bytes (" << mib(report.payload_bytes) << ")\n"
            << "file size: " << report.file_bytes << " bytes\n";
  return kExitOk;
}

int cmd_query(const QueryConfig& cfg) {
  const mvr::CorpusIndex index = mvr::read_any_index(cfg.index);
  const mvr::CorpusIndex queries = mvr::read_any_index(cfg.queries);
  if (!index.empty() && !queries.empty() && index.dim() != queries.dim()) {
    throw mvr::Error(mvr::ErrorCode::kDimensionMismatch,
                     "query dim " + std::to_string(queries.dim()) + " vs index dim " +
                         std::to_string(index.dim()));
  }

  std::vector<mvr::PooledVector> pooled_docs;
  if (cfg.pooled) {
    for (const auto& d : index.docs()) pooled_docs.push_back(mvr::mean_pool(d));
  }
  mvr::RetrievalRun run;
  double total_ms = 0.0;
  for (const auto& q : queries.docs()) {
    const auto start = Clock::now();
    auto ranking = cfg.pooled ? mvr::rank_pooled(mvr::mean_pool(q), pooled_docs, cfg.k)
                              : mvr::rank_corpus(q, index.docs(), cfg.k);
    total_ms += elapsed_ms(start);
    run.set(q.id(), std::move(ranking));
  }
  mvr::write_run(run, cfg.run, cfg.tag);
  const double mean = queries.empty() ? 0.0 : total_ms / static_cast<double>(queries.size());
  std::cout << "queries: " << queries.size() << ", documents: " << index.size() << "\n"
            << "mean query latency: " << mean << " ms (batch size 1)\n";
  return kExitOk;
}

int cmd_eval(const EvalConfig& cfg) {
  const auto run = mvr::read_run(cfg.run);
  const auto qrels = mvr::read_qrels(cfg.qrels);
  const auto report = mvr::evaluate(run, qrels, cfg.ks);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = mvr::to_json(report).dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    mvr::detail::write_file(cfg.out, std::vector<std::uint8_t>(text.begin(), text.end()));
  }
  return kExitOk;
}

struct LatencyStats {
  double mean = 0.0, median = 0.0, p99 = 0.0, total = 0.0;
};

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  for (double v : samples) s.total += v;
  s.mean = s.total / static_cast<double>(samples.size());
  const std::size_t n = samples.size();
  s.median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  s.p99 = samples[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

// Best-of-`repeats` total time to rank every query against `corpus`.
double time_corpus(const std::vector<mvr::MultiVector>& queries, std::span<const mvr::MultiVector> corpus,
                   std::size_t k, std::size_t repeats, std::vector<double>* per_query) {
  double best = 0.0;
  for (std::size_t r = 0; r < repeats; ++r) {
    double total = 0.0;
    for (const auto& q : queries) {
      const auto start = Clock::now();
      const auto ranking = mvr::rank_corpus(q, corpus, k);
      const double ms = elapsed_ms(start);
      total += ms;
      if (per_query && r == 0) per_query->push_back(ms);
      if (ranking.empty() && !corpus.empty()) throw mvr::Error(mvr::ErrorCode::kInvalidArgument, "empty ranking");
    }
    if (r == 0 || total < best) best = total;
  }
  return best;
}

// Corpus size below which the scaling ratio is reported but not asserted.
constexpr std::size_t kMinScalingDocs = 100;

int cmd_bench(const BenchConfig& cfg) {
  const mvr::CorpusIndex index = mvr::read_any_index(cfg.index);
  if (index.empty()) throw mvr::Error(mvr::ErrorCode::kEmptyInput, "cannot benchmark an empty index");
  mvr::Rng rng(cfg.seed);
  std::vector<mvr::MultiVector> queries;
  for (std::size_t i = 0; i < cfg.n_queries; ++i) {
    std::vector<float> rows;
    mvr::random_unit_rows(rng, cfg.query_tokens, index.dim(), rows);
    queries.emplace_back(mvr::make_id("bench", i, cfg.n_queries), index.dim(), std::move(rows));
  }

  std::vector<double> per_query;
  const double single = time_corpus(queries, index.docs(), cfg.k, cfg.repeats, &per_query);
  const auto stats = summarize(per_query);
  std::cout << "documents: " << index.size() << ", queries: " << queries.size()
            << ", query tokens: " << cfg.query_tokens << ", threads: " << mvr::configured_threads() << "\n"
            << "latency ms: mean " << stats.mean << ", median " << stats.median << ", p99 " << stats.p99
            << "\n";

  std::vector<mvr::MultiVector> doubled = index.docs();
  for (const auto& d : index.docs()) doubled.push_back(d.with_id(d.id() + "#2"));
  const double twice = time_corpus(queries, doubled, cfg.k, cfg.repeats, nullptr);
  const double ratio = single > 0.0 ? twice / single : 0.0;
  std::cout << "scaling: " << index.size() << " docs " << single << " ms, " << doubled.size() << " docs "
            << twice << " ms, ratio " << ratio << "\n";
  if (index.size() < kMinScalingDocs) {
    std::cout << "scaling check skipped (fewer than " << kMinScalingDocs << " documents)\n";
    return kExitOk;
  }
  if (ratio < 1.6 || ratio > 2.6) {
    std::cerr << "error: scaling ratio " << ratio << " outside [1.6, 2.6]\n";
    return kExitFailure;
  }
  std::cout << "scaling check passed: ratio in [1.6, 2.6]\n";
  return kExitOk;
}

int cmd_simmap(const SimmapConfig& cfg) {
  const mvr::CorpusIndex index = mvr::read_any_index(cfg.index);
  const mvr::CorpusIndex queries = mvr::read_any_index(cfg.queries);
  const mvr::MultiVector* doc = index.find(cfg.doc);
  if (doc == nullptr) throw mvr::Error(mvr::ErrorCode::kNotFound, "document '" + cfg.doc + "' not in index");
  if (queries.empty()) throw mvr::Error(mvr::ErrorCode::kEmptyInput, "query file holds no queries");
  const mvr::MultiVector* query = cfg.query_id.empty() ? &queries.docs().front() : queries.find(cfg.query_id);
  if (query == nullptr) throw mvr::Error(mvr::ErrorCode::kNotFound, "query '" + cfg.query_id + "' not found");

  std::optional<mvr::PatchGrid> grid;
  if (!cfg.grid.empty()) {
    grid = mvr::parse_grid(cfg.grid);
  } else if (index.grid()) {
    grid = index.grid();
  } else {
    grid = mvr::default_grid(doc->rows());
  }
  if (!grid) {
    throw mvr::Error(mvr::ErrorCode::kInvalidArgument,
                     "no patch grid for " + std::to_string(doc->rows()) + " vectors; pass --grid RxC");
  }
  auto map = mvr::similarity_map(*query, *doc, cfg.token, *grid);
  if (cfg.normalize == "minmax") map = mvr::normalize_minmax(std::move(map));
  mvr::export_map(map, mvr::parse_map_format(cfg.format), cfg.out);
  std::cout << "query " << query->id() << " token " << cfg.token << " vs " << doc->id() << ": argmax patch ("
            << map.argmax_row << ", " << map.argmax_col << ")\n";
  return kExitOk;
}

int cmd_compress(const CompressConfig& cfg) {
  const mvr::CorpusIndex index = mvr::read_index(cfg.index);
  const auto residual = cfg.residual == "f16" ? mvr::ResidualDtype::kBinary16 : mvr::ResidualDtype::kNone;
  const auto compressed = mvr::compress(index, cfg.centroids, cfg.iters, cfg.seed, residual);
  mvr::write_compressed(compressed, cfg.out);
  const auto before = mvr::footprint(index);
  const auto after = mvr::footprint(compressed);
  std::cout << "centroids: " << compressed.k << ", rows: " << index.total_rows() << "\n"
            << "payload before: " << before.payload_bytes << " bytes\n"
            << "payload after: " << after.payload_bytes << " bytes (centroids " << after.centroid_bytes
            << ", assignments " << after.assignment_bytes << ", residuals " << after.residual_bytes << ")\n"
            << "ratio: "
            << (after.payload_bytes ? static_cast<double>(before.payload_bytes) / after.payload_bytes : 0.0)
            << "x\n";
  return kExitOk;
}

int cmd_synth(SynthConfig cfg) {
  cfg.params.dtype = mvr::parse_dtype(cfg.dtype);
  const auto corpus = mvr::synth_corpus(cfg.params);
  mvr::write_index(corpus.index, cfg.out_index);
  mvr::write_index(mvr::CorpusIndex::from_docs(corpus.queries, {{"role", "queries"}}), cfg.out_queries);
  mvr::write_qrels(corpus.qrels, cfg.out_qrels);
  std::cout << "documents: " << corpus.index.size() << ", queries: " << corpus.queries.size() << "\n";
  return kExitOk;
}

int cmd_bm25(const Bm25Config& cfg) {
  const auto chunks = mvr::read_chunks_jsonl(cfg.chunks);
  const mvr::LexicalCorpus corpus(chunks, {cfg.stopwords, cfg.stem}, {cfg.k1, cfg.b});
  for (const auto& id : corpus.dropped_chunks()) {
    std::cerr << "warning: chunk '" << id << "' has no tokens; dropped\n";
  }
  std::ifstream in(cfg.queries);
  if (!in) throw mvr::Error(mvr::ErrorCode::kIo, "cannot open '" + cfg.queries + "'");
  mvr::RetrievalRun run;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string qid, text;
    try {
      const auto j = nlohmann::json::parse(line);
      qid = j.at("query_id").get<std::string>();
      text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw mvr::Error(mvr::ErrorCode::kFormat, cfg.queries + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const auto tokens = corpus.tokenize_query(text);
    if (tokens.empty()) {
      std::cerr << "warning: query '" << qid << "' has no tokens; skipped\n";
      continue;
    }
    run.set(qid, corpus.rank_pages(tokens, cfg.k));
  }
  mvr::write_run(run, cfg.run, "bm25");
  std::cout << "chunks: " << corpus.size() << ", pages: " << corpus.page_ids().size()
            << ", queries: " << run.rankings().size() << "\n";
  return kExitOk;
}

int cmd_footprint(const std::string& path) {
  const auto index = mvr::read_any_index(path);
  const auto report = mvr::footprint(index);
  std::cout << "documents: " << index.size() << "\n"
            << "total payload: " << report.payload_bytes << " bytes (" << mib(report.payload_bytes) << ")\n";
  if (!index.empty()) {
    std::cout << "mean payload per document: " << report.payload_bytes / index.size() << " bytes\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mvr: multi-vector late-interaction retrieval"};
  app.require_subcommand(1);

  IndexConfig index_cfg;
  auto* index = app.add_subcommand("index", "Build an MVEC index from MVEC embeddings and report its footprint");
  index->add_option("--input", index_cfg.input, "Input embeddings (MVEC)")->required()->check(CLI::ExistingFile);
  index->add_option("--index", index_cfg.index, "Output index path")->required()->check(kParentDirExists);
  index->add_option("--dtype", index_cfg.dtype, "Stored precision")->check(CLI::IsMember({"f16", "f32"}))->capture_default_str();
  index->add_option("--grid", index_cfg.grid, "Patch grid RxC")->check(kGridValidator);
  index->add_option("--name", index_cfg.name, "Corpus name stored in metadata");

  QueryConfig query_cfg;
  auto* query = app.add_subcommand("query", "Rank the corpus for every query and write a TREC run");
  query->add_option("--index", query_cfg.index, "Index (MVEC v1 or v2)")->required()->check(CLI::ExistingFile);
  query->add_option("--queries", query_cfg.queries, "Query embeddings (MVEC)")->required()->check(CLI::ExistingFile);
  query->add_option("--run", query_cfg.run, "Output run file")->required()->check(kParentDirExists);
  query->add_option("--k", query_cfg.k, "Documents per query")->check(CLI::PositiveNumber)->capture_default_str();
  query->add_option("--tag", query_cfg.tag, "Run tag")->capture_default_str();
  query->add_flag("--pooled", query_cfg.pooled, "Mean-pool both sides and rank by cosine (bi-encoder baseline)");

  EvalConfig eval_cfg;
  auto* eval = app.add_subcommand("eval", "Compute NDCG@k, Recall@k and MRR");
  eval->add_option("--run", eval_cfg.run, "TREC run file")->required()->check(CLI::ExistingFile);
  eval->add_option("--qrels", eval_cfg.qrels, "TREC qrels file")->required()->check(CLI::ExistingFile);
  eval->add_option("--k", eval_cfg.ks, "Cutoffs, e.g. 1,5,10")->delimiter(',')->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_cfg.out, "Write the JSON report here instead of stdout")->check(kParentDirExists);

  BenchConfig bench_cfg;
  auto* bench = app.add_subcommand("bench", "Time exhaustive scoring and check linear scaling");
  bench->add_option("--index", bench_cfg.index, "Index")->required()->check(CLI::ExistingFile);
  bench->add_option("--n-queries", bench_cfg.n_queries, "Random queries to time")->required()->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_cfg.seed, "RNG seed")->required();
  bench->add_option("--query-tokens", bench_cfg.query_tokens, "Rows per query")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--k", bench_cfg.k, "Documents per query")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--repeats", bench_cfg.repeats, "Timing repeats (best kept)")->check(CLI::PositiveNumber)->capture_default_str();

  SimmapConfig simmap_cfg;
  auto* simmap = app.add_subcommand("simmap", "Export a query-token similarity map over a document's patches");
  simmap->add_option("--index", simmap_cfg.index, "Index")->required()->check(CLI::ExistingFile);
  simmap->add_option("--queries", simmap_cfg.queries, "Query embeddings (MVEC)")->required()->check(CLI::ExistingFile);
  simmap->add_option("--query-id", simmap_cfg.query_id, "Query id (default: first query)");
  simmap->add_option("--doc", simmap_cfg.doc, "Document id")->required();
  simmap->add_option("--token", simmap_cfg.token, "Query token index")->capture_default_str();
  simmap->add_option("--format", simmap_cfg.format, "Output format")->check(CLI::IsMember({"csv", "pgm", "json"}))->capture_default_str();
  simmap->add_option("--out", simmap_cfg.out, "Output path")->required()->check(kParentDirExists);
  simmap->add_option("--grid", simmap_cfg.grid, "Patch grid RxC (default: index metadata)")->check(kGridValidator);
  simmap->add_option("--normalize", simmap_cfg.normalize, "Values for csv/json")->check(CLI::IsMember({"raw", "minmax"}))->capture_default_str();

  CompressConfig compress_cfg;
  auto* compress = app.add_subcommand("compress", "Centroid-quantize an index (k-means)");
  compress->add_option("--index", compress_cfg.index, "Input index (MVEC v1)")->required()->check(CLI::ExistingFile);
  compress->add_option("--out", compress_cfg.out, "Output compressed index (MVEC v2)")->required()->check(kParentDirExists);
  compress->add_option("--centroids", compress_cfg.centroids, "K")->required()->check(CLI::PositiveNumber);
  compress->add_option("--iters", compress_cfg.iters, "Lloyd iterations")->check(CLI::PositiveNumber)->capture_default_str();
  compress->add_option("--seed", compress_cfg.seed, "RNG seed")->required();
  compress->add_option("--residual", compress_cfg.residual, "Residual storage")->check(CLI::IsMember({"none", "f16"}))->capture_default_str();

  SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic corpus, queries and qrels");
  synth->add_option("--n-docs", synth_cfg.params.n_docs)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--n-queries", synth_cfg.params.n_queries)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--dim", synth_cfg.params.dim)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--patches", synth_cfg.params.n_patches)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--query-tokens", synth_cfg.params.query_tokens)->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--strength", synth_cfg.params.plant_strength, "Plant strength in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth->add_option("--seed", synth_cfg.params.seed, "RNG seed")->required();
  synth->add_option("--dtype", synth_cfg.dtype)->check(CLI::IsMember({"f16", "f32"}))->capture_default_str();
  synth->add_option("--index", synth_cfg.out_index, "Output corpus (MVEC)")->required()->check(kParentDirExists);
  synth->add_option("--queries", synth_cfg.out_queries, "Output queries (MVEC)")->required()->check(kParentDirExists);
  synth->add_option("--qrels", synth_cfg.out_qrels, "Output qrels")->required()->check(kParentDirExists);

  Bm25Config bm25_cfg;
  auto* bm25 = app.add_subcommand("bm25", "Rank pages with BM25 over text chunks (max-pooled per page)");
  bm25->add_option("--chunks", bm25_cfg.chunks, "JSON-lines chunks {chunk_id, page_id, text}")->required()->check(CLI::ExistingFile);
  bm25->add_option("--queries", bm25_cfg.queries, "JSON-lines queries {query_id, text}")->required()->check(CLI::ExistingFile);
  bm25->add_option("--run", bm25_cfg.run, "Output run file")->required()->check(kParentDirExists);
  bm25->add_option("--k", bm25_cfg.k)->check(CLI::PositiveNumber)->capture_default_str();
  bm25->add_option("--bm25-k1", bm25_cfg.k1)->check(CLI::NonNegativeNumber)->capture_default_str();
  bm25->add_option("--bm25-b", bm25_cfg.b)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  bm25->add_flag("--stem", bm25_cfg.stem, "Apply the S plural stemmer");
  bm25->add_flag("--stopwords", bm25_cfg.stopwords, "Drop English stopwords");

  std::string footprint_path;
  auto* footprint = app.add_subcommand("footprint", "Report index storage per document");
  footprint->add_option("--index", footprint_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*index) return cmd_index(index_cfg);
    if (*query) return cmd_query(query_cfg);
    if (*eval) return cmd_eval(eval_cfg);
    if (*bench) return cmd_bench(bench_cfg);
    if (*simmap) return cmd_simmap(simmap_cfg);
    if (*compress) return cmd_compress(compress_cfg);
    if (*synth) return cmd_synth(synth_cfg);
    if (*bm25) return cmd_bm25(bm25_cfg);
    if (*footprint) return cmd_footprint(footprint_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
