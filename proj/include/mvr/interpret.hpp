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

/** \file interpret.hpp
 *  \brief Per-query-token similarity maps over a document's patch grid.
 *
 * Patches are laid out row-major: patch j sits at (j / cols, j % cols).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvr/core.hpp"
#include "mvr/error.hpp"
#include "mvr/eval.hpp"
#include "mvr/index.hpp"

namespace mvr {

enum class Normalization { kRaw, kMinMax };

enum class MapFormat { kCsv, kPgm, kJson };

inline MapFormat parse_map_format(std::string_view name) {
  if (name == "csv") return MapFormat::kCsv;
  if (name == "pgm") return MapFormat::kPgm;
  if (name == "json") return MapFormat::kJson;
  throw Error(ErrorCode::kInvalidArgument, "unknown map format '" + std::string(name) + "'");
}

struct SimilarityMap {
  std::string doc_id;
  std::size_t query_token_index = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;  // rows * cols, row-major
  std::size_t argmax_row = 0;
  std::size_t argmax_col = 0;
  Normalization normalization = Normalization::kRaw;

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  float max() const { return values[argmax_row * cols + argmax_col]; }
};

/// Dot products of query row `token_index` against every document patch.
inline SimilarityMap similarity_map(const MultiVector& query, const MultiVector& doc,
                                    std::size_t token_index, PatchGrid grid) {
  check_same_dim(query, doc);
  if (token_index >= query.rows()) {
    throw Error(ErrorCode::kOutOfRange, "token index " + std::to_string(token_index) +
                                            " but the query has " + std::to_string(query.rows()) +
                                            " tokens");
  }
  if (grid.cells() != doc.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) + " has " +
                    std::to_string(grid.cells()) + " cells but document '" + doc.id() + "' has " +
                    std::to_string(doc.rows()) + " vectors");
  }
  SimilarityMap map;
  map.doc_id = doc.id();
  map.query_token_index = token_index;
  map.rows = grid.rows;
  map.cols = grid.cols;
  map.values.resize(doc.rows());
  const auto q = query.row(token_index);
  std::size_t best = 0;
  for (std::size_t j = 0; j < doc.rows(); ++j) {
    map.values[j] = dot(q, doc.row(j));
    if (map.values[j] > map.values[best]) best = j;
  }
  map.argmax_row = best / grid.cols;
  map.argmax_col = best % grid.cols;
  return map;
}

/// Rescales to [0, 1]. A constant grid maps to all zeros.
inline SimilarityMap normalize_minmax(SimilarityMap map) {
  if (map.normalization == Normalization::kMinMax) return map;
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it, hi = *hi_it;
  for (float& v : map.values) {
    v = hi > lo ? static_cast<float>((static_cast<double>(v) - lo) / (hi - lo)) : 0.0f;
  }
  map.normalization = Normalization::kMinMax;
  return map;
}

/// Rows of comma-separated shortest round-trip decimals, LF line endings.
inline std::string encode_csv(const SimilarityMap& map) {
  std::string out;
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (c) out += ',';
      out += detail::format_number(map.at(r, c));
    }
    out += '\n';
  }
  return out;
}

/// Binary P5 greymap; values min-max scaled to 0..255, rounding half up.
inline std::vector<std::uint8_t> encode_pgm(const SimilarityMap& map) {
  const std::string header =
      "P5\n" + std::to_string(map.cols) + " " + std::to_string(map.rows) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it, hi = *hi_it;
  for (float v : map.values) {
    const double unit = hi > lo ? (static_cast<double>(v) - lo) / (hi - lo) : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::floor(unit * 255.0 + 0.5), 0.0, 255.0)));
  }
  return out;
}

inline nlohmann::json to_json(const SimilarityMap& map) {
  nlohmann::json grid = nlohmann::json::array();
  for (std::size_t r = 0; r < map.rows; ++r) {
    std::vector<float> row(map.values.begin() + static_cast<std::ptrdiff_t>(r * map.cols),
                           map.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * map.cols));
    grid.push_back(row);
  }
  return {{"doc_id", map.doc_id},
          {"query_token_index", map.query_token_index},
          {"rows", map.rows},
          {"cols", map.cols},
          {"argmax_patch", {map.argmax_row, map.argmax_col}},
          {"normalization", map.normalization == Normalization::kRaw ? "raw" : "minmax"},
          {"grid", grid}};
}

inline void export_map(const SimilarityMap& map, MapFormat format, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  if (format == MapFormat::kPgm) {
    bytes = encode_pgm(map);
  } else {
    const std::string text = format == MapFormat::kCsv ? encode_csv(map) : to_json(map).dump(2) + "\n";
    bytes.assign(text.begin(), text.end());
  }
  detail::write_file(path, bytes);
}

}  // namespace mvr
