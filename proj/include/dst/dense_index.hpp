// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dst/checkpoint.hpp"
#include "dst/matrix.hpp"
#include "dst/run.hpp"
#include "dst/text.hpp"

namespace dst::index {

/// Encoded passage collection for exact maximum-inner-product search.
struct PassageIndex {
    Matrix matrix;  // one row per passage, input order
    std::vector<std::string> ids;
    std::string fingerprint;  // model_fingerprint of the encoder that produced the rows

    std::size_t size() const { return ids.size(); }
    std::size_t dim() const { return matrix.cols(); }

    bool operator==(const PassageIndex&) const = default;
};

/// Throws EmptyCorpus for no passages and InvalidArgument for duplicate ids.
PassageIndex build_index(const std::vector<TextRecord>& passages, const Checkpoint& ckpt, std::size_t threads = 1);

/// Rows from precomputed vectors (no encoder involved).
PassageIndex index_from_matrix(Matrix rows, std::vector<std::string> ids, std::string fingerprint = {});

struct SearchOptions {
    std::size_t k = 1000;
    std::size_t threads = 1;        // queries are split across threads
    std::size_t chunk_rows = 4096;  // rows scanned per bounded-selection pass before merging
};

/// Exact top-k by dot product for one query; k is clamped to the corpus size.
std::vector<ScoredPassage> search_one(const PassageIndex& index, std::span<const double> query,
                                      const SearchOptions& options);

/// Throws DimensionMismatch or InvalidArgument (k == 0, id count mismatch).
RankedRun search(const PassageIndex& index, const Matrix& queries, const std::vector<std::string>& query_ids,
                 const SearchOptions& options, std::string tag = "dst");

/// File layout (little-endian):
///   char[8] magic "DSTIDX01", u32 version (1), u64 P, u32 d,
///   u32 length + bytes fingerprint, P x (u32 length + bytes id), f64[P*d] rows.
void save_index(const std::filesystem::path& path, const PassageIndex& index);
PassageIndex load_index(const std::filesystem::path& path);

}  // namespace dst::index
