// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dst/run.hpp"
#include "dst/text.hpp"
#include "dst/train.hpp"

namespace dst::corpus {

/// Passages, evaluation queries, their judgments and training samples.
/// Invariant: ids are unique per namespace and every qrels or training
/// reference resolves to a passage or query in the bundle.
struct CorpusBundle {
    std::vector<TextRecord> passages;
    std::vector<TextRecord> queries;
    Qrels qrels;
    std::vector<train::TrainingSample> training;

    bool operator==(const CorpusBundle&) const = default;
};

/// File names inside a corpus directory.
inline constexpr const char* kPassagesFile = "passages.tsv";
inline constexpr const char* kQueriesFile = "queries.tsv";
inline constexpr const char* kQrelsFile = "qrels.txt";
inline constexpr const char* kTrainFile = "train.jsonl";

struct CorpusPaths {
    std::filesystem::path passages;
    std::optional<std::filesystem::path> queries;
    std::optional<std::filesystem::path> qrels;
    std::optional<std::filesystem::path> training;

    /// All four standard files inside `dir`.
    static CorpusPaths in_directory(const std::filesystem::path& dir);
};

/// `id \t text` rows. ParseError carries file:line:column.
std::vector<TextRecord> read_tsv_records(const std::filesystem::path& path);
void write_tsv_records(const std::filesystem::path& path, const std::vector<TextRecord>& records);

/// One JSON object per line:
/// {"query_id","query","positive_id","positive","negative_ids":[...],"negatives":[...]}
std::vector<train::TrainingSample> read_training_jsonl(const std::filesystem::path& path);
void write_training_jsonl(const std::filesystem::path& path, const std::vector<train::TrainingSample>& samples);

/// Loads and validates. Throws ParseError for malformed rows and
/// DanglingReference listing unresolved ids.
CorpusBundle load_corpus(const CorpusPaths& paths);

/// Checks the bundle invariant; throws InvalidArgument for duplicate ids and
/// DanglingReference for unresolved ones.
void validate_corpus(const CorpusBundle& bundle);

/// Writes the four standard files into `dir`.
void write_corpus(const std::filesystem::path& dir, const CorpusBundle& bundle);

struct SyntheticParams {
    std::size_t passages = 2000;
    std::size_t train_queries = 500;
    std::size_t eval_queries = 200;
    std::size_t hard_negatives = 10;
    std::size_t passages_per_entity = 8;  // entity pool is passages / this, raised for small corpora
    std::uint64_t seed = 7;
};

/// Template-generated factual passages over pseudo-word entities. Each query
/// paraphrases one passage and names two of its entities; hard negatives are
/// up to `hard_negatives` other training positives sharing the positive's
/// relation template, those naming one of its entities first. Throws
/// ParameterTooSmall below 100 passages or 50 queries.
CorpusBundle generate_synthetic_corpus(const SyntheticParams& params);

}  // namespace dst::corpus
