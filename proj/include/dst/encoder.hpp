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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dst/matrix.hpp"

namespace dst::encoder {

struct EncoderConfig {
    std::size_t hash_buckets = std::size_t{1} << 15;
    std::size_t embed_dim = 128;
    std::size_t ngram_min = 2;
    std::size_t ngram_max = 4;
    bool tie_weights = false;

    /// Throws InvalidConfig unless buckets >= 16, dim >= 1 and 2 <= min <= max <= 5.
    void validate() const;

    bool operator==(const EncoderConfig&) const = default;
};

/// Hashed feature counts, sorted by bucket.
struct FeatureVector {
    std::vector<std::uint32_t> buckets;
    std::vector<double> counts;
    double total = 0.0;
};

/// Boundary marker wrapped around each word before n-gram extraction.
inline constexpr char kBoundary = '#';

std::uint32_t ngram_bucket(std::string_view gram, std::size_t buckets);
std::uint32_t word_bucket(std::string_view word, std::size_t buckets);

/// Character n-grams of "#word#" for every n in [ngram_min, ngram_max] plus
/// one whole-word feature per word. Text is normalized first. Throws EmptyText.
FeatureVector featurize(std::string_view text, const EncoderConfig& config);

/// Half-width of the uniform embedding init. Large enough that random hashed
/// rows act as a lexical-overlap prior which training refines; at 0.05 the
/// towers lose that prior within a few hundred Adam steps.
inline constexpr double kDefaultInitScale = 0.5;

/// Trainable parameters of one encoder tower.
struct EncoderParams {
    Matrix embedding;   // buckets x dim
    Matrix projection;  // dim x dim, output-major
    std::vector<double> bias;

    static EncoderParams zeros(const EncoderConfig& config);
    /// embedding ~ U(-init_scale, init_scale), projection = I + N(0, 0.01^2), bias = 0.
    static EncoderParams initialize(const EncoderConfig& config, std::uint64_t seed,
                                    double init_scale = kDefaultInitScale);

    std::size_t buckets() const { return embedding.rows(); }
    std::size_t dim() const { return projection.rows(); }
    bool all_finite() const;

    bool operator==(const EncoderParams&) const = default;
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string source_id;
};

/// e = tanh(W * (sum_f count_f * E[f] / sqrt(total)) + b)
EmbeddingVector encode(std::string_view text, const EncoderParams& params,
                       const EncoderConfig& config, std::string source_id = {});

/// Encodes texts into the rows of a matrix; rows are independent so the work
/// is split across threads without affecting results.
Matrix encode_texts(std::span<const std::string> texts, const EncoderParams& params,
                    const EncoderConfig& config, std::size_t threads = 1);

/// Gradient accumulator matching EncoderParams. Embedding rows are tracked
/// so clearing and optimizer updates only visit rows that were written.
class EncoderGrads {
 public:
    EncoderGrads() = default;
    explicit EncoderGrads(const EncoderConfig& config);

    Matrix embedding;
    Matrix projection;
    std::vector<double> bias;

    std::span<double> touch_row(std::uint32_t row);
    bool touched(std::uint32_t row) const { return touched_flags_[row] != 0; }
    /// Rows written since the last clear(), in first-touch order.
    const std::vector<std::uint32_t>& touched_rows() const { return touched_rows_; }

    void clear();
    bool all_finite() const;

 private:
    std::vector<std::uint8_t> touched_flags_;
    std::vector<std::uint32_t> touched_rows_;
};

/// Forward pass over a batch that retains what backward() needs.
class BatchEncoding {
 public:
    const Matrix& embeddings() const { return embeddings_; }
    std::size_t size() const { return embeddings_.rows(); }
    const FeatureVector& features(std::size_t i) const { return features_[i]; }

    /// Accumulates dL/dparams into `grads` given dL/de for every row. Texts
    /// are processed in order so accumulation is reproducible bit for bit.
    void backward(const Matrix& upstream, EncoderGrads& grads) const;

 private:
    friend BatchEncoding encode_batch_with_grads(std::span<const std::string>, const EncoderParams&,
                                                 const EncoderConfig&, std::size_t);
    const EncoderParams* params_ = nullptr;
    std::vector<FeatureVector> features_;
    Matrix pooled_;
    Matrix embeddings_;
};

/// Throws EmptyBatch for an empty batch and EmptyText for an empty text.
BatchEncoding encode_batch_with_grads(std::span<const std::string> texts, const EncoderParams& params,
                                      const EncoderConfig& config, std::size_t threads = 1);

/// Query and passage towers; with tie_weights the passage side reuses the query tower.
struct DualEncoder {
    EncoderConfig config;
    EncoderParams query;
    std::optional<EncoderParams> passage;

    static DualEncoder initialize(const EncoderConfig& config, std::uint64_t seed,
                                  double init_scale = kDefaultInitScale);

    const EncoderParams& query_params() const { return query; }
    const EncoderParams& passage_params() const { return passage ? *passage : query; }
    EncoderParams& passage_params() { return passage ? *passage : query; }

    bool operator==(const DualEncoder&) const = default;
};

}  // namespace dst::encoder
