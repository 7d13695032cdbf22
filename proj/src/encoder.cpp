// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dst/error.hpp"
#include "dst/parallel.hpp"
#include "dst/random.hpp"
#include "dst/text.hpp"

namespace dst::encoder {

namespace {

// Namespaces keep the word "ab" and the bigram "ab" in different buckets.
std::uint32_t bucket_of(char ns, std::string_view s, std::size_t buckets) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto step = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    step(static_cast<unsigned char>(ns));
    for (char c : s) step(static_cast<unsigned char>(c));
    return static_cast<std::uint32_t>(h % buckets);
}

void pool(const FeatureVector& f, const Matrix& embedding, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double inv = 1.0 / std::sqrt(f.total);
    for (std::size_t i = 0; i < f.buckets.size(); ++i) {
        const double scale = f.counts[i] * inv;
        auto row = embedding.row(f.buckets[i]);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += scale * row[j];
    }
}

void project(const EncoderParams& p, std::span<const double> pooled, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::tanh(dot(p.projection.row(i), pooled) + p.bias[i]);
}

}  // namespace

void EncoderConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, what); };
    if (hash_buckets < 16) bad("hash_buckets must be >= 16");
    if (hash_buckets > (std::size_t{1} << 32)) bad("hash_buckets must fit in 32 bits");
    if (embed_dim == 0) bad("embed_dim must be >= 1");
    if (ngram_min < 2 || ngram_min > ngram_max || ngram_max > 5)
        bad("ngram range must satisfy 2 <= min <= max <= 5");
}

std::uint32_t ngram_bucket(std::string_view gram, std::size_t buckets) {
    return bucket_of('g', gram, buckets);
}

std::uint32_t word_bucket(std::string_view word, std::size_t buckets) {
    return bucket_of('w', word, buckets);
}

FeatureVector featurize(std::string_view text, const EncoderConfig& config) {
    const std::vector<std::string> words = split_words(normalize_text(text));
    if (words.empty()) fail(ErrorCode::EmptyText, "cannot featurize empty text");
    std::map<std::uint32_t, double> counts;
    std::string marked;
    for (const std::string& w : words) {
        marked.assign(1, kBoundary);
        marked += w;
        marked.push_back(kBoundary);
        for (std::size_t n = config.ngram_min; n <= config.ngram_max; ++n) {
            if (n > marked.size()) break;
            for (std::size_t i = 0; i + n <= marked.size(); ++i)
                counts[ngram_bucket(std::string_view(marked).substr(i, n), config.hash_buckets)] += 1.0;
        }
        counts[word_bucket(w, config.hash_buckets)] += 1.0;
    }
    FeatureVector f;
    f.buckets.reserve(counts.size());
    f.counts.reserve(counts.size());
    for (const auto& [bucket, count] : counts) {
        f.buckets.push_back(bucket);
        f.counts.push_back(count);
        f.total += count;
    }
    return f;
}

EncoderParams EncoderParams::zeros(const EncoderConfig& config) {
    EncoderParams p;
    p.embedding = Matrix(config.hash_buckets, config.embed_dim);
    p.projection = Matrix(config.embed_dim, config.embed_dim);
    p.bias.assign(config.embed_dim, 0.0);
    return p;
}

EncoderParams EncoderParams::initialize(const EncoderConfig& config, std::uint64_t seed, double init_scale) {
    config.validate();
    EncoderParams p = zeros(config);
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
        fail(ErrorCode::InvalidConfig, "init_scale must be finite and >= 0");
    Rng rng(seed);
    for (double& v : p.embedding.values()) v = rng.uniform(-init_scale, init_scale);
    for (std::size_t i = 0; i < config.embed_dim; ++i)
        for (std::size_t j = 0; j < config.embed_dim; ++j)
            p.projection(i, j) = (i == j ? 1.0 : 0.0) + 0.01 * rng.normal();
    return p;
}

bool EncoderParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(embedding.values()) && finite(projection.values()) && finite(bias);
}

EmbeddingVector encode(std::string_view text, const EncoderParams& params, const EncoderConfig& config,
                       std::string source_id) {
    const FeatureVector f = featurize(text, config);
    std::vector<double> pooled(params.dim());
    pool(f, params.embedding, pooled);
    EmbeddingVector e{std::vector<double>(params.dim()), std::move(source_id)};
    project(params, pooled, e.values);
    return e;
}

Matrix encode_texts(std::span<const std::string> texts, const EncoderParams& params,
                    const EncoderConfig& config, std::size_t threads) {
    Matrix out(texts.size(), params.dim());
    parallel_chunks(texts.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> pooled(params.dim());
        for (std::size_t i = begin; i < end; ++i) {
            pool(featurize(texts[i], config), params.embedding, pooled);
            project(params, pooled, out.row(i));
        }
    });
    return out;
}

EncoderGrads::EncoderGrads(const EncoderConfig& config)
    : embedding(config.hash_buckets, config.embed_dim),
      projection(config.embed_dim, config.embed_dim),
      bias(config.embed_dim, 0.0),
      touched_flags_(config.hash_buckets, 0) {}

std::span<double> EncoderGrads::touch_row(std::uint32_t row) {
    if (!touched_flags_[row]) {
        touched_flags_[row] = 1;
        touched_rows_.push_back(row);
    }
    return embedding.row(row);
}

void EncoderGrads::clear() {
    for (std::uint32_t r : touched_rows_) {
        auto row = embedding.row(r);
        std::fill(row.begin(), row.end(), 0.0);
        touched_flags_[r] = 0;
    }
    touched_rows_.clear();
    std::fill(projection.values().begin(), projection.values().end(), 0.0);
    std::fill(bias.begin(), bias.end(), 0.0);
}

bool EncoderGrads::all_finite() const {
    for (std::uint32_t r : touched_rows_)
        for (double v : embedding.row(r))
            if (!std::isfinite(v)) return false;
    for (double v : projection.values())
        if (!std::isfinite(v)) return false;
    for (double v : bias)
        if (!std::isfinite(v)) return false;
    return true;
}

BatchEncoding encode_batch_with_grads(std::span<const std::string> texts, const EncoderParams& params,
                                      const EncoderConfig& config, std::size_t threads) {
    if (texts.empty()) fail(ErrorCode::EmptyBatch, "encode_batch_with_grads needs at least one text");
    BatchEncoding out;
    out.params_ = &params;
    out.features_.resize(texts.size());
    out.pooled_ = Matrix(texts.size(), params.dim());
    out.embeddings_ = Matrix(texts.size(), params.dim());
    parallel_chunks(texts.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out.features_[i] = featurize(texts[i], config);
            pool(out.features_[i], params.embedding, out.pooled_.row(i));
            project(params, out.pooled_.row(i), out.embeddings_.row(i));
        }
    });
    return out;
}

void BatchEncoding::backward(const Matrix& upstream, EncoderGrads& grads) const {
    if (upstream.rows() != size() || upstream.cols() != embeddings_.cols())
        fail(ErrorCode::DimensionMismatch, "upstream gradient shape does not match batch");
    const std::size_t d = embeddings_.cols();
    std::vector<double> gz(d), gh(d);
    for (std::size_t i = 0; i < size(); ++i) {
        auto e = embeddings_.row(i);
        auto g = upstream.row(i);
        bool any = false;
        for (std::size_t j = 0; j < d; ++j) {
            gz[j] = g[j] * (1.0 - e[j] * e[j]);
            any = any || gz[j] != 0.0;
        }
        if (!any) continue;
        auto h = pooled_.row(i);
        std::fill(gh.begin(), gh.end(), 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            grads.bias[r] += gz[r];
            auto grow = grads.projection.row(r);
            auto wrow = params_->projection.row(r);
            for (std::size_t c = 0; c < d; ++c) {
                grow[c] += gz[r] * h[c];
                gh[c] += wrow[c] * gz[r];
            }
        }
        const FeatureVector& f = features_[i];
        const double inv = 1.0 / std::sqrt(f.total);
        for (std::size_t k = 0; k < f.buckets.size(); ++k) {
            const double scale = f.counts[k] * inv;
            auto row = grads.touch_row(f.buckets[k]);
            for (std::size_t j = 0; j < d; ++j) row[j] += scale * gh[j];
        }
    }
}

DualEncoder DualEncoder::initialize(const EncoderConfig& config, std::uint64_t seed, double init_scale) {
    config.validate();
    DualEncoder model;
    model.config = config;
    // Both towers start from the same draw, so the untrained model already
    // scores by shared hashed features.
    model.query = EncoderParams::initialize(config, derive_seed(seed, "encoder"), init_scale);
    if (!config.tie_weights) model.passage = model.query;
    return model;
}

}  // namespace dst::encoder
