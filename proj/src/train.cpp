// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dst/error.hpp"
#include "dst/random.hpp"

namespace dst::train {

void TrainConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, what); };
    if (batch_size < 2) bad("batch_size must be >= 2 (in-batch negatives need peers)");
    if (total_steps == 0) bad("total_steps must be positive");
    if (warmup_steps >= total_steps) bad("warmup_steps must be < total_steps");
    if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        bad("adam betas must lie in [0, 1)");
    if (!(adam.epsilon > 0.0)) bad("adam epsilon must be positive");
    if (!(adam.weight_decay >= 0.0)) bad("weight_decay must be >= 0");
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) bad("init_scale must be finite and >= 0");
    if (threads == 0) bad("threads must be >= 1");
    loss.validate();
    encoder.validate();
}

double lr_at(std::size_t step, const TrainConfig& config) {
    if (step > config.total_steps)
        fail(ErrorCode::StepOutOfRange,
             "step " + std::to_string(step) + " beyond total " + std::to_string(config.total_steps));
    const double peak = config.learning_rate;
    if (step < config.warmup_steps)
        return peak * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
    return peak * static_cast<double>(config.total_steps - step) /
           static_cast<double>(config.total_steps - config.warmup_steps);
}

TrainingBatch assemble_batch(std::vector<TrainingSample> samples, std::size_t k, std::uint64_t augment_seed) {
    if (samples.size() < 2)
        fail(ErrorCode::BatchTooSmall, "a batch needs at least two samples, got " + std::to_string(samples.size()));
    TrainingBatch batch;
    std::unordered_map<std::string, std::size_t> slot;
    auto add = [&](const TextRecord& p) {
        auto [it, inserted] = slot.emplace(p.id, batch.passages.size());
        if (inserted) batch.passages.push_back(p);
        return it->second;
    };
    std::vector<std::size_t> y_p;
    y_p.reserve(samples.size());
    for (const TrainingSample& s : samples) {
        y_p.push_back(add(s.positive));
        for (const TextRecord& neg : s.hard_negatives) add(neg);
    }
    batch.labels = objective::BatchLabels::from_positives(std::move(y_p));
    batch.augmented.reserve(samples.size());
    for (const TrainingSample& s : samples)
        batch.augmented.push_back(typo::augment_query_or_copy(s.query, k, typo::query_seed(augment_seed, s.query.id)));
    batch.samples = std::move(samples);
    return batch;
}

std::string metrics_header() { return "step\tlr\tloss\tce_p\tce_q\tkl_p\tkl_q"; }

std::string format_metrics(const StepMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g", m.step, m.lr, m.loss,
                  m.terms.ce_p, m.terms.ce_q, m.terms.kl_p, m.terms.kl_q);
    return buf;
}

Trainer::Trainer(std::vector<TrainingSample> dataset, TrainConfig config)
    : dataset_(std::move(dataset)), config_(std::move(config)) {
    config_.validate();
    if (dataset_.empty()) fail(ErrorCode::EmptyCorpus, "training dataset is empty");
    if (dataset_.size() < config_.batch_size)
        fail(ErrorCode::BatchTooSmall, "dataset has " + std::to_string(dataset_.size()) +
                                           " samples, fewer than batch_size " + std::to_string(config_.batch_size));
    std::set<std::string> seen;
    auto collect = [&](const TextRecord& p) {
        if (seen.insert(p.id).second) passage_pool_.push_back(p);
    };
    for (const TrainingSample& s : dataset_) {
        collect(s.positive);
        for (const TextRecord& n : s.hard_negatives) collect(n);
    }
    model_ = encoder::DualEncoder::initialize(config_.encoder, config_.seed, config_.init_scale);
    state_ = OptimizerState::zeros(config_.encoder);
    query_grads_ = encoder::EncoderGrads(config_.encoder);
    if (!config_.encoder.tie_weights) passage_grads_ = encoder::EncoderGrads(config_.encoder);
}

void Trainer::resume(const Checkpoint& ckpt) {
    if (!ckpt.optimizer) fail(ErrorCode::InvalidConfig, "checkpoint has no optimizer state to resume from");
    if (!(ckpt.model.config == config_.encoder))
        fail(ErrorCode::InvalidConfig, "checkpoint encoder config differs from the training config");
    if (ckpt.seed != config_.seed) fail(ErrorCode::InvalidConfig, "checkpoint seed differs from the training seed");
    if (ckpt.optimizer->step > config_.total_steps)
        fail(ErrorCode::StepOutOfRange, "checkpoint is past total_steps");
    model_ = ckpt.model;
    state_ = *ckpt.optimizer;
}

Checkpoint Trainer::checkpoint() const { return Checkpoint{model_, config_.seed, state_}; }

TrainingSample Trainer::prepare_sample(const TrainingSample& raw, std::size_t step) const {
    TrainingSample s{raw.query, raw.positive, {}};
    Rng rng(derive_seed(config_.seed, step, "negatives/" + raw.query.id));
    std::vector<TextRecord> pool;
    for (const TextRecord& n : raw.hard_negatives)
        if (n.id != raw.positive.id) pool.push_back(n);
    const std::size_t h = config_.hard_negatives;
    if (pool.size() > h) {
        rng.shuffle(pool);
        pool.resize(h);
    }
    std::set<std::string> used{raw.positive.id};
    for (const TextRecord& n : pool) used.insert(n.id);
    if (pool.size() < h) {
        if (passage_pool_.size() < h + 1)
            fail(ErrorCode::EmptyCorpus, "not enough distinct passages to pad hard negatives");
        while (pool.size() < h) {
            const TextRecord& cand = passage_pool_[rng.uniform_index(passage_pool_.size())];
            if (used.insert(cand.id).second) pool.push_back(cand);
        }
    }
    s.hard_negatives = std::move(pool);
    return s;
}

TrainingBatch Trainer::batch_for_step(std::size_t step) const {
    const std::size_t n = config_.batch_size;
    const std::size_t per_epoch = dataset_.size() / n;
    const std::size_t epoch = step / per_epoch;
    const std::size_t offset = (step % per_epoch) * n;
    std::vector<std::size_t> order(dataset_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config_.seed, epoch, "epoch"));
    rng.shuffle(order);
    std::vector<TrainingSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) samples.push_back(prepare_sample(dataset_[order[offset + i]], step));
    const std::uint64_t aug_seed = config_.freeze_augmentation ? derive_seed(config_.seed, "augment")
                                                               : derive_seed(config_.seed, step, "augment");
    return assemble_batch(std::move(samples), config_.loss.k_variants, aug_seed);
}

StepMetrics Trainer::step() {
    if (done()) fail(ErrorCode::StepOutOfRange, "training already reached total_steps");
    const std::size_t step_index = state_.step;
    const TrainingBatch batch = batch_for_step(step_index);
    const std::size_t n = batch.samples.size();
    const std::size_t k = config_.loss.k_variants;
    const std::size_t d = config_.encoder.embed_dim;

    std::vector<std::string> query_texts;
    query_texts.reserve(n * (k + 1));
    for (const auto& a : batch.augmented) query_texts.push_back(a.original.text);
    for (std::size_t v = 0; v < k; ++v)
        for (const auto& a : batch.augmented) query_texts.push_back(a.variants[v].text);
    std::vector<std::string> passage_texts;
    passage_texts.reserve(batch.passages.size());
    for (const auto& p : batch.passages) passage_texts.push_back(p.text);

    const auto q_enc = encoder::encode_batch_with_grads(query_texts, model_.query_params(), config_.encoder,
                                                        config_.threads);
    const auto p_enc = encoder::encode_batch_with_grads(passage_texts, model_.passage_params(), config_.encoder,
                                                        config_.threads);
    const Matrix& q_all = q_enc.embeddings();
    Matrix queries(n, d);
    std::vector<Matrix> variants(k, Matrix(n, d));
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(q_all.row(i).begin(), d, queries.row(i).begin());
        for (std::size_t v = 0; v < k; ++v)
            std::copy_n(q_all.row(n * (v + 1) + i).begin(), d, variants[v].row(i).begin());
    }

    const objective::DstResult result =
        objective::dst_loss(queries, variants, p_enc.embeddings(), batch.labels, config_.loss);

    Matrix upstream(q_all.rows(), d);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(result.grads.queries.row(i).begin(), d, upstream.row(i).begin());
        for (std::size_t v = 0; v < k; ++v)
            std::copy_n(result.grads.variants[v].row(i).begin(), d, upstream.row(n * (v + 1) + i).begin());
    }
    query_grads_.clear();
    if (!config_.encoder.tie_weights) passage_grads_.clear();
    q_enc.backward(upstream, query_grads_);
    p_enc.backward(result.grads.passages, config_.encoder.tie_weights ? query_grads_ : passage_grads_);

    StepMetrics m;
    m.lr = lr_at(step_index, config_);
    m.loss = result.loss;
    m.terms = result.terms;
    const bool finite = std::isfinite(result.loss) && query_grads_.all_finite() &&
                        (config_.encoder.tie_weights || passage_grads_.all_finite());
    if (!finite) {
        m.skipped = true;
        std::cerr << "warning: " << to_string(ErrorCode::NonFiniteGradient) << " at step " << step_index + 1
                  << "; update skipped\n";
    } else {
        const std::uint64_t t = step_index + 1;
        optimizer_step(model_.query, query_grads_, state_.towers[0], t, m.lr, config_.adam);
        if (!config_.encoder.tie_weights)
            optimizer_step(*model_.passage, passage_grads_, state_.towers[1], t, m.lr, config_.adam);
    }
    state_.step = step_index + 1;
    m.step = state_.step;
    return m;
}

TrainResult train(std::vector<TrainingSample> dataset, const TrainConfig& config, const TrainOptions& options) {
    Trainer trainer(std::move(dataset), config);
    if (options.resume_from) trainer.resume(load_checkpoint(*options.resume_from));

    std::ofstream log;
    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        const auto log_path = options.out_dir / "metrics.tsv";
        std::vector<std::string> kept;
        if (trainer.completed_steps() > 0 && std::filesystem::exists(log_path)) {
            std::ifstream in(log_path);
            std::string line;
            std::getline(in, line);  // header
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                if (std::stoull(line.substr(0, line.find('\t'))) <= trainer.completed_steps()) kept.push_back(line);
            }
        }
        log.open(log_path, std::ios::trunc);
        if (!log) fail(ErrorCode::IoError, "cannot write " + log_path.string());
        log << metrics_header() << '\n';
        for (const auto& line : kept) log << line << '\n';
    }

    TrainResult result;
    while (!trainer.done()) {
        StepMetrics m = trainer.step();
        if (log.is_open()) log << format_metrics(m) << '\n';
        if (options.on_step) options.on_step(m);
        result.log.push_back(m);
        if (!options.out_dir.empty() && config.checkpoint_interval > 0 && m.step % config.checkpoint_interval == 0 &&
            m.step < config.total_steps) {
            log.flush();
            save_checkpoint(options.out_dir / ("ckpt-" + std::to_string(m.step) + ".ckpt"), trainer.checkpoint());
        }
    }
    result.final_checkpoint = trainer.checkpoint();
    if (!options.out_dir.empty()) {
        log.close();
        if (!log) fail(ErrorCode::IoError, "failed writing metrics log");
        save_checkpoint(options.out_dir / "final.ckpt", result.final_checkpoint);
    }
    return result;
}

}  // namespace dst::train
