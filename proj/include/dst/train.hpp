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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dst/checkpoint.hpp"
#include "dst/optimizer.hpp"
#include "dst/encoder.hpp"
#include "dst/objective.hpp"
#include "dst/text.hpp"
#include "dst/typo.hpp"

namespace dst::train {

struct TrainingSample {
    TextRecord query;
    TextRecord positive;
    std::vector<TextRecord> hard_negatives;

    bool operator==(const TrainingSample&) const = default;
};

struct TrainConfig {
    std::size_t batch_size = 16;
    std::size_t hard_negatives = 7;
    std::size_t total_steps = 2000;
    std::size_t warmup_steps = 200;
    double learning_rate = 3e-4;
    double init_scale = encoder::kDefaultInitScale;
    AdamWConfig adam;
    std::uint64_t seed = 0;
    objective::LossConfig loss;
    encoder::EncoderConfig encoder;
    std::size_t checkpoint_interval = 0;  // 0: final checkpoint only
    bool freeze_augmentation = false;     // one augmentation per query for the whole run
    std::size_t threads = 1;

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

/// Linear warm-up from 0 to the peak rate, then linear decay to 0 at total_steps.
/// Throws StepOutOfRange for step > total_steps.
double lr_at(std::size_t step, const TrainConfig& config);

struct TrainingBatch {
    std::vector<TrainingSample> samples;
    std::vector<typo::AugmentedQuerySet> augmented;
    std::vector<TextRecord> passages;  // deduplicated; sample-major, positive first
    objective::BatchLabels labels;
};

/// Flattens passages (deduplicated by id), computes labels and draws K
/// misspelled variants per query from `augment_seed`. Throws BatchTooSmall for
/// fewer than two samples.
TrainingBatch assemble_batch(std::vector<TrainingSample> samples, std::size_t k, std::uint64_t augment_seed);

struct StepMetrics {
    std::size_t step = 0;  // 1-based count of completed steps
    double lr = 0.0;
    double loss = 0.0;
    objective::TermValues terms;
    bool skipped = false;  // non-finite gradient; parameters left untouched
};

/// "step\tlr\tloss\tce_p\tce_q\tkl_p\tkl_q"
std::string metrics_header();
std::string format_metrics(const StepMetrics& m);

class Trainer {
 public:
    /// Throws EmptyCorpus for an empty dataset and BatchTooSmall when fewer
    /// than two samples fit in a batch.
    Trainer(std::vector<TrainingSample> dataset, TrainConfig config);

    /// Continues from a checkpoint that carries optimizer state.
    void resume(const Checkpoint& ckpt);

    StepMetrics step();
    bool done() const { return state_.step >= config_.total_steps; }
    std::size_t completed_steps() const { return state_.step; }

    /// The batch for a 0-based step; depends only on the config seed and data.
    TrainingBatch batch_for_step(std::size_t step) const;

    const encoder::DualEncoder& model() const { return model_; }
    const OptimizerState& optimizer_state() const { return state_; }
    const TrainConfig& config() const { return config_; }
    Checkpoint checkpoint() const;

 private:
    TrainingSample prepare_sample(const TrainingSample& raw, std::size_t step) const;

    std::vector<TrainingSample> dataset_;
    std::vector<TextRecord> passage_pool_;
    TrainConfig config_;
    encoder::DualEncoder model_;
    OptimizerState state_;
    encoder::EncoderGrads query_grads_;
    encoder::EncoderGrads passage_grads_;
};

struct TrainOptions {
    std::filesystem::path out_dir;  // empty: keep everything in memory
    std::optional<std::filesystem::path> resume_from;
    std::function<void(const StepMetrics&)> on_step;
};

struct TrainResult {
    Checkpoint final_checkpoint;
    std::vector<StepMetrics> log;  // steps run by this call
};

/// Runs the full schedule. With an output directory, writes metrics.tsv,
/// ckpt-<step>.ckpt every checkpoint_interval steps and final.ckpt.
TrainResult train(std::vector<TrainingSample> dataset, const TrainConfig& config, const TrainOptions& options = {});

}  // namespace dst::train
