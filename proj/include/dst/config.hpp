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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dst/metrics.hpp"
#include "dst/train.hpp"

namespace dst {

/// Ordered `key = value` pairs from a flat config file. '#' starts a comment.
/// Throws InvalidConfig on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& source = "config");

/// Training keys:
///   batch_size hard_negatives total_steps warmup_steps learning_rate
///   weight_decay adam_beta1 adam_beta2 adam_epsilon seed init_scale
///   beta gamma sigma k_variants ce_p ce_q kl_p kl_q kl_direction
///   hash_buckets embed_dim ngram_min ngram_max tie_weights
///   checkpoint_interval freeze_augmentation threads
/// Returns false when `key` is not a training key; throws InvalidConfig for a bad value.
bool apply_train_key(train::TrainConfig& config, const std::string& key, const std::string& value);

/// Unknown keys are InvalidConfig.
train::TrainConfig parse_train_config(std::string_view text, const std::string& source = "config");
train::TrainConfig load_train_config(const std::filesystem::path& path);

/// Canonical text; parse_train_config(to_config_text(c)) == c.
std::string to_config_text(const train::TrainConfig& config);

struct ExperimentConfig {
    train::TrainConfig train;
    std::filesystem::path corpus_dir;  // passages.tsv, queries.tsv, qrels.txt, train.jsonl
    std::filesystem::path out_dir;
    std::vector<eval::MetricSpec> metrics = {
        {eval::MetricKind::Mrr, 10}, {eval::MetricKind::Recall, 1000}, {eval::MetricKind::Ndcg, 10}, {eval::MetricKind::Map, 0}};
    std::size_t eval_variants = 10;
    std::optional<std::uint64_t> eval_seed;  // defaults to train.seed
    std::size_t retrieve_k = 1000;
    std::size_t neighbors = 1;
    std::optional<std::filesystem::path> baseline_dir;  // another experiment's report directory
    std::size_t comparisons = 0;                        // Bonferroni factor; 0 means number of metrics

    std::uint64_t effective_eval_seed() const { return eval_seed.value_or(train.seed); }

    /// Throws InvalidConfig for V == 0 or k == 0, IoError for missing paths.
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Training keys plus: corpus_dir out_dir metrics eval_variants eval_seed
/// retrieve_k neighbors baseline_dir comparisons. Relative paths resolve
/// against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir,
                                         const std::string& source = "config");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string to_config_text(const ExperimentConfig& config);

}  // namespace dst
