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
#include <functional>
#include <string>
#include <vector>

#include "dst/checkpoint.hpp"
#include "dst/config.hpp"
#include "dst/dense_index.hpp"
#include "dst/density.hpp"
#include "dst/metrics.hpp"
#include "dst/run.hpp"
#include "dst/typo.hpp"

namespace dst::experiment {

/// Original-to-misspell and original-to-neighbor cosine densities.
struct DistributionAnalysis {
    eval::DensityCurve misspell;
    eval::DensityCurve neighbor;
    double overlap = 0.0;
    std::size_t misspell_pairs = 0;
    std::size_t neighbor_pairs = 0;
};

/// Encodes queries and variants with the query tower. Each variant pairs with
/// its original; each original pairs with its `neighbors` nearest other
/// originals. Throws DanglingReference for a variant of an unknown query.
DistributionAnalysis analyze_distribution(const Checkpoint& ckpt, const std::vector<TextRecord>& queries,
                                          const std::vector<typo::VariantRow>& variants, std::size_t neighbors,
                                          std::size_t threads = 1);

/// `grid \t orig_to_misspell \t orig_to_neighbor` with '#' summary lines on top.
void write_density_tsv(const std::filesystem::path& path, const DistributionAnalysis& analysis);

/// `statistic \t value` rows: means, bandwidths, pair counts, overlap.
void write_distribution_summary(const std::filesystem::path& path, const DistributionAnalysis& analysis);

/// Encodes `queries` with the query tower and searches `index`. Throws
/// EncoderMismatch when the index was built by a different model.
RankedRun retrieve(const Checkpoint& ckpt, const index::PassageIndex& index, const std::vector<TextRecord>& queries,
                   std::size_t k, std::size_t threads = 1, std::string tag = "dst");

/// Misspelled evaluation: qrels are copied to variant ids, metrics computed per
/// variant and averaged per original query.
eval::MetricReport evaluate_variants(const RankedRun& run, const Qrels& qrels, const eval::VariantMap& variants,
                                     const std::vector<eval::MetricSpec>& metrics);

eval::VariantMap to_variant_map(const std::vector<typo::VariantRow>& rows);

/// Report directory layout.
struct ReportLayout {
    std::filesystem::path root;

    std::filesystem::path train_dir() const { return root / "train"; }
    std::filesystem::path checkpoint() const { return root / "train" / "final.ckpt"; }
    std::filesystem::path index() const { return root / "passages.idx"; }
    std::filesystem::path variants() const { return root / "variants.tsv"; }
    std::filesystem::path clean_run() const { return root / "run.clean.trec"; }
    std::filesystem::path misspelled_run() const { return root / "run.misspelled.trec"; }
    std::filesystem::path clean_report() const { return root / "report.clean.tsv"; }
    std::filesystem::path misspelled_report() const { return root / "report.misspelled.tsv"; }
    std::filesystem::path clean_per_query() const { return root / "perquery.clean.tsv"; }
    std::filesystem::path misspelled_per_query() const { return root / "perquery.misspelled.tsv"; }
    std::filesystem::path density() const { return root / "density.tsv"; }
    std::filesystem::path distribution_summary() const { return root / "distribution.tsv"; }
    std::filesystem::path config() const { return root / "config.txt"; }
    std::filesystem::path manifest() const { return root / "manifest.json"; }
};

struct StageStatus {
    std::string name;
    bool ran = false;  // false: outputs already present and upstream unchanged
};

struct ExperimentResult {
    ReportLayout layout;
    std::vector<StageStatus> stages;
    eval::MetricReport clean;
    eval::MetricReport misspelled;
    DistributionAnalysis distribution;
};

struct ExperimentOptions {
    std::function<void(const std::string&)> log;  // progress lines; null for silence
};

/// train -> index -> eval variants -> retrieve -> evaluate -> analyze-dist ->
/// manifest. A stage whose outputs exist is skipped unless an earlier stage
/// ran in this call, so deleting downstream artifacts resumes without
/// retraining. Stage errors propagate and leave earlier outputs in place.
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options = {});

/// SHA-256 of the canonical config text.
std::string config_hash(const ExperimentConfig& config);

/// manifest.json: config hash, seeds and the SHA-256 of every other file under root.
void write_manifest(const ReportLayout& layout, const ExperimentConfig& config);

}  // namespace dst::experiment
