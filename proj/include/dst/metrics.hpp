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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dst/run.hpp"

namespace dst::eval {

enum class MetricKind { Mrr, Recall, Ndcg, Map };

/// A metric and its rank cutoff; MAP has no cutoff (k == 0).
struct MetricSpec {
    MetricKind kind = MetricKind::Mrr;
    std::size_t k = 10;

    std::string name() const;  // "mrr@10", "recall@1000", "ndcg@10", "map"
    bool operator==(const MetricSpec&) const = default;
};

/// Parses "mrr@10", "recall@1000", "ndcg@10", "map". Throws InvalidArgument.
MetricSpec parse_metric(std::string_view text);
std::vector<MetricSpec> parse_metric_list(std::string_view comma_separated);

/// Per-query values of one metric; mean is over per_query in id order.
struct MetricValues {
    std::string name;
    std::map<std::string, double> per_query;
    double mean = 0.0;
    std::vector<std::string> skipped;  // queries excluded from the mean

    bool operator==(const MetricValues&) const = default;
};

/// Queries are the run's queries. Each must appear in qrels with at least one
/// positive grade (MissingJudgments otherwise), except that nDCG skips
/// queries whose ideal DCG is zero and lists them in `skipped`.
MetricValues mrr_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);
MetricValues recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);
MetricValues ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k);
MetricValues mean_average_precision(const RankedRun& run, const Qrels& qrels);
MetricValues evaluate_metric(const RankedRun& run, const Qrels& qrels, const MetricSpec& spec);

/// Recomputes the mean from per_query.
void refresh_mean(MetricValues& values);

struct Significance {
    std::string metric;
    double system_mean = 0.0;
    double baseline_mean = 0.0;
    double t = 0.0;
    double p = 1.0;
    double corrected_p = 1.0;
    std::size_t comparisons = 1;
    bool degenerate = false;

    bool operator==(const Significance&) const = default;
};

/// Variant id -> original query id.
using VariantMap = std::map<std::string, std::string>;

struct MetricReport {
    std::vector<MetricValues> metrics;
    std::map<std::string, std::vector<std::string>> variant_sets;  // original -> variant ids, empty if clean
    std::vector<Significance> significance;

    const MetricValues* find(std::string_view name) const;
    bool operator==(const MetricReport&) const = default;
};

MetricReport evaluate_run(const RankedRun& run, const Qrels& qrels, const std::vector<MetricSpec>& specs);

/// Qrels for variant ids, copied from each variant's original query.
Qrels expand_qrels(const Qrels& qrels, const VariantMap& variants);

/// Averages each original query's V variant values. Reports are merged first;
/// throws RaggedVariants when originals have different V or a variant value is
/// missing. An original whose variants were all skipped is itself skipped.
MetricReport variant_average(const std::vector<MetricReport>& per_variant, const VariantMap& variants);

/// Paired tests of `system` against `baseline` for every shared metric, with
/// Bonferroni factor `comparisons` (0 means the number of metrics compared).
void attach_significance(MetricReport& system, const MetricReport& baseline, std::size_t comparisons = 0);

/// Reads `variant_id \t original_id [\t text]` rows.
VariantMap read_variant_map(const std::filesystem::path& path);

/// Summary TSV `metric \t statistic \t value`; per-query TSV `metric \t qid \t value`.
void write_report(const std::filesystem::path& path, const MetricReport& report);
void write_per_query(const std::filesystem::path& path, const MetricReport& report);

}  // namespace dst::eval
