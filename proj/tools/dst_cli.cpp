// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Umbrella command-line tool. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 runtime failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dst/checkpoint.hpp"
#include "dst/config.hpp"
#include "dst/corpus.hpp"
#include "dst/dense_index.hpp"
#include "dst/error.hpp"
#include "dst/experiment.hpp"
#include "dst/metrics.hpp"
#include "dst/run.hpp"
#include "dst/train.hpp"
#include "dst/typo.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;  // unset: configs keep their own value
    bool quiet = false;

    std::size_t workers() const { return threads.value_or(1); }

    void info(const std::string& line) const {
        if (!quiet) std::cerr << line << '\n';
    }
};

struct AugmentArgs {
    fs::path queries, out;
    std::size_t k = 10;
};

int cmd_augment(const Globals& g, const AugmentArgs& a) {
    const auto queries = dst::corpus::read_tsv_records(a.queries);
    const auto aug = dst::typo::augment_corpus(queries, a.k, g.seed.value_or(0));
    for (const auto& w : aug.warnings) std::cerr << "warning: " << w << '\n';
    const auto rows = dst::typo::variant_rows(aug);
    dst::typo::write_variants_tsv(a.out, rows);
    g.info("wrote " + std::to_string(rows.size()) + " variants to " + a.out.string());
    return 0;
}

struct TrainArgs {
    fs::path train, config, out_dir;
    std::optional<fs::path> resume;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
    auto cfg = a.config.empty() ? dst::train::TrainConfig{} : dst::load_train_config(a.config);
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    cfg.validate();
    auto samples = dst::corpus::read_training_jsonl(a.train);
    dst::train::TrainOptions opt;
    opt.out_dir = a.out_dir;
    opt.resume_from = a.resume;
    opt.on_step = [&](const dst::train::StepMetrics& m) {
        if (m.step % 100 == 0 || m.step == cfg.total_steps)
            g.info("step " + std::to_string(m.step) + "/" + std::to_string(cfg.total_steps) + " " +
                   dst::train::format_metrics(m));
    };
    dst::train::train(std::move(samples), cfg, opt);
    g.info("wrote " + (a.out_dir / "final.ckpt").string());
    return 0;
}

struct IndexArgs {
    fs::path passages, ckpt, out;
};

int cmd_index(const Globals& g, const IndexArgs& a) {
    const auto passages = dst::corpus::read_tsv_records(a.passages);
    const auto ckpt = dst::load_checkpoint(a.ckpt);
    const auto idx = dst::index::build_index(passages, ckpt, g.workers());
    dst::index::save_index(a.out, idx);
    g.info("indexed " + std::to_string(idx.size()) + " passages into " + a.out.string());
    return 0;
}

struct RetrieveArgs {
    fs::path index, queries, ckpt, out;
    std::size_t k = 1000;
    std::string tag = "dst";
};

int cmd_retrieve(const Globals& g, const RetrieveArgs& a) {
    const auto idx = dst::index::load_index(a.index);
    const auto ckpt = dst::load_checkpoint(a.ckpt);
    const auto queries = dst::corpus::read_tsv_records(a.queries);
    const auto run = dst::experiment::retrieve(ckpt, idx, queries, a.k, g.workers(), a.tag);
    dst::write_trec_run(a.out, run);
    g.info("retrieved " + std::to_string(run.rankings.size()) + " queries into " + a.out.string());
    return 0;
}

struct EvaluateArgs {
    fs::path run, qrels, out;
    std::string metrics = "mrr@10,recall@1000,ndcg@10,map";
    std::optional<fs::path> variant_map, baseline_run, per_query;
    std::size_t comparisons = 0;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
    const auto specs = dst::eval::parse_metric_list(a.metrics);
    const auto qrels = dst::read_qrels(a.qrels);
    auto evaluate = [&](const fs::path& run_path) {
        const auto run = dst::read_trec_run(run_path);
        if (a.variant_map)
            return dst::experiment::evaluate_variants(run, qrels, dst::eval::read_variant_map(*a.variant_map), specs);
        return dst::eval::evaluate_run(run, qrels, specs);
    };
    auto report = evaluate(a.run);
    if (a.baseline_run) dst::eval::attach_significance(report, evaluate(*a.baseline_run), a.comparisons);
    for (const auto& m : report.metrics)
        for (const auto& q : m.skipped) std::cerr << "warning: " << m.name << " skipped query " << q << '\n';
    dst::eval::write_report(a.out, report);
    if (a.per_query) dst::eval::write_per_query(*a.per_query, report);
    for (const auto& m : report.metrics) g.info(m.name + " " + std::to_string(m.mean));
    for (const auto& s : report.significance)
        g.info(s.metric + " vs baseline: t=" + std::to_string(s.t) + " p_corrected=" + std::to_string(s.corrected_p));
    return 0;
}

struct AnalyzeArgs {
    fs::path ckpt, queries, variants, out;
    std::optional<fs::path> summary;
    std::size_t neighbors = 1;
};

int cmd_analyze(const Globals& g, const AnalyzeArgs& a) {
    const auto ckpt = dst::load_checkpoint(a.ckpt);
    const auto queries = dst::corpus::read_tsv_records(a.queries);
    const auto variants = dst::typo::read_variants_tsv(a.variants);
    const auto result = dst::experiment::analyze_distribution(ckpt, queries, variants, a.neighbors, g.workers());
    dst::experiment::write_density_tsv(a.out, result);
    if (a.summary) dst::experiment::write_distribution_summary(*a.summary, result);
    g.info("mean cosine original-to-misspell " + std::to_string(result.misspell.sample_mean) +
           ", original-to-neighbor " + std::to_string(result.neighbor.sample_mean) + ", overlap " +
           std::to_string(result.overlap));
    return 0;
}

struct GenArgs {
    fs::path out_dir;
    dst::corpus::SyntheticParams params;
};

int cmd_gen_corpus(const Globals& g, GenArgs a) {
    if (g.seed) a.params.seed = *g.seed;
    const auto bundle = dst::corpus::generate_synthetic_corpus(a.params);
    dst::corpus::write_corpus(a.out_dir, bundle);
    g.info("wrote " + std::to_string(bundle.passages.size()) + " passages, " +
           std::to_string(bundle.training.size()) + " training and " + std::to_string(bundle.queries.size()) +
           " evaluation queries to " + a.out_dir.string());
    return 0;
}

struct ExperimentArgs {
    fs::path config;
    std::optional<fs::path> out_dir;
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
    auto cfg = dst::load_experiment_config(a.config);
    if (a.out_dir) cfg.out_dir = *a.out_dir;
    if (g.seed) cfg.train.seed = *g.seed;
    if (g.threads) cfg.train.threads = *g.threads;
    dst::experiment::ExperimentOptions opt;
    if (!g.quiet) opt.log = [](const std::string& line) { std::cerr << line << '\n'; };
    const auto result = dst::experiment::run_experiment(cfg, opt);
    for (const auto* r : {&result.clean, &result.misspelled}) {
        const char* label = r == &result.clean ? "clean" : "misspelled";
        for (const auto& m : r->metrics) g.info(std::string(label) + " " + m.name + " " + std::to_string(m.mean));
    }
    g.info("report written to " + result.layout.root.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Typo-robust dense retrieval toolkit"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Master random seed")->type_name("U64");
    std::size_t threads_value = 1;
    auto* threads_opt = app.add_option("--threads", threads_value, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");
    app.fallthrough();

    AugmentArgs aug;
    auto* s_aug = app.add_subcommand("augment", "Generate misspelled query variants");
    s_aug->add_option("--queries", aug.queries, "Queries TSV (id, text)")->required()->check(CLI::ExistingFile);
    s_aug->add_option("--k", aug.k, "Variants per query")->check(CLI::PositiveNumber);
    s_aug->add_option("--out", aug.out, "Output variants TSV")->required();

    TrainArgs tr;
    std::string resume;
    auto* s_train = app.add_subcommand("train", "Train a dual encoder");
    s_train->add_option("--train", tr.train, "Training JSONL")->required()->check(CLI::ExistingFile);
    s_train->add_option("--config", tr.config, "Training config file")->check(CLI::ExistingFile);
    s_train->add_option("--out-dir", tr.out_dir, "Output directory")->required();
    auto* resume_opt = s_train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);

    IndexArgs ix;
    auto* s_index = app.add_subcommand("index", "Encode and index passages");
    s_index->add_option("--passages", ix.passages, "Passages TSV")->required()->check(CLI::ExistingFile);
    s_index->add_option("--ckpt", ix.ckpt, "Encoder checkpoint")->required()->check(CLI::ExistingFile);
    s_index->add_option("--out", ix.out, "Output index file")->required();

    RetrieveArgs rt;
    auto* s_ret = app.add_subcommand("retrieve", "Search an index with encoded queries");
    s_ret->add_option("--index", rt.index, "Index file")->required()->check(CLI::ExistingFile);
    s_ret->add_option("--queries", rt.queries, "Queries TSV")->required()->check(CLI::ExistingFile);
    s_ret->add_option("--ckpt", rt.ckpt, "Encoder checkpoint")->required()->check(CLI::ExistingFile);
    s_ret->add_option("--k", rt.k, "Results per query")->check(CLI::PositiveNumber);
    s_ret->add_option("--tag", rt.tag, "Run tag");
    s_ret->add_option("--out", rt.out, "Output TREC run")->required();

    EvaluateArgs ev;
    std::string variant_map, baseline_run, per_query;
    auto* s_eval = app.add_subcommand("evaluate", "Score a run against relevance judgments");
    s_eval->add_option("--run", ev.run, "TREC run")->required()->check(CLI::ExistingFile);
    s_eval->add_option("--qrels", ev.qrels, "TREC qrels")->required()->check(CLI::ExistingFile);
    s_eval->add_option("--metrics", ev.metrics, "Comma-separated metrics");
    auto* vm_opt = s_eval->add_option("--variant-map", variant_map, "Variants TSV for averaging")->check(CLI::ExistingFile);
    auto* br_opt = s_eval->add_option("--baseline-run", baseline_run, "Baseline run for significance")->check(CLI::ExistingFile);
    auto* pq_opt = s_eval->add_option("--per-query", per_query, "Per-query values TSV");
    s_eval->add_option("--comparisons", ev.comparisons, "Bonferroni factor (default: number of metrics)");
    s_eval->add_option("--out", ev.out, "Report TSV")->required();

    AnalyzeArgs an;
    std::string summary;
    auto* s_an = app.add_subcommand("analyze-dist", "Cosine-similarity density analysis");
    s_an->add_option("--ckpt", an.ckpt, "Encoder checkpoint")->required()->check(CLI::ExistingFile);
    s_an->add_option("--queries", an.queries, "Original queries TSV")->required()->check(CLI::ExistingFile);
    s_an->add_option("--variants", an.variants, "Variants TSV")->required()->check(CLI::ExistingFile);
    s_an->add_option("--neighbors", an.neighbors, "Neighbors per original query")->check(CLI::PositiveNumber);
    auto* sum_opt = s_an->add_option("--summary", summary, "Summary statistics TSV");
    s_an->add_option("--out", an.out, "Density TSV")->required();

    GenArgs gen;
    auto* s_gen = app.add_subcommand("gen-corpus", "Generate the synthetic corpus");
    s_gen->add_option("--out-dir", gen.out_dir, "Output directory")->required();
    s_gen->add_option("--passages", gen.params.passages, "Passage count");
    s_gen->add_option("--train-queries", gen.params.train_queries, "Training query count");
    s_gen->add_option("--eval-queries", gen.params.eval_queries, "Evaluation query count");
    s_gen->add_option("--hard-negatives", gen.params.hard_negatives, "Hard negatives per training query");
    s_gen->add_option("--passages-per-entity", gen.params.passages_per_entity, "Passages per entity name")
        ->check(CLI::PositiveNumber);

    ExperimentArgs ex;
    std::string ex_out;
    auto* s_ex = app.add_subcommand("experiment", "Run the full train-index-retrieve-evaluate pipeline");
    s_ex->add_option("--config", ex.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    auto* ex_out_opt = s_ex->add_option("--out-dir", ex_out, "Override the report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (seed_opt->count() > 0) g.seed = seed_value;
    if (threads_opt->count() > 0) g.threads = threads_value;
    if (resume_opt->count() > 0) tr.resume = resume;
    if (vm_opt->count() > 0) ev.variant_map = variant_map;
    if (br_opt->count() > 0) ev.baseline_run = baseline_run;
    if (pq_opt->count() > 0) ev.per_query = per_query;
    if (sum_opt->count() > 0) an.summary = summary;
    if (ex_out_opt->count() > 0) ex.out_dir = ex_out;

    try {
        if (*s_aug) return cmd_augment(g, aug);
        if (*s_train) return cmd_train(g, tr);
        if (*s_index) return cmd_index(g, ix);
        if (*s_ret) return cmd_retrieve(g, rt);
        if (*s_eval) return cmd_evaluate(g, ev);
        if (*s_an) return cmd_analyze(g, an);
        if (*s_gen) return cmd_gen_corpus(g, gen);
        if (*s_ex) return cmd_experiment(g, ex);
    } catch (const dst::Error& e) {
        std::cerr << "error [" << dst::to_string(e.code()) << "]: " << e.what() << '\n';
        return dst::exit_status(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
