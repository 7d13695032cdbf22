// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dst/binary_io.hpp"
#include "dst/corpus.hpp"
#include "dst/dense_index.hpp"
#include "dst/encoder.hpp"
#include "dst/error.hpp"
#include "dst/train.hpp"

namespace dst::experiment {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

std::vector<std::string> texts_of(const std::vector<TextRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.text);
    return out;
}

std::string canonical_config(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.out_dir.clear();
    std::string text = to_config_text(c);
    const std::string out_line = "out_dir = \n";
    if (auto pos = text.find(out_line); pos != std::string::npos) text.erase(pos, out_line.size());
    return text;
}

}  // namespace

DistributionAnalysis analyze_distribution(const Checkpoint& ckpt, const std::vector<TextRecord>& queries,
                                          const std::vector<typo::VariantRow>& variants, std::size_t neighbors,
                                          std::size_t threads) {
    if (queries.size() < 2) fail(ErrorCode::InvalidArgument, "distribution analysis needs at least 2 queries");
    if (variants.size() < 2) fail(ErrorCode::InvalidArgument, "distribution analysis needs at least 2 variants");
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < queries.size(); ++i) row_of.emplace(queries[i].id, i);

    const auto& params = ckpt.model.query_params();
    const auto& cfg = ckpt.model.config;
    const Matrix originals = encoder::encode_texts(texts_of(queries), params, cfg, threads);
    std::vector<std::string> variant_texts;
    variant_texts.reserve(variants.size());
    for (const auto& v : variants) variant_texts.push_back(v.text);
    const Matrix misspelled = encoder::encode_texts(variant_texts, params, cfg, threads);

    std::vector<double> misspell_sims;
    misspell_sims.reserve(variants.size());
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        auto it = row_of.find(variants[i].query_id);
        if (it == row_of.end()) {
            missing.push_back(variants[i].query_id);
            continue;
        }
        misspell_sims.push_back(eval::cosine(originals.row(it->second), misspelled.row(i)));
    }
    if (!missing.empty()) fail(ErrorCode::DanglingReference, "variants reference unknown query " + missing.front());

    std::vector<double> neighbor_sims;
    for (const auto& [a, b] : eval::neighbor_pairs(originals, neighbors))
        neighbor_sims.push_back(eval::cosine(originals.row(a), originals.row(b)));

    DistributionAnalysis out;
    out.misspell = eval::similarity_density(misspell_sims);
    out.neighbor = eval::similarity_density(neighbor_sims);
    out.overlap = eval::distribution_overlap(out.misspell, out.neighbor);
    out.misspell_pairs = misspell_sims.size();
    out.neighbor_pairs = neighbor_sims.size();
    return out;
}

void write_density_tsv(const std::filesystem::path& path, const DistributionAnalysis& a) {
    auto out = open_output(path);
    out << "# orig_to_misspell: pairs=" << a.misspell_pairs << " mean=" << fmt(a.misspell.sample_mean)
        << " bandwidth=" << fmt(a.misspell.bandwidth) << '\n';
    out << "# orig_to_neighbor: pairs=" << a.neighbor_pairs << " mean=" << fmt(a.neighbor.sample_mean)
        << " bandwidth=" << fmt(a.neighbor.bandwidth) << '\n';
    out << "# overlap=" << fmt(a.overlap) << '\n';
    out << "grid\torig_to_misspell\torig_to_neighbor\n";
    for (std::size_t i = 0; i < a.misspell.grid.size(); ++i)
        out << fmt(a.misspell.grid[i]) << '\t' << fmt(a.misspell.density[i]) << '\t' << fmt(a.neighbor.density[i])
            << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void write_distribution_summary(const std::filesystem::path& path, const DistributionAnalysis& a) {
    auto out = open_output(path);
    out << "statistic\tvalue\n";
    out << "misspell_pairs\t" << a.misspell_pairs << '\n';
    out << "misspell_mean_cosine\t" << fmt(a.misspell.sample_mean) << '\n';
    out << "misspell_bandwidth\t" << fmt(a.misspell.bandwidth) << '\n';
    out << "neighbor_pairs\t" << a.neighbor_pairs << '\n';
    out << "neighbor_mean_cosine\t" << fmt(a.neighbor.sample_mean) << '\n';
    out << "neighbor_bandwidth\t" << fmt(a.neighbor.bandwidth) << '\n';
    out << "overlap\t" << fmt(a.overlap) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

RankedRun retrieve(const Checkpoint& ckpt, const index::PassageIndex& idx, const std::vector<TextRecord>& queries,
                   std::size_t k, std::size_t threads, std::string tag) {
    if (!idx.fingerprint.empty() && idx.fingerprint != model_fingerprint(ckpt.model, ckpt.seed))
        fail(ErrorCode::EncoderMismatch, "index was built with a different encoder checkpoint");
    if (idx.dim() != ckpt.model.config.embed_dim)
        fail(ErrorCode::EncoderMismatch, "index dimension differs from the encoder dimension");
    std::vector<std::string> ids;
    ids.reserve(queries.size());
    for (const auto& q : queries) ids.push_back(q.id);
    const Matrix q = encoder::encode_texts(texts_of(queries), ckpt.model.query_params(), ckpt.model.config, threads);
    return index::search(idx, q, ids, {k, threads, 4096}, std::move(tag));
}

eval::VariantMap to_variant_map(const std::vector<typo::VariantRow>& rows) {
    eval::VariantMap out;
    for (const auto& r : rows)
        if (!out.emplace(r.variant_id, r.query_id).second)
            fail(ErrorCode::InvalidArgument, "duplicate variant id " + r.variant_id);
    return out;
}

eval::MetricReport evaluate_variants(const RankedRun& run, const Qrels& qrels, const eval::VariantMap& variants,
                                     const std::vector<eval::MetricSpec>& metrics) {
    const Qrels expanded = eval::expand_qrels(qrels, variants);
    const eval::MetricReport per_variant = eval::evaluate_run(run, expanded, metrics);
    return eval::variant_average({per_variant}, variants);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = canonical_config(config);
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_manifest(const ReportLayout& layout, const ExperimentConfig& config) {
    nlohmann::ordered_json m;
    m["config_sha256"] = config_hash(config);
    m["seed"] = config.train.seed;
    m["eval_seed"] = config.effective_eval_seed();
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    const auto paths = corpus::CorpusPaths::in_directory(config.corpus_dir);
    for (const auto& p : {paths.passages, *paths.queries, *paths.qrels, *paths.training})
        inputs[p.filename().string()] = sha256_file(p);
    m["inputs"] = std::move(inputs);
    std::map<std::string, std::string> artifacts;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(layout.root)) {
        if (!entry.is_regular_file() || entry.path() == layout.manifest()) continue;
        artifacts[std::filesystem::relative(entry.path(), layout.root).generic_string()] = sha256_file(entry.path());
    }
    nlohmann::ordered_json listed = nlohmann::ordered_json::object();
    for (const auto& [rel, hash] : artifacts) listed[rel] = hash;
    m["artifacts"] = std::move(listed);
    auto out = open_output(layout.manifest());
    out << m.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + layout.manifest().string());
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
    config.validate();
    auto log = [&](const std::string& line) {
        if (options.log) options.log(line);
    };

    ExperimentResult result;
    result.layout.root = config.out_dir;
    const ReportLayout& L = result.layout;
    std::filesystem::create_directories(L.root);
    {
        auto out = open_output(L.config());
        out << canonical_config(config);
    }

    const auto bundle = corpus::load_corpus(corpus::CorpusPaths::in_directory(config.corpus_dir));
    if (bundle.training.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no training samples");
    if (bundle.queries.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no evaluation queries");
    const std::size_t threads = config.train.threads;

    bool dirty = false;
    auto stage = [&](const std::string& name, bool outputs_exist, const std::function<void()>& body) {
        const bool run = dirty || !outputs_exist;
        if (run) {
            log("stage " + name + ": running");
            body();
            dirty = true;
        } else {
            log("stage " + name + ": outputs present, skipped");
        }
        result.stages.push_back({name, run});
    };

    stage("train", std::filesystem::exists(L.checkpoint()), [&] {
        train::TrainOptions topt;
        topt.out_dir = L.train_dir();
        topt.on_step = [&](const train::StepMetrics& m) {
            if (m.step % 100 == 0 || m.step == config.train.total_steps)
                log("  step " + std::to_string(m.step) + " loss " + fmt(m.loss));
        };
        train::train(bundle.training, config.train, topt);
    });
    const Checkpoint ckpt = load_checkpoint(L.checkpoint());
    if (ckpt.seed != config.train.seed)
        fail(ErrorCode::EncoderMismatch, "existing checkpoint was trained with a different seed");

    stage("index", std::filesystem::exists(L.index()),
          [&] { index::save_index(L.index(), index::build_index(bundle.passages, ckpt, threads)); });
    const index::PassageIndex idx = index::load_index(L.index());

    std::vector<typo::VariantRow> variant_rows;
    stage("augment", std::filesystem::exists(L.variants()), [&] {
        const auto aug = typo::augment_corpus(bundle.queries, config.eval_variants, config.effective_eval_seed());
        for (const auto& w : aug.warnings) log("warning: " + w);
        typo::write_variants_tsv(L.variants(), typo::variant_rows(aug));
    });
    variant_rows = typo::read_variants_tsv(L.variants());
    const eval::VariantMap variant_map = to_variant_map(variant_rows);

    stage("retrieve", std::filesystem::exists(L.clean_run()) && std::filesystem::exists(L.misspelled_run()), [&] {
        write_trec_run(L.clean_run(), retrieve(ckpt, idx, bundle.queries, config.retrieve_k, threads));
        std::vector<TextRecord> variant_queries;
        variant_queries.reserve(variant_rows.size());
        for (const auto& v : variant_rows) variant_queries.push_back({v.variant_id, v.text});
        write_trec_run(L.misspelled_run(), retrieve(ckpt, idx, variant_queries, config.retrieve_k, threads));
    });

    // Evaluation and analysis are always recomputed from the stored artifacts.
    stage("evaluate", false, [&] {
        const RankedRun clean_run = read_trec_run(L.clean_run());
        const RankedRun misspelled_run = read_trec_run(L.misspelled_run());
        result.clean = eval::evaluate_run(clean_run, bundle.qrels, config.metrics);
        result.misspelled = evaluate_variants(misspelled_run, bundle.qrels, variant_map, config.metrics);
        if (config.baseline_dir) {
            const ReportLayout B{*config.baseline_dir};
            if (to_variant_map(typo::read_variants_tsv(B.variants())) != variant_map)
                fail(ErrorCode::InvalidArgument, "baseline evaluated different misspelled variants");
            const auto base_clean = eval::evaluate_run(read_trec_run(B.clean_run()), bundle.qrels, config.metrics);
            const auto base_miss =
                evaluate_variants(read_trec_run(B.misspelled_run()), bundle.qrels, variant_map, config.metrics);
            eval::attach_significance(result.clean, base_clean, config.comparisons);
            eval::attach_significance(result.misspelled, base_miss, config.comparisons);
        }
        eval::write_report(L.clean_report(), result.clean);
        eval::write_per_query(L.clean_per_query(), result.clean);
        eval::write_report(L.misspelled_report(), result.misspelled);
        eval::write_per_query(L.misspelled_per_query(), result.misspelled);
        for (const auto* r : {&result.clean, &result.misspelled})
            for (const auto& m : r->metrics)
                for (const auto& q : m.skipped) log("warning: " + m.name + " skipped query " + q + " (zero ideal DCG)");
    });

    stage("analyze-dist", false, [&] {
        result.distribution = analyze_distribution(ckpt, bundle.queries, variant_rows, config.neighbors, threads);
        write_density_tsv(L.density(), result.distribution);
        write_distribution_summary(L.distribution_summary(), result.distribution);
    });

    write_manifest(L, config);
    return result;
}

}  // namespace dst::experiment
