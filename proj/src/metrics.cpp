// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "dst/error.hpp"
#include "dst/stats.hpp"
#include "dst/text.hpp"

namespace dst::eval {

namespace {

using PerQuery = std::function<std::optional<double>(const std::string& qid, const std::vector<ScoredPassage>& list)>;

void require_judged(const Qrels& qrels, const std::string& qid) {
    if (!qrels.has_query(qid)) fail(ErrorCode::MissingJudgments, "no judgments for query " + qid);
    if (qrels.relevant_count(qid) == 0)
        fail(ErrorCode::MissingJudgments, "no positive-grade judgment for query " + qid);
}

MetricValues compute(const std::string& name, const RankedRun& run, const PerQuery& fn) {
    MetricValues out;
    out.name = name;
    for (const auto& [qid, list] : run.rankings) {
        auto v = fn(qid, list);
        if (v) out.per_query[qid] = *v;
        else out.skipped.push_back(qid);
    }
    refresh_mean(out);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string MetricSpec::name() const {
    switch (kind) {
        case MetricKind::Mrr: return "mrr@" + std::to_string(k);
        case MetricKind::Recall: return "recall@" + std::to_string(k);
        case MetricKind::Ndcg: return "ndcg@" + std::to_string(k);
        case MetricKind::Map: return "map";
    }
    return "unknown";
}

MetricSpec parse_metric(std::string_view text) {
    const std::string s = normalize_text(text);
    if (s == "map") return {MetricKind::Map, 0};
    const auto at = s.find('@');
    if (at == std::string::npos) fail(ErrorCode::InvalidArgument, "metric needs a cutoff: " + s);
    const std::string head = s.substr(0, at);
    const std::string tail = s.substr(at + 1);
    std::size_t k = 0;
    try {
        std::size_t used = 0;
        k = std::stoul(tail, &used);
        if (used != tail.size()) throw std::invalid_argument("cutoff");
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "bad metric cutoff: " + s);
    }
    if (k == 0) fail(ErrorCode::InvalidArgument, "metric cutoff must be >= 1: " + s);
    if (head == "mrr") return {MetricKind::Mrr, k};
    if (head == "recall" || head == "r") return {MetricKind::Recall, k};
    if (head == "ndcg") return {MetricKind::Ndcg, k};
    fail(ErrorCode::InvalidArgument, "unknown metric: " + s);
}

std::vector<MetricSpec> parse_metric_list(std::string_view comma_separated) {
    std::vector<MetricSpec> out;
    for (const auto& field : split_fields(comma_separated, ',')) {
        if (field.empty()) continue;
        out.push_back(parse_metric(field));
    }
    if (out.empty()) fail(ErrorCode::InvalidArgument, "empty metric list");
    return out;
}

void refresh_mean(MetricValues& values) {
    double sum = 0.0;
    for (const auto& [qid, v] : values.per_query) sum += v;
    values.mean = values.per_query.empty() ? 0.0 : sum / static_cast<double>(values.per_query.size());
}

MetricValues mrr_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
    return compute("mrr@" + std::to_string(k), run, [&](const std::string& qid, const auto& list) {
        require_judged(qrels, qid);
        const std::size_t n = std::min(k, list.size());
        for (std::size_t i = 0; i < n; ++i)
            if (qrels.grade(qid, list[i].passage_id) > 0) return std::optional<double>(1.0 / static_cast<double>(i + 1));
        return std::optional<double>(0.0);
    });
}

MetricValues recall_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
    return compute("recall@" + std::to_string(k), run, [&](const std::string& qid, const auto& list) {
        require_judged(qrels, qid);
        const std::size_t n = std::min(k, list.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += qrels.grade(qid, list[i].passage_id) > 0 ? 1 : 0;
        return std::optional<double>(static_cast<double>(hits) / static_cast<double>(qrels.relevant_count(qid)));
    });
}

MetricValues ndcg_at_k(const RankedRun& run, const Qrels& qrels, std::size_t k) {
    return compute("ndcg@" + std::to_string(k), run, [&](const std::string& qid, const auto& list) {
        if (!qrels.has_query(qid)) fail(ErrorCode::MissingJudgments, "no judgments for query " + qid);
        auto gain = [](int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; };
        auto discount = [](std::size_t rank) { return std::log2(static_cast<double>(rank) + 1.0); };
        double dcg = 0.0;
        const std::size_t n = std::min(k, list.size());
        for (std::size_t i = 0; i < n; ++i) dcg += gain(qrels.grade(qid, list[i].passage_id)) / discount(i + 1);
        std::vector<int> grades;
        for (const auto& [pid, g] : qrels.judgments.at(qid)) grades.push_back(g);
        std::sort(grades.begin(), grades.end(), std::greater<>());
        double ideal = 0.0;
        for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) ideal += gain(grades[i]) / discount(i + 1);
        if (ideal == 0.0) return std::optional<double>();
        return std::optional<double>(dcg / ideal);
    });
}

MetricValues mean_average_precision(const RankedRun& run, const Qrels& qrels) {
    return compute("map", run, [&](const std::string& qid, const auto& list) {
        require_judged(qrels, qid);
        double sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (qrels.grade(qid, list[i].passage_id) > 0) {
                ++hits;
                sum += static_cast<double>(hits) / static_cast<double>(i + 1);
            }
        }
        return std::optional<double>(sum / static_cast<double>(qrels.relevant_count(qid)));
    });
}

MetricValues evaluate_metric(const RankedRun& run, const Qrels& qrels, const MetricSpec& spec) {
    switch (spec.kind) {
        case MetricKind::Mrr: return mrr_at_k(run, qrels, spec.k);
        case MetricKind::Recall: return recall_at_k(run, qrels, spec.k);
        case MetricKind::Ndcg: return ndcg_at_k(run, qrels, spec.k);
        case MetricKind::Map: return mean_average_precision(run, qrels);
    }
    fail(ErrorCode::InvalidArgument, "unknown metric kind");
}

const MetricValues* MetricReport::find(std::string_view name) const {
    for (const auto& m : metrics)
        if (m.name == name) return &m;
    return nullptr;
}

MetricReport evaluate_run(const RankedRun& run, const Qrels& qrels, const std::vector<MetricSpec>& specs) {
    MetricReport report;
    for (const auto& spec : specs) report.metrics.push_back(evaluate_metric(run, qrels, spec));
    return report;
}

Qrels expand_qrels(const Qrels& qrels, const VariantMap& variants) {
    Qrels out;
    for (const auto& [variant, original] : variants) {
        auto it = qrels.judgments.find(original);
        if (it != qrels.judgments.end()) out.judgments[variant] = it->second;
    }
    return out;
}

MetricReport variant_average(const std::vector<MetricReport>& per_variant, const VariantMap& variants) {
    if (per_variant.empty()) fail(ErrorCode::InvalidArgument, "no variant reports");
    std::map<std::string, std::vector<std::string>> sets;
    for (const auto& [variant, original] : variants) sets[original].push_back(variant);
    std::size_t v_count = 0;
    for (const auto& [original, ids] : sets) {
        if (v_count == 0) v_count = ids.size();
        if (ids.size() != v_count)
            fail(ErrorCode::RaggedVariants, "query " + original + " has " + std::to_string(ids.size()) +
                                                " variants, expected " + std::to_string(v_count));
    }

    MetricReport out;
    out.variant_sets = sets;
    for (const auto& first : per_variant.front().metrics) {
        std::map<std::string, double> merged;
        std::set<std::string> skipped;
        for (const auto& report : per_variant) {
            const MetricValues* m = report.find(first.name);
            if (m == nullptr) fail(ErrorCode::RaggedVariants, "metric " + first.name + " missing from a variant report");
            for (const auto& [qid, v] : m->per_query)
                if (!merged.emplace(qid, v).second)
                    fail(ErrorCode::InvalidArgument, "variant " + qid + " appears in more than one report");
            skipped.insert(m->skipped.begin(), m->skipped.end());
        }
        MetricValues avg;
        avg.name = first.name;
        for (const auto& [original, ids] : sets) {
            double sum = 0.0;
            std::size_t present = 0, dropped = 0;
            for (const auto& id : ids) {
                auto it = merged.find(id);
                if (it != merged.end()) {
                    sum += it->second;
                    ++present;
                } else if (skipped.count(id) != 0) {
                    ++dropped;
                } else {
                    fail(ErrorCode::RaggedVariants, "no " + first.name + " value for variant " + id);
                }
            }
            if (present == 0) avg.skipped.push_back(original);
            else if (dropped != 0) fail(ErrorCode::RaggedVariants, "query " + original + " has partially skipped variants");
            else avg.per_query[original] = sum / static_cast<double>(present);
        }
        refresh_mean(avg);
        out.metrics.push_back(std::move(avg));
    }
    return out;
}

void attach_significance(MetricReport& system, const MetricReport& baseline, std::size_t comparisons) {
    std::vector<std::pair<const MetricValues*, const MetricValues*>> pairs;
    for (const auto& m : system.metrics)
        if (const MetricValues* b = baseline.find(m.name)) pairs.emplace_back(&m, b);
    const std::size_t factor = comparisons == 0 ? std::max<std::size_t>(1, pairs.size()) : comparisons;
    system.significance.clear();
    for (const auto& [a, b] : pairs) {
        if (a->per_query.size() != b->per_query.size())
            fail(ErrorCode::InvalidArgument, "system and baseline evaluate different queries for " + a->name);
        std::vector<double> xa, xb;
        for (const auto& [qid, v] : a->per_query) {
            auto it = b->per_query.find(qid);
            if (it == b->per_query.end())
                fail(ErrorCode::InvalidArgument, "baseline has no " + a->name + " value for query " + qid);
            xa.push_back(v);
            xb.push_back(it->second);
        }
        const TTestResult t = paired_t_test(xa, xb, factor);
        system.significance.push_back({a->name, a->mean, b->mean, t.t, t.p, t.corrected_p, factor, t.degenerate});
    }
}

VariantMap read_variant_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open variant map " + path.string());
    VariantMap out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() < 2 || f[0].empty() || f[1].empty())
            fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected variant_id<TAB>query_id");
        if (!out.emplace(f[0], f[1]).second)
            fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": duplicate variant " + f[0]);
    }
    return out;
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "# unjudged passages count as non-relevant\n";
    if (!report.variant_sets.empty())
        out << "# values are averaged over " << report.variant_sets.begin()->second.size()
            << " misspelled variants per query\n";
    out << "metric\tstatistic\tvalue\n";
    for (const auto& m : report.metrics) {
        out << m.name << "\tmean\t" << format_double(m.mean) << '\n';
        out << m.name << "\tqueries\t" << m.per_query.size() << '\n';
        out << m.name << "\tskipped\t" << m.skipped.size() << '\n';
    }
    for (const auto& s : report.significance) {
        out << s.metric << "\tbaseline_mean\t" << format_double(s.baseline_mean) << '\n';
        out << s.metric << "\tdiff\t" << format_double(s.system_mean - s.baseline_mean) << '\n';
        out << s.metric << "\tt\t" << format_double(s.t) << '\n';
        out << s.metric << "\tp\t" << format_double(s.p) << '\n';
        out << s.metric << "\tp_corrected\t" << format_double(s.corrected_p) << '\n';
        out << s.metric << "\tcomparisons\t" << s.comparisons << '\n';
        out << s.metric << "\tdegenerate\t" << (s.degenerate ? 1 : 0) << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void write_per_query(const std::filesystem::path& path, const MetricReport& report) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "metric\tquery_id\tvalue\n";
    for (const auto& m : report.metrics)
        for (const auto& [qid, v] : m.per_query) out << m.name << '\t' << qid << '\t' << format_double(v) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace dst::eval
