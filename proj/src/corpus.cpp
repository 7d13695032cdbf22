// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/corpus.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dst/error.hpp"
#include "dst/random.hpp"

namespace dst::corpus {

namespace {

using nlohmann::json;

std::string location(const std::filesystem::path& path, std::size_t line, std::size_t column) {
    return path.string() + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

void check_field(const std::string& s, const char* what) {
    if (s.find_first_of("\t\n\r") != std::string::npos)
        fail(ErrorCode::InvalidArgument, std::string(what) + " contains a tab or newline: " + s);
}

void throw_dangling(const std::string& what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    std::string msg = what + ":";
    const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + ids[i];
    if (ids.size() > shown) msg += " (+" + std::to_string(ids.size() - shown) + " more)";
    fail(ErrorCode::DanglingReference, msg);
}

std::unordered_set<std::string> unique_ids(const std::vector<TextRecord>& records, const char* what) {
    std::unordered_set<std::string> ids;
    for (const auto& r : records)
        if (!ids.insert(r.id).second) fail(ErrorCode::InvalidArgument, std::string("duplicate ") + what + " id " + r.id);
    return ids;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) fail(ErrorCode::ParseError, where + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

std::vector<std::string> get_strings(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) fail(ErrorCode::ParseError, where + ": missing array field '" + key + "'");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) fail(ErrorCode::ParseError, where + ": non-string entry in '" + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / kPassagesFile, dir / kQueriesFile, dir / kQrelsFile, dir / kTrainFile};
}

std::vector<TextRecord> read_tsv_records(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<TextRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            fail(ErrorCode::ParseError, location(path, line_no, line.size() + 1) + ": expected id<TAB>text");
        if (tab == 0) fail(ErrorCode::ParseError, location(path, line_no, 1) + ": empty id");
        std::string text = line.substr(tab + 1);
        if (text.find('\t') != std::string::npos)
            fail(ErrorCode::ParseError, location(path, line_no, tab + 2 + text.find('\t')) + ": extra column");
        if (text.empty()) fail(ErrorCode::ParseError, location(path, line_no, tab + 2) + ": empty text");
        out.push_back({line.substr(0, tab), std::move(text)});
    }
    return out;
}

void write_tsv_records(const std::filesystem::path& path, const std::vector<TextRecord>& records) {
    auto out = open_output(path);
    for (const auto& r : records) {
        check_field(r.id, "id");
        check_field(r.text, "text");
        out << r.id << '\t' << r.text << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<train::TrainingSample> read_training_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<train::TrainingSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::ParseError, location(path, line_no, e.byte) + ": invalid JSON");
        }
        const std::string where = location(path, line_no, 1);
        if (!obj.is_object()) fail(ErrorCode::ParseError, where + ": expected a JSON object");
        train::TrainingSample s;
        s.query = {get_string(obj, "query_id", where), get_string(obj, "query", where)};
        s.positive = {get_string(obj, "positive_id", where), get_string(obj, "positive", where)};
        auto ids = get_strings(obj, "negative_ids", where);
        auto texts = get_strings(obj, "negatives", where);
        if (ids.size() != texts.size())
            fail(ErrorCode::ParseError, where + ": negative_ids and negatives differ in length");
        for (std::size_t i = 0; i < ids.size(); ++i) s.hard_negatives.push_back({ids[i], texts[i]});
        out.push_back(std::move(s));
    }
    return out;
}

void write_training_jsonl(const std::filesystem::path& path, const std::vector<train::TrainingSample>& samples) {
    auto out = open_output(path);
    for (const auto& s : samples) {
        json obj;
        obj["query_id"] = s.query.id;
        obj["query"] = s.query.text;
        obj["positive_id"] = s.positive.id;
        obj["positive"] = s.positive.text;
        json ids = json::array(), texts = json::array();
        for (const auto& n : s.hard_negatives) {
            ids.push_back(n.id);
            texts.push_back(n.text);
        }
        obj["negative_ids"] = std::move(ids);
        obj["negatives"] = std::move(texts);
        out << obj.dump() << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void validate_corpus(const CorpusBundle& bundle) {
    const auto passage_ids = unique_ids(bundle.passages, "passage");
    const auto query_ids = unique_ids(bundle.queries, "query");

    std::vector<std::string> dangling;
    for (const auto& [qid, judged] : bundle.qrels.judgments) {
        if (!query_ids.empty() && query_ids.count(qid) == 0) dangling.push_back("query:" + qid);
        for (const auto& [pid, grade] : judged)
            if (passage_ids.count(pid) == 0) dangling.push_back("passage:" + pid);
    }
    throw_dangling("qrels reference unknown ids", dangling);

    std::unordered_set<std::string> train_ids;
    for (const auto& s : bundle.training) {
        if (!train_ids.insert(s.query.id).second)
            fail(ErrorCode::InvalidArgument, "duplicate training query id " + s.query.id);
        if (passage_ids.count(s.positive.id) == 0) dangling.push_back("passage:" + s.positive.id);
        for (const auto& n : s.hard_negatives)
            if (passage_ids.count(n.id) == 0) dangling.push_back("passage:" + n.id);
    }
    throw_dangling("training samples reference unknown ids", dangling);
}

CorpusBundle load_corpus(const CorpusPaths& paths) {
    CorpusBundle b;
    b.passages = read_tsv_records(paths.passages);
    if (paths.queries) b.queries = read_tsv_records(*paths.queries);
    if (paths.qrels) b.qrels = read_qrels(*paths.qrels);
    if (paths.training) b.training = read_training_jsonl(*paths.training);
    validate_corpus(b);
    return b;
}

void write_corpus(const std::filesystem::path& dir, const CorpusBundle& bundle) {
    validate_corpus(bundle);
    std::filesystem::create_directories(dir);
    write_tsv_records(dir / kPassagesFile, bundle.passages);
    write_tsv_records(dir / kQueriesFile, bundle.queries);
    write_qrels(dir / kQrelsFile, bundle.qrels);
    write_training_jsonl(dir / kTrainFile, bundle.training);
}

namespace {

struct Relation {
    const char* passage;
    std::array<const char*, 3> queries;
};

// {a}, {b}, {c} are entity slots; queries name {a} and {b}.
constexpr std::array<Relation, 10> kRelations = {{
    {"{a} is the capital city of the {b} province and lies on the banks of the {c} river",
     {"is {a} the capital city of {b}", "{a} capital {b} province", "which river flows through {a} in {b}"}},
    {"the company {a} was founded by {b} after years of work in the town of {c}",
     {"who founded the company {a} with {b}", "{b} founder of company {a}", "when did {b} start {a}"}},
    {"the {a} engine was invented by {b} and first demonstrated at the {c} exhibition",
     {"who invented the {a} engine {b}", "{a} engine inventor {b}", "did {b} build the first {a} machine"}},
    {"the novel {a} was written by {b} and tells the story of a sailor named {c}",
     {"who wrote the novel {a} {b}", "{a} book author {b}", "is {b} the writer of {a}"}},
    {"the {a} river rises in the {b} mountains and flows south into the lake of {c}",
     {"where does the {a} river start {b}", "{a} river source {b} mountains", "does the {a} flow from {b}"}},
    {"{a} is a traditional dish from {b} made with rice beans and the herb {c}",
     {"how to cook {a} from {b}", "{a} recipe {b} food", "is {a} a traditional dish of {b}"}},
    {"the {a} football club plays home games in {b} and its current captain is {c}",
     {"where does {a} football club play {b}", "{a} club stadium {b}", "is {b} the home of the {a} team"}},
    {"the {a} is a small bird found in the forests of {b} that feeds on {c} seeds",
     {"where does the {a} bird live {b}", "{a} bird habitat {b} forest", "can you see the {a} in {b}"}},
    {"mount {a} is the highest peak in the {b} range and was first climbed by {c}",
     {"how high is mount {a} in {b}", "{a} peak {b} range height", "is {a} the tallest mountain of {b}"}},
    {"the {a} festival is held every spring in {b} to honor the goddess {c}",
     {"when is the {a} festival in {b}", "{a} festival {b} celebration date", "why do people in {b} celebrate {a}"}},
}};

std::string fill(std::string_view tmpl, const std::array<std::string, 3>& slots) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
            out += slots[static_cast<std::size_t>(tmpl[i + 1] - 'a')];
            i += 2;
        } else {
            out += tmpl[i];
        }
    }
    return out;
}

std::set<std::string> template_vocabulary() {
    std::set<std::string> words;
    for (const auto& r : kRelations) {
        for (auto& w : split_words(r.passage)) words.insert(w);
        for (const char* q : r.queries)
            for (auto& w : split_words(q)) words.insert(w);
    }
    return words;
}

std::vector<std::string> make_entities(std::size_t count, Rng& rng) {
    static constexpr std::string_view kOnsets = "bdfghklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    static constexpr std::string_view kCodas = "lnrs";
    const auto reserved = template_vocabulary();
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < count) {
        const std::size_t syllables = 2 + rng.uniform_index(2);
        std::string name;
        for (std::size_t s = 0; s < syllables; ++s) {
            name += kOnsets[rng.uniform_index(kOnsets.size())];
            name += kVowels[rng.uniform_index(kVowels.size())];
            if (rng.uniform_index(4) == 0) name += kCodas[rng.uniform_index(kCodas.size())];
        }
        if (reserved.count(name) != 0 || !seen.insert(name).second) continue;
        out.push_back(std::move(name));
    }
    return out;
}

std::string numbered(char prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%05zu", prefix, n);
    return buf;
}

}  // namespace

CorpusBundle generate_synthetic_corpus(const SyntheticParams& params) {
    if (params.passages < 100) fail(ErrorCode::ParameterTooSmall, "synthetic corpus needs at least 100 passages");
    if (params.train_queries + params.eval_queries < 50)
        fail(ErrorCode::ParameterTooSmall, "synthetic corpus needs at least 50 queries");
    if (params.train_queries < 2 || params.eval_queries < 1)
        fail(ErrorCode::ParameterTooSmall, "synthetic corpus needs >= 2 training and >= 1 evaluation queries");
    if (params.train_queries + params.eval_queries > params.passages)
        fail(ErrorCode::ParameterTooSmall, "each query needs its own passage; raise the passage count");
    if (params.passages_per_entity == 0) fail(ErrorCode::InvalidArgument, "passages_per_entity must be >= 1");

    Rng rng(derive_seed(params.seed, "synthetic-corpus"));
    // Each fact takes three distinct entity pairs; keep the pair space at
    // least six times larger so the rejection sampler terminates quickly.
    std::size_t entity_count = std::max<std::size_t>(12, params.passages / params.passages_per_entity);
    while (entity_count * (entity_count - 1) / 2 < 6 * params.passages) ++entity_count;
    const auto entities = make_entities(entity_count, rng);

    struct Fact {
        std::size_t relation;
        std::array<std::string, 3> slots;
    };
    std::vector<Fact> facts;
    std::set<std::pair<std::size_t, std::size_t>> used_pairs;
    auto pair_of = [](std::size_t x, std::size_t y) { return std::make_pair(std::min(x, y), std::max(x, y)); };
    const std::size_t max_attempts = params.passages * 1000;
    std::size_t attempts = 0;
    while (facts.size() < params.passages) {
        if (++attempts > max_attempts)
            fail(ErrorCode::ParameterTooSmall, "entity pool too small for unique entity pairs");
        const std::size_t a = rng.uniform_index(entity_count);
        const std::size_t b = rng.uniform_index(entity_count);
        const std::size_t c = rng.uniform_index(entity_count);
        if (a == b || a == c || b == c) continue;
        if (used_pairs.count(pair_of(a, b)) || used_pairs.count(pair_of(a, c)) || used_pairs.count(pair_of(b, c)))
            continue;
        used_pairs.insert(pair_of(a, b));
        used_pairs.insert(pair_of(a, c));
        used_pairs.insert(pair_of(b, c));
        facts.push_back({facts.size() % kRelations.size(), {entities[a], entities[b], entities[c]}});
    }

    CorpusBundle bundle;
    std::vector<std::vector<std::size_t>> by_relation(kRelations.size());
    for (std::size_t i = 0; i < facts.size(); ++i) {
        bundle.passages.push_back({numbered('p', i), fill(kRelations[facts[i].relation].passage, facts[i].slots)});
        by_relation[facts[i].relation].push_back(i);
    }

    std::vector<std::size_t> order(facts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    auto query_for = [&](std::size_t passage) {
        const auto& rel = kRelations[facts[passage].relation];
        return fill(rel.queries[rng.uniform_index(rel.queries.size())], facts[passage].slots);
    };

    // Hard negatives come only from other training positives, so "was a
    // training positive" never separates a positive from its negatives.
    std::vector<char> train_positive(facts.size(), 0);
    for (std::size_t t = 0; t < params.train_queries; ++t) train_positive[order[t]] = 1;

    for (std::size_t t = 0; t < params.train_queries; ++t) {
        const std::size_t p = order[t];
        train::TrainingSample s;
        s.query = {numbered('t', t), query_for(p)};
        s.positive = bundle.passages[p];
        // Same-relation passages naming one of the positive's entities come first.
        std::vector<std::size_t> sharing, rest;
        for (std::size_t other : by_relation[facts[p].relation]) {
            if (other == p || !train_positive[other]) continue;
            bool shared = false;
            for (const auto& e : facts[other].slots)
                for (const auto& mine : facts[p].slots) shared = shared || e == mine;
            (shared ? sharing : rest).push_back(other);
        }
        rng.shuffle(sharing);
        rng.shuffle(rest);
        sharing.insert(sharing.end(), rest.begin(), rest.end());
        for (std::size_t n = 0; n < std::min(params.hard_negatives, sharing.size()); ++n)
            s.hard_negatives.push_back(bundle.passages[sharing[n]]);
        bundle.training.push_back(std::move(s));
    }
    for (std::size_t e = 0; e < params.eval_queries; ++e) {
        const std::size_t p = order[params.train_queries + e];
        const std::string qid = numbered('q', e);
        bundle.queries.push_back({qid, query_for(p)});
        bundle.qrels.judgments[qid][bundle.passages[p].id] = 1;
    }
    return bundle;
}

}  // namespace dst::corpus
