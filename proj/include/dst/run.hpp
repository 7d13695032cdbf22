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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dst {

struct ScoredPassage {
    std::string passage_id;
    double score = 0.0;

    bool operator==(const ScoredPassage&) const = default;
};

/// Descending score, ties by ascending passage id.
inline bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
}

/// Ranked output for a set of queries.
struct RankedRun {
    std::string tag = "dst";
    std::map<std::string, std::vector<ScoredPassage>> rankings;

    bool operator==(const RankedRun&) const = default;
};

/// TREC run format: `qid Q0 pid rank score tag`, ranks starting at 1.
void write_trec_run(std::ostream& out, const RankedRun& run);
void write_trec_run(const std::filesystem::path& path, const RankedRun& run);
RankedRun read_trec_run(const std::filesystem::path& path);

/// Relevance judgments; unjudged passages count as non-relevant.
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;

    int grade(const std::string& query_id, const std::string& passage_id) const;
    bool has_query(const std::string& query_id) const { return judgments.count(query_id) != 0; }
    std::size_t relevant_count(const std::string& query_id) const;

    bool operator==(const Qrels&) const = default;
};

/// TREC qrels format: `qid 0 pid grade`. Throws ParseError on malformed lines
/// or negative grades.
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

}  // namespace dst
