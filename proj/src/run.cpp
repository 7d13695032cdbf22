// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/run.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

}  // namespace

void write_trec_run(std::ostream& out, const RankedRun& run) {
    char score[64];
    for (const auto& [qid, list] : run.rankings) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::snprintf(score, sizeof(score), "%.17g", list[i].score);
            out << qid << " Q0 " << list[i].passage_id << ' ' << (i + 1) << ' ' << score << ' ' << run.tag << '\n';
        }
    }
}

void write_trec_run(const std::filesystem::path& path, const RankedRun& run) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    write_trec_run(out, run);
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

RankedRun read_trec_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open run " + path.string());
    RankedRun run;
    std::string line;
    std::size_t line_no = 0;
    bool tagged = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto f = split_words(line);
        if (f.empty()) continue;
        if (f.size() != 6) fail(ErrorCode::ParseError, where(path, line_no) + ": expected 6 columns");
        double score = 0.0;
        std::size_t rank = 0;
        try {
            score = std::stod(f[4]);
            rank = std::stoul(f[3]);
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, where(path, line_no) + ": bad rank or score");
        }
        auto& list = run.rankings[f[0]];
        if (rank != list.size() + 1)
            fail(ErrorCode::ParseError, where(path, line_no) + ": ranks must be consecutive from 1");
        list.push_back({f[2], score});
        if (!tagged) {
            run.tag = f[5];
            tagged = true;
        }
    }
    return run;
}

int Qrels::grade(const std::string& query_id, const std::string& passage_id) const {
    auto q = judgments.find(query_id);
    if (q == judgments.end()) return 0;
    auto p = q->second.find(passage_id);
    return p == q->second.end() ? 0 : p->second;
}

std::size_t Qrels::relevant_count(const std::string& query_id) const {
    auto q = judgments.find(query_id);
    if (q == judgments.end()) return 0;
    std::size_t n = 0;
    for (const auto& [pid, g] : q->second) n += g > 0 ? 1 : 0;
    return n;
}

Qrels read_qrels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open qrels " + path.string());
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto f = split_words(line);
        if (f.empty()) continue;
        if (f.size() != 4) fail(ErrorCode::ParseError, where(path, line_no) + ": expected 'qid 0 pid grade'");
        int grade = 0;
        try {
            std::size_t used = 0;
            grade = std::stoi(f[3], &used);
            if (used != f[3].size()) throw std::invalid_argument("grade");
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, where(path, line_no) + ": grade is not an integer");
        }
        if (grade < 0) fail(ErrorCode::ParseError, where(path, line_no) + ": negative grade");
        qrels.judgments[f[0]][f[2]] = grade;
    }
    return qrels;
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& [qid, judged] : qrels.judgments)
        for (const auto& [pid, grade] : judged) out << qid << " 0 " << pid << ' ' << grade << '\n';
}

}  // namespace dst
