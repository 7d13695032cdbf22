// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/dense_index.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_set>

#include "dst/binary_io.hpp"
#include "dst/error.hpp"
#include "dst/parallel.hpp"

namespace dst::index {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'T', 'I', 'D', 'X', '0', '1'};
constexpr std::uint32_t kVersion = 1;

struct Hit {
    double score;
    std::size_t row;
};

class TopK {
 public:
    TopK(const PassageIndex& index, std::size_t k) : index_(&index), k_(k) { heap_.reserve(k + 1); }

    // Heap top is the worst retained hit.
    bool better(const Hit& a, const Hit& b) const {
        if (a.score != b.score) return a.score > b.score;
        return index_->ids[a.row] < index_->ids[b.row];
    }

    void offer(const Hit& h) {
        auto cmp = [this](const Hit& a, const Hit& b) { return better(a, b); };
        if (heap_.size() < k_) {
            heap_.push_back(h);
            std::push_heap(heap_.begin(), heap_.end(), cmp);
        } else if (better(h, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), cmp);
            heap_.back() = h;
            std::push_heap(heap_.begin(), heap_.end(), cmp);
        }
    }

    std::vector<Hit> sorted() && {
        std::sort(heap_.begin(), heap_.end(), [this](const Hit& a, const Hit& b) { return better(a, b); });
        return std::move(heap_);
    }

 private:
    const PassageIndex* index_;
    std::size_t k_;
    std::vector<Hit> heap_;
};

}  // namespace

PassageIndex build_index(const std::vector<TextRecord>& passages, const Checkpoint& ckpt, std::size_t threads) {
    if (passages.empty()) fail(ErrorCode::EmptyCorpus, "no passages to index");
    std::vector<std::string> texts, ids;
    texts.reserve(passages.size());
    ids.reserve(passages.size());
    for (const auto& p : passages) {
        texts.push_back(p.text);
        ids.push_back(p.id);
    }
    Matrix rows = encoder::encode_texts(texts, ckpt.model.passage_params(), ckpt.model.config, threads);
    return index_from_matrix(std::move(rows), std::move(ids), model_fingerprint(ckpt.model, ckpt.seed));
}

PassageIndex index_from_matrix(Matrix rows, std::vector<std::string> ids, std::string fingerprint) {
    if (ids.empty()) fail(ErrorCode::EmptyCorpus, "no passages to index");
    if (rows.rows() != ids.size()) fail(ErrorCode::InvalidArgument, "row count does not match id count");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) fail(ErrorCode::InvalidArgument, "duplicate passage id " + id);
    return PassageIndex{std::move(rows), std::move(ids), std::move(fingerprint)};
}

std::vector<ScoredPassage> search_one(const PassageIndex& index, std::span<const double> query,
                                      const SearchOptions& options) {
    if (options.k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
    if (query.size() != index.dim())
        fail(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.size()) + " vs index " +
                                               std::to_string(index.dim()));
    const std::size_t k = std::min(options.k, index.size());
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk_rows);
    TopK merged(index, k);
    for (std::size_t begin = 0; begin < index.size(); begin += chunk) {
        const std::size_t end = std::min(index.size(), begin + chunk);
        TopK local(index, k);
        for (std::size_t r = begin; r < end; ++r) local.offer({dot(query, index.matrix.row(r)), r});
        for (const Hit& h : std::move(local).sorted()) merged.offer(h);
    }
    std::vector<ScoredPassage> out;
    out.reserve(k);
    for (const Hit& h : std::move(merged).sorted()) out.push_back({index.ids[h.row], h.score});
    return out;
}

RankedRun search(const PassageIndex& index, const Matrix& queries, const std::vector<std::string>& query_ids,
                 const SearchOptions& options, std::string tag) {
    if (queries.rows() != query_ids.size()) fail(ErrorCode::InvalidArgument, "query id count mismatch");
    if (queries.rows() > 0 && queries.cols() != index.dim())
        fail(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(queries.cols()) + " vs index " +
                                               std::to_string(index.dim()));
    std::vector<std::vector<ScoredPassage>> lists(queries.rows());
    parallel_chunks(queries.rows(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) lists[i] = search_one(index, queries.row(i), options);
    });
    RankedRun run;
    run.tag = std::move(tag);
    for (std::size_t i = 0; i < lists.size(); ++i) run.rankings[query_ids[i]] = std::move(lists[i]);
    return run;
}

void save_index(const std::filesystem::path& path, const PassageIndex& index) {
    ByteWriter w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u64(index.size());
    w.u32(static_cast<std::uint32_t>(index.dim()));
    w.str(index.fingerprint);
    for (const auto& id : index.ids) w.str(id);
    w.f64s(index.matrix.values());
    write_file_bytes(path, w.data());
}

PassageIndex load_index(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    ByteReader r(bytes);
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) fail(ErrorCode::ParseError, "not an index file");
    if (r.u32() != kVersion) fail(ErrorCode::ParseError, "unsupported index version");
    const std::uint64_t rows = r.u64();
    const std::uint32_t dim = r.u32();
    PassageIndex index;
    index.fingerprint = r.str();
    index.ids.reserve(rows);
    for (std::uint64_t i = 0; i < rows; ++i) index.ids.push_back(r.str());
    index.matrix = Matrix(rows, dim);
    r.f64s(index.matrix.values());
    if (r.remaining() != 0) fail(ErrorCode::ParseError, "trailing bytes in index file");
    return index;
}

}  // namespace dst::index
