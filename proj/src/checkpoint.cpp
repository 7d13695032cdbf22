// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "dst/binary_io.hpp"
#include "dst/error.hpp"

namespace dst {

namespace {

void write_model(ByteWriter& w, const encoder::DualEncoder& model, std::uint64_t seed) {
    const auto& c = model.config;
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.u32(kCheckpointVersion);
    w.u64(c.hash_buckets);
    w.u32(static_cast<std::uint32_t>(c.embed_dim));
    w.u32(static_cast<std::uint32_t>(c.ngram_min));
    w.u32(static_cast<std::uint32_t>(c.ngram_max));
    w.u8(c.tie_weights ? 1 : 0);
    w.u64(seed);
    const std::uint32_t towers = model.passage ? 2 : 1;
    w.u32(towers);
    for (const encoder::EncoderParams* p : {&model.query, model.passage ? &*model.passage : nullptr}) {
        if (!p) continue;
        w.f64s(p->embedding.values());
        w.f64s(p->projection.values());
        w.f64s(p->bias);
    }
}

void read_params(ByteReader& r, encoder::EncoderParams& p) {
    r.f64s(p.embedding.values());
    r.f64s(p.projection.values());
    r.f64s(p.bias);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    ByteWriter w;
    write_model(w, ckpt.model, ckpt.seed);
    w.u8(ckpt.optimizer ? 1 : 0);
    if (ckpt.optimizer) {
        const auto& st = *ckpt.optimizer;
        if (st.towers.size() != (ckpt.model.passage ? 2u : 1u))
            fail(ErrorCode::InvalidConfig, "optimizer tower count does not match the model");
        w.u64(st.step);
        for (const auto& t : st.towers) {
            std::uint64_t active = 0;
            for (std::size_t r = 0; r < t.active.size(); ++r) active += t.active[r] ? 1 : 0;
            w.u64(active);
            for (std::size_t r = 0; r < t.active.size(); ++r) {
                if (!t.active[r]) continue;
                w.u64(r);
                w.f64s(t.m_embedding.row(r));
                w.f64s(t.v_embedding.row(r));
            }
            w.f64s(t.m_projection.values());
            w.f64s(t.v_projection.values());
            w.f64s(t.m_bias);
            w.f64s(t.v_bias);
        }
    }
    return w.release();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        fail(ErrorCode::ParseError, "not a checkpoint file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        fail(ErrorCode::ParseError, "unsupported checkpoint version " + std::to_string(version));
    Checkpoint ckpt;
    auto& c = ckpt.model.config;
    c.hash_buckets = r.u64();
    c.embed_dim = r.u32();
    c.ngram_min = r.u32();
    c.ngram_max = r.u32();
    c.tie_weights = r.u8() != 0;
    ckpt.seed = r.u64();
    c.validate();
    const std::uint32_t towers = r.u32();
    if (towers != (c.tie_weights ? 1u : 2u))
        fail(ErrorCode::ParseError, "tower count " + std::to_string(towers) + " inconsistent with tie flag");
    ckpt.model.query = encoder::EncoderParams::zeros(c);
    read_params(r, ckpt.model.query);
    if (towers == 2) {
        ckpt.model.passage = encoder::EncoderParams::zeros(c);
        read_params(r, *ckpt.model.passage);
    }
    if (r.u8()) {
        train::OptimizerState st = train::OptimizerState::zeros(c);
        st.step = r.u64();
        for (auto& t : st.towers) {
            const std::uint64_t active = r.u64();
            std::uint64_t previous = 0;
            for (std::uint64_t i = 0; i < active; ++i) {
                const std::uint64_t row = r.u64();
                if (row >= c.hash_buckets || (i > 0 && row <= previous))
                    fail(ErrorCode::ParseError, "moment rows must be ascending and in range");
                previous = row;
                t.active[row] = 1;
                r.f64s(t.m_embedding.row(row));
                r.f64s(t.v_embedding.row(row));
            }
            r.f64s(t.m_projection.values());
            r.f64s(t.v_projection.values());
            r.f64s(t.m_bias);
            r.f64s(t.v_bias);
        }
        ckpt.optimizer = std::move(st);
    }
    if (r.remaining() != 0) fail(ErrorCode::ParseError, "trailing bytes after checkpoint");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_bytes(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(read_file_bytes(path));
}

std::string model_fingerprint(const encoder::DualEncoder& model, std::uint64_t seed) {
    ByteWriter w;
    write_model(w, model, seed);
    return sha256_hex(w.data()).substr(0, 16);
}

}  // namespace dst
