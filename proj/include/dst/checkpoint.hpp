// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dst/encoder.hpp"
#include "dst/optimizer.hpp"

namespace dst {

/// Checkpoint file layout (all integers and doubles little-endian):
///
///   char[8]  magic "DSTCKPT1"
///   u32      version (1)
///   u64      hash_buckets V
///   u32      embed_dim d
///   u32      ngram_min, ngram_max
///   u8       tie_weights
///   u64      seed
///   u32      tower count T (1 when tied, else 2: query then passage)
///   T x { f64[V*d] embedding, f64[d*d] projection, f64[d] bias }   row-major
///   u8       has_optimizer
///   if has_optimizer:
///     u64    completed steps
///     T x { u64 active row count R,
///           R x { u64 row, f64[d] m, f64[d] v }   ascending row order
///           f64[d*d] m, f64[d*d] v   (projection)
///           f64[d] m, f64[d] v       (bias) }
///
/// Embedding rows never written by a gradient have zero moments and are not stored.
struct Checkpoint {
    encoder::DualEncoder model;
    std::uint64_t seed = 0;
    std::optional<train::OptimizerState> optimizer;  // absent for inference-only checkpoints
};

inline constexpr char kCheckpointMagic[8] = {'D', 'S', 'T', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// SHA-256 (hex, first 16 characters) of the header and parameter section;
/// optimizer state does not affect it.
std::string model_fingerprint(const encoder::DualEncoder& model, std::uint64_t seed);

}  // namespace dst
