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
#include <span>
#include <vector>

#include "dst/encoder.hpp"

namespace dst::train {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;

    bool operator==(const AdamWConfig&) const = default;
};

/// Adaptive-moment state for one tower. Moments of embedding rows that have
/// never received a gradient are zero; `active` marks the others.
struct TowerMoments {
    Matrix m_embedding, v_embedding;
    Matrix m_projection, v_projection;
    std::vector<double> m_bias, v_bias;
    std::vector<std::uint8_t> active;

    static TowerMoments zeros(const encoder::EncoderConfig& config);
    bool operator==(const TowerMoments&) const = default;
};

struct OptimizerState {
    std::uint64_t step = 0;  // completed optimizer steps
    std::vector<TowerMoments> towers;

    static OptimizerState zeros(const encoder::EncoderConfig& config);
    bool operator==(const OptimizerState&) const = default;
};

/// In-place AdamW on a flat segment: p <- p * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps).
/// `t` is the 1-based step number used for bias correction.
void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                  std::span<double> v, std::uint64_t t, double lr, const AdamWConfig& config);

/// One AdamW step for a tower. Only embedding rows with nonzero moments or a
/// fresh gradient change beyond weight decay, so untouched rows are skipped
/// when weight decay is zero; the result equals the dense update.
void optimizer_step(encoder::EncoderParams& params, const encoder::EncoderGrads& grads, TowerMoments& moments,
                    std::uint64_t t, double lr, const AdamWConfig& config);

}  // namespace dst::train
