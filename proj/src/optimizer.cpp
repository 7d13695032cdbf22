// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/optimizer.hpp"

#include <cmath>

#include "dst/error.hpp"

namespace dst::train {

TowerMoments TowerMoments::zeros(const encoder::EncoderConfig& config) {
    TowerMoments t;
    t.m_embedding = Matrix(config.hash_buckets, config.embed_dim);
    t.v_embedding = Matrix(config.hash_buckets, config.embed_dim);
    t.m_projection = Matrix(config.embed_dim, config.embed_dim);
    t.v_projection = Matrix(config.embed_dim, config.embed_dim);
    t.m_bias.assign(config.embed_dim, 0.0);
    t.v_bias.assign(config.embed_dim, 0.0);
    t.active.assign(config.hash_buckets, 0);
    return t;
}

OptimizerState OptimizerState::zeros(const encoder::EncoderConfig& config) {
    OptimizerState s;
    s.towers.push_back(TowerMoments::zeros(config));
    if (!config.tie_weights) s.towers.push_back(TowerMoments::zeros(config));
    return s;
}

void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                  std::span<double> v, std::uint64_t t, double lr, const AdamWConfig& config) {
    if (t == 0) fail(ErrorCode::StepOutOfRange, "AdamW step numbers start at 1");
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    const double decay = 1.0 - lr * config.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads.empty() ? 0.0 : grads[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        params[i] *= decay;
        params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.epsilon);
    }
}

void optimizer_step(encoder::EncoderParams& params, const encoder::EncoderGrads& grads, TowerMoments& moments,
                    std::uint64_t t, double lr, const AdamWConfig& config) {
    for (std::uint32_t r : grads.touched_rows()) moments.active[r] = 1;
    const double decay = 1.0 - lr * config.weight_decay;
    const std::size_t rows = params.embedding.rows();
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = static_cast<std::uint32_t>(r);
        if (moments.active[r]) {
            std::span<const double> g;
            if (grads.touched(row)) g = grads.embedding.row(r);
            adamw_update(params.embedding.row(r), g, moments.m_embedding.row(r), moments.v_embedding.row(r), t,
                         lr, config);
        } else if (config.weight_decay != 0.0) {
            // zero moments: the adaptive term is exactly zero
            for (double& p : params.embedding.row(r)) p *= decay;
        }
    }
    adamw_update(params.projection.values(), grads.projection.values(), moments.m_projection.values(),
                 moments.v_projection.values(), t, lr, config);
    adamw_update(params.bias, grads.bias, moments.m_bias, moments.v_bias, t, lr, config);
}

}  // namespace dst::train
