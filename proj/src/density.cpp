// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dst/error.hpp"

namespace dst::eval {

namespace {

double quantile(std::vector<double> sorted_sample, double q) {
    const double pos = q * static_cast<double>(sorted_sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_sample.size() - 1);
    return sorted_sample[lo] + (pos - static_cast<double>(lo)) * (sorted_sample[hi] - sorted_sample[lo]);
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double silverman_bandwidth(std::span<const double> sample) {
    const auto n = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double x : sample) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : sample) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(n, -0.2);
}

DensityCurve kernel_density(std::span<const double> sample, double lo, double hi, std::size_t points) {
    if (sample.size() < 2) fail(ErrorCode::InvalidArgument, "density estimation needs at least 2 samples");
    if (points < 2 || !(hi > lo)) fail(ErrorCode::InvalidArgument, "density grid needs >= 2 points on a proper range");
    DensityCurve c;
    c.grid = linspace(lo, hi, points);
    c.density.assign(points, 0.0);
    c.samples = sample.size();
    for (double x : sample) c.sample_mean += x;
    c.sample_mean /= static_cast<double>(sample.size());
    c.bandwidth = silverman_bandwidth(sample);

    if (c.bandwidth == 0.0) {
        c.point_mass = true;
        const double step = c.grid[1] - c.grid[0];
        const double pos = std::clamp((sample[0] - lo) / step, 0.0, static_cast<double>(points - 1));
        const auto i = static_cast<std::size_t>(std::lround(pos));
        c.density[i] = (i == 0 || i + 1 == points) ? 2.0 / step : 1.0 / step;
        return c;
    }

    const double norm = 1.0 / (static_cast<double>(sample.size()) * c.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < points; ++g) {
        double s = 0.0;
        for (double x : sample) {
            const double u = (c.grid[g] - x) / c.bandwidth;
            s += std::exp(-0.5 * u * u);
        }
        c.density[g] = s * norm;
    }
    const double mass = trapezoid(c.grid, c.density);
    if (mass > 0.0)
        for (double& d : c.density) d /= mass;
    return c;
}

DensityCurve similarity_density(std::span<const double> sample, std::size_t points) {
    return kernel_density(sample, -1.0, 1.0, points);
}

DensityCurve similarity_density(const Matrix& a, const Matrix& b, std::size_t points) {
    if (a.rows() != b.rows()) fail(ErrorCode::InvalidArgument, "pair matrices differ in row count");
    if (a.cols() != b.cols()) fail(ErrorCode::DimensionMismatch, "pair matrices differ in dimension");
    std::vector<double> sims(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) sims[i] = cosine(a.row(i), b.row(i));
    return similarity_density(sims, points);
}

std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(const Matrix& queries, std::size_t neighbors) {
    const std::size_t n = queries.rows();
    if (n < 2) fail(ErrorCode::InvalidArgument, "neighbor search needs at least 2 queries");
    if (neighbors == 0) fail(ErrorCode::InvalidArgument, "neighbor count must be >= 1");
    const std::size_t take = std::min(neighbors, n - 1);

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(dot(queries.row(i), queries.row(i)));

    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(n * take);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < n; ++i) {
        scored.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double denom = norms[i] * norms[j];
            scored.emplace_back(denom == 0.0 ? 0.0 : dot(queries.row(i), queries.row(j)) / denom, j);
        }
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                          [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
        for (std::size_t t = 0; t < take; ++t) out.emplace_back(i, scored[t].second);
    }
    return out;
}

double distribution_overlap(const DensityCurve& a, const DensityCurve& b) {
    if (a.grid != b.grid) fail(ErrorCode::GridMismatch, "density curves use different grids");
    std::vector<double> lower(a.grid.size());
    for (std::size_t i = 0; i < lower.size(); ++i) lower[i] = std::min(a.density[i], b.density[i]);
    return trapezoid(a.grid, lower);
}

double integral(const DensityCurve& curve) { return trapezoid(curve.grid, curve.density); }

}  // namespace dst::eval
