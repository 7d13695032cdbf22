// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dst/matrix.hpp"

namespace dst::eval {

inline constexpr std::size_t kDensityGridPoints = 512;

/// Density sampled on an evenly spaced grid; trapezoidal integral is 1.
struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::size_t samples = 0;
    double sample_mean = 0.0;
    bool point_mass = false;  // all samples equal; density is a single grid spike

    bool operator==(const DensityCurve&) const = default;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian KDE of `sample` on `points` evenly spaced values over [-1, 1],
/// renormalized to unit mass on the grid. Requires >= 2 samples.
DensityCurve similarity_density(std::span<const double> sample, std::size_t points = kDensityGridPoints);

/// Cosines of row pairs (a[i], b[i]) then similarity_density.
DensityCurve similarity_density(const Matrix& a, const Matrix& b, std::size_t points = kDensityGridPoints);

/// Gaussian KDE on an arbitrary evenly spaced grid [lo, hi].
DensityCurve kernel_density(std::span<const double> sample, double lo, double hi, std::size_t points);

/// For each row, its `neighbors` highest-cosine other rows (ties by lower
/// index), as (row, neighbor) pairs in row-major order. Requires >= 2 rows.
std::vector<std::pair<std::size_t, std::size_t>> neighbor_pairs(const Matrix& queries, std::size_t neighbors = 1);

/// Trapezoidal integral of min(a, b). Throws GridMismatch.
double distribution_overlap(const DensityCurve& a, const DensityCurve& b);

/// Trapezoidal integral of the density.
double integral(const DensityCurve& curve);

}  // namespace dst::eval
