// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dst/density.hpp"
#include "test_util.hpp"

using namespace dst;
using namespace dst::eval;

namespace {

const std::vector<double> kSample = {0.12, 0.35, 0.4, 0.41, 0.58, 0.77, 0.8, -0.2};

DensityCurve gaussian_curve(double mean, double sd) {
    DensityCurve c = similarity_density(kSample);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const double u = (c.grid[i] - mean) / sd;
        c.density[i] = std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    return c;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("kernel density matches the scripted estimate") {
    // tests/oracles/density_oracle.py
    const auto c = similarity_density(kSample);
    CHECK(std::abs(c.bandwidth - 0.1484446399619506) < 1e-14);
    REQUIRE(c.grid.size() == 512);
    CHECK(c.grid.front() == -1.0);
    CHECK(c.grid.back() == 1.0);
    const std::vector<std::pair<std::size_t, double>> golden = {{0, 1.6898289904049302e-07},
                                                                {128, 0.04508479074176077},
                                                                {300, 0.7173780755716945},
                                                                {384, 1.1778597665135888},
                                                                {511, 0.24778285032589592}};
    for (const auto& [i, v] : golden) CHECK(std::abs(c.density[i] - v) < 1e-12 * std::max(1.0, v));
    CHECK(c.samples == 8);
    CHECK(c.sample_mean == doctest::Approx(0.40375).epsilon(1e-14));
}

TEST_CASE("densities integrate to one") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(2 + rng.uniform_index(200));
        for (auto& x : s) x = rng.uniform(-1, 1) * rng.uniform01();
        const auto c = similarity_density(s);
        CHECK(std::abs(integral(c) - 1.0) < 1e-12);
        for (double d : c.density) CHECK(d >= 0.0);
    }
}

TEST_CASE("overlap of shifted Gaussians") {
    const auto a = gaussian_curve(-0.1, 0.1), b = gaussian_curve(0.1, 0.1);
    // erfc(1 / sqrt 2): two unit Gaussians two sd apart
    CHECK(std::abs(distribution_overlap(a, b) - 0.31731050786291415) < 2e-4);
    CHECK(std::abs(distribution_overlap(a, a) - integral(a)) < 1e-15);
    const auto c = similarity_density(kSample, 100);
    CHECK(testing::throws_code([&] { distribution_overlap(a, c); }, ErrorCode::GridMismatch));
}

TEST_CASE("identical samples give a point mass") {
    const std::vector<double> s = {0.5, 0.5, 0.5};
    const auto c = similarity_density(s);
    CHECK(c.point_mass);
    CHECK(std::abs(integral(c) - 1.0) < 1e-12);
    const auto peak = std::max_element(c.density.begin(), c.density.end()) - c.density.begin();
    CHECK(std::abs(c.grid[static_cast<std::size_t>(peak)] - 0.5) < 2.0 / 511);
    const std::vector<double> edge = {1.0, 1.0};
    CHECK(std::abs(integral(similarity_density(edge)) - 1.0) < 1e-12);
}

TEST_CASE("cosine") {
    const std::vector<double> a = {1, 0}, b = {0, 2}, c = {-3, 0}, z = {0, 0};
    CHECK(cosine(a, b) == 0.0);
    CHECK(cosine(a, c) == -1.0);
    CHECK(cosine(a, a) == 1.0);
    CHECK(cosine(a, z) == 0.0);
}

TEST_CASE("paired cosine densities") {
    Rng rng(7);
    const Matrix a = testing::random_matrix(30, 5, rng);
    const auto same = similarity_density(a, a);
    CHECK(same.sample_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(testing::throws_code([&] { similarity_density(a, Matrix(29, 5)); }, ErrorCode::InvalidArgument));
    CHECK(testing::throws_code([&] { similarity_density(a, Matrix(30, 4)); }, ErrorCode::DimensionMismatch));
    const std::vector<double> single = {0.3};
    CHECK(testing::throws_code([&] { similarity_density(single); }, ErrorCode::InvalidArgument));
}

TEST_CASE("nearest-neighbor pairs agree with an exhaustive search") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(30), k = 1 + rng.uniform_index(4);
        Matrix q(n, 3);
        for (double& x : q.values()) x = static_cast<double>(static_cast<int>(rng.uniform_index(3)) - 1);
        std::vector<std::pair<std::size_t, std::size_t>> expected;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back(j);
            auto sim = [&](std::size_t j) { return cosine(q.row(i), q.row(j)); };
            std::stable_sort(others.begin(), others.end(), [&](std::size_t x, std::size_t y) { return sim(x) > sim(y); });
            for (std::size_t t = 0; t < std::min(k, n - 1); ++t) expected.emplace_back(i, others[t]);
        }
        auto got = neighbor_pairs(q, k);
        // tie-breaking by lower index makes both orders identical, but
        // cosine clamps while the search does not; compare similarity values
        REQUIRE(got.size() == expected.size());
        for (std::size_t p = 0; p < got.size(); ++p) {
            CHECK(got[p].first == expected[p].first);
            CHECK(std::abs(cosine(q.row(got[p].first), q.row(got[p].second)) -
                           cosine(q.row(expected[p].first), q.row(expected[p].second))) < 1e-12);
        }
    }
    CHECK(testing::throws_code([] { neighbor_pairs(Matrix(1, 2)); }, ErrorCode::InvalidArgument));
}

}  // TEST_SUITE
