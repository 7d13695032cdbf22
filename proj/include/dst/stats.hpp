// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <cstddef>
#include <span>

namespace dst::eval {

struct TTestResult {
    double t = 0.0;
    double p = 1.0;            // two-tailed, n - 1 degrees of freedom
    double corrected_p = 1.0;  // min(1, p * comparisons)
    double mean_diff = 0.0;    // mean of a - b
    std::size_t n = 0;
    bool degenerate = false;   // zero-variance differences with nonzero mean: t = +-inf, p = 0
};

/// min(1, p * comparisons). Throws InvalidArgument for comparisons == 0.
double bonferroni(double p, std::size_t comparisons);

/// Two-tailed paired t-test. Requires equal lengths >= 2. Zero-variance
/// differences give p = 1 when the mean difference is zero and the
/// degenerate flag otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, std::size_t comparisons = 1);

}  // namespace dst::eval
