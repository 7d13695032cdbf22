// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "dst/error.hpp"

namespace dst::eval {

double bonferroni(double p, std::size_t comparisons) {
    if (comparisons == 0) fail(ErrorCode::InvalidArgument, "number of comparisons must be >= 1");
    return std::min(1.0, p * static_cast<double>(comparisons));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, std::size_t comparisons) {
    if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "paired samples differ in length");
    if (a.size() < 2) fail(ErrorCode::InvalidArgument, "paired t-test needs at least 2 pairs");
    if (comparisons == 0) fail(ErrorCode::InvalidArgument, "number of comparisons must be >= 1");

    const std::size_t n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }

    TTestResult r;
    r.n = n;
    r.mean_diff = mean;
    if (ss == 0.0) {
        if (mean == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
            r.p = 0.0;
            r.degenerate = true;
        }
    } else {
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
        boost::math::students_t dist(static_cast<double>(n - 1));
        r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
    }
    r.corrected_p = bonferroni(r.p, comparisons);
    return r;
}

}  // namespace dst::eval
