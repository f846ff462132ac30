/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>

#include <shardprof/error.hpp>
#include <shardprof/stats.hpp>

namespace shardprof::stats {

double population_std(std::span<std::uint64_t const> values) {
    if (values.empty()) {
        return 0.0;
    }
    unsigned __int128 sum = 0;
    for (auto v : values) {
        sum += v;
    }
    auto const n = static_cast<double>(values.size());
    auto const mean = static_cast<double>(sum) / n;
    double ss = 0.0;
    for (auto v : values) {
        auto const d = static_cast<double>(v) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / n);
}

double population_std(std::span<double const> values) {
    if (values.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (auto v : values) {
        sum += v;
    }
    auto const n = static_cast<double>(values.size());
    auto const mean = sum / n;
    double ss = 0.0;
    for (auto v : values) {
        auto const d = v - mean;
        ss += d * d;
    }
    return std::sqrt(ss / n);
}

double quantile_sorted(std::span<double const> sorted, double p) {
    SHARDPROF_EXPECTS(!sorted.empty(), ErrorKind::EmptyInput, "quantile of an empty sample");
    SHARDPROF_EXPECTS(
        p >= 0.0 && p <= 1.0, ErrorKind::InvalidArgument, "quantile probability outside [0, 1]"
    );
    auto const h = p * static_cast<double>(sorted.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted[sorted.size() - 1];
    }
    auto const frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace shardprof::stats
