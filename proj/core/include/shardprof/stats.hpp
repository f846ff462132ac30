/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <span>

namespace shardprof::stats {

/// Population standard deviation, two passes (mean first, then squared deviations).
[[nodiscard]] double population_std(std::span<std::uint64_t const> values);
[[nodiscard]] double population_std(std::span<double const> values);

/**
 * Quantile of an ascending-sorted sample by linear interpolation between the
 * order statistics at position p * (n - 1).
 */
[[nodiscard]] double quantile_sorted(std::span<double const> sorted, double p);

}  // namespace shardprof::stats
