/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <vector>

#include <shardprof/trace_model.hpp>

namespace shardprof {

struct ShardSpec {
    std::int64_t index{0};
    TimeWindow window;

    bool operator==(ShardSpec const&) const = default;
};

/// Contiguous shard range [first, last) owned by one rank.
struct BlockAssignment {
    int rank{0};
    std::int64_t first{0};
    std::int64_t last{0};

    [[nodiscard]] std::int64_t size() const noexcept {
        return last - first;
    }
    [[nodiscard]] bool contains(std::int64_t shard) const noexcept {
        return first <= shard && shard < last;
    }

    bool operator==(BlockAssignment const&) const = default;
};

/// N windows tiling [t0, t1); shard i starts at t0 + floor(i * (t1 - t0) / N).
[[nodiscard]] std::vector<ShardSpec> make_shards(PartitionConfig const& cfg);

/// Block partitioning; the first N mod P ranks own one extra shard.
[[nodiscard]] std::vector<BlockAssignment> assign_blocks(PartitionConfig const& cfg);
[[nodiscard]] BlockAssignment block_of(PartitionConfig const& cfg, int rank);

/// Index of the shard whose window holds `t`; t == t1 maps to the last shard.
[[nodiscard]] std::int64_t shard_of(Timestamp t, PartitionConfig const& cfg);

}  // namespace shardprof
