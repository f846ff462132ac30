/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/partitioner.hpp>

namespace shardprof {

namespace {

using u128 = unsigned __int128;

std::uint64_t boundary_offset(std::uint64_t length, std::int64_t i, std::int64_t n) {
    return static_cast<std::uint64_t>(
        static_cast<u128>(i) * length / static_cast<u128>(n)
    );
}

void check_counts(PartitionConfig const& cfg) {
    SHARDPROF_EXPECTS(
        cfg.num_shards >= 1 && cfg.num_workers >= 1,
        ErrorKind::InvalidArgument,
        fmt::format("need N >= 1 and P >= 1, got N={} P={}", cfg.num_shards, cfg.num_workers)
    );
}

}  // namespace

std::vector<ShardSpec> make_shards(PartitionConfig const& cfg) {
    cfg.validate();
    auto const t0 = cfg.range_start;
    auto const length = cfg.range_end.since(t0);
    std::vector<ShardSpec> out;
    out.reserve(static_cast<std::size_t>(cfg.num_shards));
    for (std::int64_t i = 0; i < cfg.num_shards; ++i) {
        auto const begin = t0.plus(boundary_offset(length, i, cfg.num_shards));
        auto const end = i + 1 == cfg.num_shards
                             ? cfg.range_end
                             : t0.plus(boundary_offset(length, i + 1, cfg.num_shards));
        out.push_back(ShardSpec{i, TimeWindow{begin, end}});
    }
    return out;
}

BlockAssignment block_of(PartitionConfig const& cfg, int rank) {
    check_counts(cfg);
    SHARDPROF_EXPECTS(
        rank >= 0 && rank < cfg.num_workers,
        ErrorKind::InvalidArgument,
        fmt::format("rank {} outside [0, {})", rank, cfg.num_workers)
    );
    auto const base = cfg.num_shards / cfg.num_workers;
    auto const extra = cfg.num_shards % cfg.num_workers;
    auto const r = static_cast<std::int64_t>(rank);
    auto const first = r * base + std::min(r, extra);
    auto const size = base + (r < extra ? 1 : 0);
    return BlockAssignment{rank, first, first + size};
}

std::vector<BlockAssignment> assign_blocks(PartitionConfig const& cfg) {
    check_counts(cfg);
    std::vector<BlockAssignment> out;
    out.reserve(static_cast<std::size_t>(cfg.num_workers));
    for (std::int64_t r = 0; r < cfg.num_workers; ++r) {
        out.push_back(block_of(cfg, static_cast<int>(r)));
    }
    return out;
}

std::int64_t shard_of(Timestamp t, PartitionConfig const& cfg) {
    cfg.validate();
    SHARDPROF_EXPECTS(
        cfg.range_start <= t && t <= cfg.range_end,
        ErrorKind::OutOfRange,
        fmt::format(
            "timestamp {} outside [{}, {}]", t.ns(), cfg.range_start.ns(), cfg.range_end.ns()
        )
    );
    auto const n = static_cast<u128>(cfg.num_shards);
    auto const length = static_cast<u128>(cfg.range_end.since(cfg.range_start));
    auto const d = static_cast<u128>(t.since(cfg.range_start));
    // Largest i with floor(i * L / N) <= d.
    auto const i = ((d + 1) * n + length - 1) / length - 1;
    return std::min<std::int64_t>(static_cast<std::int64_t>(i), cfg.num_shards - 1);
}

}  // namespace shardprof
