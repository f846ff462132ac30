/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <random>

#include <gtest/gtest.h>

#include <shardprof/partitioner.hpp>

#include "../support/expect_error.hpp"
#include "../support/oracles.hpp"

using namespace shardprof;
namespace oracle = shardprof::testing;

namespace {

PartitionConfig cfg_of(std::int64_t n, std::int64_t p, std::uint64_t t0, std::uint64_t t1) {
    return PartitionConfig{n, p, Timestamp{t0}, Timestamp{t1}};
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> windows(std::vector<ShardSpec> const& s) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (auto const& x : s) {
        out.emplace_back(x.window.begin.ns(), x.window.end.ns());
    }
    return out;
}

}  // namespace

TEST(MakeShards, EvenDivision) {
    auto const s = make_shards(cfg_of(10, 1, 0, 1000));
    ASSERT_EQ(s.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(s[i].index, static_cast<std::int64_t>(i));
        EXPECT_EQ(s[i].window.begin.ns(), 100 * i);
        EXPECT_EQ(s[i].window.end.ns(), 100 * (i + 1));
    }
}

TEST(MakeShards, RemainderGoesToLaterShards) {
    using W = std::vector<std::pair<std::uint64_t, std::uint64_t>>;
    EXPECT_EQ(windows(make_shards(cfg_of(3, 1, 0, 10))), (W{{0, 3}, {3, 6}, {6, 10}}));
    EXPECT_EQ(windows(make_shards(cfg_of(1, 1, 0, 5))), (W{{0, 5}}));
}

TEST(MakeShards, InvalidRange) {
    EXPECT_ERROR_KIND((void)make_shards(cfg_of(3, 1, 10, 10)), ErrorKind::InvalidRange);
    EXPECT_ERROR_KIND((void)make_shards(cfg_of(3, 1, 11, 10)), ErrorKind::InvalidRange);
}

TEST(MakeShards, TilingProperty) {
    std::mt19937_64 rng{5};
    for (int trial = 0; trial < 2000; ++trial) {
        auto const t0 = rng() % (1ull << 62);
        auto const len = 1 + rng() % (trial % 2 == 0 ? 1000 : (1ull << 61));
        auto const n = static_cast<std::int64_t>(1 + rng() % 64);
        auto const shards = make_shards(cfg_of(n, 1, t0, t0 + len));
        ASSERT_EQ(shards.size(), static_cast<std::size_t>(n));
        EXPECT_EQ(shards.front().window.begin.ns(), t0);
        EXPECT_EQ(shards.back().window.end.ns(), t0 + len);
        for (std::size_t i = 1; i < shards.size(); ++i) {
            EXPECT_EQ(shards[i - 1].window.end, shards[i].window.begin);
            EXPECT_LE(shards[i - 1].window.begin, shards[i - 1].window.end);
        }
    }
}

TEST(AssignBlocks, Examples) {
    auto span = [](std::vector<BlockAssignment> const& b) {
        std::vector<std::pair<std::int64_t, std::int64_t>> out;
        for (auto const& x : b) {
            out.emplace_back(x.first, x.last);
        }
        return out;
    };
    using V = std::vector<std::pair<std::int64_t, std::int64_t>>;
    EXPECT_EQ(span(assign_blocks(cfg_of(8, 4, 0, 10))), (V{{0, 2}, {2, 4}, {4, 6}, {6, 8}}));
    EXPECT_EQ(span(assign_blocks(cfg_of(10, 4, 0, 10))), (V{{0, 3}, {3, 6}, {6, 8}, {8, 10}}));
    EXPECT_EQ(span(assign_blocks(cfg_of(2, 4, 0, 10))), (V{{0, 1}, {1, 2}, {2, 2}, {2, 2}}));
}

TEST(AssignBlocks, BruteForceEnumeration) {
    for (std::int64_t n = 1; n <= 40; ++n) {
        for (std::int64_t p = 1; p <= 12; ++p) {
            auto const blocks = assign_blocks(cfg_of(n, p, 0, 1000));
            ASSERT_EQ(blocks.size(), static_cast<std::size_t>(p));
            std::vector<int> owner(static_cast<std::size_t>(n), -1);
            std::int64_t lo = n;
            std::int64_t hi = 0;
            std::int64_t next = 0;
            for (auto const& b : blocks) {
                EXPECT_EQ(b.first, next) << "blocks must be contiguous in rank order";
                next = b.last;
                lo = std::min(lo, b.size());
                hi = std::max(hi, b.size());
                for (auto s = b.first; s < b.last; ++s) {
                    EXPECT_EQ(owner[static_cast<std::size_t>(s)], -1);
                    owner[static_cast<std::size_t>(s)] = b.rank;
                }
                EXPECT_EQ(block_of(cfg_of(n, p, 0, 1000), b.rank), b);
            }
            EXPECT_EQ(next, n);
            EXPECT_LE(hi - lo, 1);
            for (auto o : owner) {
                EXPECT_GE(o, 0);
            }
        }
    }
}

TEST(ShardOf, Examples) {
    auto const cfg = cfg_of(10, 1, 0, 1000);
    EXPECT_EQ(shard_of(Timestamp{250}, cfg), 2);
    EXPECT_EQ(shard_of(Timestamp{999}, cfg), 9);
    EXPECT_EQ(shard_of(Timestamp{0}, cfg), 0);
    EXPECT_EQ(shard_of(Timestamp{1000}, cfg), 9);
    EXPECT_ERROR_KIND((void)shard_of(Timestamp{1001}, cfg), ErrorKind::OutOfRange);
    EXPECT_ERROR_KIND((void)shard_of(Timestamp{5}, cfg_of(10, 1, 6, 100)), ErrorKind::OutOfRange);
}

TEST(ShardOf, AgreesWithLinearScan) {
    std::mt19937_64 rng{17};
    for (int trial = 0; trial < 300; ++trial) {
        auto const t0 = rng() % 1'000'000'000'000ull;
        auto const len = 1 + rng() % (trial % 3 == 0 ? 97 : 10'000'000'000ull);
        auto const n = static_cast<std::int64_t>(1 + rng() % 100);
        auto const cfg = cfg_of(n, 1, t0, t0 + len);
        auto const shards = make_shards(cfg);
        for (int i = 0; i < 50; ++i) {
            Timestamp const t{t0 + rng() % (len + 1)};
            EXPECT_EQ(shard_of(t, cfg), oracle::linear_scan_shard(t, shards));
        }
        // Window edges are where floor arithmetic goes wrong.
        for (auto const& s : shards) {
            EXPECT_EQ(shard_of(s.window.begin, cfg), oracle::linear_scan_shard(s.window.begin, shards));
            if (s.window.end.ns() > t0) {
                Timestamp const last{s.window.end.ns() - 1};
                EXPECT_EQ(shard_of(last, cfg), oracle::linear_scan_shard(last, shards));
            }
        }
    }
}

TEST(ShardOf, ConservationOfBinnedRecords) {
    std::mt19937_64 rng{23};
    auto const cfg = cfg_of(13, 1, 1000, 98765);
    std::vector<std::uint64_t> counts(13, 0);
    std::uint64_t const total = 20000;
    for (std::uint64_t i = 0; i < total; ++i) {
        ++counts[static_cast<std::size_t>(shard_of(Timestamp{1000 + rng() % (98765 - 1000)}, cfg))];
    }
    std::uint64_t sum = 0;
    for (auto c : counts) {
        sum += c;
    }
    EXPECT_EQ(sum, total);
}
