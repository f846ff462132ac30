/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include <shardprof/trace_model.hpp>

#include "../support/expect_error.hpp"

using namespace shardprof;

TEST(CopyKind, FixedCodes) {
    EXPECT_EQ(decode_copy_kind(1).tag(), CopyKind::Tag::HtoD);
    EXPECT_EQ(decode_copy_kind(2).tag(), CopyKind::Tag::DtoH);
    EXPECT_EQ(decode_copy_kind(8).tag(), CopyKind::Tag::DtoD);
    auto const other = decode_copy_kind(42);
    EXPECT_EQ(other.tag(), CopyKind::Tag::Other);
    EXPECT_EQ(other.raw(), 42);
}

TEST(CopyKind, DecodeIsTotalAndKeepsRaw) {
    std::mt19937_64 rng{11};
    for (int i = 0; i < 10000; ++i) {
        auto const raw = static_cast<std::int64_t>(rng());
        auto const k = decode_copy_kind(raw);
        EXPECT_EQ(k.raw(), raw);
        EXPECT_EQ(decode_copy_kind(raw), k);
        bool const known = raw == 1 || raw == 2 || raw == 8;
        EXPECT_EQ(k.tag() != CopyKind::Tag::Other, known);
    }
    for (std::int64_t raw = -5; raw < 20; ++raw) {
        auto const tag = decode_copy_kind(raw).tag();
        int const hits = (tag == CopyKind::Tag::HtoD) + (tag == CopyKind::Tag::DtoH)
                         + (tag == CopyKind::Tag::DtoD) + (tag == CopyKind::Tag::Other);
        EXPECT_EQ(hits, 1);
    }
}

TEST(Timestamp, CheckedArithmetic) {
    Timestamp const t{100};
    EXPECT_EQ(t.plus(50).ns(), 150u);
    EXPECT_EQ(Timestamp{150}.since(t), 50u);
    EXPECT_ERROR_KIND((void)Timestamp{std::numeric_limits<std::uint64_t>::max()}.plus(1), ErrorKind::Overflow);
    EXPECT_ERROR_KIND((void)t.since(Timestamp{101}), ErrorKind::Overflow);
    EXPECT_LT(Timestamp{1}, Timestamp{2});
}

TEST(TimeWindow, HalfOpen) {
    TimeWindow const w{Timestamp{10}, Timestamp{20}};
    EXPECT_TRUE(w.contains(Timestamp{10}));
    EXPECT_TRUE(w.contains(Timestamp{19}));
    EXPECT_FALSE(w.contains(Timestamp{20}));
    EXPECT_EQ(w.length(), 10u);
    EXPECT_TRUE((TimeWindow{Timestamp{5}, Timestamp{5}}.empty()));
}

TEST(Records, Validate) {
    KernelRecord k;
    k.start = Timestamp{5};
    k.end = Timestamp{4};
    EXPECT_ERROR_KIND(validate(k), ErrorKind::InvalidArgument);
    k.end = Timestamp{5};
    EXPECT_NO_THROW(validate(k));
    k.stream_id = -1;
    EXPECT_ERROR_KIND(validate(k), ErrorKind::InvalidArgument);

    MemcpyRecord m;
    m.start = Timestamp{9};
    m.end = Timestamp{3};
    EXPECT_ERROR_KIND(validate(m), ErrorKind::InvalidArgument);
}

TEST(PartitionConfig, Validate) {
    PartitionConfig cfg{4, 2, Timestamp{0}, Timestamp{10}};
    EXPECT_NO_THROW(cfg.validate());
    cfg.num_shards = 0;
    EXPECT_ERROR_KIND(cfg.validate(), ErrorKind::InvalidArgument);
    cfg = PartitionConfig{4, 0, Timestamp{0}, Timestamp{10}};
    EXPECT_ERROR_KIND(cfg.validate(), ErrorKind::InvalidArgument);
    cfg = PartitionConfig{4, 2, Timestamp{10}, Timestamp{10}};
    EXPECT_ERROR_KIND(cfg.validate(), ErrorKind::InvalidRange);
    cfg = PartitionConfig{1, 8, Timestamp{0}, Timestamp{10}};
    EXPECT_NO_THROW(cfg.validate());
}

TEST(AggregationConfig, Defaults) {
    AggregationConfig const cfg;
    EXPECT_EQ(cfg.interval_ns, 1'000'000'000u);
    EXPECT_EQ(cfg.top_k_shards, 5);
    EXPECT_EQ(cfg.variability_fraction, (Fraction{1, 20}));
    EXPECT_NO_THROW(cfg.validate());
    AggregationConfig bad;
    bad.interval_ns = 0;
    EXPECT_ERROR_KIND(bad.validate(), ErrorKind::InvalidArgument);
}

TEST(Fraction, ParseDecimal) {
    EXPECT_EQ(Fraction::parse("0.05"), (Fraction{1, 20}));
    EXPECT_EQ(Fraction::parse("1"), (Fraction{1, 1}));
    EXPECT_EQ(Fraction::parse("0.5"), (Fraction{1, 2}));
    EXPECT_EQ(Fraction::parse("0.125"), (Fraction{1, 8}));
    for (auto const* bad : {"0", "1.5", "-0.1", "abc", "", "0.", ".", "1e-2"}) {
        EXPECT_ERROR_KIND((void)Fraction::parse(bad), ErrorKind::InvalidArgument);
    }
}

TEST(Fraction, CeilTimesIsExact) {
    auto const f = Fraction::parse("0.05");
    EXPECT_EQ(f.ceil_times(100), 5u);
    EXPECT_EQ(f.ceil_times(200), 10u);
    EXPECT_EQ(f.ceil_times(1), 1u);
    EXPECT_EQ(f.ceil_times(0), 0u);
    EXPECT_EQ(f.ceil_times(20), 1u);
    EXPECT_EQ(f.ceil_times(21), 2u);
    // 0.1 * 30 is 3.0000000000000004 in binary floating point.
    EXPECT_EQ(Fraction::parse("0.1").ceil_times(30), 3u);
    std::mt19937_64 rng{3};
    for (int i = 0; i < 1000; ++i) {
        Fraction const g{1 + rng() % 1000, 1000 + rng() % 1000};
        auto const n = rng() % 100000;
        auto const expect = (g.numerator * n + g.denominator - 1) / g.denominator;
        EXPECT_EQ(g.ceil_times(n), expect);
    }
}
