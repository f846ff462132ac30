/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include <shardprof/parquet.hpp>

#include "../support/expect_error.hpp"
#include "../support/oracles.hpp"

using namespace shardprof;
using namespace shardprof::parquet;

namespace {

std::vector<ColumnSpec> schema() {
    return {
        {"u64", PhysicalType::Int64, false, true},
        {"i32", PhysicalType::Int32, true, false},
        {"f64", PhysicalType::Double, true, false},
        {"i64", PhysicalType::Int64, true, false},
    };
}

struct Row {
    std::int64_t u64;
    std::optional<std::int64_t> i32;
    std::optional<double> f64;
    std::optional<std::int64_t> i64;
};

std::vector<Row> random_rows(std::mt19937_64& rng, std::size_t n) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Row r;
        r.u64 = static_cast<std::int64_t>(rng());
        if (rng() % 3 != 0) {
            r.i32 = static_cast<std::int32_t>(rng());
        }
        if (rng() % 4 != 0) {
            r.f64 = std::ldexp(static_cast<double>(rng() % 1000000) - 500000, static_cast<int>(rng() % 40) - 20);
        }
        if (rng() % 2 != 0) {
            r.i64 = static_cast<std::int64_t>(rng());
        }
        rows.push_back(r);
    }
    return rows;
}

void write_rows(std::filesystem::path const& path, std::vector<Row> const& rows, WriterOptions o) {
    Writer w{path, schema(), o};
    for (auto const& r : rows) {
        w.put_int(0, r.u64);
        r.i32 ? w.put_int(1, *r.i32) : w.put_null(1);
        r.f64 ? w.put_double(2, *r.f64) : w.put_null(2);
        r.i64 ? w.put_int(3, *r.i64) : w.put_null(3);
        w.end_row();
    }
    w.close();
}

std::vector<Row> read_rows(std::filesystem::path const& path) {
    Reader r{path};
    EXPECT_EQ(r.schema(), schema());
    std::vector<Row> rows;
    for (std::size_t g = 0; g < r.num_row_groups(); ++g) {
        auto const cols = r.read_row_group(g);
        EXPECT_EQ(cols[0].ints.size(), r.row_group_rows(g));
        for (std::size_t i = 0; i < cols[0].ints.size(); ++i) {
            Row row;
            row.u64 = cols[0].ints[i];
            if (!cols[1].is_null(i)) {
                row.i32 = cols[1].ints[i];
            }
            if (!cols[2].is_null(i)) {
                row.f64 = cols[2].doubles[i];
            }
            if (!cols[3].is_null(i)) {
                row.i64 = cols[3].ints[i];
            }
            rows.push_back(row);
        }
    }
    EXPECT_EQ(rows.size(), r.num_rows());
    return rows;
}

void expect_same(std::vector<Row> const& a, std::vector<Row> const& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].u64, b[i].u64) << i;
        EXPECT_EQ(a[i].i32, b[i].i32) << i;
        EXPECT_EQ(a[i].f64, b[i].f64) << i;
        EXPECT_EQ(a[i].i64, b[i].i64) << i;
    }
}

}  // namespace

class ParquetRoundTrip : public ::testing::TestWithParam<std::tuple<Codec, std::size_t, std::size_t>> {};

TEST_P(ParquetRoundTrip, RowsSurvive) {
    auto const [codec, rows_per_group, n] = GetParam();
    shardprof::testing::TempDir dir;
    std::mt19937_64 rng{n * 31 + rows_per_group};
    auto const rows = random_rows(rng, n);
    write_rows(dir / "t.parquet", rows, WriterOptions{codec, rows_per_group});
    EXPECT_FALSE(std::filesystem::exists(dir / "t.parquet.tmp"));
    expect_same(read_rows(dir / "t.parquet"), rows);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes,
    ParquetRoundTrip,
    ::testing::Combine(
        ::testing::Values(Codec::Uncompressed, Codec::Gzip),
        ::testing::Values(std::size_t{1}, std::size_t{7}, std::size_t{1024}),
        ::testing::Values(std::size_t{0}, std::size_t{1}, std::size_t{100}, std::size_t{3000})
    )
);

TEST(Parquet, ExtremeValues) {
    shardprof::testing::TempDir dir;
    std::vector<Row> rows{
        {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int32_t>::min(), -0.0, std::numeric_limits<std::int64_t>::max()},
        {-1, std::numeric_limits<std::int32_t>::max(), std::numeric_limits<double>::infinity(), 0},
        {0, std::nullopt, std::numeric_limits<double>::denorm_min(), std::nullopt},
    };
    write_rows(dir / "x.parquet", rows, {});
    expect_same(read_rows(dir / "x.parquet"), rows);
}

TEST(Parquet, RejectsGarbage) {
    shardprof::testing::TempDir dir;
    std::ofstream{dir / "bad.parquet"} << "this is not a parquet file at all";
    EXPECT_ERROR_KIND(Reader{dir / "bad.parquet"}, ErrorKind::MalformedFile);
    std::ofstream{dir / "tiny.parquet"} << "PAR1";
    EXPECT_ERROR_KIND(Reader{dir / "tiny.parquet"}, ErrorKind::MalformedFile);
    EXPECT_ERROR_KIND(Reader{dir / "missing.parquet"}, ErrorKind::IoError);
}

TEST(Parquet, RejectsTruncatedFile) {
    shardprof::testing::TempDir dir;
    std::mt19937_64 rng{1};
    write_rows(dir / "t.parquet", random_rows(rng, 500), {});
    auto const size = std::filesystem::file_size(dir / "t.parquet");
    std::filesystem::resize_file(dir / "t.parquet", size - 9);
    EXPECT_ERROR_KIND(Reader{dir / "t.parquet"}, ErrorKind::MalformedFile);
}

TEST(Parquet, WriterMisuse) {
    shardprof::testing::TempDir dir;
    Writer w{dir / "m.parquet", schema()};
    EXPECT_ERROR_KIND(w.put_null(0), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND(w.put_double(0, 1.0), ErrorKind::InvalidArgument);
    EXPECT_ERROR_KIND(w.put_int(9, 1), ErrorKind::InvalidArgument);
    w.put_int(0, 1);
    EXPECT_ERROR_KIND(w.end_row(), ErrorKind::InvalidArgument);
}

TEST(Parquet, UnclosedWriterLeavesNoFile) {
    shardprof::testing::TempDir dir;
    {
        Writer w{dir / "u.parquet", schema()};
        w.put_int(0, 1);
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "u.parquet"));
}
