/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

/**
 * @file parquet.hpp
 * @brief Minimal Apache Parquet writer and reader for flat numeric tables.
 *
 * Supports flat schemas of INT32, INT64 (optionally annotated unsigned) and
 * DOUBLE columns, each REQUIRED or OPTIONAL. Pages are PLAIN encoded with
 * RLE/bit-packed definition levels, one data page per column chunk, and are
 * either uncompressed or GZIP compressed. The reader accepts any file within
 * that subset regardless of which library produced it.
 */
namespace shardprof::parquet {

enum class PhysicalType : std::int32_t { Int32 = 1, Int64 = 2, Double = 5 };

enum class Codec : std::int32_t { Uncompressed = 0, Gzip = 2 };

struct ColumnSpec {
    std::string name;
    PhysicalType type{PhysicalType::Int64};
    bool nullable{false};
    bool is_unsigned{false};

    bool operator==(ColumnSpec const&) const = default;
};

struct WriterOptions {
    Codec codec{Codec::Uncompressed};
    std::size_t row_group_rows{1u << 16};
};

/// Values of one column for one row group. Integer columns fill `ints`,
/// DOUBLE columns fill `doubles`; null slots hold 0 and `valid[i] == 0`.
struct ColumnData {
    std::vector<std::int64_t> ints;
    std::vector<double> doubles;
    std::vector<std::uint8_t> valid;

    [[nodiscard]] bool is_null(std::size_t row) const noexcept {
        return valid[row] == 0;
    }
};

/**
 * @brief Row-at-a-time writer; buffers one row group per flush.
 *
 * Output goes to `<path>.tmp` and is renamed onto `path` by `close()`, so a
 * crashed writer never leaves a truncated file under the final name.
 */
class Writer {
  public:
    Writer(std::filesystem::path path, std::vector<ColumnSpec> schema, WriterOptions options = {});
    ~Writer();

    Writer(Writer const&) = delete;
    Writer& operator=(Writer const&) = delete;

    void put_int(std::size_t column, std::int64_t value);
    void put_double(std::size_t column, double value);
    void put_null(std::size_t column);
    void end_row();

    /// Flush, write the footer and publish the file.
    void close();

    [[nodiscard]] std::uint64_t rows_written() const noexcept {
        return total_rows_ + pending_rows_;
    }
    [[nodiscard]] std::vector<ColumnSpec> const& schema() const noexcept {
        return schema_;
    }

  private:
    struct ChunkMeta;
    struct RowGroupMeta;

    void flush_row_group();
    ColumnData& pending(std::size_t column);
    void write_bytes(void const* data, std::size_t n);

    std::filesystem::path path_;
    std::filesystem::path tmp_path_;
    std::vector<ColumnSpec> schema_;
    WriterOptions options_;
    std::FILE* file_{nullptr};
    std::uint64_t offset_{0};
    std::vector<ColumnData> pending_;
    std::vector<std::size_t> filled_;
    std::size_t pending_rows_{0};
    std::uint64_t total_rows_{0};
    std::vector<RowGroupMeta> row_groups_;
    bool closed_{false};
};

class Reader {
  public:
    explicit Reader(std::filesystem::path path);
    ~Reader();

    Reader(Reader const&) = delete;
    Reader& operator=(Reader const&) = delete;

    [[nodiscard]] std::vector<ColumnSpec> const& schema() const noexcept {
        return schema_;
    }
    [[nodiscard]] std::uint64_t num_rows() const noexcept {
        return num_rows_;
    }
    [[nodiscard]] std::size_t num_row_groups() const noexcept {
        return row_groups_.size();
    }
    [[nodiscard]] std::uint64_t row_group_rows(std::size_t index) const;

    /// Decode one row group into one `ColumnData` per schema column.
    [[nodiscard]] std::vector<ColumnData> read_row_group(std::size_t index);

  private:
    struct ChunkLocation {
        std::uint64_t offset;
        std::uint64_t size;
        Codec codec;
        std::uint64_t num_values;
    };
    struct RowGroupLocation {
        std::uint64_t num_rows;
        std::vector<ChunkLocation> chunks;
    };

    std::filesystem::path path_;
    std::FILE* file_{nullptr};
    std::vector<ColumnSpec> schema_;
    std::uint64_t num_rows_{0};
    std::vector<RowGroupLocation> row_groups_;
};

}  // namespace shardprof::parquet
