/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <shardprof/parquet.hpp>
#include <shardprof/trace_model.hpp>

namespace shardprof {

/// Column layout of every shard file, in file order.
[[nodiscard]] std::vector<parquet::ColumnSpec> const& shard_schema();

/// `rank{r:04d}_shard{s:06d}.parquet`
[[nodiscard]] std::string shard_file_name(int rank, std::int64_t shard);

/**
 * @brief Streams joined samples into one shard file.
 *
 * GPU properties are reduced to the two columns the schema carries (SM count
 * and memory size); the memcpy's device and stream equal the kernel's.
 */
class ShardFileWriter {
  public:
    explicit ShardFileWriter(std::filesystem::path path, parquet::WriterOptions options = {});

    void write(JoinedSample const& sample);
    /// Publish the file and return its row count.
    std::uint64_t close();

  private:
    parquet::Writer writer_;
};

class ShardFileReader {
  public:
    explicit ShardFileReader(std::filesystem::path path);

    [[nodiscard]] std::uint64_t num_rows() const noexcept {
        return reader_.num_rows();
    }

    /// Visit every row in file order, one row group resident at a time.
    void for_each(std::function<void(JoinedSample const&)> const& visit);

    [[nodiscard]] std::vector<JoinedSample> read_all();

  private:
    parquet::Reader reader_;
};

}  // namespace shardprof
