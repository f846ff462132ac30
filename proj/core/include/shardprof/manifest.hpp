/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <shardprof/trace_model.hpp>

namespace shardprof {

inline constexpr char const* kManifestName = "manifest.json";
inline constexpr char const* kKernelNamesName = "kernel_names.json";

struct ShardFileMeta {
    int rank{0};
    std::int64_t shard_index{0};
    /// File name relative to the manifest's directory.
    std::filesystem::path path;
    std::uint64_t row_count{0};
    TimeWindow window;
    std::uint64_t wall_time_ns{0};

    bool operator==(ShardFileMeta const&) const = default;
};

struct RankTimings {
    std::optional<std::uint64_t> generation_ns;
    std::optional<std::uint64_t> aggregation_ns;

    bool operator==(RankTimings const&) const = default;
};

/// FNV-1a over the partition fields that determine shard contents (N, t0, t1).
[[nodiscard]] std::string partition_hash(PartitionConfig const& cfg);

/**
 * @brief Record of one generation run: configuration, shard files and
 * per-rank phase timings. Written by rank 0 as `manifest.json`.
 */
struct Manifest {
    PartitionConfig config;
    std::string db_path;
    int trace_label{0};
    std::string codec{"uncompressed"};
    std::vector<ShardFileMeta> files;
    std::map<int, RankTimings> timings;
    std::optional<int> aggregation_workers;

    [[nodiscard]] std::string config_hash() const {
        return partition_hash(config);
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    static Manifest from_json(nlohmann::json const& j);

    /// Atomic write (temp file + rename).
    void save(std::filesystem::path const& path) const;
    static Manifest load(std::filesystem::path const& path);

    bool operator==(Manifest const&) const = default;
};

/// Write `text` to `path` through a temp file and rename.
void write_file_atomic(std::filesystem::path const& path, std::string const& text);
[[nodiscard]] std::string read_text_file(std::filesystem::path const& path);

}  // namespace shardprof
