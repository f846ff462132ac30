/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <shardprof/comm.hpp>
#include <shardprof/manifest.hpp>
#include <shardprof/parquet.hpp>
#include <shardprof/trace_ingest.hpp>
#include <shardprof/trace_model.hpp>

namespace shardprof {

struct GenerationOptions {
    parquet::WriterOptions writer;
};

struct GenerationResult {
    /// Files written by this rank, in shard order.
    std::vector<ShardFileMeta> files;
    /// Complete manifest, at rank 0 only.
    std::optional<Manifest> manifest;
    std::uint64_t wall_time_ns{0};
    /// Largest number of kernels resident for one shard.
    std::uint64_t peak_shard_kernels{0};
    /// Largest memcpy group any kernel joined against.
    std::uint64_t largest_memcpy_group{0};
};

/**
 * @brief Stage one: write one shard file per shard owned by this rank.
 *
 * Kernels are binned by start timestamp into the shard windows; each kernel
 * is joined against every memcpy of the trace that shares its
 * (device, stream) key, so the union of all shard files is the same for any
 * (N, P). Collective: every rank of `comm` must call it with the same
 * arguments. Rank 0 writes `manifest.json` and `kernel_names.json`.
 */
GenerationResult run_generation(
    TraceDatabaseRef const& db,
    PartitionConfig const& cfg,
    Communicator& comm,
    std::filesystem::path const& out_dir,
    GenerationOptions const& options = {}
);

}  // namespace shardprof
