/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/shard_file.hpp>

namespace shardprof {

namespace {

using parquet::ColumnSpec;
using parquet::PhysicalType;

enum Col : std::size_t {
    kKernelStart,
    kKernelEnd,
    kDeviceId,
    kStreamId,
    kKernelNameId,
    kGridX,
    kGridY,
    kGridZ,
    kBlockX,
    kBlockY,
    kBlockZ,
    kRegs,
    kSmem,
    kMemcpyStart,
    kMemcpyEnd,
    kMemcpyBytes,
    kCopyKind,
    kGpuSmCount,
    kGpuMemBytes,
    kNumColumns,
};

std::int64_t as_i64(std::uint64_t v) {
    return static_cast<std::int64_t>(v);
}

std::uint64_t as_u64(std::int64_t v) {
    return static_cast<std::uint64_t>(v);
}

}  // namespace

std::vector<ColumnSpec> const& shard_schema() {
    static std::vector<ColumnSpec> const schema{
        {"kernel_start", PhysicalType::Int64, false, true},
        {"kernel_end", PhysicalType::Int64, false, true},
        {"device_id", PhysicalType::Int32, false, false},
        {"stream_id", PhysicalType::Int32, false, false},
        {"kernel_name_id", PhysicalType::Int64, false, false},
        {"grid_x", PhysicalType::Int32, false, false},
        {"grid_y", PhysicalType::Int32, false, false},
        {"grid_z", PhysicalType::Int32, false, false},
        {"block_x", PhysicalType::Int32, false, false},
        {"block_y", PhysicalType::Int32, false, false},
        {"block_z", PhysicalType::Int32, false, false},
        {"regs_per_thread", PhysicalType::Int32, false, false},
        {"smem_bytes", PhysicalType::Int64, false, false},
        {"memcpy_start", PhysicalType::Int64, true, true},
        {"memcpy_end", PhysicalType::Int64, true, true},
        {"memcpy_bytes", PhysicalType::Int64, true, true},
        {"copy_kind_raw", PhysicalType::Int64, true, false},
        {"gpu_sm_count", PhysicalType::Int32, true, false},
        {"gpu_mem_bytes", PhysicalType::Int64, true, true},
    };
    return schema;
}

std::string shard_file_name(int rank, std::int64_t shard) {
    return fmt::format("rank{:04d}_shard{:06d}.parquet", rank, shard);
}

ShardFileWriter::ShardFileWriter(std::filesystem::path path, parquet::WriterOptions options)
    : writer_{std::move(path), shard_schema(), options} {}

void ShardFileWriter::write(JoinedSample const& s) {
    auto& w = writer_;
    auto const& k = s.kernel;
    w.put_int(kKernelStart, as_i64(k.start.ns()));
    w.put_int(kKernelEnd, as_i64(k.end.ns()));
    w.put_int(kDeviceId, k.device_id);
    w.put_int(kStreamId, k.stream_id);
    w.put_int(kKernelNameId, k.name_id);
    w.put_int(kGridX, k.grid[0]);
    w.put_int(kGridY, k.grid[1]);
    w.put_int(kGridZ, k.grid[2]);
    w.put_int(kBlockX, k.block[0]);
    w.put_int(kBlockY, k.block[1]);
    w.put_int(kBlockZ, k.block[2]);
    w.put_int(kRegs, k.registers_per_thread);
    w.put_int(kSmem, k.shared_mem_bytes);
    if (s.memcpy) {
        w.put_int(kMemcpyStart, as_i64(s.memcpy->start.ns()));
        w.put_int(kMemcpyEnd, as_i64(s.memcpy->end.ns()));
        w.put_int(kMemcpyBytes, as_i64(s.memcpy->bytes));
        w.put_int(kCopyKind, s.memcpy->copy_kind.raw());
    } else {
        for (auto c : {kMemcpyStart, kMemcpyEnd, kMemcpyBytes, kCopyKind}) {
            w.put_null(c);
        }
    }
    if (s.gpu) {
        w.put_int(kGpuSmCount, s.gpu->sm_count);
        w.put_int(kGpuMemBytes, as_i64(s.gpu->global_mem_bytes));
    } else {
        w.put_null(kGpuSmCount);
        w.put_null(kGpuMemBytes);
    }
    w.end_row();
}

std::uint64_t ShardFileWriter::close() {
    writer_.close();
    return writer_.rows_written();
}

ShardFileReader::ShardFileReader(std::filesystem::path path) : reader_{path} {
    SHARDPROF_EXPECTS(
        reader_.schema() == shard_schema(),
        ErrorKind::SchemaMismatch,
        fmt::format("{} does not have the shard file schema", path.string())
    );
}

void ShardFileReader::for_each(std::function<void(JoinedSample const&)> const& visit) {
    for (std::size_t g = 0; g < reader_.num_row_groups(); ++g) {
        auto const cols = reader_.read_row_group(g);
        auto const rows = cols[0].valid.size();
        auto col = [&](Col c, std::size_t r) { return cols[c].ints[r]; };
        for (std::size_t r = 0; r < rows; ++r) {
            JoinedSample s;
            auto& k = s.kernel;
            k.start = Timestamp{as_u64(col(kKernelStart, r))};
            k.end = Timestamp{as_u64(col(kKernelEnd, r))};
            k.device_id = static_cast<std::int32_t>(col(kDeviceId, r));
            k.stream_id = static_cast<std::int32_t>(col(kStreamId, r));
            k.name_id = col(kKernelNameId, r);
            k.grid = {static_cast<std::int32_t>(col(kGridX, r)),
                      static_cast<std::int32_t>(col(kGridY, r)),
                      static_cast<std::int32_t>(col(kGridZ, r))};
            k.block = {static_cast<std::int32_t>(col(kBlockX, r)),
                       static_cast<std::int32_t>(col(kBlockY, r)),
                       static_cast<std::int32_t>(col(kBlockZ, r))};
            k.registers_per_thread = static_cast<std::int32_t>(col(kRegs, r));
            k.shared_mem_bytes = col(kSmem, r);
            if (!cols[kMemcpyStart].is_null(r)) {
                MemcpyRecord m;
                m.start = Timestamp{as_u64(col(kMemcpyStart, r))};
                m.end = Timestamp{as_u64(col(kMemcpyEnd, r))};
                m.bytes = as_u64(col(kMemcpyBytes, r));
                m.copy_kind = decode_copy_kind(col(kCopyKind, r));
                m.device_id = k.device_id;
                m.stream_id = k.stream_id;
                s.memcpy = m;
            }
            if (!cols[kGpuSmCount].is_null(r)) {
                GpuInfo gpu;
                gpu.device_id = k.device_id;
                gpu.sm_count = static_cast<std::int32_t>(col(kGpuSmCount, r));
                gpu.global_mem_bytes = as_u64(col(kGpuMemBytes, r));
                s.gpu = gpu;
            }
            visit(s);
        }
    }
}

std::vector<JoinedSample> ShardFileReader::read_all() {
    std::vector<JoinedSample> out;
    out.reserve(num_rows());
    for_each([&](JoinedSample const& s) { out.push_back(s); });
    return out;
}

}  // namespace shardprof
