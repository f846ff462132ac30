/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <shardprof/error.hpp>
#include <shardprof/sqlite.hpp>
#include <shardprof/trace_ingest.hpp>

namespace shardprof {

namespace {

constexpr std::uint64_t kMaxSqlInt = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

/// Resolves logical fields to SQL expressions, substituting 0 for optional
/// columns the export lacks.
class ColumnMap {
  public:
    ColumnMap(sqlite::Database& db, std::string table) : table_{std::move(table)} {
        SHARDPROF_EXPECTS(
            db.has_table(table_),
            ErrorKind::SchemaMismatch,
            fmt::format("{}: table {} not found", db.path().string(), table_)
        );
        for (auto& c : db.columns(table_)) {
            present_.insert(std::move(c));
        }
        where_ = db.path().string();
    }

    [[nodiscard]] bool has(std::string const& column) const {
        return present_.contains(column);
    }

    std::string required(std::string const& column) const {
        SHARDPROF_EXPECTS(
            has(column),
            ErrorKind::SchemaMismatch,
            fmt::format("{}: {} lacks required column '{}'", where_, table_, column)
        );
        return sqlite::quote(column);
    }

    /// First present candidate, or a literal 0 with a warning.
    std::string optional(std::initializer_list<char const*> candidates) const {
        for (auto const* c : candidates) {
            if (has(c)) {
                return fmt::format("COALESCE({}, 0)", sqlite::quote(c));
            }
        }
        spdlog::warn(
            "{}: {} has no column '{}'; defaulting to 0", where_, table_, *candidates.begin()
        );
        return "0";
    }

    /// Required column that may go by several names.
    std::string required_any(std::initializer_list<char const*> candidates) const {
        for (auto const* c : candidates) {
            if (has(c)) {
                return sqlite::quote(c);
            }
        }
        fail(
            ErrorKind::SchemaMismatch,
            fmt::format("{}: {} lacks required column '{}'", where_, table_, *candidates.begin())
        );
    }

  private:
    std::string table_;
    std::string where_;
    std::set<std::string> present_;
};

Timestamp to_timestamp(std::int64_t v, char const* what, std::string const& where) {
    SHARDPROF_EXPECTS(
        v >= 0, ErrorKind::SchemaMismatch, fmt::format("{}: negative {} timestamp {}", where, what, v)
    );
    return Timestamp{static_cast<std::uint64_t>(v)};
}

std::string window_clause(std::optional<TimeWindow> window) {
    if (!window) {
        return "";
    }
    if (window->end.ns() > kMaxSqlInt) {
        return " WHERE \"start\" >= ?1";
    }
    return " WHERE \"start\" >= ?1 AND \"start\" < ?2";
}

void bind_window(sqlite::Statement& st, std::optional<TimeWindow> window) {
    if (!window) {
        return;
    }
    st.bind(1, static_cast<std::int64_t>(std::min(window->begin.ns(), kMaxSqlInt)));
    if (window->end.ns() <= kMaxSqlInt) {
        st.bind(2, static_cast<std::int64_t>(window->end.ns()));
    }
}

}  // namespace

struct TraceReader::Impl {
    explicit Impl(std::filesystem::path const& path)
        : db{path, sqlite::Mode::ReadOnly},
          kernel{db, kKernelTable},
          memcpy{db, kMemcpyTable},
          gpu{db, kGpuTable} {
        kernel_select = fmt::format(
            "SELECT {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, ({}) + ({}) FROM {}",
            kernel.required("start"),
            kernel.required("end"),
            kernel.required("deviceId"),
            kernel.required("streamId"),
            name_column(),
            kernel.optional({"gridX"}),
            kernel.optional({"gridY"}),
            kernel.optional({"gridZ"}),
            kernel.optional({"blockX"}),
            kernel.optional({"blockY"}),
            kernel.optional({"blockZ"}),
            kernel.optional({"registersPerThread"}),
            kernel.optional({"staticSharedMemory"}),
            kernel.optional({"dynamicSharedMemory"}),
            sqlite::quote(kKernelTable)
        );
        memcpy_select = fmt::format(
            "SELECT {}, {}, {}, {}, {}, {} FROM {}",
            memcpy.required("start"),
            memcpy.required("end"),
            memcpy.required("deviceId"),
            memcpy.required("streamId"),
            memcpy.optional({"bytes"}),
            memcpy.optional({"copyKind"}),
            sqlite::quote(kMemcpyTable)
        );
        gpu_select = fmt::format(
            "SELECT {}, {}, {}, {}, {}, {} FROM {}",
            gpu.required_any({"id", "deviceId"}),
            gpu.optional({"totalMemory"}),
            gpu.optional({"memoryBandwidth"}),
            gpu.optional({"smCount"}),
            gpu.optional({"computeMajor"}),
            gpu.optional({"computeMinor"}),
            sqlite::quote(kGpuTable)
        );
    }

    std::string name_column() {
        for (auto const* c : {"shortName", "demangledName", "name"}) {
            if (kernel.has(c)) {
                name_col = c;
                return sqlite::quote(c);
            }
        }
        spdlog::warn("{}: kernel table has no name column; name ids default to 0", db.path().string());
        return "0";
    }

    void load_interned() {
        if (!interned_loaded) {
            interned_loaded = true;
            auto st = db.prepare(fmt::format(
                "SELECT DISTINCT {0} FROM {1} WHERE typeof({0}) = 'text' ORDER BY 1",
                sqlite::quote(name_col),
                sqlite::quote(kKernelTable)
            ));
            std::int64_t next = kInternedNameBase;
            while (st.step()) {
                interned.emplace(st.column_text(0), next++);
            }
        }
    }

    std::int64_t intern(std::string const& text) {
        load_interned();
        auto it = interned.find(text);
        SHARDPROF_EXPECTS(
            it != interned.end(), ErrorKind::SchemaMismatch, "kernel name table changed during read"
        );
        return it->second;
    }

    sqlite::Database db;
    ColumnMap kernel;
    ColumnMap memcpy;
    ColumnMap gpu;
    std::string name_col;
    std::string kernel_select;
    std::string memcpy_select;
    std::string gpu_select;
    bool interned_loaded{false};
    std::map<std::string, std::int64_t> interned;
};

TraceReader::TraceReader(TraceDatabaseRef ref)
    : ref_{std::move(ref)}, impl_{std::make_unique<Impl>(ref_.path)} {}

TraceReader::~TraceReader() = default;
TraceReader::TraceReader(TraceReader&&) noexcept = default;
TraceReader& TraceReader::operator=(TraceReader&&) noexcept = default;

TimeWindow TraceReader::scan_kernel_time_range() {
    auto st = impl_->db.prepare(fmt::format(
        "SELECT COUNT(*), MIN({}), MAX({}) FROM {}",
        impl_->kernel.required("start"),
        impl_->kernel.required("end"),
        sqlite::quote(kKernelTable)
    ));
    st.step();
    auto const where = ref_.path.string();
    SHARDPROF_EXPECTS(
        st.column_int(0) > 0,
        ErrorKind::EmptyTable,
        fmt::format("{}: {} has no rows", where, kKernelTable)
    );
    auto const t0 = to_timestamp(st.column_int(1), "kernel start", where);
    auto const last_end = to_timestamp(st.column_int(2), "kernel end", where);
    return TimeWindow{t0, last_end.plus(1)};
}

std::vector<KernelRecord> TraceReader::load_kernels(TimeWindow window) {
    SHARDPROF_EXPECTS(
        !window.empty(),
        ErrorKind::InvalidRange,
        fmt::format("empty window [{}, {})", window.begin.ns(), window.end.ns())
    );
    auto& impl = *impl_;
    auto st = impl.db.prepare(
        impl.kernel_select + window_clause(window) + " ORDER BY \"start\", rowid"
    );
    bind_window(st, window);
    auto const where = ref_.path.string();
    std::vector<KernelRecord> out;
    while (st.step()) {
        KernelRecord k;
        k.start = to_timestamp(st.column_int(0), "kernel start", where);
        k.end = to_timestamp(st.column_int(1), "kernel end", where);
        k.device_id = static_cast<std::int32_t>(st.column_int(2));
        k.stream_id = static_cast<std::int32_t>(st.column_int(3));
        k.name_id = st.column_is_text(4) ? impl.intern(st.column_text(4)) : st.column_int(4);
        for (int i = 0; i < 3; ++i) {
            k.grid[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(st.column_int(5 + i));
            k.block[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(st.column_int(8 + i));
        }
        k.registers_per_thread = static_cast<std::int32_t>(st.column_int(11));
        k.shared_mem_bytes = st.column_int(12);
        validate(k);
        out.push_back(k);
    }
    return out;
}

std::vector<MemcpyRecord> TraceReader::load_memcpys(std::optional<TimeWindow> window) {
    SHARDPROF_EXPECTS(
        !window || !window->empty(), ErrorKind::InvalidRange, "empty memcpy window"
    );
    auto& impl = *impl_;
    auto st = impl.db.prepare(
        impl.memcpy_select + window_clause(window) + " ORDER BY \"start\", rowid"
    );
    bind_window(st, window);
    auto const where = ref_.path.string();
    std::vector<MemcpyRecord> out;
    while (st.step()) {
        MemcpyRecord m;
        m.start = to_timestamp(st.column_int(0), "memcpy start", where);
        m.end = to_timestamp(st.column_int(1), "memcpy end", where);
        m.device_id = static_cast<std::int32_t>(st.column_int(2));
        m.stream_id = static_cast<std::int32_t>(st.column_int(3));
        auto const bytes = st.column_int(4);
        SHARDPROF_EXPECTS(
            bytes >= 0, ErrorKind::SchemaMismatch, fmt::format("{}: negative memcpy size", where)
        );
        m.bytes = static_cast<std::uint64_t>(bytes);
        m.copy_kind = decode_copy_kind(st.column_int(5));
        validate(m);
        out.push_back(m);
    }
    return out;
}

std::vector<GpuInfo> TraceReader::load_gpus() {
    auto st = impl_->db.prepare(impl_->gpu_select + " ORDER BY 1");
    std::vector<GpuInfo> out;
    while (st.step()) {
        GpuInfo g;
        g.device_id = static_cast<std::int32_t>(st.column_int(0));
        g.global_mem_bytes = static_cast<std::uint64_t>(st.column_int(1));
        g.bandwidth_kb_per_s = static_cast<std::uint64_t>(st.column_int(2));
        g.sm_count = static_cast<std::int32_t>(st.column_int(3));
        g.compute_capability_major = static_cast<std::int32_t>(st.column_int(4));
        g.compute_capability_minor = static_cast<std::int32_t>(st.column_int(5));
        SHARDPROF_EXPECTS(
            out.empty() || out.back().device_id != g.device_id,
            ErrorKind::SchemaMismatch,
            fmt::format("{}: duplicate GPU device id {}", ref_.path.string(), g.device_id)
        );
        out.push_back(g);
    }
    return out;
}

TraceRecords TraceReader::load_records(TimeWindow window) {
    TraceRecords r;
    r.kernels = load_kernels(window);
    r.memcpys = load_memcpys(window);
    r.gpus = load_gpus();
    return r;
}

std::map<std::int64_t, std::string> TraceReader::kernel_names() {
    std::map<std::int64_t, std::string> out;
    auto& impl = *impl_;
    if (impl.name_col.empty()) {
        return out;
    }
    auto const col = sqlite::quote(impl.name_col);
    if (impl.db.has_table(kStringTable)) {
        auto st = impl.db.prepare(fmt::format(
            "SELECT DISTINCT s.id, s.value FROM {0} k JOIN {1} s ON s.id = k.{2} "
            "WHERE typeof(k.{2}) = 'integer' ORDER BY 1",
            sqlite::quote(kKernelTable),
            sqlite::quote(kStringTable),
            col
        ));
        while (st.step()) {
            out.emplace(st.column_int(0), st.column_text(1));
        }
    }
    impl.load_interned();
    for (auto const& [text, id] : impl.interned) {
        out.emplace(id, text);
    }
    return out;
}

TimeWindow scan_kernel_time_range(TraceDatabaseRef const& db) {
    return TraceReader{db}.scan_kernel_time_range();
}

TraceRecords load_records(TraceDatabaseRef const& db, TimeWindow window) {
    return TraceReader{db}.load_records(window);
}

// ---------------------------------------------------------------------------
// Join

JoinIndex::JoinIndex(std::span<MemcpyRecord const> memcpys, std::span<GpuInfo const> gpus) {
    for (auto const& m : memcpys) {
        auto& g = groups_[JoinKey::of(m).packed()];
        g.push_back(m);
        largest_group_ = std::max(largest_group_, g.size());
    }
    for (auto const& g : gpus) {
        gpus_.emplace(g.device_id, g);
    }
}

std::span<MemcpyRecord const> JoinIndex::matches(JoinKey key) const {
    auto it = groups_.find(key.packed());
    if (it == groups_.end()) {
        return {};
    }
    return it->second;
}

GpuInfo const* JoinIndex::gpu(std::int32_t device_id) const {
    auto it = gpus_.find(device_id);
    return it == gpus_.end() ? nullptr : &it->second;
}

std::uint64_t JoinIndex::output_rows(std::span<KernelRecord const> kernels) const {
    std::uint64_t n = 0;
    for (auto const& k : kernels) {
        n += std::max<std::uint64_t>(1, matches(JoinKey::of(k)).size());
    }
    return n;
}

std::optional<JoinedSample> JoinStream::next() {
    while (kernel_ < kernels_.size()) {
        auto const& k = kernels_[kernel_];
        auto const group = index_->matches(JoinKey::of(k));
        JoinedSample s;
        s.kernel = k;
        if (auto const* g = index_->gpu(k.device_id)) {
            s.gpu = *g;
        }
        if (group.empty()) {
            ++kernel_;
            return s;
        }
        s.memcpy = group[match_];
        if (++match_ == group.size()) {
            match_ = 0;
            ++kernel_;
        }
        return s;
    }
    return std::nullopt;
}

void left_join(
    std::span<KernelRecord const> kernels,
    JoinIndex const& index,
    std::function<void(JoinedSample const&)> const& sink
) {
    JoinStream stream{kernels, index};
    while (auto s = stream.next()) {
        sink(*s);
    }
}

std::vector<JoinedSample> left_join(
    std::span<KernelRecord const> kernels,
    std::span<MemcpyRecord const> memcpys,
    std::span<GpuInfo const> gpus
) {
    JoinIndex const index{memcpys, gpus};
    std::vector<JoinedSample> out;
    out.reserve(index.output_rows(kernels));
    left_join(kernels, index, [&](JoinedSample const& s) { out.push_back(s); });
    return out;
}

}  // namespace shardprof
