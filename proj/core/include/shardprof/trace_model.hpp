/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shardprof {

/// Duration in nanoseconds.
using Nanoseconds = std::uint64_t;

/**
 * @brief Point on the trace clock, nanoseconds since the trace epoch.
 *
 * Arithmetic is checked: any operation that would wrap throws
 * `ErrorKind::Overflow`.
 */
class Timestamp {
  public:
    constexpr Timestamp() noexcept = default;
    constexpr explicit Timestamp(std::uint64_t ns) noexcept : ns_{ns} {}

    [[nodiscard]] constexpr std::uint64_t ns() const noexcept {
        return ns_;
    }

    [[nodiscard]] Timestamp plus(Nanoseconds d) const;
    /// Distance from `earlier` to this timestamp; `earlier` must not be later.
    [[nodiscard]] Nanoseconds since(Timestamp earlier) const;

    constexpr auto operator<=>(Timestamp const&) const noexcept = default;

  private:
    std::uint64_t ns_{0};
};

/// Half-open window [begin, end) on the trace clock.
struct TimeWindow {
    Timestamp begin;
    Timestamp end;

    [[nodiscard]] constexpr bool contains(Timestamp t) const noexcept {
        return begin <= t && t < end;
    }
    [[nodiscard]] constexpr bool empty() const noexcept {
        return !(begin < end);
    }
    [[nodiscard]] Nanoseconds length() const;

    constexpr bool operator==(TimeWindow const&) const noexcept = default;
};

/**
 * @brief Direction of a memory transfer.
 *
 * The raw CUPTI code is always retained so unknown kinds survive a round
 * trip through the shard files.
 */
class CopyKind {
  public:
    enum class Tag : std::uint8_t { HtoD, DtoH, DtoD, Other };

    static constexpr std::int64_t kHtoDCode = 1;
    static constexpr std::int64_t kDtoHCode = 2;
    static constexpr std::int64_t kDtoDCode = 8;

    static constexpr CopyKind htod() noexcept {
        return CopyKind{kHtoDCode};
    }
    static constexpr CopyKind dtoh() noexcept {
        return CopyKind{kDtoHCode};
    }
    static constexpr CopyKind dtod() noexcept {
        return CopyKind{kDtoDCode};
    }

    [[nodiscard]] constexpr Tag tag() const noexcept {
        switch (raw_) {
        case kHtoDCode:
            return Tag::HtoD;
        case kDtoHCode:
            return Tag::DtoH;
        case kDtoDCode:
            return Tag::DtoD;
        default:
            return Tag::Other;
        }
    }
    [[nodiscard]] constexpr std::int64_t raw() const noexcept {
        return raw_;
    }
    [[nodiscard]] std::string name() const;

    constexpr auto operator<=>(CopyKind const&) const noexcept = default;

  private:
    friend constexpr CopyKind decode_copy_kind(std::int64_t raw) noexcept;
    constexpr explicit CopyKind(std::int64_t raw) noexcept : raw_{raw} {}

    std::int64_t raw_;
};

/// Total mapping from CUPTI copy-kind codes: 1 HtoD, 2 DtoH, 8 DtoD, else Other.
[[nodiscard]] constexpr CopyKind decode_copy_kind(std::int64_t raw) noexcept {
    return CopyKind{raw};
}

struct KernelRecord {
    Timestamp start;
    Timestamp end;
    std::int32_t device_id{0};
    std::int32_t stream_id{0};
    std::int64_t name_id{0};
    std::array<std::int32_t, 3> grid{1, 1, 1};
    std::array<std::int32_t, 3> block{1, 1, 1};
    std::int32_t registers_per_thread{0};
    std::int64_t shared_mem_bytes{0};

    [[nodiscard]] Nanoseconds duration() const {
        return end.since(start);
    }

    bool operator==(KernelRecord const&) const = default;
};

struct MemcpyRecord {
    Timestamp start;
    Timestamp end;
    std::uint64_t bytes{0};
    CopyKind copy_kind{CopyKind::htod()};
    std::int32_t device_id{0};
    std::int32_t stream_id{0};

    [[nodiscard]] Nanoseconds duration() const {
        return end.since(start);
    }

    bool operator==(MemcpyRecord const&) const = default;
};

struct GpuInfo {
    std::int32_t device_id{0};
    std::uint64_t global_mem_bytes{0};
    std::uint64_t bandwidth_kb_per_s{0};
    std::int32_t sm_count{0};
    std::int32_t compute_capability_major{0};
    std::int32_t compute_capability_minor{0};

    bool operator==(GpuInfo const&) const = default;
};

/// One row of the kernel -> memcpy -> gpu left-join chain.
struct JoinedSample {
    KernelRecord kernel;
    std::optional<MemcpyRecord> memcpy;
    std::optional<GpuInfo> gpu;

    bool operator==(JoinedSample const&) const = default;
};

/// Throw `InvalidArgument` unless the record satisfies its invariants.
void validate(KernelRecord const& k);
void validate(MemcpyRecord const& m);

struct PartitionConfig {
    std::int64_t num_shards{1};
    std::int64_t num_workers{1};
    Timestamp range_start;
    Timestamp range_end;

    void validate() const;

    bool operator==(PartitionConfig const&) const = default;
};

/**
 * @brief Exact non-negative rational, used for the variability fraction so
 * that `ceil(fraction * count)` never suffers binary rounding.
 */
struct Fraction {
    std::uint64_t numerator{1};
    std::uint64_t denominator{20};

    /// Parse a decimal literal such as "0.05" or "1".
    static Fraction parse(std::string_view text);

    /// ceil(numerator * count / denominator), computed exactly.
    [[nodiscard]] std::uint64_t ceil_times(std::uint64_t count) const;
    [[nodiscard]] double value() const noexcept {
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    [[nodiscard]] std::string to_string() const;

    bool operator==(Fraction const&) const = default;
};

struct AggregationConfig {
    Nanoseconds interval_ns{1'000'000'000};
    std::int64_t top_k_shards{5};
    Fraction variability_fraction{1, 20};

    void validate() const;
};

}  // namespace shardprof
