/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include <shardprof/trace_ingest.hpp>

namespace shardprof::synth {

inline constexpr char const* kDatabaseName = "trace.sqlite";
inline constexpr char const* kGroundTruthName = "ground_truth.json";

struct StallBurst {
    double time_s{0.0};  ///< offset from the first kernel start
    double width_s{1.0};
    double amplitude{10.0};

    bool operator==(StallBurst const&) const = default;
};

struct SynthSpec {
    std::uint64_t seed{7};
    double duration_s{10.0};
    double kernels_per_s{100.0};
    double memcpys_per_s{20.0};
    int devices{1};
    int streams_per_device{2};
    /// HtoD : DtoH : DtoD weights.
    std::array<double, 3> direction_ratio{50.0, 50.0, 1.0};
    std::vector<StallBurst> stall_bursts;

    Nanoseconds origin_ns{1'000'000'000};
    Nanoseconds memcpy_duration_ns{2'000'000};  ///< mean, before bursts
    std::uint64_t max_copy_bytes{std::uint64_t{1} << 24};
    int kernel_names{8};

    /// `InvalidArgument` on negative rates, bad weights or empty topology.
    void validate() const;
};

struct KeyMultiplicity {
    std::uint64_t kernels{0};
    std::uint64_t memcpys{0};

    bool operator==(KeyMultiplicity const&) const = default;
};

struct GroundTruth {
    std::uint64_t kernel_count{0};
    std::uint64_t memcpy_count{0};
    /// (device id, stream id) -> records on that key.
    std::map<std::pair<std::int32_t, std::int32_t>, KeyMultiplicity> keys;
    std::uint64_t expected_join_rows{0};
    /// [first kernel start, last kernel end + 1).
    TimeWindow kernel_range;
    std::uint64_t htod_count{0};
    std::uint64_t dtoh_count{0};
    std::uint64_t dtod_count{0};
    /// Absolute burst windows.
    std::vector<TimeWindow> bursts;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    static GroundTruth from_json(nlohmann::json const& j);

    bool operator==(GroundTruth const&) const = default;
};

/// Deterministic counter-based generator: value(stream, i) depends only on the seed and its arguments.
class CounterRng {
  public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_{seed} {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept;
    /// Uniform in [0, 1).
    [[nodiscard]] double unit(std::uint64_t stream, std::uint64_t counter) const noexcept;
    /// Uniform in [0, n); n > 0.
    [[nodiscard]] std::uint64_t below(std::uint64_t stream, std::uint64_t counter, std::uint64_t n)
        const noexcept;

  private:
    std::uint64_t seed_;
};

/// The records a spec describes, in emission order.
[[nodiscard]] TraceRecords generate_records(SynthSpec const& spec);

/// Ground truth computed directly from records.
[[nodiscard]] GroundTruth ground_truth_of(SynthSpec const& spec, TraceRecords const& records);

/**
 * @brief Write `trace.sqlite` and `ground_truth.json` into `out_dir`.
 *
 * The database holds the CUPTI kernel, memcpy and GPU tables plus the
 * string table kernel names refer to. Identical specs give byte-identical
 * files.
 */
std::pair<TraceDatabaseRef, GroundTruth> generate_db(
    SynthSpec const& spec, std::filesystem::path const& out_dir
);

/// Write `records` as a CUPTI-style database at `path`.
void write_database(TraceRecords const& records, int kernel_names, std::filesystem::path const& path);

}  // namespace shardprof::synth
