/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <limits>
#include <numeric>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/trace_model.hpp>

namespace shardprof {

__extension__ using u128 = unsigned __int128;

Timestamp Timestamp::plus(Nanoseconds d) const {
    SHARDPROF_EXPECTS(
        d <= std::numeric_limits<std::uint64_t>::max() - ns_,
        ErrorKind::Overflow,
        fmt::format("timestamp {} + {} ns overflows", ns_, d)
    );
    return Timestamp{ns_ + d};
}

Nanoseconds Timestamp::since(Timestamp earlier) const {
    SHARDPROF_EXPECTS(
        earlier.ns_ <= ns_,
        ErrorKind::Overflow,
        fmt::format("timestamp {} precedes {}", ns_, earlier.ns_)
    );
    return ns_ - earlier.ns_;
}

Nanoseconds TimeWindow::length() const {
    return end.since(begin);
}

std::string CopyKind::name() const {
    switch (tag()) {
    case Tag::HtoD:
        return "HtoD";
    case Tag::DtoH:
        return "DtoH";
    case Tag::DtoD:
        return "DtoD";
    case Tag::Other:
        break;
    }
    return fmt::format("Other({})", raw_);
}

void validate(KernelRecord const& k) {
    SHARDPROF_EXPECTS(
        k.start <= k.end,
        ErrorKind::InvalidArgument,
        fmt::format("kernel end {} precedes start {}", k.end.ns(), k.start.ns())
    );
    SHARDPROF_EXPECTS(
        k.device_id >= 0 && k.stream_id >= 0,
        ErrorKind::InvalidArgument,
        fmt::format("kernel has negative device/stream id ({}, {})", k.device_id, k.stream_id)
    );
}

void validate(MemcpyRecord const& m) {
    SHARDPROF_EXPECTS(
        m.start <= m.end,
        ErrorKind::InvalidArgument,
        fmt::format("memcpy end {} precedes start {}", m.end.ns(), m.start.ns())
    );
}

void PartitionConfig::validate() const {
    SHARDPROF_EXPECTS(
        num_shards >= 1, ErrorKind::InvalidArgument, "num_shards must be >= 1"
    );
    SHARDPROF_EXPECTS(
        num_workers >= 1, ErrorKind::InvalidArgument, "num_workers must be >= 1"
    );
    SHARDPROF_EXPECTS(
        range_start < range_end,
        ErrorKind::InvalidRange,
        fmt::format("empty range [{}, {})", range_start.ns(), range_end.ns())
    );
}

Fraction Fraction::parse(std::string_view text) {
    auto bad = [&] {
        fail(ErrorKind::InvalidArgument, fmt::format("not a decimal fraction: '{}'", text));
    };
    if (text.empty()) {
        bad();
    }
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    bool seen_point = false;
    bool seen_digit = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_point) {
                bad();
            }
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') {
            bad();
        }
        seen_digit = true;
        if (num > std::numeric_limits<std::uint64_t>::max() / 10 - 9
            || (seen_point && den > std::numeric_limits<std::uint64_t>::max() / 10))
        {
            fail(ErrorKind::InvalidArgument, fmt::format("too many digits: '{}'", text));
        }
        num = num * 10 + static_cast<std::uint64_t>(c - '0');
        if (seen_point) {
            den *= 10;
        }
    }
    if (!seen_digit) {
        bad();
    }
    auto const g = std::gcd(num, den);
    Fraction f{g == 0 ? num : num / g, g == 0 ? den : den / g};
    SHARDPROF_EXPECTS(
        f.numerator > 0 && f.numerator <= f.denominator,
        ErrorKind::InvalidArgument,
        fmt::format("fraction {} outside (0, 1]", text)
    );
    return f;
}

std::uint64_t Fraction::ceil_times(std::uint64_t count) const {
    auto const prod = static_cast<u128>(numerator) * count;
    auto const q = prod / denominator;
    auto const r = prod % denominator;
    return static_cast<std::uint64_t>(q + (r != 0 ? 1 : 0));
}

std::string Fraction::to_string() const {
    return fmt::format("{}/{}", numerator, denominator);
}

void AggregationConfig::validate() const {
    SHARDPROF_EXPECTS(interval_ns >= 1, ErrorKind::InvalidArgument, "interval_ns must be >= 1");
    SHARDPROF_EXPECTS(
        top_k_shards >= 0, ErrorKind::InvalidArgument, "top_k_shards must be >= 0"
    );
    SHARDPROF_EXPECTS(
        variability_fraction.denominator > 0 && variability_fraction.numerator > 0
            && variability_fraction.numerator <= variability_fraction.denominator,
        ErrorKind::InvalidArgument,
        "variability fraction must lie in (0, 1]"
    );
}

}  // namespace shardprof
