/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <shardprof/comm.hpp>
#include <shardprof/error.hpp>

namespace shardprof {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

/// Append-only little-endian encoder for collective payloads.
class ByteWriter {
  public:
    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        auto const pos = buf_.size();
        buf_.resize(pos + sizeof(T));
        std::memcpy(buf_.data() + pos, &value, sizeof(T));
    }

    void put_string(std::string_view s) {
        put<std::uint64_t>(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void put_span(std::span<T const> values) {
        put<std::uint64_t>(values.size());
        auto const pos = buf_.size();
        buf_.resize(pos + values.size_bytes());
        if (!values.empty()) {
            std::memcpy(buf_.data() + pos, values.data(), values.size_bytes());
        }
    }

    [[nodiscard]] Bytes take() && {
        return std::move(buf_);
    }

  private:
    Bytes buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<std::uint8_t const> data) : data_{data} {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string() {
        auto const n = get<std::uint64_t>();
        need(n);
        std::string s(reinterpret_cast<char const*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    template <typename T>
        requires std::is_arithmetic_v<T>
    void get_into(std::vector<T>& out) {
        auto const n = get<std::uint64_t>();
        SHARDPROF_EXPECTS(
            n <= (data_.size() - pos_) / sizeof(T), ErrorKind::MalformedFile, "truncated payload"
        );
        auto const old = out.size();
        out.resize(old + n);
        if (n != 0) {
            std::memcpy(out.data() + old, data_.data() + pos_, n * sizeof(T));
        }
        pos_ += n * sizeof(T);
    }

    [[nodiscard]] bool done() const noexcept {
        return pos_ == data_.size();
    }

  private:
    void need(std::size_t n) const {
        SHARDPROF_EXPECTS(n <= data_.size() - pos_, ErrorKind::MalformedFile, "truncated payload");
    }

    std::span<std::uint8_t const> data_;
    std::size_t pos_{0};
};

}  // namespace shardprof
