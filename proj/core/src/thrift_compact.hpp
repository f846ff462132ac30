/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

// Thrift compact protocol, just enough for Parquet footers and page headers.

#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <shardprof/error.hpp>

namespace shardprof::thrift {

enum class Type : std::uint8_t {
    Stop = 0,
    True = 1,
    False = 2,
    Byte = 3,
    I16 = 4,
    I32 = 5,
    I64 = 6,
    Double = 7,
    Binary = 8,
    List = 9,
    Set = 10,
    Map = 11,
    Struct = 12,
};

class Encoder {
  public:
    void begin_struct() {
        last_field_.push_back(0);
    }
    void end_struct() {
        out_.push_back(0);
        last_field_.pop_back();
    }

    void field_i32(std::int16_t id, std::int32_t v) {
        header(id, Type::I32);
        varint(zigzag(v));
    }
    void field_i64(std::int16_t id, std::int64_t v) {
        header(id, Type::I64);
        varint(zigzag(v));
    }
    void field_byte(std::int16_t id, std::int8_t v) {
        header(id, Type::Byte);
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void field_bool(std::int16_t id, bool v) {
        header(id, v ? Type::True : Type::False);
    }
    void field_string(std::int16_t id, std::string_view s) {
        header(id, Type::Binary);
        string(s);
    }
    void field_struct(std::int16_t id) {
        header(id, Type::Struct);
        begin_struct();
    }
    void field_list(std::int16_t id, Type elem, std::size_t size) {
        header(id, Type::List);
        list_header(elem, size);
    }

    // List elements.
    void list_header(Type elem, std::size_t size) {
        if (size < 15) {
            out_.push_back(static_cast<std::uint8_t>((size << 4) | static_cast<unsigned>(elem)));
        } else {
            out_.push_back(static_cast<std::uint8_t>(0xF0 | static_cast<unsigned>(elem)));
            varint(size);
        }
    }
    void elem_i32(std::int32_t v) {
        varint(zigzag(v));
    }
    void elem_string(std::string_view s) {
        string(s);
    }

    [[nodiscard]] std::vector<std::uint8_t> const& bytes() const noexcept {
        return out_;
    }

  private:
    static std::uint64_t zigzag(std::int64_t v) {
        return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
    }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            out_.push_back(static_cast<std::uint8_t>(v | 0x80));
            v >>= 7;
        }
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void string(std::string_view s) {
        varint(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void header(std::int16_t id, Type t) {
        auto& last = last_field_.back();
        auto const delta = id - last;
        if (delta > 0 && delta <= 15) {
            out_.push_back(static_cast<std::uint8_t>((delta << 4) | static_cast<int>(t)));
        } else {
            out_.push_back(static_cast<std::uint8_t>(t));
            varint(zigzag(id));
        }
        last = id;
    }

    std::vector<std::uint8_t> out_;
    std::vector<std::int16_t> last_field_;
};

/// Decoded value tree; unknown fields are kept so callers pick what they need.
struct Value;
using Struct = std::map<std::int16_t, Value>;
using List = std::vector<Value>;

struct Value {
    std::variant<std::monostate, bool, std::int64_t, double, std::string, List, Struct> v;

    [[nodiscard]] std::int64_t as_int() const {
        auto const* p = std::get_if<std::int64_t>(&v);
        SHARDPROF_EXPECTS(p != nullptr, ErrorKind::MalformedFile, "thrift: expected integer");
        return *p;
    }
    [[nodiscard]] bool as_bool() const {
        auto const* p = std::get_if<bool>(&v);
        SHARDPROF_EXPECTS(p != nullptr, ErrorKind::MalformedFile, "thrift: expected bool");
        return *p;
    }
    [[nodiscard]] std::string const& as_string() const {
        auto const* p = std::get_if<std::string>(&v);
        SHARDPROF_EXPECTS(p != nullptr, ErrorKind::MalformedFile, "thrift: expected binary");
        return *p;
    }
    [[nodiscard]] List const& as_list() const {
        auto const* p = std::get_if<List>(&v);
        SHARDPROF_EXPECTS(p != nullptr, ErrorKind::MalformedFile, "thrift: expected list");
        return *p;
    }
    [[nodiscard]] Struct const& as_struct() const {
        auto const* p = std::get_if<Struct>(&v);
        SHARDPROF_EXPECTS(p != nullptr, ErrorKind::MalformedFile, "thrift: expected struct");
        return *p;
    }
};

inline Value const* find(Struct const& s, std::int16_t id) {
    auto it = s.find(id);
    return it == s.end() ? nullptr : &it->second;
}

inline Value const& require(Struct const& s, std::int16_t id, char const* what) {
    auto const* v = find(s, id);
    SHARDPROF_EXPECTS(
        v != nullptr, ErrorKind::MalformedFile, std::string("thrift: missing field ") + what
    );
    return *v;
}

class Decoder {
  public:
    explicit Decoder(std::span<std::uint8_t const> data) : data_{data} {}

    Struct read_struct() {
        SHARDPROF_EXPECTS(++depth_ < 64, ErrorKind::MalformedFile, "thrift: nesting too deep");
        Struct s;
        std::int16_t last = 0;
        for (;;) {
            auto const b = byte();
            auto const type = static_cast<Type>(b & 0x0F);
            if (type == Type::Stop) {
                break;
            }
            auto const delta = b >> 4;
            std::int16_t id;
            if (delta != 0) {
                id = static_cast<std::int16_t>(last + delta);
            } else {
                id = static_cast<std::int16_t>(unzigzag(varint()));
            }
            last = id;
            s[id] = read_value(type, true);
        }
        --depth_;
        return s;
    }

    [[nodiscard]] std::size_t position() const noexcept {
        return pos_;
    }

  private:
    Value read_value(Type type, bool in_field) {
        switch (type) {
        case Type::True:
            return Value{true};
        case Type::False:
            return Value{false};
        case Type::Byte:
            return Value{static_cast<std::int64_t>(static_cast<std::int8_t>(byte()))};
        case Type::I16:
        case Type::I32:
        case Type::I64:
            return Value{unzigzag(varint())};
        case Type::Double: {
            need(8);
            double d;
            std::memcpy(&d, data_.data() + pos_, 8);
            pos_ += 8;
            return Value{d};
        }
        case Type::Binary: {
            auto const n = varint();
            need(n);
            std::string s(reinterpret_cast<char const*>(data_.data() + pos_), n);
            pos_ += n;
            return Value{std::move(s)};
        }
        case Type::List:
        case Type::Set: {
            auto const h = byte();
            std::uint64_t size = h >> 4;
            auto const elem = static_cast<Type>(h & 0x0F);
            if (size == 15) {
                size = varint();
            }
            SHARDPROF_EXPECTS(
                size <= data_.size() - pos_, ErrorKind::MalformedFile, "thrift: list too long"
            );
            List l;
            l.reserve(size);
            for (std::uint64_t i = 0; i < size; ++i) {
                if (elem == Type::True || elem == Type::False) {
                    l.push_back(Value{byte() == 1});
                } else {
                    l.push_back(read_value(elem, false));
                }
            }
            return Value{std::move(l)};
        }
        case Type::Map: {
            auto const size = varint();
            List l;
            if (size > 0) {
                auto const kv = byte();
                auto const kt = static_cast<Type>(kv >> 4);
                auto const vt = static_cast<Type>(kv & 0x0F);
                for (std::uint64_t i = 0; i < size; ++i) {
                    l.push_back(read_value(kt, false));
                    l.push_back(read_value(vt, false));
                }
            }
            return Value{std::move(l)};
        }
        case Type::Struct:
            return Value{read_struct()};
        case Type::Stop:
            break;
        }
        (void)in_field;
        fail(ErrorKind::MalformedFile, "thrift: unknown type");
    }

    std::uint8_t byte() {
        need(1);
        return data_[pos_++];
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            auto const b = byte();
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) {
                return v;
            }
        }
        fail(ErrorKind::MalformedFile, "thrift: varint too long");
    }
    static std::int64_t unzigzag(std::uint64_t v) {
        return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
    }
    void need(std::size_t n) const {
        SHARDPROF_EXPECTS(n <= data_.size() - pos_, ErrorKind::MalformedFile, "thrift: truncated");
    }

    std::span<std::uint8_t const> data_;
    std::size_t pos_{0};
    int depth_{0};
};

}  // namespace shardprof::thrift
