/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <array>
#include <cstring>

#include <fmt/format.h>
#include <zlib.h>

#include <shardprof/error.hpp>
#include <shardprof/parquet.hpp>

#include "thrift_compact.hpp"

namespace shardprof::parquet {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'A', 'R', '1'};
constexpr std::int32_t kEncodingPlain = 0;
constexpr std::int32_t kEncodingRle = 3;
constexpr std::int32_t kRepetitionRequired = 0;
constexpr std::int32_t kRepetitionOptional = 1;
constexpr std::int32_t kConvertedUint64 = 14;
constexpr std::int32_t kConvertedUint32 = 13;
constexpr std::int32_t kPageData = 0;
constexpr std::int32_t kPageDictionary = 2;

using Buffer = std::vector<std::uint8_t>;

void put_varint(Buffer& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

/// RLE / bit-packed hybrid encoding of 0/1 definition levels (bit width 1).
Buffer encode_levels(std::vector<std::uint8_t> const& levels) {
    Buffer out;
    std::size_t const n = levels.size();
    std::size_t i = 0;
    auto run_at = [&](std::size_t pos) {
        std::size_t r = 1;
        while (pos + r < n && levels[pos + r] == levels[pos]) {
            ++r;
        }
        return r;
    };
    while (i < n) {
        auto const r = run_at(i);
        if (r >= 8) {
            put_varint(out, static_cast<std::uint64_t>(r) << 1);
            out.push_back(levels[i]);
            i += r;
            continue;
        }
        Buffer groups;
        std::size_t count = 0;
        do {
            std::uint8_t packed = 0;
            for (std::size_t b = 0; b < 8 && i < n; ++b, ++i) {
                packed |= static_cast<std::uint8_t>((levels[i] & 1) << b);
            }
            groups.push_back(packed);
            ++count;
        } while (i < n && run_at(i) < 8);
        put_varint(out, (static_cast<std::uint64_t>(count) << 1) | 1);
        out.insert(out.end(), groups.begin(), groups.end());
    }
    return out;
}

std::vector<std::uint8_t> decode_levels(
    std::uint8_t const* data, std::size_t size, std::size_t count, int bit_width
) {
    std::vector<std::uint8_t> out;
    out.reserve(count);
    std::size_t pos = 0;
    auto varint = [&] {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            SHARDPROF_EXPECTS(pos < size, ErrorKind::MalformedFile, "truncated level data");
            auto const b = data[pos++];
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) {
                return v;
            }
        }
        fail(ErrorKind::MalformedFile, "level varint too long");
    };
    std::size_t const value_bytes = static_cast<std::size_t>((bit_width + 7) / 8);
    while (out.size() < count) {
        auto const header = varint();
        if ((header & 1) == 0) {
            auto const run = header >> 1;
            SHARDPROF_EXPECTS(pos + value_bytes <= size, ErrorKind::MalformedFile, "truncated RLE run");
            std::uint32_t value = 0;
            for (std::size_t b = 0; b < value_bytes; ++b) {
                value |= static_cast<std::uint32_t>(data[pos + b]) << (8 * b);
            }
            pos += value_bytes;
            SHARDPROF_EXPECTS(value <= 1, ErrorKind::MalformedFile, "definition level above 1");
            auto const take = std::min<std::uint64_t>(run, count - out.size());
            out.insert(out.end(), take, static_cast<std::uint8_t>(value));
        } else {
            auto const groups = header >> 1;
            auto const nbytes = groups * static_cast<std::uint64_t>(bit_width);
            SHARDPROF_EXPECTS(pos + nbytes <= size, ErrorKind::MalformedFile, "truncated bit-packed run");
            std::uint64_t bitpos = 0;
            for (std::uint64_t v = 0; v < groups * 8 && out.size() < count; ++v) {
                std::uint32_t value = 0;
                for (int b = 0; b < bit_width; ++b, ++bitpos) {
                    auto const bit = (data[pos + bitpos / 8] >> (bitpos % 8)) & 1u;
                    value |= bit << b;
                }
                SHARDPROF_EXPECTS(value <= 1, ErrorKind::MalformedFile, "definition level above 1");
                out.push_back(static_cast<std::uint8_t>(value));
            }
            pos += nbytes;
        }
    }
    return out;
}

Buffer gzip_compress(Buffer const& in) {
    z_stream zs{};
    SHARDPROF_EXPECTS(
        deflateInit2(&zs, 1, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) == Z_OK,
        ErrorKind::IoError,
        "deflateInit2 failed"
    );
    Buffer out(deflateBound(&zs, static_cast<uLong>(in.size())) + 32);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    auto const rc = deflate(&zs, Z_FINISH);
    auto const produced = zs.total_out;
    deflateEnd(&zs);
    SHARDPROF_EXPECTS(rc == Z_STREAM_END, ErrorKind::IoError, "gzip compression failed");
    out.resize(produced);
    return out;
}

Buffer gzip_decompress(std::uint8_t const* data, std::size_t size, std::size_t expected) {
    z_stream zs{};
    SHARDPROF_EXPECTS(
        inflateInit2(&zs, 15 + 32) == Z_OK, ErrorKind::MalformedFile, "inflateInit2 failed"
    );
    Buffer out(expected);
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    auto const rc = inflate(&zs, Z_FINISH);
    auto const produced = zs.total_out;
    inflateEnd(&zs);
    SHARDPROF_EXPECTS(
        rc == Z_STREAM_END && produced == expected,
        ErrorKind::MalformedFile,
        "gzip page does not decompress to its declared size"
    );
    return out;
}

std::size_t value_width(PhysicalType t) {
    return t == PhysicalType::Int32 ? 4 : 8;
}

}  // namespace

// ---------------------------------------------------------------------------
// Writer

struct Writer::ChunkMeta {
    std::uint64_t data_page_offset;
    std::uint64_t uncompressed_size;
    std::uint64_t compressed_size;
    std::uint64_t num_values;
};

struct Writer::RowGroupMeta {
    std::uint64_t num_rows;
    std::uint64_t file_offset;
    std::vector<ChunkMeta> chunks;
};

Writer::Writer(std::filesystem::path path, std::vector<ColumnSpec> schema, WriterOptions options)
    : path_{std::move(path)}, schema_{std::move(schema)}, options_{options} {
    SHARDPROF_EXPECTS(!schema_.empty(), ErrorKind::InvalidArgument, "parquet schema is empty");
    SHARDPROF_EXPECTS(
        options_.row_group_rows >= 1, ErrorKind::InvalidArgument, "row_group_rows must be >= 1"
    );
    tmp_path_ = path_;
    tmp_path_ += ".tmp";
    file_ = std::fopen(tmp_path_.c_str(), "wb");
    SHARDPROF_EXPECTS(
        file_ != nullptr, ErrorKind::IoError, fmt::format("cannot create {}", tmp_path_.string())
    );
    pending_.resize(schema_.size());
    filled_.assign(schema_.size(), 0);
    write_bytes(kMagic.data(), kMagic.size());
}

Writer::~Writer() {
    if (file_ != nullptr) {
        std::fclose(file_);
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void Writer::write_bytes(void const* data, std::size_t n) {
    if (n == 0) {
        return;
    }
    SHARDPROF_EXPECTS(
        std::fwrite(data, 1, n, file_) == n,
        ErrorKind::IoError,
        fmt::format("write to {} failed", tmp_path_.string())
    );
    offset_ += n;
}

ColumnData& Writer::pending(std::size_t column) {
    SHARDPROF_EXPECTS(
        column < pending_.size(), ErrorKind::InvalidArgument, fmt::format("no column {}", column)
    );
    return pending_[column];
}

void Writer::put_int(std::size_t column, std::int64_t value) {
    auto& c = pending(column);
    SHARDPROF_EXPECTS(
        schema_[column].type != PhysicalType::Double,
        ErrorKind::InvalidArgument,
        fmt::format("column {} is DOUBLE", schema_[column].name)
    );
    c.ints.push_back(value);
    c.valid.push_back(1);
    ++filled_[column];
}

void Writer::put_double(std::size_t column, double value) {
    auto& c = pending(column);
    SHARDPROF_EXPECTS(
        schema_[column].type == PhysicalType::Double,
        ErrorKind::InvalidArgument,
        fmt::format("column {} is not DOUBLE", schema_[column].name)
    );
    c.doubles.push_back(value);
    c.valid.push_back(1);
    ++filled_[column];
}

void Writer::put_null(std::size_t column) {
    auto& c = pending(column);
    SHARDPROF_EXPECTS(
        schema_[column].nullable,
        ErrorKind::InvalidArgument,
        fmt::format("column {} is not nullable", schema_[column].name)
    );
    if (schema_[column].type == PhysicalType::Double) {
        c.doubles.push_back(0.0);
    } else {
        c.ints.push_back(0);
    }
    c.valid.push_back(0);
    ++filled_[column];
}

void Writer::end_row() {
    for (std::size_t i = 0; i < schema_.size(); ++i) {
        SHARDPROF_EXPECTS(
            filled_[i] == pending_rows_ + 1,
            ErrorKind::InvalidArgument,
            fmt::format("row {} has no value for column {}", rows_written(), schema_[i].name)
        );
    }
    if (++pending_rows_ >= options_.row_group_rows) {
        flush_row_group();
    }
}

void Writer::flush_row_group() {
    if (pending_rows_ == 0) {
        return;
    }
    RowGroupMeta rg{pending_rows_, offset_, {}};
    for (std::size_t ci = 0; ci < schema_.size(); ++ci) {
        auto const& spec = schema_[ci];
        auto& col = pending_[ci];
        Buffer page;
        if (spec.nullable) {
            auto const levels = encode_levels(col.valid);
            auto const len = static_cast<std::uint32_t>(levels.size());
            page.resize(4);
            std::memcpy(page.data(), &len, 4);
            page.insert(page.end(), levels.begin(), levels.end());
        }
        auto const width = value_width(spec.type);
        page.reserve(page.size() + pending_rows_ * width);
        for (std::size_t r = 0; r < pending_rows_; ++r) {
            if (col.valid[r] == 0) {
                continue;
            }
            std::uint8_t raw[8];
            if (spec.type == PhysicalType::Double) {
                std::memcpy(raw, &col.doubles[r], 8);
            } else if (spec.type == PhysicalType::Int32) {
                auto const v = static_cast<std::int32_t>(col.ints[r]);
                std::memcpy(raw, &v, 4);
            } else {
                std::memcpy(raw, &col.ints[r], 8);
            }
            page.insert(page.end(), raw, raw + width);
        }
        Buffer body = options_.codec == Codec::Gzip ? gzip_compress(page) : std::move(page);
        auto const uncompressed =
            options_.codec == Codec::Gzip ? page.size() : body.size();

        thrift::Encoder h;
        h.begin_struct();
        h.field_i32(1, kPageData);
        h.field_i32(2, static_cast<std::int32_t>(uncompressed));
        h.field_i32(3, static_cast<std::int32_t>(body.size()));
        h.field_struct(5);
        h.field_i32(1, static_cast<std::int32_t>(pending_rows_));
        h.field_i32(2, kEncodingPlain);
        h.field_i32(3, kEncodingRle);
        h.field_i32(4, kEncodingRle);
        h.end_struct();
        h.end_struct();

        ChunkMeta meta{offset_, 0, 0, pending_rows_};
        write_bytes(h.bytes().data(), h.bytes().size());
        write_bytes(body.data(), body.size());
        meta.uncompressed_size = h.bytes().size() + uncompressed;
        meta.compressed_size = h.bytes().size() + body.size();
        rg.chunks.push_back(meta);

        col.ints.clear();
        col.doubles.clear();
        col.valid.clear();
        filled_[ci] = 0;
    }
    total_rows_ += pending_rows_;
    pending_rows_ = 0;
    row_groups_.push_back(std::move(rg));
}

void Writer::close() {
    if (closed_) {
        return;
    }
    flush_row_group();

    thrift::Encoder m;
    m.begin_struct();
    m.field_i32(1, 1);
    m.field_list(2, thrift::Type::Struct, schema_.size() + 1);
    m.begin_struct();
    m.field_string(4, "schema");
    m.field_i32(5, static_cast<std::int32_t>(schema_.size()));
    m.end_struct();
    for (auto const& c : schema_) {
        m.begin_struct();
        m.field_i32(1, static_cast<std::int32_t>(c.type));
        m.field_i32(3, c.nullable ? kRepetitionOptional : kRepetitionRequired);
        m.field_string(4, c.name);
        if (c.is_unsigned) {
            bool const wide = c.type == PhysicalType::Int64;
            m.field_i32(6, wide ? kConvertedUint64 : kConvertedUint32);
            m.field_struct(10);  // LogicalType
            m.field_struct(10);  // INTEGER
            m.field_byte(1, wide ? 64 : 32);
            m.field_bool(2, false);
            m.end_struct();
            m.end_struct();
        }
        m.end_struct();
    }
    m.field_i64(3, static_cast<std::int64_t>(total_rows_));
    m.field_list(4, thrift::Type::Struct, row_groups_.size());
    for (auto const& rg : row_groups_) {
        std::uint64_t total_uncompressed = 0;
        std::uint64_t total_compressed = 0;
        m.begin_struct();
        m.field_list(1, thrift::Type::Struct, rg.chunks.size());
        for (std::size_t ci = 0; ci < rg.chunks.size(); ++ci) {
            auto const& ch = rg.chunks[ci];
            total_uncompressed += ch.uncompressed_size;
            total_compressed += ch.compressed_size;
            m.begin_struct();
            m.field_i64(2, static_cast<std::int64_t>(ch.data_page_offset));
            m.field_struct(3);
            m.field_i32(1, static_cast<std::int32_t>(schema_[ci].type));
            m.field_list(2, thrift::Type::I32, 2);
            m.elem_i32(kEncodingPlain);
            m.elem_i32(kEncodingRle);
            m.field_list(3, thrift::Type::Binary, 1);
            m.elem_string(schema_[ci].name);
            m.field_i32(4, static_cast<std::int32_t>(options_.codec));
            m.field_i64(5, static_cast<std::int64_t>(ch.num_values));
            m.field_i64(6, static_cast<std::int64_t>(ch.uncompressed_size));
            m.field_i64(7, static_cast<std::int64_t>(ch.compressed_size));
            m.field_i64(9, static_cast<std::int64_t>(ch.data_page_offset));
            m.end_struct();
            m.end_struct();
        }
        m.field_i64(2, static_cast<std::int64_t>(total_uncompressed));
        m.field_i64(3, static_cast<std::int64_t>(rg.num_rows));
        m.field_i64(5, static_cast<std::int64_t>(rg.file_offset));
        m.field_i64(6, static_cast<std::int64_t>(total_compressed));
        m.end_struct();
    }
    m.field_string(6, "shardprof");
    m.end_struct();

    auto const& footer = m.bytes();
    auto const len = static_cast<std::uint32_t>(footer.size());
    write_bytes(footer.data(), footer.size());
    write_bytes(&len, 4);
    write_bytes(kMagic.data(), kMagic.size());

    auto* f = file_;
    file_ = nullptr;
    bool const ok = std::fflush(f) == 0;
    bool const closed = std::fclose(f) == 0;
    SHARDPROF_EXPECTS(
        ok && closed, ErrorKind::IoError, fmt::format("closing {} failed", tmp_path_.string())
    );
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_, ec);
    SHARDPROF_EXPECTS(
        !ec,
        ErrorKind::IoError,
        fmt::format("cannot publish {}: {}", path_.string(), ec.message())
    );
    closed_ = true;
}

// ---------------------------------------------------------------------------
// Reader

namespace {

Buffer read_at(std::FILE* f, std::uint64_t offset, std::uint64_t size, std::string const& name) {
    Buffer out(size);
    SHARDPROF_EXPECTS(
        std::fseek(f, static_cast<long>(offset), SEEK_SET) == 0
            && std::fread(out.data(), 1, size, f) == size,
        ErrorKind::MalformedFile,
        fmt::format("{}: cannot read {} bytes at offset {}", name, size, offset)
    );
    return out;
}

}  // namespace

Reader::Reader(std::filesystem::path path) : path_{std::move(path)} {
    file_ = std::fopen(path_.c_str(), "rb");
    SHARDPROF_EXPECTS(
        file_ != nullptr, ErrorKind::IoError, fmt::format("cannot open {}", path_.string())
    );
    auto const name = path_.string();
    std::error_code ec;
    auto const size = std::filesystem::file_size(path_, ec);
    SHARDPROF_EXPECTS(
        !ec && size >= 12, ErrorKind::MalformedFile, fmt::format("{}: too small for parquet", name)
    );
    auto const head = read_at(file_, 0, 4, name);
    auto const tail = read_at(file_, size - 8, 8, name);
    SHARDPROF_EXPECTS(
        std::equal(kMagic.begin(), kMagic.end(), head.begin())
            && std::equal(kMagic.begin(), kMagic.end(), tail.begin() + 4),
        ErrorKind::MalformedFile,
        fmt::format("{}: missing PAR1 magic", name)
    );
    std::uint32_t footer_len;
    std::memcpy(&footer_len, tail.data(), 4);
    SHARDPROF_EXPECTS(
        footer_len <= size - 12, ErrorKind::MalformedFile, fmt::format("{}: bad footer length", name)
    );
    auto const footer = read_at(file_, size - 8 - footer_len, footer_len, name);
    thrift::Decoder dec{footer};
    auto const meta = dec.read_struct();

    auto const& schema = thrift::require(meta, 2, "schema").as_list();
    SHARDPROF_EXPECTS(!schema.empty(), ErrorKind::MalformedFile, fmt::format("{}: empty schema", name));
    for (std::size_t i = 1; i < schema.size(); ++i) {
        auto const& el = schema[i].as_struct();
        SHARDPROF_EXPECTS(
            thrift::find(el, 5) == nullptr || thrift::find(el, 5)->as_int() == 0,
            ErrorKind::MalformedFile,
            fmt::format("{}: nested schemas are not supported", name)
        );
        ColumnSpec c;
        c.name = thrift::require(el, 4, "name").as_string();
        auto const t = thrift::require(el, 1, "type").as_int();
        SHARDPROF_EXPECTS(
            t == 1 || t == 2 || t == 5,
            ErrorKind::MalformedFile,
            fmt::format("{}: column {} has unsupported physical type {}", name, c.name, t)
        );
        c.type = static_cast<PhysicalType>(t);
        auto const* rep = thrift::find(el, 3);
        auto const repetition = rep == nullptr ? kRepetitionRequired : rep->as_int();
        SHARDPROF_EXPECTS(
            repetition == kRepetitionRequired || repetition == kRepetitionOptional,
            ErrorKind::MalformedFile,
            fmt::format("{}: repeated column {} not supported", name, c.name)
        );
        c.nullable = repetition == kRepetitionOptional;
        if (auto const* conv = thrift::find(el, 6)) {
            c.is_unsigned = conv->as_int() == kConvertedUint64 || conv->as_int() == kConvertedUint32;
        }
        schema_.push_back(std::move(c));
    }
    num_rows_ = static_cast<std::uint64_t>(thrift::require(meta, 3, "num_rows").as_int());

    if (auto const* rgs = thrift::find(meta, 4)) {
        for (auto const& rgv : rgs->as_list()) {
            auto const& rg = rgv.as_struct();
            RowGroupLocation loc;
            loc.num_rows = static_cast<std::uint64_t>(thrift::require(rg, 3, "num_rows").as_int());
            auto const& cols = thrift::require(rg, 1, "columns").as_list();
            SHARDPROF_EXPECTS(
                cols.size() == schema_.size(),
                ErrorKind::MalformedFile,
                fmt::format("{}: row group column count mismatch", name)
            );
            for (auto const& ccv : cols) {
                auto const& cm = thrift::require(ccv.as_struct(), 3, "meta_data").as_struct();
                std::uint64_t offset =
                    static_cast<std::uint64_t>(thrift::require(cm, 9, "data_page_offset").as_int());
                if (auto const* dict = thrift::find(cm, 11)) {
                    offset = std::min(offset, static_cast<std::uint64_t>(dict->as_int()));
                }
                auto const codec = thrift::require(cm, 4, "codec").as_int();
                SHARDPROF_EXPECTS(
                    codec == 0 || codec == 2,
                    ErrorKind::MalformedFile,
                    fmt::format("{}: unsupported compression codec {}", name, codec)
                );
                loc.chunks.push_back(ChunkLocation{
                    offset,
                    static_cast<std::uint64_t>(
                        thrift::require(cm, 7, "total_compressed_size").as_int()
                    ),
                    static_cast<Codec>(codec),
                    static_cast<std::uint64_t>(thrift::require(cm, 5, "num_values").as_int())
                });
                SHARDPROF_EXPECTS(
                    loc.chunks.back().offset + loc.chunks.back().size <= size,
                    ErrorKind::MalformedFile,
                    fmt::format("{}: column chunk beyond end of file", name)
                );
            }
            row_groups_.push_back(std::move(loc));
        }
    }
}

Reader::~Reader() {
    if (file_ != nullptr) {
        std::fclose(file_);
    }
}

std::uint64_t Reader::row_group_rows(std::size_t index) const {
    return row_groups_.at(index).num_rows;
}

std::vector<ColumnData> Reader::read_row_group(std::size_t index) {
    auto const& rg = row_groups_.at(index);
    auto const name = path_.string();
    std::vector<ColumnData> out(schema_.size());
    for (std::size_t ci = 0; ci < schema_.size(); ++ci) {
        auto const& spec = schema_[ci];
        auto const& loc = rg.chunks[ci];
        auto const chunk = read_at(file_, loc.offset, loc.size, name);
        auto& col = out[ci];
        std::size_t pos = 0;
        while (col.valid.size() < rg.num_rows) {
            SHARDPROF_EXPECTS(
                pos < chunk.size(),
                ErrorKind::MalformedFile,
                fmt::format("{}: column {} ends early", name, spec.name)
            );
            thrift::Decoder dec{std::span{chunk}.subspan(pos)};
            auto const header = dec.read_struct();
            pos += dec.position();
            auto const type = thrift::require(header, 1, "page type").as_int();
            auto const uncompressed =
                static_cast<std::size_t>(thrift::require(header, 2, "page size").as_int());
            auto const compressed =
                static_cast<std::size_t>(thrift::require(header, 3, "page size").as_int());
            SHARDPROF_EXPECTS(
                pos + compressed <= chunk.size(),
                ErrorKind::MalformedFile,
                fmt::format("{}: page overruns column chunk", name)
            );
            SHARDPROF_EXPECTS(
                type != kPageDictionary,
                ErrorKind::MalformedFile,
                fmt::format("{}: dictionary-encoded column {} not supported", name, spec.name)
            );
            if (type != kPageData) {
                pos += compressed;
                continue;
            }
            Buffer page = loc.codec == Codec::Gzip
                              ? gzip_decompress(chunk.data() + pos, compressed, uncompressed)
                              : Buffer(chunk.begin() + static_cast<std::ptrdiff_t>(pos),
                                       chunk.begin() + static_cast<std::ptrdiff_t>(pos + compressed));
            pos += compressed;

            auto const& dph = thrift::require(header, 5, "data_page_header").as_struct();
            auto const num_values =
                static_cast<std::size_t>(thrift::require(dph, 1, "num_values").as_int());
            SHARDPROF_EXPECTS(
                thrift::require(dph, 2, "encoding").as_int() == kEncodingPlain,
                ErrorKind::MalformedFile,
                fmt::format("{}: column {} is not PLAIN encoded", name, spec.name)
            );
            std::size_t p = 0;
            std::vector<std::uint8_t> levels;
            if (spec.nullable) {
                SHARDPROF_EXPECTS(page.size() >= 4, ErrorKind::MalformedFile, "truncated levels");
                std::uint32_t len;
                std::memcpy(&len, page.data(), 4);
                SHARDPROF_EXPECTS(
                    4 + static_cast<std::size_t>(len) <= page.size(),
                    ErrorKind::MalformedFile,
                    "truncated levels"
                );
                levels = decode_levels(page.data() + 4, len, num_values, 1);
                p = 4 + len;
            } else {
                levels.assign(num_values, 1);
            }
            auto const width = value_width(spec.type);
            for (std::size_t v = 0; v < num_values; ++v) {
                if (levels[v] == 0) {
                    if (spec.type == PhysicalType::Double) {
                        col.doubles.push_back(0.0);
                    } else {
                        col.ints.push_back(0);
                    }
                    col.valid.push_back(0);
                    continue;
                }
                SHARDPROF_EXPECTS(
                    p + width <= page.size(),
                    ErrorKind::MalformedFile,
                    fmt::format("{}: column {} page truncated", name, spec.name)
                );
                if (spec.type == PhysicalType::Double) {
                    double d;
                    std::memcpy(&d, page.data() + p, 8);
                    col.doubles.push_back(d);
                } else if (spec.type == PhysicalType::Int32) {
                    std::int32_t x;
                    std::memcpy(&x, page.data() + p, 4);
                    col.ints.push_back(x);
                } else {
                    std::int64_t x;
                    std::memcpy(&x, page.data() + p, 8);
                    col.ints.push_back(x);
                }
                col.valid.push_back(1);
                p += width;
            }
        }
        SHARDPROF_EXPECTS(
            col.valid.size() == rg.num_rows,
            ErrorKind::MalformedFile,
            fmt::format("{}: column {} has {} values, expected {}", name, spec.name,
                        col.valid.size(), rg.num_rows)
        );
    }
    return out;
}

}  // namespace shardprof::parquet
