/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <shardprof/error.hpp>

namespace shardprof {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument:
        return "InvalidArgument";
    case ErrorKind::InvalidRange:
        return "InvalidRange";
    case ErrorKind::OutOfRange:
        return "OutOfRange";
    case ErrorKind::Overflow:
        return "Overflow";
    case ErrorKind::EmptyTable:
        return "EmptyTable";
    case ErrorKind::EmptyInput:
        return "EmptyInput";
    case ErrorKind::SchemaMismatch:
        return "SchemaMismatch";
    case ErrorKind::IoError:
        return "IoError";
    case ErrorKind::MalformedFile:
        return "MalformedFile";
    case ErrorKind::MalformedCsv:
        return "MalformedCsv";
    case ErrorKind::ManifestConflict:
        return "ManifestConflict";
    case ErrorKind::ManifestMismatch:
        return "ManifestMismatch";
    case ErrorKind::Timeout:
        return "Timeout";
    case ErrorKind::PayloadTooLarge:
        return "PayloadTooLarge";
    case ErrorKind::Aborted:
        return "Aborted";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, std::string const& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, std::string const& message) {
    throw Error(kind, message);
}

}  // namespace shardprof
