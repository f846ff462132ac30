/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shardprof {

/// Failure categories surfaced by every stage of the pipeline.
enum class ErrorKind {
    InvalidArgument,
    InvalidRange,
    OutOfRange,
    Overflow,
    EmptyTable,
    EmptyInput,
    SchemaMismatch,
    IoError,
    MalformedFile,
    MalformedCsv,
    ManifestConflict,
    ManifestMismatch,
    Timeout,
    PayloadTooLarge,
    Aborted,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string const& message);

    [[nodiscard]] ErrorKind kind() const noexcept {
        return kind_;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, std::string const& message);

}  // namespace shardprof

#define SHARDPROF_EXPECTS(cond, kind, msg)            \
    do {                                              \
        if (!(cond)) {                                \
            ::shardprof::fail((kind), (msg));         \
        }                                             \
    } while (0)
