/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace shardprof::sqlite {

enum class Mode { ReadOnly, Create };

class Statement;

/// Owning handle to an SQLite database connection.
class Database {
  public:
    Database(std::filesystem::path const& path, Mode mode);
    ~Database();

    Database(Database&& other) noexcept;
    Database& operator=(Database&& other) noexcept;
    Database(Database const&) = delete;
    Database& operator=(Database const&) = delete;

    void exec(std::string const& sql);
    [[nodiscard]] Statement prepare(std::string const& sql);

    [[nodiscard]] bool has_table(std::string_view table);
    /// Column names of `table` in declaration order.
    [[nodiscard]] std::vector<std::string> columns(std::string_view table);

    [[nodiscard]] std::filesystem::path const& path() const noexcept {
        return path_;
    }

  private:
    friend class Statement;
    [[noreturn]] void raise(int rc, std::string_view what) const;

    sqlite3* db_{nullptr};
    std::filesystem::path path_;
};

/// Prepared statement; `step()` returns false once rows are exhausted.
class Statement {
  public:
    ~Statement();
    Statement(Statement&& other) noexcept;
    Statement& operator=(Statement&& other) noexcept;
    Statement(Statement const&) = delete;
    Statement& operator=(Statement const&) = delete;

    Statement& bind(int index, std::int64_t value);
    Statement& bind(int index, double value);
    Statement& bind(int index, std::string_view value);
    Statement& bind_null(int index);

    bool step();
    void reset();

    [[nodiscard]] std::int64_t column_int(int index) const;
    [[nodiscard]] double column_double(int index) const;
    [[nodiscard]] std::string column_text(int index) const;
    [[nodiscard]] bool column_is_null(int index) const;
    [[nodiscard]] bool column_is_text(int index) const;

  private:
    friend class Database;
    Statement(Database& db, sqlite3_stmt* stmt) : db_{&db}, stmt_{stmt} {}

    Database* db_;
    sqlite3_stmt* stmt_;
};

/// Quote an identifier for inclusion in SQL text.
[[nodiscard]] std::string quote(std::string_view identifier);

}  // namespace shardprof::sqlite
