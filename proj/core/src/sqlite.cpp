/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <utility>

#include <fmt/format.h>
#include <sqlite3.h>

#include <shardprof/error.hpp>
#include <shardprof/sqlite.hpp>

namespace shardprof::sqlite {

Database::Database(std::filesystem::path const& path, Mode mode) : path_{path} {
    if (mode == Mode::ReadOnly) {
        SHARDPROF_EXPECTS(
            std::filesystem::is_regular_file(path),
            ErrorKind::IoError,
            fmt::format("trace database {} does not exist", path.string())
        );
    }
    int const flags = mode == Mode::ReadOnly ? SQLITE_OPEN_READONLY
                                             : SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE;
    int const rc = sqlite3_open_v2(path.c_str(), &db_, flags | SQLITE_OPEN_NOMUTEX, nullptr);
    if (rc != SQLITE_OK) {
        std::string msg = db_ != nullptr ? sqlite3_errmsg(db_) : sqlite3_errstr(rc);
        sqlite3_close(db_);
        db_ = nullptr;
        fail(ErrorKind::IoError, fmt::format("cannot open {}: {}", path.string(), msg));
    }
    sqlite3_busy_timeout(db_, 10000);
}

Database::~Database() {
    if (db_ != nullptr) {
        sqlite3_close_v2(db_);
    }
}

Database::Database(Database&& other) noexcept
    : db_{std::exchange(other.db_, nullptr)}, path_{std::move(other.path_)} {}

Database& Database::operator=(Database&& other) noexcept {
    if (this != &other) {
        if (db_ != nullptr) {
            sqlite3_close_v2(db_);
        }
        db_ = std::exchange(other.db_, nullptr);
        path_ = std::move(other.path_);
    }
    return *this;
}

void Database::raise(int rc, std::string_view what) const {
    fail(
        ErrorKind::IoError,
        fmt::format("{}: {} ({})", path_.string(), what, db_ ? sqlite3_errmsg(db_) : sqlite3_errstr(rc))
    );
}

void Database::exec(std::string const& sql) {
    char* err = nullptr;
    int const rc = sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
        std::string msg = err != nullptr ? err : sqlite3_errstr(rc);
        sqlite3_free(err);
        fail(ErrorKind::IoError, fmt::format("{}: {}", path_.string(), msg));
    }
}

Statement Database::prepare(std::string const& sql) {
    sqlite3_stmt* stmt = nullptr;
    int const rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr);
    if (rc != SQLITE_OK) {
        raise(rc, fmt::format("cannot prepare '{}'", sql));
    }
    return Statement{*this, stmt};
}

bool Database::has_table(std::string_view table) {
    auto st = prepare("SELECT 1 FROM sqlite_master WHERE type IN ('table','view') AND name = ?1");
    st.bind(1, table);
    return st.step();
}

std::vector<std::string> Database::columns(std::string_view table) {
    std::vector<std::string> out;
    auto st = prepare(fmt::format("PRAGMA table_info({})", quote(table)));
    while (st.step()) {
        out.push_back(st.column_text(1));
    }
    return out;
}

Statement::~Statement() {
    if (stmt_ != nullptr) {
        sqlite3_finalize(stmt_);
    }
}

Statement::Statement(Statement&& other) noexcept
    : db_{other.db_}, stmt_{std::exchange(other.stmt_, nullptr)} {}

Statement& Statement::operator=(Statement&& other) noexcept {
    if (this != &other) {
        if (stmt_ != nullptr) {
            sqlite3_finalize(stmt_);
        }
        db_ = other.db_;
        stmt_ = std::exchange(other.stmt_, nullptr);
    }
    return *this;
}

Statement& Statement::bind(int index, std::int64_t value) {
    int const rc = sqlite3_bind_int64(stmt_, index, value);
    if (rc != SQLITE_OK) {
        db_->raise(rc, "bind failed");
    }
    return *this;
}

Statement& Statement::bind(int index, double value) {
    int const rc = sqlite3_bind_double(stmt_, index, value);
    if (rc != SQLITE_OK) {
        db_->raise(rc, "bind failed");
    }
    return *this;
}

Statement& Statement::bind(int index, std::string_view value) {
    int const rc = sqlite3_bind_text(
        stmt_, index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT
    );
    if (rc != SQLITE_OK) {
        db_->raise(rc, "bind failed");
    }
    return *this;
}

Statement& Statement::bind_null(int index) {
    int const rc = sqlite3_bind_null(stmt_, index);
    if (rc != SQLITE_OK) {
        db_->raise(rc, "bind failed");
    }
    return *this;
}

bool Statement::step() {
    int const rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) {
        return true;
    }
    if (rc == SQLITE_DONE) {
        return false;
    }
    db_->raise(rc, "step failed");
}

void Statement::reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
}

std::int64_t Statement::column_int(int index) const {
    return sqlite3_column_int64(stmt_, index);
}

double Statement::column_double(int index) const {
    return sqlite3_column_double(stmt_, index);
}

std::string Statement::column_text(int index) const {
    auto const* p = sqlite3_column_text(stmt_, index);
    if (p == nullptr) {
        return {};
    }
    return std::string(reinterpret_cast<char const*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, index)));
}

bool Statement::column_is_null(int index) const {
    return sqlite3_column_type(stmt_, index) == SQLITE_NULL;
}

bool Statement::column_is_text(int index) const {
    return sqlite3_column_type(stmt_, index) == SQLITE_TEXT;
}

std::string quote(std::string_view identifier) {
    std::string out = "\"";
    for (char c : identifier) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace shardprof::sqlite
