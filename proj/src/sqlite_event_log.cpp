#include <sqlite3.h>

#include <fmt/format.h>

#include "gwap/errors.hpp"
#include "gwap/event_log.hpp"

namespace gwap {

namespace {

[[noreturn]] void fail(sqlite3* db, std::string_view what)
{
    const int code = db ? sqlite3_errcode(db) : SQLITE_ERROR;
    const auto message = fmt::format("{}: {}", what, db ? sqlite3_errmsg(db) : "no database");
    if (code == SQLITE_BUSY || code == SQLITE_LOCKED || code == SQLITE_CONSTRAINT)
        throw Error(ErrorCode::ConflictRetry, message);
    throw Error(ErrorCode::StorageFailure, message);
}

struct Statement
{
    sqlite3_stmt* stmt = nullptr;

    Statement(sqlite3* db, const char* sql)
    {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK)
            fail(db, "prepare");
    }
    ~Statement() { sqlite3_finalize(stmt); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;
};

void exec(sqlite3* db, const char* sql)
{
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        const std::string message = err ? err : "unknown error";
        sqlite3_free(err);
        throw Error(ErrorCode::StorageFailure, fmt::format("sqlite: {}", message));
    }
}

} // namespace

struct SqliteEventLog::Impl
{
    sqlite3* db = nullptr;
    mutable std::mutex mutex;
};

SqliteEventLog::SqliteEventLog(const std::string& path) : impl_(std::make_unique<Impl>())
{
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(path.c_str(), &impl_->db, flags, nullptr) != SQLITE_OK) {
        const std::string message = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
        sqlite3_close(impl_->db);
        throw Error(ErrorCode::StorageFailure, fmt::format("cannot open store '{}': {}", path, message));
    }
    sqlite3_busy_timeout(impl_->db, 5000);
    exec(impl_->db, "PRAGMA journal_mode=WAL;");
    exec(impl_->db, "PRAGMA synchronous=NORMAL;");
    exec(impl_->db,
         "CREATE TABLE IF NOT EXISTS events ("
         " id INTEGER PRIMARY KEY,"
         " kind TEXT NOT NULL,"
         " at INTEGER NOT NULL,"
         " payload TEXT NOT NULL);");
}

SqliteEventLog::~SqliteEventLog() { sqlite3_close(impl_->db); }

std::vector<EventRecord> SqliteEventLog::load_all() const
{
    std::lock_guard lock(impl_->mutex);
    Statement q(impl_->db, "SELECT id, kind, at, payload FROM events ORDER BY id;");
    std::vector<EventRecord> out;
    int rc = 0;
    while ((rc = sqlite3_step(q.stmt)) == SQLITE_ROW) {
        EventRecord e;
        e.id = static_cast<std::uint64_t>(sqlite3_column_int64(q.stmt, 0));
        e.kind = parse_event_kind(reinterpret_cast<const char*>(sqlite3_column_text(q.stmt, 1)));
        e.at = sqlite3_column_int64(q.stmt, 2);
        const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(q.stmt, 3));
        try {
            e.payload = nlohmann::json::parse(text ? text : "null");
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::StorageFailure, fmt::format("corrupt payload for event {}: {}", e.id, ex.what()));
        }
        out.push_back(std::move(e));
    }
    if (rc != SQLITE_DONE)
        fail(impl_->db, "load events");
    return out;
}

void SqliteEventLog::do_append(std::span<const EventRecord> batch)
{
    std::lock_guard lock(impl_->mutex);
    sqlite3* db = impl_->db;
    if (sqlite3_exec(db, "BEGIN IMMEDIATE;", nullptr, nullptr, nullptr) != SQLITE_OK)
        fail(db, "begin");
    try {
        Statement ins(db, "INSERT INTO events (id, kind, at, payload) VALUES (?, ?, ?, ?);");
        for (std::size_t i = 0; i < batch.size(); ++i) {
            checkpoint(i);
            const auto& e = batch[i];
            const auto kind = std::string(to_string(e.kind));
            const auto payload = e.payload.dump();
            sqlite3_reset(ins.stmt);
            sqlite3_bind_int64(ins.stmt, 1, static_cast<sqlite3_int64>(e.id));
            sqlite3_bind_text(ins.stmt, 2, kind.c_str(), -1, SQLITE_TRANSIENT);
            sqlite3_bind_int64(ins.stmt, 3, e.at);
            sqlite3_bind_text(ins.stmt, 4, payload.c_str(), static_cast<int>(payload.size()), SQLITE_TRANSIENT);
            if (sqlite3_step(ins.stmt) != SQLITE_DONE)
                fail(db, "insert event");
        }
        if (sqlite3_exec(db, "COMMIT;", nullptr, nullptr, nullptr) != SQLITE_OK)
            fail(db, "commit");
    } catch (...) {
        sqlite3_exec(db, "ROLLBACK;", nullptr, nullptr, nullptr);
        throw;
    }
}

} // namespace gwap
