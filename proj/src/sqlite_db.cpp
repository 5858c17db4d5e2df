#include "sqlforge/sqlite_db.hpp"

#include <sqlite3.h>

#include <cstdio>
#include <sstream>

#include "sqlforge/error.hpp"

namespace sqlforge {

bool is_null(const CellValue& v) { return std::holds_alternative<std::monostate>(v); }

std::string cell_to_text(const CellValue& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NULL"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.15g", d);
      return buf;
    }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Blob& b) const {
      static constexpr char hex[] = "0123456789ABCDEF";
      std::string out = "X'";
      for (unsigned char c : b.bytes) {
        out += hex[c >> 4];
        out += hex[c & 0xF];
      }
      out += '\'';
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

void Database::Closer::operator()(sqlite3* db) const { sqlite3_close_v2(db); }

Database::Database(sqlite3* db, std::filesystem::path path, bool read_only)
    : db_(db), path_(std::move(path)), read_only_(read_only) {}

Database Database::open_read_only(const std::filesystem::path& file) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(file, ec)) {
    throw IoError("cannot open database '" + file.string() + "': no such file");
  }
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(file.string().c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX,
                           nullptr);
  Database db(raw, file, true);
  if (rc != SQLITE_OK) {
    std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
    throw IoError("cannot open database '" + file.string() + "': " + msg);
  }
  // Touch the schema so that a non-database file fails here rather than later.
  char* err = nullptr;
  rc = sqlite3_exec(raw, "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errmsg(raw);
    sqlite3_free(err);
    throw IoError("cannot read database '" + file.string() + "': " + msg);
  }
  return db;
}

Database Database::create(const std::filesystem::path& file) {
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(file.string().c_str(), &raw,
                           SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX, nullptr);
  Database db(raw, file, false);
  if (rc != SQLITE_OK) {
    std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
    throw IoError("cannot create database '" + file.string() + "': " + msg);
  }
  return db;
}

void Database::exec_script(std::string_view sql) {
  char* err = nullptr;
  std::string text(sql);
  int rc = sqlite3_exec(db_.get(), text.c_str(), nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errmsg(db_.get());
    sqlite3_free(err);
    throw Error(msg);
  }
}

void Statement::Finalizer::operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }

Statement::Statement(const Database& db, std::string_view sql) : db_(db.handle()) {
  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
  stmt_.reset(raw);
  if (rc != SQLITE_OK) throw Error(sqlite3_errmsg(db_));
  if (!raw) throw Error("empty statement");
}

bool Statement::step() {
  int rc = sqlite3_step(stmt_.get());
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  throw Error(sqlite3_errmsg(db_));
}

int Statement::column_count() const { return sqlite3_column_count(stmt_.get()); }

std::string Statement::column_name(int i) const {
  const char* name = sqlite3_column_name(stmt_.get(), i);
  return name ? name : "";
}

CellValue Statement::column(int i) const {
  sqlite3_stmt* s = stmt_.get();
  switch (sqlite3_column_type(s, i)) {
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(s, i));
    case SQLITE_FLOAT:
      return sqlite3_column_double(s, i);
    case SQLITE_TEXT: {
      const auto* p = sqlite3_column_text(s, i);
      return std::string(reinterpret_cast<const char*>(p),
                         static_cast<std::size_t>(sqlite3_column_bytes(s, i)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(s, i));
      Blob b;
      b.bytes.assign(p, p + sqlite3_column_bytes(s, i));
      return b;
    }
    default:
      return std::monostate{};
  }
}

void build_database_from_script(const std::filesystem::path& out, std::string_view script) {
  std::error_code ec;
  std::filesystem::remove(out, ec);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path(), ec);
  Database db = Database::create(out);
  db.exec_script(script);
}

}  // namespace sqlforge
