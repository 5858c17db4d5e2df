#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace sqlforge {

struct Blob {
  std::vector<unsigned char> bytes;
  bool operator==(const Blob&) const = default;
};

// One cell of a result row, in the engine's storage classes.
using CellValue = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

bool is_null(const CellValue& v);
std::string cell_to_text(const CellValue& v);

// Owning handle to one SQLite connection. Move-only.
class Database {
 public:
  static Database open_read_only(const std::filesystem::path& file);
  // Opens read-write, creating the file when missing. Used to build fixtures.
  static Database create(const std::filesystem::path& file);

  Database(Database&&) noexcept = default;
  Database& operator=(Database&&) noexcept = default;

  sqlite3* handle() const { return db_.get(); }
  const std::filesystem::path& path() const { return path_; }
  bool read_only() const { return read_only_; }

  // Runs a multi-statement script; throws Error with the engine message.
  void exec_script(std::string_view sql);

 private:
  struct Closer {
    void operator()(sqlite3* db) const;
  };
  Database(sqlite3* db, std::filesystem::path path, bool read_only);

  std::unique_ptr<sqlite3, Closer> db_;
  std::filesystem::path path_;
  bool read_only_ = true;
};

// Prepared statement bound to a Database. Throws Error when preparation fails.
class Statement {
 public:
  Statement(const Database& db, std::string_view sql);

  // Returns true while a row is available.
  bool step();
  int column_count() const;
  std::string column_name(int i) const;
  CellValue column(int i) const;

 private:
  struct Finalizer {
    void operator()(sqlite3_stmt* stmt) const;
  };
  sqlite3* db_;
  std::unique_ptr<sqlite3_stmt, Finalizer> stmt_;
};

// Builds a database file from a SQL script, replacing any existing file.
void build_database_from_script(const std::filesystem::path& out, std::string_view script);

}  // namespace sqlforge
