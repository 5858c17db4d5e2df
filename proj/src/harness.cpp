#include "sqlforge/harness.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>

#include "sqlforge/error.hpp"
#include "sqlforge/parser.hpp"
#include "sqlforge/resolve.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
  Clock::time_point at;
};

int on_progress(void* data) { return Clock::now() > static_cast<Deadline*>(data)->at ? 1 : 0; }

// Installs the timeout for one statement and removes it again on scope exit.
class ProgressGuard {
 public:
  ProgressGuard(sqlite3* db, int timeout_ms) : db_(db) {
    deadline_.at = Clock::now() + std::chrono::milliseconds(timeout_ms);
    sqlite3_progress_handler(db_, 1000, on_progress, &deadline_);
  }
  ~ProgressGuard() { sqlite3_progress_handler(db_, 0, nullptr, nullptr); }
  ProgressGuard(const ProgressGuard&) = delete;
  ProgressGuard& operator=(const ProgressGuard&) = delete;

 private:
  sqlite3* db_;
  Deadline deadline_;
};

struct StmtCloser {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using StmtPtr = std::unique_ptr<sqlite3_stmt, StmtCloser>;

CellValue read_cell(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, i);
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
      return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
      Blob b;
      b.bytes.assign(p, p + sqlite3_column_bytes(stmt, i));
      return b;
    }
    default: return std::monostate{};
  }
}

bool only_space(const char* p) {
  for (; p && *p; ++p) {
    if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') return false;
  }
  return true;
}

// Prepares a single read-only statement or explains why not.
std::variant<ExecutionError, StmtPtr> prepare(sqlite3* db, std::string_view sql) {
  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
  StmtPtr stmt(raw);
  if (rc != SQLITE_OK) return ExecutionError{sqlite3_errmsg(db)};
  if (!stmt) return ExecutionError{"empty statement"};
  if (!only_space(tail)) return ExecutionError{"multiple statements are not allowed"};
  if (!sqlite3_stmt_readonly(stmt.get())) return ExecutionError{"only read-only statements are allowed"};
  return stmt;
}

std::string step_error(sqlite3* db, int rc) {
  if (rc == SQLITE_INTERRUPT) return "timeout";
  return sqlite3_errmsg(db);
}

// Numeric-looking text loses trailing fractional zeros: "5.50" -> "5.5", "5.0" -> "5".
std::string normalize_text(const std::string& s) {
  char* end = nullptr;
  if (s.empty()) return s;
  std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return s;
  auto dot = s.find('.');
  if (dot == std::string::npos || s.find_first_of("eE") != std::string::npos) return s;
  std::string out = s;
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return out;
}

std::optional<double> as_number(const CellValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

int type_rank(const CellValue& v) {
  if (is_null(v)) return 0;
  if (as_number(v)) return 1;
  if (std::holds_alternative<std::string>(v)) return 2;
  return 3;
}

bool cell_less(const CellValue& a, const CellValue& b) {
  int ra = type_rank(a);
  int rb = type_rank(b);
  if (ra != rb) return ra < rb;
  switch (ra) {
    case 1: return *as_number(a) < *as_number(b);
    case 2: return normalize_text(std::get<std::string>(a)) < normalize_text(std::get<std::string>(b));
    case 3: return std::get<Blob>(a).bytes < std::get<Blob>(b).bytes;
    default: return false;
  }
}

bool row_less(const std::vector<CellValue>& a, const std::vector<CellValue>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool rows_equal(const std::vector<CellValue>& a, const std::vector<CellValue>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!cells_equivalent(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

std::string ExecutionFeedback::to_text() const {
  if (const auto* e = error()) return "Execution failed: " + e->message;
  const ExecutionSuccess& s = *success();
  if (s.row_count == 0) return "Execution succeeded but returned no rows (columns: " + join(s.columns, ", ") + ").";
  std::string out = "Execution succeeded with " + std::to_string(s.row_count) + (s.truncated ? "+" : "") +
                    " row(s). Columns: " + join(s.columns, ", ") + ".";
  if (s.all_null_row) out += " The only row is entirely NULL.";
  out += "\nFirst rows:";
  for (const auto& row : s.sample_rows) out += "\n(" + join(row, ", ") + ")";
  return out;
}

ExecutionFeedback execute_sql(const Database& db, std::string_view sql, const ExecutionLimits& limits) {
  auto started = Clock::now();
  sqlite3* h = db.handle();
  ProgressGuard guard(h, limits.timeout_ms);
  auto prepared = prepare(h, sql);
  if (auto* e = std::get_if<ExecutionError>(&prepared)) return {*e};
  sqlite3_stmt* stmt = std::get<StmtPtr>(prepared).get();

  ExecutionSuccess s;
  int ncols = sqlite3_column_count(stmt);
  for (int i = 0; i < ncols; ++i) {
    const char* name = sqlite3_column_name(stmt, i);
    s.columns.push_back(name ? name : "");
  }
  bool first_row_all_null = false;
  for (;;) {
    int rc = sqlite3_step(stmt);
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) return {ExecutionError{step_error(h, rc)}};
    if (s.row_count == limits.max_rows) {
      s.truncated = true;
      break;
    }
    std::vector<std::string> cells;
    bool all_null = true;
    for (int i = 0; i < ncols; ++i) {
      CellValue v = read_cell(stmt, i);
      all_null = all_null && is_null(v);
      if (s.sample_rows.size() < limits.sample_rows) cells.push_back(cell_to_text(v));
    }
    if (s.row_count == 0) first_row_all_null = all_null;
    if (s.sample_rows.size() < limits.sample_rows) s.sample_rows.push_back(std::move(cells));
    ++s.row_count;
  }
  s.all_null_row = s.row_count == 1 && first_row_all_null;
  s.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  return {std::move(s)};
}

bool is_acceptable(const ExecutionFeedback& fb) {
  const ExecutionSuccess* s = fb.success();
  return s && s->row_count >= 1;
}

std::variant<ExecutionError, ResultMultiset> collect_result(const Database& db, std::string_view sql,
                                                            const ExecutionLimits& limits) {
  sqlite3* h = db.handle();
  ProgressGuard guard(h, limits.timeout_ms);
  auto prepared = prepare(h, sql);
  if (auto* e = std::get_if<ExecutionError>(&prepared)) return *e;
  sqlite3_stmt* stmt = std::get<StmtPtr>(prepared).get();
  ResultMultiset out;
  out.columns = static_cast<std::size_t>(sqlite3_column_count(stmt));
  out.ordered = has_top_level_order_by(sql);
  for (;;) {
    int rc = sqlite3_step(stmt);
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) return ExecutionError{step_error(h, rc)};
    if (out.rows.size() == limits.max_rows) {
      return ExecutionError{"result exceeds " + std::to_string(limits.max_rows) + " rows"};
    }
    std::vector<CellValue> row;
    for (std::size_t i = 0; i < out.columns; ++i) row.push_back(read_cell(stmt, static_cast<int>(i)));
    out.rows.push_back(std::move(row));
  }
  return out;
}

bool has_top_level_order_by(std::string_view sql) {
  try {
    auto tree = parse_sql(sql);
    return tree.root.kind == ast::NodeKind::select_core && ast::find_clause(tree.root, ast::ClauseKind::order_by);
  } catch (const Error&) {
    return false;
  }
}

bool cells_equivalent(const CellValue& a, const CellValue& b) {
  if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
  const auto* ia = std::get_if<std::int64_t>(&a);
  const auto* ib = std::get_if<std::int64_t>(&b);
  if (ia && ib) return *ia == *ib;
  auto na = as_number(a);
  auto nb = as_number(b);
  if (na && nb) return std::abs(*na - *nb) <= 1e-6 * std::max({1.0, std::abs(*na), std::abs(*nb)});
  if (na || nb) return false;
  const auto* sa = std::get_if<std::string>(&a);
  const auto* sb = std::get_if<std::string>(&b);
  if (sa && sb) return normalize_text(*sa) == normalize_text(*sb);
  const auto* ba = std::get_if<Blob>(&a);
  const auto* bb = std::get_if<Blob>(&b);
  return ba && bb && ba->bytes == bb->bytes;
}

bool results_equivalent(const ResultMultiset& a, const ResultMultiset& b) {
  if (a.columns != b.columns || a.rows.size() != b.rows.size()) return false;
  if (a.ordered || b.ordered) {
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      if (!rows_equal(a.rows[i], b.rows[i])) return false;
    }
    return true;
  }
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end(), row_less);
  std::sort(y.begin(), y.end(), row_less);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!rows_equal(x[i], y[i])) return false;
  }
  return true;
}

std::optional<std::string> structural_problem(std::string_view sql, const DatabaseSchema& schema) {
  try {
    auto tree = parse_sql(sql);
    auto report = resolve_references(tree, schema);
    if (!report.unresolved_tables.empty()) return "unknown table: " + report.unresolved_tables.front();
    if (!report.unresolved.empty()) return "unresolved column reference: " + report.unresolved.front();
    return std::nullopt;
  } catch (const UnsupportedError& e) {
    return std::string("query uses an unsupported construct: ") + e.what();
  } catch (const Error& e) {
    return std::string(e.what());
  }
}

RefineOutcome refine_until_valid(const std::string& question, const std::string& draft_sql,
                                 const DatabaseSchema& schema, const Database& db, SqlRefiner& refiner,
                                 int max_attempts, const ExecutionLimits& limits) {
  if (max_attempts < 1) throw PreconditionError("max_attempts must be at least 1");
  std::string sql = draft_sql;
  ExecutionFeedback fb;
  for (int attempt = 1;; ++attempt) {
    fb = execute_sql(db, sql, limits);
    if (is_acceptable(fb)) {
      if (auto problem = structural_problem(sql, schema)) {
        fb = {ExecutionError{*problem}};
      } else {
        return RefineAccepted{sql, attempt, fb};
      }
    }
    if (attempt == max_attempts) return RefineRejected{sql, attempt, fb};
    sql = refiner.refine(question, sql, schema, fb);
  }
}

std::vector<CellValue> DatabaseSampler::probe(const std::string& sql, std::size_t limit) {
  auto key = std::make_pair(sql, limit);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  std::vector<CellValue> out;
  sqlite3* h = db_.handle();
  ProgressGuard guard(h, limits_.timeout_ms);
  auto prepared = prepare(h, sql);
  if (auto* stmt = std::get_if<StmtPtr>(&prepared)) {
    while (out.size() < limit) {
      int rc = sqlite3_step(stmt->get());
      if (rc != SQLITE_ROW) {
        if (rc != SQLITE_DONE) out.clear();
        break;
      }
      CellValue v = read_cell(stmt->get(), 0);
      if (!is_null(v)) out.push_back(std::move(v));
    }
  }
  cache_.emplace(std::move(key), out);
  return out;
}

}  // namespace sqlforge
