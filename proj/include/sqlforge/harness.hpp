#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sqlforge/schema.hpp"
#include "sqlforge/sqlite_db.hpp"
#include "sqlforge/value_sampler.hpp"

namespace sqlforge {

struct ExecutionLimits {
  int timeout_ms = 5000;
  std::size_t max_rows = 1000;
  std::size_t sample_rows = 5;  // m rows echoed back in feedback
};

struct ExecutionError {
  std::string message;  // engine message verbatim, or "timeout"
};

struct ExecutionSuccess {
  std::vector<std::string> columns;
  std::size_t row_count = 0;
  std::vector<std::vector<std::string>> sample_rows;
  double elapsed_ms = 0.0;
  bool truncated = false;
  // A single row whose cells are all NULL (MAX over an empty table and the like).
  // Still counts as non-empty; kept so lineage can be audited.
  bool all_null_row = false;
};

struct ExecutionFeedback {
  std::variant<ExecutionError, ExecutionSuccess> outcome;

  bool succeeded() const { return std::holds_alternative<ExecutionSuccess>(outcome); }
  const ExecutionError* error() const { return std::get_if<ExecutionError>(&outcome); }
  const ExecutionSuccess* success() const { return std::get_if<ExecutionSuccess>(&outcome); }
  // Text for refinement prompts. Omits timing so prompts stay reproducible.
  std::string to_text() const;
};

// Never throws for engine-side failures; they come back as the error variant.
// Statements that could write, or more than one statement, are refused.
ExecutionFeedback execute_sql(const Database& db, std::string_view sql, const ExecutionLimits& limits = {});

bool is_acceptable(const ExecutionFeedback& fb);

struct ResultMultiset {
  std::size_t columns = 0;
  std::vector<std::vector<CellValue>> rows;
  bool ordered = false;  // top-level ORDER BY present
};

// Full result for equivalence checks. Row cap is limits.max_rows; a result
// that exceeds it is reported as an error so truncated sets are never compared.
std::variant<ExecutionError, ResultMultiset> collect_result(const Database& db, std::string_view sql,
                                                            const ExecutionLimits& limits = {});

// True when the statement parses and its root carries an ORDER BY.
bool has_top_level_order_by(std::string_view sql);

bool cells_equivalent(const CellValue& a, const CellValue& b);
bool results_equivalent(const ResultMultiset& a, const ResultMultiset& b);

// Why an executable query is still not acceptable to the pipeline: it must parse
// with the supported grammar and every reference must resolve. nullopt when fine.
std::optional<std::string> structural_problem(std::string_view sql, const DatabaseSchema& schema);

class SqlRefiner {
 public:
  virtual ~SqlRefiner() = default;
  virtual std::string refine(const std::string& question, const std::string& sql, const DatabaseSchema& schema,
                             const ExecutionFeedback& feedback) = 0;
};

struct RefineAccepted {
  std::string sql;
  int executions = 0;
  ExecutionFeedback feedback;
};

struct RefineRejected {
  std::string last_sql;
  int executions = 0;
  ExecutionFeedback feedback;
};

using RefineOutcome = std::variant<RefineAccepted, RefineRejected>;

// Throws PreconditionError when max_attempts < 1. Refiner transport errors propagate.
RefineOutcome refine_until_valid(const std::string& question, const std::string& draft_sql,
                                 const DatabaseSchema& schema, const Database& db, SqlRefiner& refiner,
                                 int max_attempts = 3, const ExecutionLimits& limits = {});

// ValueSampler over one connection, memoizing every probe.
class DatabaseSampler : public ValueSampler {
 public:
  explicit DatabaseSampler(const Database& db, ExecutionLimits limits = {}) : db_(db), limits_(limits) {}
  std::vector<CellValue> probe(const std::string& sql, std::size_t limit) override;

 private:
  const Database& db_;
  ExecutionLimits limits_;
  std::map<std::pair<std::string, std::size_t>, std::vector<CellValue>> cache_;
};

}  // namespace sqlforge
