#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include "sqlforge/harness.hpp"
#include "sqlforge/llm_gateway.hpp"

namespace sqlforge {

struct CotRecord {
  std::string instance_id;
  std::string trace;
  std::string verified_sql;
  int attempts_used = 0;
  std::string teacher_tag;
};

struct CotDiscard {
  std::string instance_id;
  std::vector<std::string> reasons;  // one per failed candidate
};

// Teacher produced nothing (transport failure); the instance should be retried later.
struct CotDeferred {
  std::string instance_id;
  std::string reason;
};

using CotOutcome = std::variant<CotRecord, CotDiscard, CotDeferred>;

struct CotInput {
  std::string instance_id;
  std::string schema_id;
  std::string question;
  std::string evidence;
  std::string gold_sql;
  std::uint64_t seed = 0;
};

// Gold result multisets, computed once per (schema, sql) for the whole run.
class GoldResultCache {
 public:
  std::variant<ExecutionError, ResultMultiset> get(const Database& db, const std::string& schema_id,
                                                   const std::string& sql, const ExecutionLimits& limits);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::variant<ExecutionError, ResultMultiset>> cache_;
};

// Result sets compared here may be larger than the feedback row cap.
inline constexpr std::size_t kComparisonRowCap = 100000;

// Rejection sampling: the lowest-index candidate whose result is equivalent to
// the gold result wins. Throws PreconditionError when the gold SQL errors or is empty.
CotOutcome synthesize_cot(const CotInput& input, const Database& db, const DatabaseSchema& schema, Teacher& teacher,
                          int n, GoldResultCache& cache, const ExecutionLimits& limits = {});

}  // namespace sqlforge
