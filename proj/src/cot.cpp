#include "sqlforge/cot.hpp"

#include <algorithm>

#include "sqlforge/error.hpp"

namespace sqlforge {

std::variant<ExecutionError, ResultMultiset> GoldResultCache::get(const Database& db, const std::string& schema_id,
                                                                  const std::string& sql,
                                                                  const ExecutionLimits& limits) {
  auto key = std::make_pair(schema_id, sql);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto result = collect_result(db, sql, limits);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(result)).first->second;
}

std::size_t GoldResultCache::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

CotOutcome synthesize_cot(const CotInput& input, const Database& db, const DatabaseSchema& schema, Teacher& teacher,
                          int n, GoldResultCache& cache, const ExecutionLimits& limits) {
  if (n < 1) throw PreconditionError("n must be at least 1");
  ExecutionLimits compare = limits;
  compare.max_rows = std::max(limits.max_rows, kComparisonRowCap);

  auto gold = cache.get(db, input.schema_id, input.gold_sql, compare);
  if (const auto* e = std::get_if<ExecutionError>(&gold)) {
    throw PreconditionError("gold SQL of " + input.instance_id + " does not execute: " + e->message);
  }
  const ResultMultiset& expected = std::get<ResultMultiset>(gold);
  if (expected.rows.empty()) throw PreconditionError("gold SQL of " + input.instance_id + " returns no rows");

  std::vector<CotCandidate> candidates;
  try {
    candidates = teacher.candidates({input.question, input.evidence, input.gold_sql}, schema, n, input.seed);
  } catch (const TransportError& e) {
    return CotDeferred{input.instance_id, e.what()};
  }
  if (candidates.empty()) return CotDeferred{input.instance_id, "teacher returned no candidates"};
  if (static_cast<int>(candidates.size()) > n) candidates.resize(static_cast<std::size_t>(n));

  CotDiscard discard{input.instance_id, {}};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    std::string label = "candidate " + std::to_string(i + 1) + ": ";
    auto got = collect_result(db, c.sql, compare);
    if (const auto* e = std::get_if<ExecutionError>(&got)) {
      discard.reasons.push_back(label + "engine error: " + e->message);
      continue;
    }
    // Candidate ordering only matters when the gold query asks for it.
    ResultMultiset actual = std::get<ResultMultiset>(std::move(got));
    actual.ordered = actual.ordered && expected.ordered;
    if (!results_equivalent(expected, actual)) {
      discard.reasons.push_back(label + "result differs from the gold result");
      continue;
    }
    return CotRecord{input.instance_id, c.reasoning, c.sql, static_cast<int>(i + 1), teacher.tag()};
  }
  return discard;
}

}  // namespace sqlforge
