#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sqlforge/sqlite_db.hpp"

namespace sqlforge {

// Source of real database values for grounded literals. Implementations must be
// deterministic: the same probe returns the same values in the same order.
class ValueSampler {
 public:
  virtual ~ValueSampler() = default;
  // First column of each result row, NULLs skipped, at most `limit` values.
  // Any engine error yields an empty list.
  virtual std::vector<CellValue> probe(const std::string& sql, std::size_t limit) = 0;
};

}  // namespace sqlforge
