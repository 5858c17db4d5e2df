#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.hpp"

namespace sqlforge {

struct FeatureVector {
  int tables = 0;
  int joins = 0;
  int functions = 0;
  int tokens = 0;
  int aggregates = 0;
  int subqueries = 0;
  int windows = 0;
  int ctes = 0;
  int nesting = 1;

  bool operator==(const FeatureVector&) const = default;
};

// Column headers of the features report, in field order.
inline constexpr std::array<std::string_view, 9> kFeatureColumns = {
    "Tables", "Joins", "Func.", "Toks.", "Agg.", "Subs.", "Wins.", "CTEs", "Nest."};

struct MeanFeatures {
  std::array<double, 9> values{};
  std::size_t count = 0;
};

std::array<int, 9> feature_array(const FeatureVector& f);

FeatureVector extract_features(const ast::SqlAst& tree);
// Throws DomainError for an empty list.
MeanFeatures aggregate_features(std::span<const FeatureVector> vectors);

// Lexical tokens of a SQL string; punctuation, literals and names are one token each.
std::vector<std::string> tokenize_sql(std::string_view text);

// Width measures used to check clause expansion.
struct ClauseWidth {
  int where_terms = 0;   // predicate leaves under WHERE, all select-cores
  int having_terms = 0;  // predicate leaves under HAVING
  int order_keys = 0;    // ORDER BY sort keys
  int total() const { return where_terms + having_terms + order_keys; }
};
ClauseWidth clause_width(const ast::SqlAst& tree);

// Number of set-op nodes on the root's compound spine.
int top_level_set_ops(const ast::SqlAst& tree);

}  // namespace sqlforge
