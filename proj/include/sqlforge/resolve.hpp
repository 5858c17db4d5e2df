#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlforge/ast.hpp"
#include "sqlforge/schema.hpp"

namespace sqlforge {

// A relation visible inside one select-core.
struct ScopeSource {
  std::string visible_name;  // alias, or the table/CTE name when unaliased
  std::string table;         // base table name; empty for CTEs and derived tables
  bool known = true;         // false when the table name resolved to nothing
  bool is_cte = false;
  bool derived = false;
  std::vector<ColumnDef> columns;
  ast::NodePath path;  // table_ref or subquery node
};

struct CoreScope {
  ast::NodePath path;  // the select_core node
  int parent = -1;     // enclosing scope for correlated references
  int depth = 1;
  std::vector<ScopeSource> sources;
  std::vector<std::string> select_aliases;
};

struct ColumnResolution {
  ast::NodePath path;
  std::string text;  // "p.full_name"
  int scope = -1;    // scope the reference lives in
  int bound_scope = -1;
  int source = -1;   // index into scopes[bound_scope].sources; -1 for alias references
  bool alias_ref = false;
  std::string table;  // base table, empty when bound to a CTE, derived table or alias
  ColumnDef column;
  ast::ClauseKind clause = ast::ClauseKind::select;  // clause of the owning core; join conditions count as FROM
  bool in_aggregate = false;
  bool in_window = false;
};

struct ScopeAnalysis {
  std::vector<CoreScope> scopes;
  std::vector<ColumnResolution> resolved;
  std::vector<ColumnResolution> unresolved;  // only path, text, scope and clause are meaningful
  std::vector<std::string> unresolved_tables;
  std::map<std::string, std::string> alias_map;
  // Output columns of every query node (select-core, set-op) keyed by path.
  std::map<ast::NodePath, std::vector<ColumnDef>> outputs;

  const ColumnResolution* resolution_at(const ast::NodePath& path) const;
  const CoreScope* scope_at(const ast::NodePath& core_path) const;
  int scope_index(const ast::NodePath& core_path) const;
};

// Throws AmbiguityError when an unqualified column matches more than one source.
ScopeAnalysis analyze_scopes(const ast::SqlAst& tree, const DatabaseSchema& schema);

struct BindingReport {
  struct Resolved {
    std::string column;  // reference text as written (qualifier.name)
    std::string table;   // base table, CTE name, derived alias, or "AS <alias>" for select aliases
    ast::NodePath path;
  };
  std::vector<Resolved> resolved;
  std::vector<std::string> unresolved;
  std::map<std::string, std::string> alias_map;
  std::vector<std::string> unresolved_tables;

  bool fully_resolved() const { return unresolved.empty() && unresolved_tables.empty(); }
};

BindingReport resolve_references(const ast::SqlAst& tree, const DatabaseSchema& schema);

// Storage class an expression is expected to produce; numeric when unknown.
Affinity expression_affinity(const ScopeAnalysis& analysis, const ast::AstNode& expr, const ast::NodePath& path);

}  // namespace sqlforge
