#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge::ast {

enum class NodeKind : std::uint8_t {
  select_core,
  clause,
  function,
  op,       // operator ω: comparison, arithmetic, IN, BETWEEN, LIKE, CASE, EXISTS ...
  logical,  // connector λ
  set_op,
  join,
  table_ref,
  column_ref,
  literal,
  subquery,
  cte,
  window_spec,
  star,
  alias,     // "expr AS name" in a select list
  sort_key,  // ORDER BY term with direction
};

// Declaration order is the canonical clause order inside a select-core.
enum class ClauseKind : std::uint8_t {
  with,
  select,
  from,
  where,
  group_by,
  having,
  order_by,
  limit,
  partition_by,  // only inside window_spec
};

enum class JoinKind : std::uint8_t { inner, left, cross, comma };
enum class SetOpKind : std::uint8_t { union_distinct, union_all, intersect, except };
enum class LiteralKind : std::uint8_t { integer, real, string, null, boolean, blob, keyword };
enum class SortOrder : std::uint8_t { none, asc, desc };
enum class Connective : std::uint8_t { and_, or_, not_ };

std::string_view clause_keyword(ClauseKind k);
std::string_view set_op_keyword(SetOpKind k);
std::string_view connective_keyword(Connective c);
std::string_view kind_name(NodeKind k);

// Labeled ordered tree node. Which string fields are meaningful depends on kind:
//   function:   name (upper case), type_name for CAST, distinct for COUNT(DISTINCT x);
//               a trailing window_spec child marks a window call
//   op:         name is the operator symbol ("=", "IN", "NOT LIKE", "CASE", ...);
//               CASE uses case_base / case_else to mark its optional first/last child
//   table_ref:  name, alias
//   column_ref: qualifier, name
//   star:       qualifier (empty for bare *)
//   literal:    literal kind; name holds the value (strings unescaped, numbers verbatim)
//   subquery:   alias when used as a FROM source; exactly one query child
//   cte:        name; exactly one query child
//   alias:      name; exactly one expression child
// Identifiers are stored folded to lower case unless they were quoted.
struct AstNode {
  NodeKind kind = NodeKind::literal;
  std::string name;
  std::string qualifier;
  std::string alias;
  std::string type_name;
  ClauseKind clause = ClauseKind::select;
  JoinKind join = JoinKind::inner;
  SetOpKind set_op = SetOpKind::union_distinct;
  LiteralKind literal = LiteralKind::null;
  SortOrder order = SortOrder::none;
  Connective logic = Connective::and_;
  bool distinct = false;
  bool case_base = false;
  bool case_else = false;
  std::vector<AstNode> children;

  bool operator==(const AstNode&) const = default;

  bool is(NodeKind k) const { return kind == k; }
  bool is_clause(ClauseKind k) const { return kind == NodeKind::clause && clause == k; }
  bool is_query() const { return kind == NodeKind::select_core || kind == NodeKind::set_op; }
  bool is_window_call() const {
    return kind == NodeKind::function && !children.empty() &&
           children.back().kind == NodeKind::window_spec;
  }
};

struct SqlAst {
  AstNode root;
  bool operator==(const SqlAst&) const = default;
};

using NodePath = std::vector<std::size_t>;

// Throws StructuralError when the path does not resolve.
const AstNode& node_at(const AstNode& root, const NodePath& path);
AstNode& node_at(AstNode& root, const NodePath& path);
std::string path_to_string(const NodePath& path);

// Clause of a select-core, or nullptr.
const AstNode* find_clause(const AstNode& core, ClauseKind k);
AstNode* find_clause(AstNode& core, ClauseKind k);
// Inserts the clause keeping canonical order; returns its index.
std::size_t insert_clause(AstNode& core, AstNode clause);

// Collects every violated node invariant; empty when the tree is well formed.
// canonical_order=false skips the clause-order check (render canonicalizes).
std::vector<std::string> invariant_violations(const AstNode& root, bool canonical_order = true);
void validate(const SqlAst& ast);

std::uint64_t tree_hash(const AstNode& node);

// Pre-order walk. Visitor receives (node, path); return false to skip children.
template <typename Visitor>
void walk(const AstNode& node, Visitor&& visit, NodePath& path) {
  if (!visit(node, path)) return;
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    walk(node.children[i], visit, path);
    path.pop_back();
  }
}

template <typename Visitor>
void walk(const AstNode& node, Visitor&& visit) {
  NodePath path;
  walk(node, visit, path);
}

// Construction helpers for rewrites and tests.
AstNode make_clause(ClauseKind k, std::vector<AstNode> children = {});
AstNode make_column(std::string qualifier, std::string name);
AstNode make_table(std::string name, std::string alias = {});
AstNode make_integer(long long value);
AstNode make_real(std::string text);
AstNode make_string(std::string value);
AstNode make_null();
AstNode make_op(std::string symbol, std::vector<AstNode> children);
AstNode make_function(std::string name, std::vector<AstNode> args);
AstNode make_logical(Connective c, std::vector<AstNode> children);
AstNode make_subquery(AstNode query, std::string alias = {});
AstNode make_set_op(SetOpKind k, AstNode left, AstNode right);
AstNode make_join(JoinKind k, AstNode source, AstNode condition);
AstNode make_sort_key(AstNode expr, SortOrder order);
AstNode make_star(std::string qualifier = {});

// Normalizes an identifier coming from the schema to the stored spelling.
std::string identifier_spelling(std::string_view raw, bool quoted);

bool is_aggregate_name(std::string_view upper_name);

}  // namespace sqlforge::ast
