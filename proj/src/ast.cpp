#include "sqlforge/ast.hpp"

#include "sqlforge/error.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge::ast {

std::string_view clause_keyword(ClauseKind k) {
  switch (k) {
    case ClauseKind::with: return "WITH";
    case ClauseKind::select: return "SELECT";
    case ClauseKind::from: return "FROM";
    case ClauseKind::where: return "WHERE";
    case ClauseKind::group_by: return "GROUP BY";
    case ClauseKind::having: return "HAVING";
    case ClauseKind::order_by: return "ORDER BY";
    case ClauseKind::limit: return "LIMIT";
    case ClauseKind::partition_by: return "PARTITION BY";
  }
  return "";
}

std::string_view set_op_keyword(SetOpKind k) {
  switch (k) {
    case SetOpKind::union_distinct: return "UNION";
    case SetOpKind::union_all: return "UNION ALL";
    case SetOpKind::intersect: return "INTERSECT";
    case SetOpKind::except: return "EXCEPT";
  }
  return "";
}

std::string_view connective_keyword(Connective c) {
  switch (c) {
    case Connective::and_: return "AND";
    case Connective::or_: return "OR";
    case Connective::not_: return "NOT";
  }
  return "";
}

std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::select_core: return "select-core";
    case NodeKind::clause: return "clause";
    case NodeKind::function: return "function";
    case NodeKind::op: return "operator";
    case NodeKind::logical: return "logical-connector";
    case NodeKind::set_op: return "set-op";
    case NodeKind::join: return "join";
    case NodeKind::table_ref: return "table-ref";
    case NodeKind::column_ref: return "column-ref";
    case NodeKind::literal: return "literal";
    case NodeKind::subquery: return "subquery";
    case NodeKind::cte: return "cte";
    case NodeKind::window_spec: return "window-spec";
    case NodeKind::star: return "star";
    case NodeKind::alias: return "alias";
    case NodeKind::sort_key: return "sort-key";
  }
  return "?";
}

const AstNode& node_at(const AstNode& root, const NodePath& path) {
  const AstNode* cur = &root;
  for (std::size_t idx : path) {
    if (idx >= cur->children.size())
      throw StructuralError("path " + path_to_string(path) + " does not resolve");
    cur = &cur->children[idx];
  }
  return *cur;
}

AstNode& node_at(AstNode& root, const NodePath& path) {
  return const_cast<AstNode&>(node_at(static_cast<const AstNode&>(root), path));
}

std::string path_to_string(const NodePath& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(path[i]);
  }
  return out + "]";
}

const AstNode* find_clause(const AstNode& core, ClauseKind k) {
  for (const auto& c : core.children) {
    if (c.is_clause(k)) return &c;
  }
  return nullptr;
}

AstNode* find_clause(AstNode& core, ClauseKind k) {
  return const_cast<AstNode*>(find_clause(static_cast<const AstNode&>(core), k));
}

std::size_t insert_clause(AstNode& core, AstNode clause) {
  std::size_t pos = 0;
  while (pos < core.children.size() && core.children[pos].kind == NodeKind::clause &&
         core.children[pos].clause < clause.clause)
    ++pos;
  core.children.insert(core.children.begin() + static_cast<std::ptrdiff_t>(pos), std::move(clause));
  return pos;
}

namespace {

void check(const AstNode& n, bool canonical_order, const std::string& where,
           std::vector<std::string>& out) {
  auto fail = [&](const std::string& msg) { out.push_back(where + " " + std::string(kind_name(n.kind)) + ": " + msg); };
  auto child_query = [&](std::size_t i) { return i < n.children.size() && n.children[i].is_query(); };

  switch (n.kind) {
    case NodeKind::select_core: {
      bool seen[9] = {};
      int last = -1;
      bool has_select = false;
      for (const auto& c : n.children) {
        if (c.kind != NodeKind::clause || c.clause == ClauseKind::partition_by) {
          fail("child is not a select-core clause");
          continue;
        }
        auto idx = static_cast<int>(c.clause);
        if (seen[idx]) fail(std::string("clause ") + std::string(clause_keyword(c.clause)) + " repeated");
        seen[idx] = true;
        if (canonical_order && idx < last) fail("clauses out of canonical order");
        last = idx;
        if (c.clause == ClauseKind::select) has_select = true;
      }
      if (!has_select) fail("missing SELECT clause");
      break;
    }
    case NodeKind::clause:
      switch (n.clause) {
        case ClauseKind::select:
        case ClauseKind::group_by:
        case ClauseKind::order_by:
        case ClauseKind::partition_by:
          if (n.children.empty()) fail("empty clause");
          break;
        case ClauseKind::where:
        case ClauseKind::having:
          if (n.children.size() != 1) fail("clause must hold exactly one predicate");
          break;
        case ClauseKind::from:
          if (n.children.empty()) fail("empty FROM");
          for (std::size_t i = 1; i < n.children.size(); ++i) {
            if (n.children[i].kind != NodeKind::join) fail("FROM item after the first is not a join");
          }
          break;
        case ClauseKind::limit:
          if (n.children.empty() || n.children.size() > 2) fail("LIMIT takes a count and optional offset");
          break;
        case ClauseKind::with:
          if (n.children.empty()) fail("empty WITH");
          for (const auto& c : n.children) {
            if (c.kind != NodeKind::cte) fail("WITH child is not a cte");
          }
          break;
      }
      if (n.clause == ClauseKind::order_by) {
        for (const auto& c : n.children) {
          if (c.kind != NodeKind::sort_key) fail("ORDER BY child is not a sort key");
        }
      }
      break;
    case NodeKind::logical:
      if (n.logic == Connective::not_ && n.children.size() != 1) fail("NOT must have exactly 1 child");
      if (n.logic != Connective::not_ && n.children.size() < 2) fail("AND/OR must have at least 2 children");
      for (const auto& c : n.children) {
        if (n.logic != Connective::not_ && c.kind == NodeKind::logical && c.logic == n.logic)
          fail("nested connector of the same kind must be flattened");
      }
      break;
    case NodeKind::set_op:
      if (n.children.size() != 2 || !child_query(0) || !child_query(1))
        fail("set-op must have exactly 2 query children");
      break;
    case NodeKind::subquery:
    case NodeKind::cte:
      if (n.children.size() != 1 || !child_query(0)) fail("must wrap exactly one query");
      break;
    case NodeKind::alias:
    case NodeKind::sort_key:
      if (n.children.size() != 1) fail("must have exactly one child");
      break;
    case NodeKind::join:
      if (n.children.empty() || n.children.size() > 2) fail("join takes a source and optional condition");
      else if (n.children[0].kind != NodeKind::table_ref && n.children[0].kind != NodeKind::subquery)
        fail("join source must be a table or derived table");
      break;
    case NodeKind::table_ref:
    case NodeKind::column_ref:
    case NodeKind::literal:
    case NodeKind::star:
      if (!n.children.empty()) fail("leaf node has children");
      if ((n.kind == NodeKind::table_ref || n.kind == NodeKind::column_ref) && n.name.empty())
        fail("missing name");
      break;
    case NodeKind::op:
      if (n.children.empty()) fail("operator without operands");
      break;
    case NodeKind::function:
    case NodeKind::window_spec:
      break;
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    check(n.children[i], canonical_order, where + "/" + std::to_string(i), out);
  }
}

}  // namespace

std::vector<std::string> invariant_violations(const AstNode& root, bool canonical_order) {
  std::vector<std::string> out;
  if (!root.is_query()) out.push_back("root is not a query node");
  check(root, canonical_order, "", out);
  return out;
}

void validate(const SqlAst& ast) {
  auto v = invariant_violations(ast.root);
  if (!v.empty()) throw StructuralError("invalid AST: " + join(v, "; "));
}

std::uint64_t tree_hash(const AstNode& n) {
  std::uint64_t h = stable_hash(n.name);
  h = mix_seed(h, stable_hash(n.qualifier));
  h = mix_seed(h, stable_hash(n.alias));
  h = mix_seed(h, stable_hash(n.type_name));
  std::uint64_t flags = static_cast<std::uint64_t>(n.kind) | static_cast<std::uint64_t>(n.clause) << 8 |
                        static_cast<std::uint64_t>(n.join) << 16 | static_cast<std::uint64_t>(n.set_op) << 24 |
                        static_cast<std::uint64_t>(n.literal) << 32 | static_cast<std::uint64_t>(n.order) << 40 |
                        static_cast<std::uint64_t>(n.logic) << 48 | std::uint64_t{n.distinct} << 56 |
                        std::uint64_t{n.case_base} << 57 | std::uint64_t{n.case_else} << 58;
  h = mix_seed(h, flags);
  for (const auto& c : n.children) h = mix_seed(h, tree_hash(c));
  return h;
}

AstNode make_clause(ClauseKind k, std::vector<AstNode> children) {
  AstNode n;
  n.kind = NodeKind::clause;
  n.clause = k;
  n.children = std::move(children);
  return n;
}

AstNode make_column(std::string qualifier, std::string name) {
  AstNode n;
  n.kind = NodeKind::column_ref;
  n.qualifier = std::move(qualifier);
  n.name = std::move(name);
  return n;
}

AstNode make_table(std::string name, std::string alias) {
  AstNode n;
  n.kind = NodeKind::table_ref;
  n.name = std::move(name);
  n.alias = std::move(alias);
  return n;
}

AstNode make_integer(long long value) {
  AstNode n;
  n.kind = NodeKind::literal;
  n.literal = LiteralKind::integer;
  n.name = std::to_string(value);
  return n;
}

AstNode make_real(std::string text) {
  AstNode n;
  n.kind = NodeKind::literal;
  n.literal = LiteralKind::real;
  n.name = std::move(text);
  return n;
}

AstNode make_string(std::string value) {
  AstNode n;
  n.kind = NodeKind::literal;
  n.literal = LiteralKind::string;
  n.name = std::move(value);
  return n;
}

AstNode make_null() {
  AstNode n;
  n.kind = NodeKind::literal;
  n.literal = LiteralKind::null;
  n.name = "NULL";
  return n;
}

AstNode make_op(std::string symbol, std::vector<AstNode> children) {
  AstNode n;
  n.kind = NodeKind::op;
  n.name = std::move(symbol);
  n.children = std::move(children);
  return n;
}

AstNode make_function(std::string name, std::vector<AstNode> args) {
  AstNode n;
  n.kind = NodeKind::function;
  n.name = to_upper(name);
  n.children = std::move(args);
  return n;
}

AstNode make_logical(Connective c, std::vector<AstNode> children) {
  AstNode n;
  n.kind = NodeKind::logical;
  n.logic = c;
  if (c == Connective::not_) {
    n.children = std::move(children);
    return n;
  }
  for (auto& child : children) {
    if (child.kind == NodeKind::logical && child.logic == c) {
      for (auto& g : child.children) n.children.push_back(std::move(g));
    } else {
      n.children.push_back(std::move(child));
    }
  }
  return n;
}

AstNode make_subquery(AstNode query, std::string alias) {
  AstNode n;
  n.kind = NodeKind::subquery;
  n.alias = std::move(alias);
  n.children.push_back(std::move(query));
  return n;
}

AstNode make_set_op(SetOpKind k, AstNode left, AstNode right) {
  AstNode n;
  n.kind = NodeKind::set_op;
  n.set_op = k;
  n.children.push_back(std::move(left));
  n.children.push_back(std::move(right));
  return n;
}

AstNode make_join(JoinKind k, AstNode source, AstNode condition) {
  AstNode n;
  n.kind = NodeKind::join;
  n.join = k;
  n.children.push_back(std::move(source));
  n.children.push_back(std::move(condition));
  return n;
}

AstNode make_sort_key(AstNode expr, SortOrder order) {
  AstNode n;
  n.kind = NodeKind::sort_key;
  n.order = order;
  n.children.push_back(std::move(expr));
  return n;
}

AstNode make_star(std::string qualifier) {
  AstNode n;
  n.kind = NodeKind::star;
  n.qualifier = std::move(qualifier);
  return n;
}

std::string identifier_spelling(std::string_view raw, bool quoted) {
  if (quoted) return std::string(raw);
  return to_lower(raw);
}

bool is_aggregate_name(std::string_view upper_name) {
  static constexpr std::string_view names[] = {"COUNT", "SUM", "AVG", "MIN", "MAX", "TOTAL", "GROUP_CONCAT"};
  for (auto n : names) {
    if (n == upper_name) return true;
  }
  return false;
}

}  // namespace sqlforge::ast
