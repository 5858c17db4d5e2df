#include "sqlforge/render.hpp"

#include <algorithm>

#include "sqlforge/error.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using ast::AstNode;
using ast::ClauseKind;
using ast::NodeKind;

namespace {

constexpr int kPrimary = 11;

bool is_unary(const AstNode& n) {
  return n.kind == NodeKind::op && n.children.size() == 1 && (n.name == "-" || n.name == "+" || n.name == "~");
}

// Binding strength, mirroring the parser's levels.
int precedence(const AstNode& n) {
  if (n.kind == NodeKind::logical) {
    switch (n.logic) {
      case ast::Connective::or_: return 1;
      case ast::Connective::and_: return 2;
      case ast::Connective::not_: return 3;
    }
  }
  if (n.kind != NodeKind::op) return kPrimary;
  if (is_unary(n)) return 10;
  const std::string& s = n.name;
  if (s == "CASE" || s == "EXISTS" || s == "NOT EXISTS") return kPrimary;
  if (s == "<" || s == "<=" || s == ">" || s == ">=") return 5;
  if (s == "<<" || s == ">>" || s == "&" || s == "|") return 6;
  if (s == "+" || s == "-") return 7;
  if (s == "*" || s == "/" || s == "%") return 8;
  if (s == "||") return 9;
  return 4;  // =, <>, IS, IN, LIKE, BETWEEN and their negations
}

std::string expr(const AstNode& n);
std::string query(const AstNode& n);

std::string operand(const AstNode& child, bool parens) {
  std::string s = expr(child);
  return parens ? "(" + s + ")" : s;
}

std::string left_operand(const AstNode& child, int parent) { return operand(child, precedence(child) < parent); }
std::string right_operand(const AstNode& child, int parent) { return operand(child, precedence(child) <= parent); }

std::string comma_list(const std::vector<AstNode>& items, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < items.size(); ++i) {
    if (i > from) out += ", ";
    out += expr(items[i]);
  }
  return out;
}

std::string literal(const AstNode& n) {
  switch (n.literal) {
    case ast::LiteralKind::string: return quote_string_literal(n.name);
    case ast::LiteralKind::null: return "NULL";
    case ast::LiteralKind::blob: return "X'" + n.name + "'";
    default: return n.name;
  }
}

std::string render_op(const AstNode& n) {
  const std::string& s = n.name;
  int p = precedence(n);
  if (s == "CASE") {
    std::string out = "CASE";
    std::size_t i = 0;
    std::size_t end = n.children.size() - (n.case_else ? 1 : 0);
    if (n.case_base) out += " " + expr(n.children[i++]);
    for (; i + 1 < end; i += 2) {
      out += " WHEN " + expr(n.children[i]) + " THEN " + expr(n.children[i + 1]);
    }
    if (n.case_else) out += " ELSE " + expr(n.children.back());
    return out + " END";
  }
  if (s == "EXISTS" || s == "NOT EXISTS") return s + " " + expr(n.children.at(0));
  if (is_unary(n)) {
    std::string child = right_operand(n.children[0], p);
    // Keep "- -1" apart so it never lexes as a comment.
    if (s == "-" && !child.empty() && child[0] == '-') return "- " + child;
    return s + child;
  }
  if (s == "IN" || s == "NOT IN") {
    std::string lhs = left_operand(n.children.at(0), p);
    if (n.children.size() == 2 && n.children[1].kind == NodeKind::subquery)
      return lhs + " " + s + " " + expr(n.children[1]);
    return lhs + " " + s + " (" + comma_list(n.children, 1) + ")";
  }
  if (s == "BETWEEN" || s == "NOT BETWEEN") {
    return left_operand(n.children.at(0), p) + " " + s + " " + right_operand(n.children.at(1), p) + " AND " +
           right_operand(n.children.at(2), p);
  }
  if ((s == "LIKE" || s == "NOT LIKE" || s == "GLOB" || s == "NOT GLOB") && n.children.size() == 3) {
    return left_operand(n.children[0], p) + " " + s + " " + right_operand(n.children[1], p) + " ESCAPE " +
           right_operand(n.children[2], p);
  }
  if (n.children.size() != 2) throw StructuralError("operator '" + s + "' with " + std::to_string(n.children.size()) + " operands");
  return left_operand(n.children[0], p) + " " + s + " " + right_operand(n.children[1], p);
}

std::string render_function(const AstNode& n) {
  if (n.name == "CAST") return "CAST(" + expr(n.children.at(0)) + " AS " + n.type_name + ")";
  std::size_t args = n.children.size();
  const AstNode* window = nullptr;
  if (n.is_window_call()) {
    window = &n.children.back();
    --args;
  }
  std::string out = n.name + "(";
  if (n.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < args; ++i) {
    if (i) out += ", ";
    out += expr(n.children[i]);
  }
  out += ")";
  if (window) {
    std::string spec;
    for (const auto& c : window->children) {
      if (!spec.empty()) spec += " ";
      spec += expr(c);
    }
    out += " OVER (" + spec + ")";
  }
  return out;
}

std::string render_clause(const AstNode& n) {
  std::string kw(ast::clause_keyword(n.clause));
  switch (n.clause) {
    case ClauseKind::with: {
      std::string out = "WITH ";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const AstNode& cte = n.children[i];
        if (i) out += ", ";
        out += render_identifier(cte.name) + " AS (" + query(cte.children.at(0)) + ")";
      }
      return out;
    }
    case ClauseKind::select:
      return kw + (n.distinct ? " DISTINCT " : " ") + comma_list(n.children);
    case ClauseKind::from: {
      std::string out = kw + " " + expr(n.children.at(0));
      for (std::size_t i = 1; i < n.children.size(); ++i) out += expr(n.children[i]);
      return out;
    }
    case ClauseKind::where:
    case ClauseKind::having:
      return kw + " " + expr(n.children.at(0));
    case ClauseKind::limit: {
      std::string out = kw + " " + expr(n.children.at(0));
      if (n.children.size() > 1) out += " OFFSET " + expr(n.children[1]);
      return out;
    }
    case ClauseKind::group_by:
    case ClauseKind::order_by:
    case ClauseKind::partition_by:
      return kw + " " + comma_list(n.children);
  }
  return kw;
}

std::string render_join(const AstNode& n) {
  const AstNode& src = n.children.at(0);
  std::string out;
  switch (n.join) {
    case ast::JoinKind::comma: return ", " + expr(src);
    case ast::JoinKind::cross: out = " CROSS JOIN "; break;
    case ast::JoinKind::left: out = " LEFT JOIN "; break;
    case ast::JoinKind::inner: out = " JOIN "; break;
  }
  out += expr(src);
  if (n.children.size() > 1) out += " ON " + expr(n.children[1]);
  return out;
}

bool has_wrap_shape(const AstNode& core) {
  if (core.kind != NodeKind::select_core || core.children.size() != 2) return false;
  const AstNode* sel = ast::find_clause(core, ClauseKind::select);
  const AstNode* from = ast::find_clause(core, ClauseKind::from);
  if (!sel || !from || sel->distinct || sel->children.size() != 1 || from->children.size() != 1) return false;
  const AstNode& item = sel->children[0];
  const AstNode& src = from->children[0];
  return item.kind == NodeKind::star && item.qualifier.empty() && src.kind == NodeKind::subquery && src.alias.empty();
}

// Compound operands that cannot stand bare get the "SELECT * FROM (...)" form.
std::string set_operand(const AstNode& n, bool right) {
  bool wrap = false;
  if (n.kind == NodeKind::set_op) {
    wrap = right;
  } else if (n.kind == NodeKind::select_core) {
    wrap = ast::find_clause(n, ClauseKind::with) || ast::find_clause(n, ClauseKind::order_by) ||
           ast::find_clause(n, ClauseKind::limit) || has_wrap_shape(n);
  }
  std::string s = query(n);
  return wrap ? "SELECT * FROM (" + s + ")" : s;
}

std::string query(const AstNode& n) {
  if (n.kind == NodeKind::set_op) {
    return set_operand(n.children.at(0), false) + " " + std::string(ast::set_op_keyword(n.set_op)) + " " +
           set_operand(n.children.at(1), true);
  }
  if (n.kind != NodeKind::select_core) throw StructuralError("expected a query node, found " + std::string(ast::kind_name(n.kind)));
  std::vector<const AstNode*> clauses;
  for (const auto& c : n.children) clauses.push_back(&c);
  std::stable_sort(clauses.begin(), clauses.end(),
                   [](const AstNode* a, const AstNode* b) { return a->clause < b->clause; });
  std::string out;
  for (const AstNode* c : clauses) {
    if (!out.empty()) out += " ";
    out += render_clause(*c);
  }
  return out;
}

std::string expr(const AstNode& n) {
  switch (n.kind) {
    case NodeKind::select_core:
    case NodeKind::set_op:
      return query(n);
    case NodeKind::clause:
      return render_clause(n);
    case NodeKind::function:
      return render_function(n);
    case NodeKind::op:
      return render_op(n);
    case NodeKind::logical: {
      int p = precedence(n);
      if (n.logic == ast::Connective::not_) return "NOT " + left_operand(n.children.at(0), p);
      std::string sep = " " + std::string(ast::connective_keyword(n.logic)) + " ";
      std::string out;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += sep;
        out += i == 0 ? left_operand(n.children[i], p + 1) : right_operand(n.children[i], p);
      }
      return out;
    }
    case NodeKind::join:
      return render_join(n);
    case NodeKind::table_ref:
      return render_identifier(n.name) + (n.alias.empty() ? "" : " " + render_identifier(n.alias));
    case NodeKind::column_ref:
      return (n.qualifier.empty() ? "" : render_identifier(n.qualifier) + ".") + render_identifier(n.name);
    case NodeKind::literal:
      return literal(n);
    case NodeKind::subquery: {
      std::string out = "(" + query(n.children.at(0)) + ")";
      if (!n.alias.empty()) out += " AS " + render_identifier(n.alias);
      return out;
    }
    case NodeKind::cte:
      return render_identifier(n.name) + " AS (" + query(n.children.at(0)) + ")";
    case NodeKind::window_spec: {
      std::string spec;
      for (const auto& c : n.children) spec += (spec.empty() ? "" : " ") + expr(c);
      return "(" + spec + ")";
    }
    case NodeKind::star:
      return n.qualifier.empty() ? "*" : render_identifier(n.qualifier) + ".*";
    case NodeKind::alias:
      return expr(n.children.at(0)) + " AS " + render_identifier(n.name);
    case NodeKind::sort_key: {
      std::string out = expr(n.children.at(0));
      if (n.order == ast::SortOrder::asc) out += " ASC";
      if (n.order == ast::SortOrder::desc) out += " DESC";
      return out;
    }
  }
  return {};
}

}  // namespace

std::string render_identifier(const std::string& spelling) {
  if (is_bare_identifier(spelling)) return spelling;
  std::string body = spelling;
  replace_all(body, "\"", "\"\"");
  return "\"" + body + "\"";
}

std::string quote_string_literal(const std::string& value) {
  std::string body = value;
  replace_all(body, "'", "''");
  return "'" + body + "'";
}

std::string render_node(const AstNode& node) { return expr(node); }

std::string render_sql(const ast::SqlAst& tree) {
  auto violations = ast::invariant_violations(tree.root, false);
  if (!violations.empty()) throw StructuralError("cannot render invalid tree: " + violations.front());
  if (!tree.root.is_query()) throw StructuralError("root is not a query node");
  return query(tree.root);
}

}  // namespace sqlforge
