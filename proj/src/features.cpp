#include "sqlforge/features.hpp"

#include <set>

#include "sqlforge/error.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/render.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using ast::AstNode;
using ast::NodeKind;

namespace {

void collect_cte_names(const AstNode& n, std::set<std::string>& names) {
  if (n.kind == NodeKind::cte) names.insert(to_lower(n.name));
  for (const auto& c : n.children) collect_cte_names(c, names);
}

struct Counter {
  FeatureVector f;
  std::set<std::string> ctes;
  std::set<std::string> tables;

  void visit(const AstNode& n, int depth) {
    int child_depth = depth;
    switch (n.kind) {
      case NodeKind::select_core:
        f.nesting = std::max(f.nesting, depth);
        break;
      case NodeKind::table_ref:
        if (!ctes.count(to_lower(n.name))) tables.insert(to_lower(n.name));
        break;
      case NodeKind::join:
        ++f.joins;
        break;
      case NodeKind::function:
        ++f.functions;
        if (ast::is_aggregate_name(n.name)) ++f.aggregates;
        break;
      case NodeKind::window_spec:
        ++f.windows;
        break;
      case NodeKind::subquery:
        ++f.subqueries;
        child_depth = depth + 1;
        break;
      case NodeKind::cte:
        ++f.ctes;
        ++f.subqueries;
        child_depth = depth + 1;
        break;
      default:
        break;
    }
    for (const auto& c : n.children) visit(c, child_depth);
  }
};

int predicate_leaves(const AstNode& n) {
  if (n.kind == NodeKind::logical) {
    int sum = 0;
    for (const auto& c : n.children) sum += predicate_leaves(c);
    return sum;
  }
  return 1;
}

void widths(const AstNode& n, ClauseWidth& w) {
  if (n.is_clause(ast::ClauseKind::where)) w.where_terms += predicate_leaves(n.children.at(0));
  if (n.is_clause(ast::ClauseKind::having)) w.having_terms += predicate_leaves(n.children.at(0));
  if (n.is_clause(ast::ClauseKind::order_by)) w.order_keys += static_cast<int>(n.children.size());
  for (const auto& c : n.children) widths(c, w);
}

}  // namespace

std::array<int, 9> feature_array(const FeatureVector& f) {
  return {f.tables, f.joins, f.functions, f.tokens, f.aggregates, f.subqueries, f.windows, f.ctes, f.nesting};
}

FeatureVector extract_features(const ast::SqlAst& tree) {
  Counter c;
  collect_cte_names(tree.root, c.ctes);
  c.visit(tree.root, 1);
  c.f.tables = static_cast<int>(c.tables.size());
  c.f.tokens = static_cast<int>(tokenize_sql(render_sql(tree)).size());
  return c.f;
}

MeanFeatures aggregate_features(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw DomainError("cannot average an empty feature list");
  MeanFeatures m;
  m.count = vectors.size();
  for (const auto& v : vectors) {
    auto a = feature_array(v);
    for (std::size_t i = 0; i < a.size(); ++i) m.values[i] += a[i];
  }
  for (auto& x : m.values) x /= static_cast<double>(vectors.size());
  return m;
}

std::vector<std::string> tokenize_sql(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : lex_sql(text, false)) {
    if (t.kind == TokenKind::end) break;
    out.push_back(std::move(t.text));
  }
  return out;
}

ClauseWidth clause_width(const ast::SqlAst& tree) {
  ClauseWidth w;
  widths(tree.root, w);
  return w;
}

int top_level_set_ops(const ast::SqlAst& tree) {
  int count = 0;
  const AstNode* n = &tree.root;
  while (n->kind == NodeKind::set_op) {
    ++count;
    n = &n->children.at(0);
  }
  return count;
}

}  // namespace sqlforge
