#pragma once

#include <string>

#include "sqlforge/ast.hpp"

namespace sqlforge {

// Canonical single-line SQL. Clauses are emitted in canonical order whatever the
// child order; minimal parentheses are inserted from operator precedence.
// Throws StructuralError for trees that violate node invariants.
std::string render_sql(const ast::SqlAst& ast);

// Renders any subtree (expression, clause or query) without validation.
std::string render_node(const ast::AstNode& node);

std::string render_identifier(const std::string& spelling);
std::string quote_string_literal(const std::string& value);

}  // namespace sqlforge
