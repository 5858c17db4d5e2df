#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.hpp"
#include "sqlforge/schema.hpp"
#include "sqlforge/value_sampler.hpp"

namespace sqlforge {

// Enumeration order is the tie-break order everywhere.
enum class OperatorId : std::uint8_t { func, op, logic, join, nest, set };

inline constexpr std::array<OperatorId, 6> kOperators = {OperatorId::func, OperatorId::op,   OperatorId::logic,
                                                         OperatorId::join, OperatorId::nest, OperatorId::set};

std::string_view operator_code(OperatorId op);          // "FUNC"
std::string_view operator_display_name(OperatorId op);  // "Functional Wrapping"
std::string_view operator_slug(OperatorId op);          // "func", used in instance ids
// Accepts codes, slugs and display names, case-insensitively.
std::optional<OperatorId> parse_operator(std::string_view text);

// Instruction text substituted for {OPERATION} in the evolution prompt.
std::string_view operator_instruction(OperatorId op);

struct FeasibilityReport {
  OperatorId op = OperatorId::func;
  double score = 0.0;
  std::vector<ast::NodePath> eligible_sites;
  std::string justification;
};

struct MutationPlan {
  OperatorId op = OperatorId::func;
  ast::NodePath target_path;
  ast::AstNode original;  // node at target_path when the plan was made
  // FUNC/OP/NEST: replacement for the target. LOGIC: e_new (a predicate, or a
  // sort key for ORDER BY). JOIN: the join node. SET: the second query tree.
  ast::AstNode payload;
  // FUNC/OP: `payload` holds node_at(original, embedded) at position `hole`.
  ast::NodePath hole;
  ast::NodePath embedded;
  // LOGIC on a select-core that lacks the clause: the clause to create.
  std::optional<ast::ClauseKind> create_clause;
  ast::Connective connective = ast::Connective::and_;
  ast::SetOpKind set_kind = ast::SetOpKind::union_distinct;
  std::string symbol;       // FUNC: f; OP: ω; JOIN: new table; NEST: aggregate or key; SET: ⊙
  std::string description;  // short human-readable summary of the rewrite
};

struct PlannerOptions {
  double saturation = 3.0;  // s0: site count at which the rule-based score reaches 1
  std::vector<std::string> date_patterns{default_date_patterns().begin(), default_date_patterns().end()};
  std::size_t value_pool = 8;  // distinct values drawn per literal probe
  double and_probability = 0.75;
  double left_join_probability = 0.25;
};

FeasibilityReport check_applicability(const ast::SqlAst& tree, const DatabaseSchema& schema, OperatorId op,
                                      const PlannerOptions& options = {});

// Throws PreconditionError when the operator has no eligible site.
MutationPlan plan_mutation(const ast::SqlAst& tree, const DatabaseSchema& schema, OperatorId op, std::uint64_t seed,
                           ValueSampler* sampler = nullptr, const PlannerOptions& options = {});

// Returns a new tree; the input is untouched. Throws StructuralError when the plan does not fit.
ast::SqlAst apply_mutation(const ast::SqlAst& tree, const MutationPlan& plan);

// Measure each operator must strictly increase (functions, tokens, clause width,
// joins, subqueries + CTEs, top-level set-ops).
int associated_feature(OperatorId op, const ast::SqlAst& tree);
// Number of nodes whose operator symbol is one of CASE, BETWEEN, IN, NOT IN, LIKE.
int omega_count(const ast::SqlAst& tree);

// Every FK-following join the planner could add, one plan per (site, edge).
std::vector<MutationPlan> join_candidates(const ast::SqlAst& tree, const DatabaseSchema& schema);

// Hand-specified clause expansion. `site` is a WHERE/HAVING/ORDER BY clause, or a
// select-core together with `create` naming the missing clause.
MutationPlan make_logic_plan(const ast::SqlAst& tree, const ast::NodePath& site,
                             std::optional<ast::ClauseKind> create, ast::Connective connective, ast::AstNode e_new);

}  // namespace sqlforge
