#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sqlforge/error.hpp"
#include "sqlforge/features.hpp"
#include "sqlforge/harness.hpp"
#include "sqlforge/operators.hpp"
#include "sqlforge/parser.hpp"
#include "sqlforge/render.hpp"
#include "sqlforge/resolve.hpp"
#include "sqlforge/text_util.hpp"
#include "test_support.hpp"

using namespace sqlforge;
using namespace sqlforge::ast;

namespace {

std::set<std::string> query_tables(const SqlAst& tree) {
  std::set<std::string> out;
  walk(tree.root, [&](const AstNode& n, const NodePath&) {
    if (n.kind == NodeKind::table_ref) out.insert(to_lower(n.name));
    return true;
  });
  return out;
}

}  // namespace

TEST_CASE("NEST has no site on a query without comparison literals") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto r = check_applicability(parse_sql("SELECT full_name FROM person"), schema, OperatorId::nest);
  CHECK(r.score == 0.0);
  CHECK(r.eligible_sites.empty());
  CHECK_THROWS_AS(plan_mutation(parse_sql("SELECT full_name FROM person"), schema, OperatorId::nest, 1),
                  PreconditionError);
}

TEST_CASE("SET is always feasible at the root") {
  const auto& schema = testsupport::fixture_schema("olympics");
  for (const auto& q : testsupport::golden_corpus()) {
    if (q.db_id != "olympics") continue;
    auto r = check_applicability(parse_sql(q.sql), schema, OperatorId::set);
    CHECK(r.score > 0.0);
    CHECK(r.eligible_sites == std::vector<NodePath>{NodePath{}});
  }
}

TEST_CASE("feasibility score is zero exactly when there are no sites, and saturates") {
  const auto& schema = testsupport::fixture_schema("olympics");
  for (const auto& q : testsupport::golden_corpus()) {
    if (q.db_id != "olympics") continue;
    auto tree = parse_sql(q.sql);
    for (auto op : kOperators) {
      auto r = check_applicability(tree, schema, op);
      CHECK((r.score == 0.0) == r.eligible_sites.empty());
      CHECK(r.score >= 0.0);
      CHECK(r.score <= 1.0);
      double expected = std::min(1.0, static_cast<double>(r.eligible_sites.size()) / 3.0);
      CHECK(r.score == doctest::Approx(expected));
    }
  }
}

TEST_CASE("JOIN on trajectory stage one follows a foreign key to an unjoined table") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto tree = parse_sql(testsupport::golden_sql("trajectory-stage1"));
  auto report = check_applicability(tree, schema, OperatorId::join);
  CHECK(report.score > 0.0);
  bool has_from = false;
  for (const auto& p : report.eligible_sites) has_from = has_from || node_at(tree.root, p).is_clause(ClauseKind::from);
  CHECK(has_from);

  // Oracle: tables reachable over one declared foreign key in either direction.
  auto present = query_tables(tree);
  std::set<std::string> reachable;
  for (const auto& t : schema.tables) {
    for (const auto& fk : t.foreign_keys) {
      auto a = to_lower(t.name), b = to_lower(fk.referenced_table);
      if (present.count(a) && !present.count(b)) reachable.insert(b);
      if (present.count(b) && !present.count(a)) reachable.insert(a);
    }
  }
  CHECK(reachable.count("event"));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto plan = plan_mutation(tree, schema, OperatorId::join, seed);
    CHECK(reachable.count(to_lower(plan.symbol)));
    auto out = apply_mutation(tree, plan);
    CHECK(extract_features(out).joins == extract_features(tree).joins + 1);
    CHECK(resolve_references(out, schema).fully_resolved());
  }
  bool event_edge = false;
  for (const auto& c : join_candidates(tree, schema)) {
    auto text = render_node(c.payload);
    event_edge = event_edge || (c.symbol == "event" && text.find("JOIN event e ON ce.event_id = e.id") != std::string::npos);
  }
  CHECK(event_edge);
}

TEST_CASE("planning is reproducible and application is pure") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto db = testsupport::open_fixture("olympics");
  auto tree = parse_sql(testsupport::golden_sql("trajectory-stage2"));
  auto before = tree_hash(tree.root);
  for (auto op : kOperators) {
    if (check_applicability(tree, schema, op).score == 0.0) continue;
    DatabaseSampler s1(db), s2(db);
    auto a = plan_mutation(tree, schema, op, 77, &s1);
    auto b = plan_mutation(tree, schema, op, 77, &s2);
    CHECK(render_sql(apply_mutation(tree, a)) == render_sql(apply_mutation(tree, b)));
    CHECK(a.target_path == b.target_path);
    CHECK(tree_hash(tree.root) == before);
  }
}

TEST_CASE("FUNC with AVG wraps the column in place") {
  const auto& schema = testsupport::fixture_schema("olympics");
  // Aggregates are only offered where the select list is grouped.
  CHECK(plan_mutation(parse_sql("SELECT weight FROM person"), schema, OperatorId::func, 0).symbol == "ROUND");
  auto tree = parse_sql("SELECT gender, weight FROM person GROUP BY gender");
  bool seen = false;
  for (std::uint64_t seed = 0; seed < 64 && !seen; ++seed) {
    auto plan = plan_mutation(tree, schema, OperatorId::func, seed);
    if (plan.symbol != "AVG") continue;
    seen = true;
    auto out = apply_mutation(tree, plan);
    const AstNode& wrapped = node_at(out.root, plan.target_path);
    CHECK(wrapped.kind == NodeKind::function);
    CHECK(wrapped.name == "AVG");
    REQUIRE(wrapped.children.size() == 1);
    CHECK(wrapped.children[0] == node_at(tree.root, plan.target_path));
  }
  CHECK(seen);
}

TEST_CASE("SET puts the original query as the left operand") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto db = testsupport::open_fixture("olympics");
  DatabaseSampler sampler(db);
  auto tree = parse_sql(testsupport::golden_sql("trajectory-stage0"));
  auto plan = plan_mutation(tree, schema, OperatorId::set, 3, &sampler);
  auto out = apply_mutation(tree, plan);
  REQUIRE(out.root.kind == NodeKind::set_op);
  CHECK(out.root.children.size() == 2);
  CHECK(out.root.children[0] == tree.root);
  auto text = render_sql(out);
  std::size_t selects = 0;
  for (const auto& t : tokenize_sql(text)) selects += to_upper(t) == "SELECT";
  CHECK(selects >= 2);
  CHECK(top_level_set_ops(out) == 1);
}

TEST_CASE("LOGIC on stage one WHERE shape") {
  auto tree = parse_sql(testsupport::golden_sql("trajectory-stage1"));
  AstNode e_new = make_op("=", {make_column("gc", "age"), make_integer(20)});
  auto plan = make_logic_plan(tree, NodePath{}, ClauseKind::where, Connective::and_, e_new);
  auto out = apply_mutation(tree, plan);
  const AstNode* where = find_clause(out.root, ClauseKind::where);
  REQUIRE(where);
  CHECK(where->children[0] == e_new);
  CHECK(clause_width(out).where_terms == 1);
  // A second expansion connects with AND.
  auto site = NodePath{};
  for (std::size_t i = 0; i < out.root.children.size(); ++i)
    if (out.root.children[i].is_clause(ClauseKind::where)) site = {i};
  auto plan2 = make_logic_plan(out, site, std::nullopt, Connective::and_,
                               make_op("=", {make_column("gc", "games_id"), make_integer(1)}));
  auto out2 = apply_mutation(out, plan2);
  CHECK(clause_width(out2).where_terms == 2);
  CHECK(find_clause(out2.root, ClauseKind::where)->children[0].kind == NodeKind::logical);
}

TEST_CASE("instruction texts") {
  CHECK(operator_instruction(OperatorId::func).starts_with("Integrate SQL functions to process data"));
  CHECK(std::string(operator_instruction(OperatorId::set)).find("UNION, INTERSECT, EXCEPT") != std::string::npos);
  std::set<std::string> texts;
  for (auto op : kOperators) {
    CHECK_FALSE(operator_instruction(op).empty());
    texts.insert(std::string(operator_instruction(op)));
  }
  CHECK(texts.size() == 6);
  CHECK(parse_operator("join") == OperatorId::join);
  CHECK(parse_operator("Functional Wrapping") == OperatorId::func);
  CHECK_FALSE(parse_operator("bogus").has_value());
}

TEST_CASE("corpus sweep: every planned rewrite raises its feature and stays valid") {
  std::map<std::string, Database> dbs;
  for (const char* n : {"olympics", "school", "retail"}) dbs.emplace(n, testsupport::open_fixture(n));
  std::size_t applied = 0;
  for (const auto& q : testsupport::golden_corpus()) {
    const auto& schema = testsupport::fixture_schema(q.db_id);
    DatabaseSampler sampler(dbs.at(q.db_id));
    auto tree = parse_sql(q.sql);
    auto hash = tree_hash(tree.root);
    for (auto op : kOperators) {
      if (check_applicability(tree, schema, op).score == 0.0) continue;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto plan = plan_mutation(tree, schema, op, seed, &sampler);
        auto out = apply_mutation(tree, plan);
        ++applied;
        INFO(q.id << " " << operator_code(op) << " seed " << seed << ": " << render_sql(out));
        CHECK(associated_feature(op, out) > associated_feature(op, tree));
        if (op == OperatorId::op) CHECK(omega_count(out) > omega_count(tree));
        CHECK(invariant_violations(out.root).empty());
        auto text = render_sql(out);
        CHECK(parse_sql(text) == out);
        CHECK(resolve_references(out, schema).fully_resolved());
        CHECK(tree_hash(tree.root) == hash);
      }
    }
  }
  CHECK(applied > 500);
}
