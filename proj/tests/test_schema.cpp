#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <set>

#include "sqlforge/error.hpp"
#include "sqlforge/schema.hpp"
#include "sqlforge/text_util.hpp"
#include "test_support.hpp"

using namespace sqlforge;
using testsupport::make_db;
using testsupport::temp_dir;

namespace {

const char* kTwoTableScript = R"(
CREATE TABLE person (id INTEGER PRIMARY KEY, full_name TEXT NOT NULL, weight INTEGER);
CREATE TABLE games_competitor (id INTEGER PRIMARY KEY, person_id INTEGER REFERENCES person(id),
                               games_id INTEGER, age INTEGER);
)";

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("two-table fixture introspects tables, keys and the single foreign key") {
  auto dir = temp_dir("schema-two");
  auto file = make_db(dir, "mini", kTwoTableScript);
  auto schema = load_schema(file);
  CHECK(schema.schema_id == "mini");
  REQUIRE(schema.tables.size() == 2);

  std::size_t fks = 0;
  for (const auto& t : schema.tables) fks += t.foreign_keys.size();
  // One REFERENCES clause in the DDL.
  CHECK(fks == count_occurrences(kTwoTableScript, "REFERENCES"));

  const TableDef* gc = schema.find_table("games_competitor");
  REQUIRE(gc != nullptr);
  REQUIRE(gc->foreign_keys.size() == 1);
  CHECK(gc->foreign_keys[0].referenced_table == "person");
  CHECK(gc->foreign_keys[0].columns == std::vector<std::string>{"person_id"});
  CHECK(gc->foreign_keys[0].referenced_columns == std::vector<std::string>{"id"});
  CHECK(gc->primary_key == std::vector<std::string>{"id"});

  const TableDef* p = schema.find_table("PERSON");
  REQUIRE(p != nullptr);
  CHECK_FALSE(p->find_column("full_name")->nullable);
  CHECK(p->find_column("weight")->affinity == Affinity::integer);
  CHECK(p->find_column("full_name")->affinity == Affinity::text);
}

TEST_CASE("empty database fails validation with no tables") {
  auto dir = temp_dir("schema-empty");
  auto file = make_db(dir, "empty", "");
  try {
    (void)load_schema(file);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0] == "no tables");
  }
}

TEST_CASE("foreign key to a missing table names the dangling reference") {
  auto dir = temp_dir("schema-dangling");
  auto file = make_db(dir, "bad", "CREATE TABLE a (id INTEGER PRIMARY KEY, ghost_id INTEGER REFERENCES ghost(id));");
  try {
    (void)load_schema(file);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    bool named = false;
    for (const auto& v : e.violations()) named = named || v.find("ghost") != std::string::npos;
    CHECK(named);
  }
}

TEST_CASE("unreadable file is an IO error") {
  CHECK_THROWS_AS(load_schema("/nonexistent/dir/x.sqlite"), IoError);
}

TEST_CASE("affinity follows the declared type rules") {
  CHECK(affinity_from_declared_type("INTEGER") == Affinity::integer);
  CHECK(affinity_from_declared_type("BIGINT") == Affinity::integer);
  CHECK(affinity_from_declared_type("VARCHAR(20)") == Affinity::text);
  CHECK(affinity_from_declared_type("CLOB") == Affinity::text);
  CHECK(affinity_from_declared_type("BLOB") == Affinity::blob);
  CHECK(affinity_from_declared_type("") == Affinity::blob);
  CHECK(affinity_from_declared_type("DOUBLE") == Affinity::real);
  CHECK(affinity_from_declared_type("FLOAT") == Affinity::real);
  CHECK(affinity_from_declared_type("DECIMAL(10,2)") == Affinity::numeric);
  CHECK(affinity_from_declared_type("DATE") == Affinity::numeric);
}

TEST_CASE("join graph edge person to games_competitor carries the FK equality") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto graph = fk_join_graph(schema);
  bool found = false;
  for (const auto& e : neighbors(graph, "person")) {
    if (e.neighbor == "games_competitor") {
      found = true;
      CHECK(e.condition_text() == "person.id = games_competitor.person_id");
    }
  }
  CHECK(found);
}

TEST_CASE("join graph is symmetric on every fixture") {
  for (const char* name : {"olympics", "school", "retail"}) {
    auto graph = fk_join_graph(testsupport::fixture_schema(name));
    for (const auto& [table, edges] : graph) {
      for (const auto& e : edges) {
        bool back = false;
        for (const auto& r : neighbors(graph, e.neighbor)) back = back || to_lower(r.neighbor) == table;
        CHECK_MESSAGE(back, name << ": " << table << " -> " << e.neighbor);
      }
    }
  }
}

TEST_CASE("schema without foreign keys has an empty adjacency per table") {
  auto dir = temp_dir("schema-nofk");
  auto file = make_db(dir, "flat", "CREATE TABLE a (x INTEGER); CREATE TABLE b (y TEXT);");
  auto graph = fk_join_graph(load_schema(file));
  CHECK(graph.size() == 2);
  for (const auto& [t, edges] : graph) CHECK(edges.empty());
}

TEST_CASE("competitor_event is two hops from person") {
  auto graph = fk_join_graph(testsupport::fixture_schema("olympics"));
  // Plain breadth-first search over the adjacency map.
  std::map<std::string, int> dist{{"person", 0}};
  std::deque<std::string> queue{"person"};
  while (!queue.empty()) {
    auto t = queue.front();
    queue.pop_front();
    for (const auto& e : neighbors(graph, t)) {
      auto n = to_lower(e.neighbor);
      if (!dist.count(n)) {
        dist[n] = dist[t] + 1;
        queue.push_back(n);
      }
    }
  }
  CHECK(dist.at("games_competitor") == 1);
  CHECK(dist.at("competitor_event") == 2);
}

TEST_CASE("schema prompt rendering") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto text = render_schema_prompt(schema);
  CHECK(text.find("FOREIGN KEY (person_id) REFERENCES person") != std::string::npos);
  CHECK(count_occurrences(text, "CREATE TABLE") == schema.tables.size());
  CHECK(render_schema_prompt(schema) == text);

  auto dir = temp_dir("schema-one");
  auto one = load_schema(make_db(dir, "one", "CREATE TABLE solo (v INTEGER);"));
  auto solo = render_schema_prompt(one);
  CHECK(count_occurrences(solo, "CREATE TABLE") == 1);
  CHECK(solo.find("solo") != std::string::npos);
}

TEST_CASE("date-like columns are text columns matching the name patterns") {
  CHECK(is_date_like({"birth_date", Affinity::text, true, "TEXT"}));
  CHECK(is_date_like({"signup_time", Affinity::text, true, "TEXT"}));
  CHECK(is_date_like({"games_year", Affinity::integer, true, "INTEGER"}) == false);
  CHECK_FALSE(is_date_like({"full_name", Affinity::text, true, "TEXT"}));
  std::vector<std::string> custom{"stamp"};
  CHECK(is_date_like({"created_stamp", Affinity::text, true, "TEXT"}, custom));
}

TEST_CASE("duplicate table and column names violate the invariants") {
  DatabaseSchema s;
  s.schema_id = "x";
  s.tables.push_back({"t", {{"a", Affinity::integer, true, "INTEGER"}, {"A", Affinity::text, true, "TEXT"}}, {}, {}});
  s.tables.push_back({"T", {{"b", Affinity::integer, true, "INTEGER"}}, {"zz"}, {}});
  auto v = schema_violations(s);
  std::set<std::string> joined(v.begin(), v.end());
  CHECK(v.size() >= 3);
  bool dup_table = false, dup_col = false, pk = false;
  for (const auto& m : v) {
    dup_table = dup_table || m.find("duplicate table") != std::string::npos;
    dup_col = dup_col || m.find("duplicate column") != std::string::npos;
    pk = pk || m.find("primary key") != std::string::npos;
  }
  CHECK(dup_table);
  CHECK(dup_col);
  CHECK(pk);
}
