#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sqlforge/cot.hpp"
#include "sqlforge/error.hpp"
#include "test_support.hpp"

using namespace sqlforge;

namespace {

class ScriptedTeacher : public Teacher {
 public:
  explicit ScriptedTeacher(std::vector<CotCandidate> c) : list_(std::move(c)) {}
  std::vector<CotCandidate> candidates(const CotQuery& q, const DatabaseSchema&, int n, std::uint64_t) override {
    last_query = q;
    asked = n;
    return {list_.begin(), list_.begin() + std::min<std::ptrdiff_t>(n, static_cast<std::ptrdiff_t>(list_.size()))};
  }
  std::string tag() const override { return "scripted"; }
  CotQuery last_query;
  int asked = 0;

 private:
  std::vector<CotCandidate> list_;
};

CotInput input_for(const std::string& gold, const std::string& id = "s0001") {
  return {id, "olympics", "Which athletes weigh over 90?", "", gold, 42};
}

// Sorted text rows straight from the engine, for comparing query outcomes in the oracle.
std::vector<std::string> sorted_rows(const Database& db, const std::string& sql) {
  Statement st(db, sql);
  std::vector<std::string> rows;
  while (st.step()) {
    std::string r;
    for (int i = 0; i < st.column_count(); ++i) r += cell_to_text(st.column(i)) + "|";
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("mock teacher is accepted on its first candidate") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  MockTeacher teacher;
  GoldResultCache cache;
  auto gold = testsupport::golden_sql("trajectory-stage2");
  auto out = synthesize_cot(input_for(gold), db, schema, teacher, 4, cache);
  REQUIRE(std::holds_alternative<CotRecord>(out));
  const auto& rec = std::get<CotRecord>(out);
  CHECK(rec.attempts_used == 1);
  CHECK(rec.verified_sql == gold);
  CHECK_FALSE(rec.trace.empty());
  CHECK(rec.teacher_tag == "mock-teacher");
  CHECK(rec.instance_id == "s0001");
}

TEST_CASE("four invalid candidates give a discard with four engine errors") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  ScriptedTeacher teacher({{"t1", "SELEC full_name FROM person"},
                           {"t2", "SELECT full_name FROM nowhere"},
                           {"t3", "SELECT nosuch FROM person"},
                           {"t4", "SELECT full_name FROM person WHERE"}});
  GoldResultCache cache;
  auto out = synthesize_cot(input_for("SELECT full_name FROM person WHERE weight > 90"), db, schema, teacher, 4, cache);
  REQUIRE(std::holds_alternative<CotDiscard>(out));
  const auto& d = std::get<CotDiscard>(out);
  REQUIRE(d.reasons.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    // Each reason carries the engine message for that candidate.
    auto fb = execute_sql(db, std::vector<std::string>{"SELEC full_name FROM person", "SELECT full_name FROM nowhere",
                                                       "SELECT nosuch FROM person",
                                                       "SELECT full_name FROM person WHERE"}[i]);
    REQUIRE(fb.error());
    CHECK_MESSAGE(d.reasons[i].find(fb.error()->message) != std::string::npos, d.reasons[i]);
  }
}

TEST_CASE("the lowest-index correct candidate wins") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  std::string gold = "SELECT full_name FROM person WHERE weight > 90";
  std::vector<CotCandidate> cands{{"trace 1", "SELECT full_name FROM person WHERE weight > 95"},
                                  {"trace 2", "SELECT full_name FROM person"},
                                  {"trace 3", "SELECT p.full_name FROM person p WHERE p.weight >= 91"},
                                  {"trace 4", "SELECT full_name FROM person WHERE 90 < weight"}};
  // Oracle: run every candidate and the gold directly and compare sorted rows.
  auto expect = sorted_rows(db, gold);
  REQUIRE_FALSE(expect.empty());
  std::vector<bool> matches;
  for (const auto& c : cands) matches.push_back(sorted_rows(db, c.sql) == expect);
  REQUIRE(matches == std::vector<bool>{false, false, true, true});

  ScriptedTeacher teacher(cands);
  GoldResultCache cache;
  auto out = synthesize_cot(input_for(gold), db, schema, teacher, 4, cache);
  REQUIRE(std::holds_alternative<CotRecord>(out));
  CHECK(std::get<CotRecord>(out).trace == "trace 3");
  CHECK(std::get<CotRecord>(out).attempts_used == 3);
  CHECK(std::get<CotRecord>(out).verified_sql == cands[2].sql);
  CHECK(teacher.asked == 4);
  CHECK(teacher.last_query.gold_sql == gold);
}

TEST_CASE("no candidates at all defers the instance") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  ScriptedTeacher teacher({});
  GoldResultCache cache;
  auto out = synthesize_cot(input_for("SELECT 1"), db, schema, teacher, 4, cache);
  REQUIRE(std::holds_alternative<CotDeferred>(out));
  CHECK(std::get<CotDeferred>(out).instance_id == "s0001");
}

TEST_CASE("a short candidate list is judged on what arrived") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  ScriptedTeacher teacher({{"a", "SELECT 2"}, {"b", "SELECT 3"}});
  GoldResultCache cache;
  auto out = synthesize_cot(input_for("SELECT 1"), db, schema, teacher, 4, cache);
  REQUIRE(std::holds_alternative<CotDiscard>(out));
  CHECK(std::get<CotDiscard>(out).reasons.size() == 2);
}

TEST_CASE("gold SQL must run and return rows") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  MockTeacher teacher;
  GoldResultCache cache;
  CHECK_THROWS_AS(synthesize_cot(input_for("SELECT * FROM missing"), db, schema, teacher, 4, cache), PreconditionError);
  CHECK_THROWS_AS(synthesize_cot(input_for("SELECT id FROM person WHERE 1 = 0"), db, schema, teacher, 4, cache),
                  PreconditionError);
}

TEST_CASE("ordering matters only when both sides are ordered") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  GoldResultCache cache;
  std::string gold = "SELECT id FROM person WHERE id <= 5 ORDER BY id";
  ScriptedTeacher reversed(std::vector<CotCandidate>{{"r", "SELECT id FROM person WHERE id <= 5 ORDER BY id DESC"}});
  CHECK(std::holds_alternative<CotDiscard>(synthesize_cot(input_for(gold), db, schema, reversed, 1, cache)));
  ScriptedTeacher unordered(std::vector<CotCandidate>{{"u", "SELECT id FROM person WHERE id <= 5"}});
  CHECK(std::holds_alternative<CotRecord>(synthesize_cot(input_for(gold), db, schema, unordered, 1, cache)));
}

TEST_CASE("gold results are cached per schema and SQL") {
  auto db = testsupport::open_fixture("olympics");
  const auto& schema = testsupport::fixture_schema("olympics");
  MockTeacher teacher;
  GoldResultCache cache;
  auto gold = testsupport::golden_sql("trajectory-stage0");
  (void)synthesize_cot(input_for(gold, "a"), db, schema, teacher, 4, cache);
  (void)synthesize_cot(input_for(gold, "b"), db, schema, teacher, 4, cache);
  CHECK(cache.size() == 1);
  (void)synthesize_cot(input_for(testsupport::golden_sql("trajectory-stage1"), "c"), db, schema, teacher, 4, cache);
  CHECK(cache.size() == 2);
}

TEST_CASE("every kept record re-verifies against its gold across the corpus") {
  MockTeacher teacher;
  GoldResultCache cache;
  std::size_t kept = 0;
  for (const auto& q : testsupport::golden_corpus()) {
    auto db = testsupport::open_fixture(q.db_id);
    const auto& schema = testsupport::fixture_schema(q.db_id);
    CotInput in{q.id, q.db_id, "question " + q.id, "", q.sql, 1};
    auto out = synthesize_cot(in, db, schema, teacher, 4, cache);
    REQUIRE(std::holds_alternative<CotRecord>(out));
    ++kept;
    const auto& rec = std::get<CotRecord>(out);
    auto a = collect_result(db, rec.verified_sql), b = collect_result(db, q.sql);
    REQUIRE(std::holds_alternative<ResultMultiset>(a));
    REQUIRE(std::holds_alternative<ResultMultiset>(b));
    CHECK(results_equivalent(std::get<ResultMultiset>(a), std::get<ResultMultiset>(b)));
  }
  CHECK(kept == 50);
}
