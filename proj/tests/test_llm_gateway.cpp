#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <deque>
#include <set>
#include <thread>

#include "sqlforge/error.hpp"
#include "sqlforge/features.hpp"
#include "sqlforge/harness.hpp"
#include "sqlforge/llm_gateway.hpp"
#include "sqlforge/parser.hpp"
#include "sqlforge/prompts.hpp"
#include "sqlforge/resolve.hpp"
#include "test_support.hpp"

using namespace sqlforge;
using nlohmann::json;

namespace {

// Chat backend that replays canned completions and records the prompts it saw.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  std::vector<std::string> complete(const std::string& prompt, const Decoding& decoding) override {
    prompts.push_back(prompt);
    if (replies_.empty()) throw TransportError("script exhausted");
    std::vector<std::string> out;
    for (int i = 0; i < decoding.n && !replies_.empty(); ++i) {
      out.push_back(replies_.front());
      replies_.pop_front();
    }
    return out;
  }
  std::string tag() const override { return "scripted"; }
  std::vector<std::string> prompts;

 private:
  std::deque<std::string> replies_;
};

std::map<std::string, std::string> bindings_for(const std::vector<std::string>& names) {
  std::map<std::string, std::string> b;
  for (const auto& n : names) b[n] = "<<" + n + "-value>>";
  return b;
}

// Local chat-completion server on an ephemeral port.
struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  json last_body;
  std::string last_auth;
  int fail_first = 0;

  LocalServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      int n = ++hits;
      if (n <= fail_first) {
        res.status = 503;
        return;
      }
      last_body = json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      json choices = json::array();
      for (int i = 0; i < last_body.value("n", 1); ++i)
        choices.push_back({{"index", i}, {"message", {{"role", "assistant"}, {"content", "reply " + std::to_string(i)}}}});
      res.set_content(json{{"choices", choices}}.dump(), "application/json");
    });
    server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      json data = json::array();
      int i = 0;
      for (const auto& t : body["input"]) {
        double len = static_cast<double>(t.get<std::string>().size());
        data.push_back({{"index", i++}, {"embedding", {len, 1.0}}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
  EndpointConfig endpoint() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port);
    c.model = "test-model";
    c.timeout_s = 5;
    c.retries = 2;
    c.backoff_ms = 1;
    c.api_key_env = "SQLFORGE_TEST_KEY";
    return c;
  }
};

}  // namespace

TEST_CASE("every template renders with all placeholders bound and none left over") {
  std::map<std::string, std::vector<std::string>> expected{
      {"expansion", {"DATABASE_SCHEMA", "EVIDENCE", "GOLD_SQL", "QUESTION"}},
      {"evolution", {"DATABASE_SCHEMA", "EVIDENCE", "GOLD_SQL", "OPERATION", "QUESTION"}},
      {"strategy", {"DATABASE_SCHEMA", "GOLD_SQL", "QUESTION"}},
      {"cot", {"DATABASE_SCHEMA", "EVIDENCE", "QUESTION"}},
      {"refine", {"DATABASE_SCHEMA", "DRAFT_SQL", "FEEDBACK", "QUESTION"}},
  };
  for (const auto& [key, names] : expected) {
    auto text = std::string(prompt_asset(key));
    auto found = template_placeholders(text);
    std::set<std::string> got(found.begin(), found.end());
    CHECK_MESSAGE(got == std::set<std::string>(names.begin(), names.end()), key);
    auto b = bindings_for(names);
    auto rendered = render_template(text, b);
    for (const auto& [n, v] : b) CHECK_MESSAGE(rendered.find(v) != std::string::npos, key << " " << n);
    CHECK(template_placeholders(rendered).empty());
    // Dropping any binding is refused.
    for (const auto& n : names) {
      auto partial = b;
      partial.erase(n);
      CHECK_THROWS_AS(render_template(text, partial), ValidationError);
    }
  }
  CHECK(std::string(prompt_asset("expansion")).find("draw inspiration from the given NL2SQL question") !=
        std::string::npos);
  CHECK(std::string(prompt_asset("evolution")).find("increase the difficulty of the given NL2SQL question a bit") !=
        std::string::npos);
  CHECK_THROWS_AS(prompt_asset("nope"), Error);
}

TEST_CASE("render_request validates decoding and bindings") {
  GenerationRequest r{Role::strategize, "strategy", bindings_for({"DATABASE_SCHEMA", "GOLD_SQL", "QUESTION"}), {}};
  CHECK_FALSE(render_request(r).empty());
  r.decoding.n = 0;
  CHECK_THROWS_AS(render_request(r), ValidationError);
  CHECK(default_decoding(Role::refine).temperature == 0.0);
  CHECK(default_decoding(Role::strategize).temperature == 0.0);
  CHECK(default_decoding(Role::expand).temperature == doctest::Approx(0.8));
  CHECK(default_decoding(Role::teach).temperature == doctest::Approx(0.8));
}

TEST_CASE("structured response parsing") {
  CHECK(first_json_value("Sure! {\"a\": {\"b\": 1}} trailing") == std::optional<std::string>("{\"a\": {\"b\": 1}}"));
  CHECK_FALSE(first_json_value("no json here {oops").has_value());

  auto r = parse_expansion_response(
      "Here you go:\n```json\n{\"question\": \"How many?\", \"evidence\": \"\", \"gold_sql\": \"SELECT 1\"}\n```");
  CHECK(r.question == "How many?");
  CHECK(r.sql == "SELECT 1");
  CHECK_THROWS_AS(parse_expansion_response("{\"question\": \"q\", \"evidence\": \"e\"}"), ResponseFormatError);
  CHECK_THROWS_AS(parse_expansion_response("{\"question\": \"q\", \"gold_sql\": \"\"}"), ResponseFormatError);
  CHECK_THROWS_AS(parse_expansion_response("{\"gold_sql\": \"SELECT 1\"}"), ResponseFormatError);
  CHECK(parse_expansion_response("{\"gold_sql\": \"SELECT 1\"}", false).sql == "SELECT 1");

  CHECK(last_fenced_block("a ```sql\nSELECT 1\n``` b ```sql\nSELECT 2\n```") == std::optional<std::string>("SELECT 2"));
  CHECK_FALSE(last_fenced_block("no fences").has_value());
}

TEST_CASE("strategy responses: full, short and out of range") {
  const auto& schema = testsupport::fixture_schema("olympics");
  QueryInput q{"Who is heaviest?", "", "SELECT full_name FROM person ORDER BY weight DESC LIMIT 1"};

  json six = json::array();
  for (auto op : kOperators)
    six.push_back({{"operator", std::string(operator_display_name(op))}, {"score", 0.5}, {"justification", "ok"}});
  auto parsed = parse_strategy_response("Assessment:\n" + six.dump(2));
  CHECK(parsed.size() == 6);
  for (const auto& [op, s] : parsed) {
    CHECK(s.score == 0.5);
    CHECK(s.from_model);
  }

  json five = six;
  five.erase(five.begin() + 4);  // drop NEST
  auto strat = LiveStrategist(std::make_shared<ScriptedBackend>(std::deque<std::string>{five.dump()}));
  auto merged = strat.score(q, schema);
  CHECK(merged.size() == 6);
  CHECK_FALSE(merged.at(OperatorId::nest).from_model);
  auto rule = check_applicability(parse_sql(q.sql), schema, OperatorId::nest);
  CHECK(merged.at(OperatorId::nest).score == rule.score);
  CHECK(merged.at(OperatorId::join).from_model);

  json high = six;
  high[3]["score"] = "1.2";
  auto p = parse_strategy_response(high.dump());
  CHECK(p.size() == 5);
  CHECK_FALSE(p.count(OperatorId::join));

  CHECK_THROWS_AS(parse_strategy_response("nothing"), ResponseFormatError);
  // Transport failure falls back entirely to the rules.
  auto broken = LiveStrategist(std::make_shared<ScriptedBackend>(std::deque<std::string>{}));
  auto all_rule = broken.score(q, schema);
  CHECK(all_rule.size() == 6);
  for (const auto& [op, s] : all_rule) CHECK_FALSE(s.from_model);
}

TEST_CASE("mock refiner rules") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto db = testsupport::open_fixture("olympics");
  MockRefiner plain;

  auto fb = execute_sql(db, "SELECT full_nam FROM person");
  REQUIRE(fb.error());
  CHECK(plain.refine("q", "SELECT full_nam FROM person", schema, fb) == "SELECT full_name FROM person");

  std::string empty = "SELECT full_name FROM person WHERE full_name = 'Novak'";
  auto efb = execute_sql(db, empty);
  REQUIRE(efb.success());
  REQUIRE(efb.success()->row_count == 0);
  auto relaxed = plain.refine("q", empty, schema, efb);
  CHECK(relaxed.find("LIKE '%Novak%'") != std::string::npos);
  CHECK(is_acceptable(execute_sql(db, relaxed)));

  auto ok = execute_sql(db, "SELECT full_name FROM person");
  CHECK(plain.refine("q", "SELECT full_name FROM person", schema, ok) == "SELECT full_name FROM person");

  // With a sampler, a WHERE literal absent from its column is dropped.
  DatabaseSampler sampler(db);
  MockRefiner grounded(&sampler);
  std::string ghost = "SELECT full_name FROM person WHERE gender = 'Q' AND weight > 50";
  auto gfb = execute_sql(db, ghost);
  REQUIRE(gfb.success());
  REQUIRE(gfb.success()->row_count == 0);
  auto fixed = grounded.refine("q", ghost, schema, gfb);
  CHECK(fixed.find("'Q'") == std::string::npos);
  CHECK(fixed.find("weight > 50") != std::string::npos);
}

TEST_CASE("mock generator contracts") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto db = testsupport::open_fixture("olympics");
  DatabaseSampler sampler(db);
  MockGenerator gen;
  QueryInput seed{"Who is heaviest?", "", testsupport::golden_sql("trajectory-stage1")};

  auto e = gen.expand(seed, schema, &sampler, 5);
  CHECK(e.question.rfind("Rephrased: ", 0) == 0);
  CHECK(resolve_references(parse_sql(e.sql), schema).fully_resolved());
  CHECK(clause_width(parse_sql(e.sql)).total() > clause_width(parse_sql(seed.sql)).total());

  auto j = gen.evolve(seed, schema, OperatorId::join, &sampler, 5);
  CHECK(extract_features(parse_sql(j.sql)).joins == extract_features(parse_sql(seed.sql)).joins + 1);
  CHECK(j.question != seed.question);

  auto s = gen.evolve(seed, schema, OperatorId::set, &sampler, 5);
  CHECK(parse_sql(s.sql).root.kind == ast::NodeKind::set_op);

  DatabaseSampler sampler2(db);
  CHECK(gen.evolve(seed, schema, OperatorId::join, &sampler2, 5).sql == j.sql);
}

TEST_CASE("live generator retries malformed output within its budget") {
  const auto& schema = testsupport::fixture_schema("olympics");
  QueryInput seed{"q", "", "SELECT 1"};
  auto backend = std::make_shared<ScriptedBackend>(
      std::deque<std::string>{"not json", "{\"question\": \"New?\", \"evidence\": \"\", \"gold_sql\": \"SELECT 2\"}"});
  LiveGenerator gen(backend, 2);
  auto r = gen.evolve(seed, schema, OperatorId::func, nullptr, 0);
  CHECK(r.sql == "SELECT 2");
  REQUIRE(backend->prompts.size() == 2);
  CHECK(backend->prompts[0].find(std::string(operator_instruction(OperatorId::func))) != std::string::npos);
  CHECK(backend->prompts[0].find("SELECT 1") != std::string::npos);

  auto bad = std::make_shared<ScriptedBackend>(std::deque<std::string>{"x", "y", "z"});
  LiveGenerator gen2(bad, 2);
  CHECK_THROWS_AS(gen2.expand(seed, schema, nullptr, 0), ResponseFormatError);
}

TEST_CASE("live teacher keeps only candidates with a fenced SQL block") {
  const auto& schema = testsupport::fixture_schema("olympics");
  auto backend = std::make_shared<ScriptedBackend>(std::deque<std::string>{
      "Step 1...\n```sql\nSELECT 1\n```", "I could not decide.", "Thinking\n```sql\nSELECT 2\n```"});
  LiveTeacher t(backend);
  auto c = t.candidates({"q", "", "SELECT 1"}, schema, 3, 0);
  CHECK(c.size() == 2);
  CHECK(backend->prompts[0].find("SELECT 1") == std::string::npos);  // gold SQL stays hidden
  LiveTeacher none(std::make_shared<ScriptedBackend>(std::deque<std::string>{}));
  CHECK(none.candidates({"q", "", "SELECT 1"}, schema, 4, 0).empty());
}

TEST_CASE("mock teacher") {
  const auto& schema = testsupport::fixture_schema("olympics");
  MockTeacher t;
  CotQuery q{"Who is heaviest?", "", "SELECT full_name FROM person ORDER BY weight DESC LIMIT 1"};
  auto four = t.candidates(q, schema, 4, 1);
  CHECK(four.size() == 4);
  auto one = t.candidates(q, schema, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].sql == q.gold_sql);
  CHECK_FALSE(one[0].reasoning.empty());
  auto db = testsupport::open_fixture("olympics");
  for (std::size_t i = 1; i < four.size(); ++i) CHECK(execute_sql(db, four[i].sql).success()->row_count == 0);
}

TEST_CASE("HTTP chat backend speaks the chat-completion protocol") {
  LocalServer srv;
  ::setenv("SQLFORGE_TEST_KEY", "secret-token", 1);
  HttpChatBackend chat(srv.endpoint());
  Decoding d;
  d.n = 3;
  d.temperature = 0.25;
  auto out = chat.complete("hello prompt", d);
  CHECK(out == std::vector<std::string>{"reply 0", "reply 1", "reply 2"});
  CHECK(srv.last_body["model"] == "test-model");
  CHECK(srv.last_body["n"] == 3);
  CHECK(srv.last_body["temperature"].get<double>() == doctest::Approx(0.25));
  CHECK(srv.last_body["messages"][0]["role"] == "user");
  CHECK(srv.last_body["messages"][0]["content"] == "hello prompt");
  CHECK(srv.last_auth == "Bearer secret-token");
  ::unsetenv("SQLFORGE_TEST_KEY");

  SUBCASE("server errors are retried") {
    srv.hits = 0;
    srv.fail_first = 2;
    Decoding one;
    CHECK(chat.complete("again", one).size() == 1);
    CHECK(srv.hits == 3);
  }
  SUBCASE("exhausted retries surface as a transport error") {
    srv.hits = 0;
    srv.fail_first = 100;
    CHECK_THROWS_AS(chat.complete("fail", Decoding{}), TransportError);
    CHECK(srv.hits == 3);
  }
  SUBCASE("embeddings endpoint") {
    HttpEmbeddingBackend emb(srv.endpoint());
    auto v = emb.embed({"ab", "abcd"});
    REQUIRE(v.size() == 2);
    CHECK(v[0] == std::vector<double>{2.0, 1.0});
    CHECK(v[1] == std::vector<double>{4.0, 1.0});
  }
}

TEST_CASE("unreachable and unsupported endpoints") {
  EndpointConfig c;
  c.base_url = "http://127.0.0.1:1";
  c.retries = 0;
  c.timeout_s = 1;
  HttpChatBackend chat(c);
  CHECK_THROWS_AS(chat.complete("x", Decoding{}), TransportError);
  EndpointConfig s;
  s.base_url = "https://example.invalid";
  HttpChatBackend secure(s);
  CHECK_THROWS_AS(secure.complete("x", Decoding{}), TransportError);
  EndpointConfig bad;
  bad.base_url = "not a url";
  CHECK_THROWS_AS(HttpChatBackend{bad}, TransportError);
}
