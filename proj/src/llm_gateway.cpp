#include "sqlforge/llm_gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sqlforge/error.hpp"
#include "sqlforge/features.hpp"
#include "sqlforge/lexer.hpp"
#include "sqlforge/parser.hpp"
#include "sqlforge/prompts.hpp"
#include "sqlforge/render.hpp"
#include "sqlforge/resolve.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

using nlohmann::json;

std::string_view role_name(Role r) {
  switch (r) {
    case Role::expand: return "expand";
    case Role::evolve: return "evolve";
    case Role::refine: return "refine";
    case Role::strategize: return "strategize";
    case Role::teach: return "teach";
  }
  return "?";
}

Decoding default_decoding(Role r) {
  Decoding d;
  d.temperature = (r == Role::refine || r == Role::strategize) ? 0.0 : 0.8;
  return d;
}

std::string render_request(const GenerationRequest& request) {
  if (request.decoding.n < 1) throw ValidationError({"decoding.n must be at least 1"});
  return render_template(prompt_asset(request.template_id), request.bindings);
}

// ---- response parsing ---------------------------------------------------------

namespace {

// End of the bracketed value starting at `start`, skipping string contents.
std::optional<std::size_t> matching_close(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i;
    }
  }
  return std::nullopt;
}

std::string strip_sql(std::string sql) {
  sql = trim(sql);
  if (auto fenced = last_fenced_block(sql)) sql = *fenced;
  while (!sql.empty() && (sql.back() == ';' || std::isspace(static_cast<unsigned char>(sql.back())))) sql.pop_back();
  return trim(sql);
}

}  // namespace

std::optional<std::string> first_json_value(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    auto end = matching_close(text, i);
    if (!end) continue;
    std::string candidate(text.substr(i, *end - i + 1));
    if (json::accept(candidate)) return candidate;
  }
  return std::nullopt;
}

ExpansionResult parse_expansion_response(std::string_view text, bool require_question) {
  auto raw = first_json_value(text);
  if (!raw) throw ResponseFormatError("response contains no JSON object");
  json j = json::parse(*raw);
  if (!j.is_object()) throw ResponseFormatError("response JSON is not an object");
  auto text_field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ResponseFormatError(std::string("\"") + key + "\" is not a string");
    return j[key].get<std::string>();
  };
  ExpansionResult out;
  auto sql = text_field("gold_sql");
  if (!sql) throw ResponseFormatError("response is missing \"gold_sql\"");
  out.sql = strip_sql(*sql);
  if (out.sql.empty()) throw ResponseFormatError("\"gold_sql\" is empty");
  auto q = text_field("question");
  if (require_question && (!q || trim(*q).empty())) throw ResponseFormatError("response is missing \"question\"");
  out.question = q ? trim(*q) : std::string();
  out.evidence = trim(text_field("evidence").value_or(""));
  return out;
}

std::optional<std::string> last_fenced_block(std::string_view text) {
  std::vector<std::size_t> fences;
  for (std::size_t pos = text.find("```"); pos != std::string_view::npos; pos = text.find("```", pos + 3)) {
    fences.push_back(pos);
  }
  if (fences.size() < 2) return std::nullopt;
  std::size_t pairs = fences.size() / 2;
  std::size_t open = fences[2 * pairs - 2];
  std::size_t close = fences[2 * pairs - 1];
  std::size_t body = open + 3;
  std::size_t newline = text.find('\n', body);
  // The rest of the opening line is a language tag.
  if (newline != std::string_view::npos && newline < close) body = newline + 1;
  return trim(text.substr(body, close - body));
}

std::map<OperatorId, FeasibilityScore> parse_strategy_response(std::string_view text) {
  std::optional<json> arr;
  for (std::size_t i = text.find('['); i != std::string_view::npos; i = text.find('[', i + 1)) {
    auto end = matching_close(text, i);
    if (!end) continue;
    std::string candidate(text.substr(i, *end - i + 1));
    if (json::accept(candidate)) {
      arr = json::parse(candidate);
      break;
    }
  }
  if (!arr) throw ResponseFormatError("strategy response contains no JSON array");
  std::map<OperatorId, FeasibilityScore> out;
  static const std::regex numbering(R"(^\s*\d+\s*[.)]\s*)");
  for (const auto& e : *arr) {
    if (!e.is_object() || !e.contains("operator") || !e["operator"].is_string()) continue;
    auto op = parse_operator(std::regex_replace(e["operator"].get<std::string>(), numbering, ""));
    if (!op || out.count(*op) || !e.contains("score")) continue;
    double score = -1;
    const json& s = e["score"];
    if (s.is_number()) {
      score = s.get<double>();
    } else if (s.is_string()) {
      char* end = nullptr;
      std::string str = trim(s.get<std::string>());
      score = std::strtod(str.c_str(), &end);
      if (str.empty() || end != str.c_str() + str.size()) continue;
    } else {
      continue;
    }
    if (!(score >= 0.0 && score <= 1.0)) continue;
    FeasibilityScore fs;
    fs.score = score;
    fs.from_model = true;
    if (e.contains("justification") && e["justification"].is_string()) fs.justification = e["justification"];
    out[*op] = fs;
  }
  return out;
}

// ---- transport ----------------------------------------------------------------

namespace {

struct Url {
  std::string origin;  // scheme://host:port
  std::string prefix;  // path prefix without trailing slash
};

Url split_url(const std::string& base) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base, m, re)) throw TransportError("invalid endpoint URL '" + base + "'");
  Url u{m[1].str(), m[2].str()};
  while (!u.prefix.empty() && u.prefix.back() == '/') u.prefix.pop_back();
  return u;
}

std::string endpoint_path(const Url& u, const std::string& tail) {
  // Accept bases with or without the version segment.
  if (u.prefix.size() >= 3 && u.prefix.compare(u.prefix.size() - 3, 3, "/v1") == 0) return u.prefix + tail;
  return u.prefix + "/v1" + tail;
}

json post_json(const EndpointConfig& cfg, const std::string& tail, const json& body) {
  Url url = split_url(cfg.base_url);
  if (url.origin.rfind("https://", 0) == 0) throw TransportError("https endpoints are not supported; use a local http proxy");
  httplib::Client client(url.origin);
  client.set_connection_timeout(cfg.timeout_s, 0);
  client.set_read_timeout(cfg.timeout_s, 0);
  client.set_write_timeout(cfg.timeout_s, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  std::string path = endpoint_path(url, tail);
  std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + url.origin + path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      if (!json::accept(res->body)) throw ResponseFormatError("endpoint returned a non-JSON body");
      return json::parse(res->body);
    }
    last_error = "endpoint " + path + " returned HTTP " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;  // client errors are not retried
  }
  throw TransportError(last_error);
}

}  // namespace

HttpChatBackend::HttpChatBackend(EndpointConfig config) : config_(std::move(config)) { split_url(config_.base_url); }

std::vector<std::string> HttpChatBackend::complete(const std::string& prompt, const Decoding& decoding) {
  std::vector<std::string> out;
  // Some servers ignore n; keep asking until enough choices arrived.
  while (static_cast<int>(out.size()) < decoding.n) {
    json body = {{"model", config_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", decoding.temperature},
                 {"max_tokens", decoding.max_tokens},
                 {"n", decoding.n - static_cast<int>(out.size())}};
    json res = post_json(config_, "/chat/completions", body);
    std::size_t before = out.size();
    if (res.contains("choices") && res["choices"].is_array()) {
      for (const auto& c : res["choices"]) {
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
          out.push_back(c["message"]["content"].get<std::string>());
      }
    }
    if (out.size() == before) throw ResponseFormatError("chat completion carried no choices");
  }
  out.resize(static_cast<std::size_t>(decoding.n));
  return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(EndpointConfig config) : config_(std::move(config)) {
  split_url(config_.base_url);
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(const std::vector<std::string>& texts) {
  json res = post_json(config_, "/embeddings", {{"model", config_.model}, {"input", texts}});
  if (!res.contains("data") || !res["data"].is_array() || res["data"].size() != texts.size())
    throw ResponseFormatError("embedding response does not match the input count");
  std::vector<std::vector<double>> out(texts.size());
  for (std::size_t i = 0; i < res["data"].size(); ++i) {
    const json& d = res["data"][i];
    std::size_t index = d.value("index", i);
    if (index >= out.size() || !d.contains("embedding")) throw ResponseFormatError("malformed embedding entry");
    out[index] = d["embedding"].get<std::vector<double>>();
  }
  return out;
}

// ---- live roles ---------------------------------------------------------------

namespace {

std::map<std::string, std::string> base_bindings(const QueryInput& q, const DatabaseSchema& schema) {
  return {{"DATABASE_SCHEMA", render_schema_prompt(schema)},
          {"EVIDENCE", q.evidence},
          {"QUESTION", q.question},
          {"GOLD_SQL", q.sql}};
}

}  // namespace

ExpansionResult LiveGenerator::ask(const GenerationRequest& request) {
  std::string prompt = render_request(request);
  std::string last;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    auto texts = backend_->complete(prompt, request.decoding);
    try {
      if (texts.empty()) throw ResponseFormatError("no completion returned");
      return parse_expansion_response(texts.front());
    } catch (const ResponseFormatError& e) {
      last = e.what();
      spdlog::debug("{} response rejected: {}", role_name(request.role), last);
    }
  }
  throw ResponseFormatError(last);
}

ExpansionResult LiveGenerator::expand(const QueryInput& seed, const DatabaseSchema& schema, ValueSampler*,
                                      std::uint64_t) {
  return ask({Role::expand, "expansion", base_bindings(seed, schema), default_decoding(Role::expand)});
}

ExpansionResult LiveGenerator::evolve(const QueryInput& seed, const DatabaseSchema& schema, OperatorId op,
                                      ValueSampler*, std::uint64_t) {
  auto bindings = base_bindings(seed, schema);
  bindings["OPERATION"] = std::string(operator_instruction(op));
  return ask({Role::evolve, "evolution", std::move(bindings), default_decoding(Role::evolve)});
}

std::string LiveRefiner::refine(const std::string& question, const std::string& sql, const DatabaseSchema& schema,
                                const ExecutionFeedback& feedback) {
  GenerationRequest req{Role::refine,
                        "refine",
                        {{"DATABASE_SCHEMA", render_schema_prompt(schema)},
                         {"QUESTION", question},
                         {"DRAFT_SQL", sql},
                         {"FEEDBACK", feedback.to_text()}},
                        default_decoding(Role::refine)};
  std::string prompt = render_request(req);
  std::string last;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    auto texts = backend_->complete(prompt, req.decoding);
    try {
      if (texts.empty()) throw ResponseFormatError("no completion returned");
      return parse_expansion_response(texts.front(), false).sql;
    } catch (const ResponseFormatError& e) {
      last = e.what();
    }
  }
  throw ResponseFormatError(last);
}

std::map<OperatorId, FeasibilityScore> merge_with_rule_scores(std::map<OperatorId, FeasibilityScore> model,
                                                               const QueryInput& query, const DatabaseSchema& schema,
                                                               const PlannerOptions& options) {
  std::optional<ast::SqlAst> tree;
  for (OperatorId op : kOperators) {
    if (model.count(op)) continue;
    spdlog::warn("no usable model score for {}; using the rule-based score", operator_code(op));
    FeasibilityScore fs;
    try {
      if (!tree) tree = parse_sql(query.sql);
      auto rep = check_applicability(*tree, schema, op, options);
      fs.score = rep.score;
      fs.justification = rep.justification;
    } catch (const Error& e) {
      fs.justification = std::string("query could not be analyzed: ") + e.what();
    }
    model[op] = fs;
  }
  return model;
}

std::map<OperatorId, FeasibilityScore> LiveStrategist::score(const QueryInput& query, const DatabaseSchema& schema) {
  std::map<OperatorId, FeasibilityScore> parsed;
  try {
    GenerationRequest req{Role::strategize, "strategy", base_bindings(query, schema), default_decoding(Role::strategize)};
    req.bindings.erase("EVIDENCE");
    auto texts = backend_->complete(render_request(req), req.decoding);
    if (!texts.empty()) parsed = parse_strategy_response(texts.front());
  } catch (const Error& e) {
    spdlog::warn("strategy scoring failed ({}); falling back to rule-based scores", e.what());
  }
  return merge_with_rule_scores(std::move(parsed), query, schema, options_);
}

std::vector<CotCandidate> LiveTeacher::candidates(const CotQuery& query, const DatabaseSchema& schema, int n,
                                                  std::uint64_t) {
  GenerationRequest req{Role::teach,
                        "cot",
                        {{"DATABASE_SCHEMA", render_schema_prompt(schema)},
                         {"EVIDENCE", query.evidence},
                         {"QUESTION", query.question}},
                        default_decoding(Role::teach)};
  req.decoding.n = n;
  std::vector<std::string> texts;
  try {
    texts = backend_->complete(render_request(req), req.decoding);
  } catch (const TransportError& e) {
    spdlog::warn("teacher request failed: {}", e.what());
    return {};
  } catch (const ResponseFormatError& e) {
    spdlog::warn("teacher response unusable: {}", e.what());
    return {};
  }
  std::vector<CotCandidate> out;
  for (const auto& t : texts) {
    auto sql = last_fenced_block(t);
    if (!sql || strip_sql(*sql).empty()) continue;
    std::size_t fence = t.rfind("```", t.rfind("```") - 1);
    out.push_back({trim(std::string_view(t).substr(0, fence)), strip_sql(*sql)});
  }
  return out;
}

// ---- mock roles ---------------------------------------------------------------

namespace {

// Question text with the rewrite folded in, keeping the closing punctuation.
std::string extend_question(const std::string& question, const std::string& clause) {
  std::string base = trim(question);
  char end = '.';
  if (!base.empty() && (base.back() == '?' || base.back() == '.' || base.back() == '!')) {
    end = base.back() == '?' ? '?' : '.';
    base.pop_back();
  }
  if (clause.empty()) return base + end;
  return base + ", " + clause + end;
}

}  // namespace

ExpansionResult MockGenerator::expand(const QueryInput& seed, const DatabaseSchema& schema, ValueSampler* sampler,
                                      std::uint64_t seed_value) {
  auto tree = parse_sql(seed.sql);
  ExpansionResult out{"", seed.evidence, render_sql(tree)};
  std::string clause;
  try {
    auto plan = plan_mutation(tree, schema, OperatorId::logic, seed_value, sampler, options_);
    out.sql = render_sql(apply_mutation(tree, plan));
    clause = plan.description;
  } catch (const PreconditionError&) {
    // No clause to expand; the paraphrase alone stands.
  }
  out.question = "Rephrased: " + extend_question(seed.question, clause);
  return out;
}

ExpansionResult MockGenerator::evolve(const QueryInput& seed, const DatabaseSchema& schema, OperatorId op,
                                      ValueSampler* sampler, std::uint64_t seed_value) {
  auto tree = parse_sql(seed.sql);
  try {
    auto plan = plan_mutation(tree, schema, op, seed_value, sampler, options_);
    auto evolved = apply_mutation(tree, plan);
    return {extend_question(seed.question, plan.description), seed.evidence, render_sql(evolved)};
  } catch (const PreconditionError& e) {
    throw ResponseFormatError(std::string("mock cannot apply ") + std::string(operator_code(op)) + ": " + e.what());
  }
}

namespace {

std::optional<std::pair<std::string, bool>> unknown_identifier(const std::string& message) {
  static const std::regex column(R"((?:no such column|unresolved column reference): ([^\s,]+))");
  static const std::regex table(R"((?:no such table|unknown table): ([^\s,]+))");
  std::smatch m;
  if (std::regex_search(message, m, column)) return std::pair{m[1].str(), true};
  if (std::regex_search(message, m, table)) return std::pair{m[1].str(), false};
  return std::nullopt;
}

std::string replace_identifier(const std::string& sql, const std::string& bad, const std::string& good) {
  std::string out;
  std::size_t copied = 0;
  for (const auto& t : lex_sql(sql, false)) {
    if (t.kind != TokenKind::identifier && t.kind != TokenKind::quoted_identifier) continue;
    if (!iequals(t.value, bad)) continue;
    out.append(sql, copied, t.position - copied);
    out += render_identifier(schema_identifier(good));
    copied = t.position + t.text.size();
  }
  out.append(sql, copied);
  return out;
}

std::string repair_identifier(const std::string& sql, const DatabaseSchema& schema, const std::string& message) {
  auto found = unknown_identifier(message);
  if (!found) return sql;
  std::string bad = found->first;
  if (auto dot = bad.rfind('.'); dot != std::string::npos) bad = bad.substr(dot + 1);
  std::vector<std::string> names;
  for (const auto& t : schema.tables) {
    if (found->second) {
      for (const auto& c : t.columns) names.push_back(c.name);
    } else {
      names.push_back(t.name);
    }
  }
  const std::string* best = nullptr;
  std::size_t best_distance = 0;
  for (const auto& n : names) {
    std::size_t d = edit_distance(to_lower(n), to_lower(bad));
    if (!best || d < best_distance) {
      best = &n;
      best_distance = d;
    }
  }
  if (!best || best_distance == 0) return sql;
  return replace_identifier(sql, bad, *best);
}

struct EqualitySite {
  ast::NodePath path;
  std::string table;
  std::string column;
  ast::AstNode literal;
};

std::vector<EqualitySite> where_equalities(const ast::SqlAst& tree, const DatabaseSchema& schema) {
  std::vector<EqualitySite> out;
  ScopeAnalysis an;
  try {
    an = analyze_scopes(tree, schema);
  } catch (const Error&) {
    return out;
  }
  for (const auto& r : an.resolved) {
    if (r.clause != ast::ClauseKind::where || r.table.empty() || r.path.back() != 0) continue;
    ast::NodePath cmp_path(r.path.begin(), r.path.end() - 1);
    const auto& cmp = ast::node_at(tree.root, cmp_path);
    if (cmp.kind != ast::NodeKind::op || cmp.name != "=" || cmp.children.size() != 2) continue;
    const auto& lit = cmp.children[1];
    if (lit.kind != ast::NodeKind::literal || lit.literal == ast::LiteralKind::null) continue;
    out.push_back({cmp_path, r.table, r.column.name, lit});
  }
  std::sort(out.begin(), out.end(), [](const EqualitySite& a, const EqualitySite& b) { return a.path < b.path; });
  return out;
}

// Removes the predicate at `path` from its WHERE conjunction.
bool drop_predicate(ast::SqlAst& tree, const ast::NodePath& path) {
  ast::NodePath parent_path(path.begin(), path.end() - 1);
  ast::AstNode& parent = ast::node_at(tree.root, parent_path);
  if (parent.is_clause(ast::ClauseKind::where)) {
    ast::NodePath core_path(parent_path.begin(), parent_path.end() - 1);
    ast::AstNode& core = ast::node_at(tree.root, core_path);
    core.children.erase(core.children.begin() + static_cast<std::ptrdiff_t>(parent_path.back()));
    return true;
  }
  if (parent.kind != ast::NodeKind::logical || parent.logic != ast::Connective::and_) return false;
  parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(path.back()));
  if (parent.children.size() == 1) {
    ast::AstNode only = std::move(parent.children[0]);
    parent = std::move(only);
  }
  return true;
}

}  // namespace

std::string MockRefiner::refine(const std::string&, const std::string& sql, const DatabaseSchema& schema,
                                const ExecutionFeedback& feedback) {
  if (const auto* err = feedback.error()) return repair_identifier(sql, schema, err->message);
  const auto* ok = feedback.success();
  if (!ok || ok->row_count > 0) return sql;

  ast::SqlAst tree;
  try {
    tree = parse_sql(sql);
  } catch (const Error&) {
    return sql;
  }
  if (sampler_) {
    auto occurs = [&](const EqualitySite& site) {
      std::string probe = "SELECT 1 FROM " + render_identifier(schema_identifier(site.table)) + " WHERE " +
                          render_identifier(schema_identifier(site.column));
      if (site.literal.literal == ast::LiteralKind::string) {
        probe += " LIKE " + quote_string_literal("%" + site.literal.name + "%");
      } else {
        probe += " = " + render_node(site.literal);
      }
      return !sampler_->probe(probe + " LIMIT 1", 1).empty();
    };
    bool changed = false;
    // One removal per pass; paths are recomputed because removals collapse conjunctions.
    for (bool dropped = true; dropped;) {
      dropped = false;
      for (const auto& site : where_equalities(tree, schema)) {
        if (!occurs(site) && drop_predicate(tree, site.path)) {
          dropped = changed = true;
          break;
        }
      }
    }
    if (changed) return render_sql(tree);
  }
  auto sites = where_equalities(tree, schema);
  for (const auto& s : sites) {
    if (s.literal.literal != ast::LiteralKind::string) continue;
    ast::AstNode& cmp = ast::node_at(tree.root, s.path);
    cmp.name = "LIKE";
    cmp.children[1] = ast::make_string("%" + s.literal.name + "%");
    return render_sql(tree);
  }
  return sql;
}

std::string templated_trace(const std::string& question, const std::string& sql, const DatabaseSchema& schema) {
  std::vector<std::string> steps;
  steps.push_back("Restate the goal: " + trim(question));
  try {
    auto tree = parse_sql(sql);
    auto report = resolve_references(tree, schema);
    std::vector<std::string> tables;
    for (const auto& r : report.resolved) {
      if (r.table.rfind("AS ", 0) == 0) continue;
      if (std::find(tables.begin(), tables.end(), r.table) == tables.end()) tables.push_back(r.table);
    }
    if (!tables.empty()) steps.push_back("Locate the data in: " + join(tables, ", ") + ".");
    auto f = extract_features(tree);
    if (f.joins > 0) steps.push_back("Connect the tables with " + std::to_string(f.joins) + " join(s) along foreign keys.");
    auto width = clause_width(tree);
    if (width.where_terms > 0) steps.push_back("Filter rows with " + std::to_string(width.where_terms) + " condition(s).");
    if (f.aggregates > 0) steps.push_back("Aggregate the matching rows.");
    if (width.having_terms > 0) steps.push_back("Keep only groups satisfying the HAVING condition.");
    if (f.subqueries > 0) steps.push_back("Compute the nested subquery values first.");
    if (top_level_set_ops(tree) > 0) steps.push_back("Combine the partial results with a set operation.");
    if (width.order_keys > 0) steps.push_back("Order the output as requested.");
  } catch (const Error&) {
    // A trace for unparsable SQL needs no structure.
  }
  steps.push_back("Write the final query.");
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) out += std::to_string(i + 1) + ". " + steps[i] + "\n";
  return out;
}

std::vector<CotCandidate> MockTeacher::candidates(const CotQuery& query, const DatabaseSchema& schema, int n,
                                                  std::uint64_t) {
  std::vector<CotCandidate> out;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      out.push_back({templated_trace(query.question, query.gold_sql, schema), query.gold_sql});
    } else if (i % 2 == 1) {
      out.push_back({"Guess " + std::to_string(i + 1) + ": the same rows, but capped.",
                     "SELECT * FROM (" + query.gold_sql + ") LIMIT 0"});
    } else {
      out.push_back({"Guess " + std::to_string(i + 1) + ": an impossible filter.",
                     "SELECT * FROM (" + query.gold_sql + ") WHERE 1 = 0"});
    }
  }
  return out;
}

}  // namespace sqlforge
