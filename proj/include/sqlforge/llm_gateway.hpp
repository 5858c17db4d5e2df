#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/harness.hpp"
#include "sqlforge/operators.hpp"
#include "sqlforge/schema.hpp"
#include "sqlforge/value_sampler.hpp"

namespace sqlforge {

enum class Role { expand, evolve, refine, strategize, teach };
std::string_view role_name(Role r);

struct Decoding {
  double temperature = 0.8;
  int max_tokens = 2048;
  int n = 1;
};
// 0.8 for expand, evolve and teach; 0.0 for refine and strategize.
Decoding default_decoding(Role r);

struct GenerationRequest {
  Role role = Role::expand;
  std::string template_id;  // prompt asset key
  std::map<std::string, std::string> bindings;
  Decoding decoding;
};
// Throws ValidationError for unbound placeholders or n < 1.
std::string render_request(const GenerationRequest& request);

// The (question, evidence, sql) triple a prompt is built from.
struct QueryInput {
  std::string question;
  std::string evidence;
  std::string sql;
};

struct ExpansionResult {
  std::string question;
  std::string evidence;
  std::string sql;
};

struct CotCandidate {
  std::string reasoning;
  std::string sql;
};

struct FeasibilityScore {
  double score = 0.0;
  std::string justification;
  bool from_model = false;  // false when the rule-based score filled in
};

// ---- response parsing ---------------------------------------------------------

// First well-formed JSON object or array embedded in free text.
std::optional<std::string> first_json_value(std::string_view text);
// Throws ResponseFormatError unless the text carries an object with a non-empty
// "gold_sql" string ("question" and "evidence" optional for refinement).
ExpansionResult parse_expansion_response(std::string_view text, bool require_question = true);
// Body of the last ``` fenced block, or nullopt.
std::optional<std::string> last_fenced_block(std::string_view text);
// Entries keyed by operator; missing, malformed and out-of-range entries are absent.
// Throws ResponseFormatError when no JSON array is present.
std::map<OperatorId, FeasibilityScore> parse_strategy_response(std::string_view text);

// ---- transport ----------------------------------------------------------------

struct EndpointConfig {
  std::string base_url;  // "http://host:port"
  std::string model;
  std::string api_key_env = "SQLFORGE_API_KEY";
  int timeout_s = 120;
  int retries = 2;
  int backoff_ms = 500;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns up to decoding.n completions. Throws TransportError.
  virtual std::vector<std::string> complete(const std::string& prompt, const Decoding& decoding) = 0;
  virtual std::string tag() const = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string tag() const = 0;
};

// POST {base}/v1/chat/completions with retries and exponential backoff.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(EndpointConfig config);
  std::vector<std::string> complete(const std::string& prompt, const Decoding& decoding) override;
  std::string tag() const override { return "http:" + config_.model; }

 private:
  EndpointConfig config_;
};

// POST {base}/v1/embeddings.
class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(EndpointConfig config);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
  std::string tag() const override { return "http:" + config_.model; }

 private:
  EndpointConfig config_;
};

// ---- model roles --------------------------------------------------------------

// Produces new (question, sql) pairs. `sampler` grounds literals in the mock and
// is ignored by live backends; `seed` drives every random choice of the mock.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual ExpansionResult expand(const QueryInput& seed, const DatabaseSchema& schema, ValueSampler* sampler,
                                 std::uint64_t seed_value) = 0;
  virtual ExpansionResult evolve(const QueryInput& seed, const DatabaseSchema& schema, OperatorId op,
                                 ValueSampler* sampler, std::uint64_t seed_value) = 0;
  virtual std::string tag() const = 0;
};

class Strategist {
 public:
  virtual ~Strategist() = default;
  // Always six entries. Entries the model did not supply carry the rule-based score.
  virtual std::map<OperatorId, FeasibilityScore> score(const QueryInput& query, const DatabaseSchema& schema) = 0;
};

struct CotQuery {
  std::string question;
  std::string evidence;
  std::string gold_sql;  // never shown to live teachers
};

class Teacher {
 public:
  virtual ~Teacher() = default;
  // May return fewer than n after transport failures; empty means deferred.
  virtual std::vector<CotCandidate> candidates(const CotQuery& query, const DatabaseSchema& schema, int n,
                                               std::uint64_t seed_value) = 0;
  virtual std::string tag() const = 0;
};

// Live roles over a chat backend.
class LiveGenerator : public Generator {
 public:
  LiveGenerator(std::shared_ptr<ChatBackend> backend, int retries = 2) : backend_(std::move(backend)), retries_(retries) {}
  ExpansionResult expand(const QueryInput& seed, const DatabaseSchema& schema, ValueSampler* sampler,
                         std::uint64_t seed_value) override;
  ExpansionResult evolve(const QueryInput& seed, const DatabaseSchema& schema, OperatorId op, ValueSampler* sampler,
                         std::uint64_t seed_value) override;
  std::string tag() const override { return backend_->tag(); }

 private:
  ExpansionResult ask(const GenerationRequest& request);
  std::shared_ptr<ChatBackend> backend_;
  int retries_;
};

class LiveRefiner : public SqlRefiner {
 public:
  LiveRefiner(std::shared_ptr<ChatBackend> backend, int retries = 2) : backend_(std::move(backend)), retries_(retries) {}
  std::string refine(const std::string& question, const std::string& sql, const DatabaseSchema& schema,
                     const ExecutionFeedback& feedback) override;

 private:
  std::shared_ptr<ChatBackend> backend_;
  int retries_;
};

class LiveStrategist : public Strategist {
 public:
  LiveStrategist(std::shared_ptr<ChatBackend> backend, PlannerOptions options = {})
      : backend_(std::move(backend)), options_(std::move(options)) {}
  std::map<OperatorId, FeasibilityScore> score(const QueryInput& query, const DatabaseSchema& schema) override;

 private:
  std::shared_ptr<ChatBackend> backend_;
  PlannerOptions options_;
};

class LiveTeacher : public Teacher {
 public:
  explicit LiveTeacher(std::shared_ptr<ChatBackend> backend) : backend_(std::move(backend)) {}
  std::vector<CotCandidate> candidates(const CotQuery& query, const DatabaseSchema& schema, int n,
                                       std::uint64_t seed_value) override;
  std::string tag() const override { return backend_->tag(); }

 private:
  std::shared_ptr<ChatBackend> backend_;
};

// Fills in rule-based scores for operators missing from `model`.
std::map<OperatorId, FeasibilityScore> merge_with_rule_scores(std::map<OperatorId, FeasibilityScore> model,
                                                               const QueryInput& query, const DatabaseSchema& schema,
                                                               const PlannerOptions& options = {});

// ---- deterministic mock roles -------------------------------------------------

// Expansion: "Rephrased: " + question, SQL with one LOGIC rewrite.
// Evolution: plan_mutation + apply_mutation for the operator, question gains the
// rewrite description.
class MockGenerator : public Generator {
 public:
  explicit MockGenerator(PlannerOptions options = {}) : options_(std::move(options)) {}
  ExpansionResult expand(const QueryInput& seed, const DatabaseSchema& schema, ValueSampler* sampler,
                         std::uint64_t seed_value) override;
  ExpansionResult evolve(const QueryInput& seed, const DatabaseSchema& schema, OperatorId op, ValueSampler* sampler,
                         std::uint64_t seed_value) override;
  std::string tag() const override { return "mock"; }

 private:
  PlannerOptions options_;
};

// Rule repairs, first applicable wins:
//  1. engine or resolution errors naming an unknown identifier: replace it with the
//     nearest schema name by edit distance;
//  2. empty results: drop WHERE comparisons whose literal never occurs in the
//     column (needs a sampler);
//  3. empty results: relax the first text equality to LIKE '%v%'.
// Anything else returns the draft unchanged.
class MockRefiner : public SqlRefiner {
 public:
  explicit MockRefiner(ValueSampler* sampler = nullptr) : sampler_(sampler) {}
  std::string refine(const std::string& question, const std::string& sql, const DatabaseSchema& schema,
                     const ExecutionFeedback& feedback) override;

 private:
  ValueSampler* sampler_;
};

// Candidate 1 is the gold SQL with a templated step list; the others are
// perturbations that can never match a non-empty gold result.
class MockTeacher : public Teacher {
 public:
  std::vector<CotCandidate> candidates(const CotQuery& query, const DatabaseSchema& schema, int n,
                                       std::uint64_t seed_value) override;
  std::string tag() const override { return "mock-teacher"; }
};

// Step list used as the mock reasoning trace.
std::string templated_trace(const std::string& question, const std::string& sql, const DatabaseSchema& schema);

}  // namespace sqlforge
