#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqlforge/cot.hpp"
#include "sqlforge/dedup.hpp"
#include "sqlforge/features.hpp"
#include "sqlforge/harness.hpp"
#include "sqlforge/llm_gateway.hpp"
#include "sqlforge/operators.hpp"
#include "sqlforge/scheduler.hpp"
#include "sqlforge/schema.hpp"

namespace sqlforge {

enum class InstanceStatus { active, rejected, dedup_removed, cot_kept, cot_discarded };
std::string_view status_name(InstanceStatus s);
std::optional<InstanceStatus> parse_status(std::string_view text);

struct QueryInstance {
  std::string id;
  std::string schema_id;
  std::string question;
  std::string evidence;
  std::string sql;
  std::string stage;  // "seed", "EQE", "OGE-1", "OGE-2", ...
  std::optional<std::string> parent_id;
  std::optional<OperatorId> operator_applied;
  FeatureVector features;
  InstanceStatus status = InstanceStatus::active;
  std::optional<std::string> cot;
  bool all_null_row = false;

  bool operator==(const QueryInstance&) const = default;
};

// Position of a stage in lineage order: seed 0, EQE 1, OGE-k k+1; unknown stages last.
int stage_rank(std::string_view stage);
std::string oge_stage_name(int round);

std::string instance_to_json(const QueryInstance& inst);
// Throws ValidationError for malformed lines.
QueryInstance instance_from_json(const std::string& line);
void write_jsonl(const std::filesystem::path& file, const std::vector<QueryInstance>& instances);
std::vector<QueryInstance> read_jsonl(const std::filesystem::path& file);

struct BackendConfig {
  std::string kind;  // generator/refiner/teacher: mock|http; strategist: rule|http; embedder: lexical|http
  EndpointConfig endpoint;
};

struct RunConfig {
  std::vector<std::filesystem::path> seed_paths;
  std::filesystem::path database_dir;
  std::filesystem::path output_dir = "out";
  int rounds = 2;  // T
  int budget = 2;  // K
  double epsilon = 0.01;
  std::array<double, 6> p_target{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  double tau = 0.9;
  int cot_samples = 4;  // n
  int expansions_per_seed = 1;
  bool dedup_before_cot = false;
  ExecutionLimits limits;
  int max_attempts = 3;
  PlannerOptions planner;
  BackendConfig generator{"mock", {}};
  BackendConfig refiner{"mock", {}};
  BackendConfig strategist{"rule", {}};
  BackendConfig teacher{"mock", {}};
  BackendConfig embedder{"lexical", {}};
  std::uint64_t global_seed = 0;
  int workers = 1;
};

// Stage commands that start from an existing dataset pass require_seeds = false.
std::vector<std::string> config_violations(const RunConfig& cfg, bool require_seeds = true);
// Relative paths resolve against `base_dir`. Throws ValidationError.
RunConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);
std::string config_to_json(const RunConfig& cfg);

// Schemas and database files found in the database directory (<schema_id>.sqlite or .db).
class Workspace {
 public:
  explicit Workspace(const std::filesystem::path& database_dir);
  bool has_schema(const std::string& schema_id) const;
  const DatabaseSchema& schema(const std::string& schema_id) const;
  const std::filesystem::path& database_file(const std::string& schema_id) const;
  std::vector<std::string> schema_ids() const;

 private:
  std::map<std::string, DatabaseSchema> schemas_;
  std::map<std::string, std::filesystem::path> files_;
};

struct Backends {
  std::shared_ptr<Generator> generator;
  std::shared_ptr<SqlRefiner> shared_refiner;  // live refiner; null for the mock
  std::shared_ptr<Strategist> strategist;      // null: rule-based feasibility only
  std::shared_ptr<Teacher> teacher;
  std::shared_ptr<EmbeddingBackend> embedder;  // null: lexical vectors
};
Backends make_backends(const RunConfig& cfg);

struct RejectionRecord {
  std::string candidate_id;
  std::string stage;
  std::string schema_id;
  std::optional<std::string> parent_id;
  std::optional<OperatorId> op;
  std::string reason;
  std::string last_sql;
};
std::string rejection_to_json(const RejectionRecord& r);

struct IngestResult {
  std::vector<QueryInstance> seeds;
  std::vector<RejectionRecord> quarantined;
};
IngestResult ingest_seeds(const std::vector<std::filesystem::path>& seed_paths, const Workspace& ws,
                          const ExecutionLimits& limits = {});

struct StageResult {
  std::vector<QueryInstance> accepted;
  std::vector<RejectionRecord> rejected;
};

StageResult run_eqe(const std::vector<QueryInstance>& seeds, const RunConfig& cfg, const Workspace& ws,
                    const Backends& backends);

struct OgeRoundResult {
  std::vector<QueryInstance> next;  // children accepted this round
  std::vector<RejectionRecord> rejected;
  std::size_t skipped = 0;  // instances with no selectable operator
};

// One round of adaptive directional evolution. `round` is 1-based.
OgeRoundResult run_oge(const std::vector<QueryInstance>& current, const RunConfig& cfg, const Workspace& ws,
                       const Backends& backends, EvolutionState& state, int round);

struct CotStageResult {
  std::size_t submitted = 0;
  std::size_t kept = 0;
  std::size_t discarded = 0;
  std::size_t deferred = 0;
  std::vector<std::string> discard_log;  // JSONL lines
};
// Attaches traces to active instances in place. Discarded ones change status;
// deferred ones stay active without a trace.
CotStageResult run_cot(std::vector<QueryInstance>& instances, const RunConfig& cfg, const Workspace& ws,
                       const Backends& backends);

struct DedupStageResult {
  std::vector<DedupRemoval> removed;
  VectorSource source = VectorSource::lexical;
};
// Marks removed instances dedup-removed. Only instances with `eligible` status take part.
DedupStageResult run_dedup(std::vector<QueryInstance>& instances, InstanceStatus eligible, double tau,
                           const Backends& backends);

struct RunSummary {
  std::filesystem::path final_dataset;
  std::filesystem::path manifest;
  std::size_t final_count = 0;
};
// ingest -> EQE -> T OGE rounds -> CoT -> dedup, with checkpoints after each stage.
// Throws on stage failure after writing the checkpoints reached so far.
// `resume_from` names the first stage to rerun (ingest, EQE, OGE-k, CoT, dedup);
// earlier stages load from the output directory's checkpoints.
RunSummary run_full(const RunConfig& cfg, const std::optional<std::string>& resume_from = std::nullopt);

// Stage names in execution order for this configuration.
std::vector<std::string> stage_plan(const RunConfig& cfg);

struct StatsReport {
  std::string text;
  std::string csv;
};
StatsReport stats_report(const std::vector<QueryInstance>& dataset);
StatsReport stats_report(const std::filesystem::path& dataset_file);

// Seed for one instance-level random decision.
std::uint64_t instance_seed(std::uint64_t global_seed, std::string_view id, std::string_view purpose);

}  // namespace sqlforge
