#include "sqlforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sqlforge/error.hpp"
#include "sqlforge/parser.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::string dump_line(const ojson& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& file, const std::string& content) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << content;
  if (!out) throw IoError("write failed for " + file.string());
}

void write_lines(const fs::path& file, const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& l : lines) content += l + '\n';
  write_file(file, content);
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::string text = read_file(file);
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

ojson features_to_json(const FeatureVector& f) {
  ojson j;
  j["tables"] = f.tables;
  j["joins"] = f.joins;
  j["functions"] = f.functions;
  j["tokens"] = f.tokens;
  j["aggregates"] = f.aggregates;
  j["subqueries"] = f.subqueries;
  j["windows"] = f.windows;
  j["ctes"] = f.ctes;
  j["nesting"] = f.nesting;
  return j;
}

FeatureVector features_from_json(const json& j) {
  FeatureVector f;
  f.tables = j.at("tables").get<int>();
  f.joins = j.at("joins").get<int>();
  f.functions = j.at("functions").get<int>();
  f.tokens = j.at("tokens").get<int>();
  f.aggregates = j.at("aggregates").get<int>();
  f.subqueries = j.at("subqueries").get<int>();
  f.windows = j.at("windows").get<int>();
  f.ctes = j.at("ctes").get<int>();
  f.nesting = j.at("nesting").get<int>();
  return f;
}

FeatureVector features_of(const std::string& sql) { return extract_features(parse_sql(sql)); }

std::string rejection_reason(const ExecutionFeedback& fb) {
  if (const auto* e = fb.error()) return e->message;
  return "empty result";
}

RejectionRecord rejection_from_json(const std::string& line) {
  auto j = json::parse(line);
  RejectionRecord r;
  r.candidate_id = j.at("candidate_id").get<std::string>();
  r.stage = j.at("stage").get<std::string>();
  r.schema_id = j.at("schema_id").get<std::string>();
  if (!j.at("parent_id").is_null()) r.parent_id = j.at("parent_id").get<std::string>();
  if (!j.at("operator").is_null()) r.op = parse_operator(j.at("operator").get<std::string>());
  r.reason = j.at("reason").get<std::string>();
  r.last_sql = j.at("last_sql").get<std::string>();
  return r;
}

// Connections and samplers owned by one worker thread.
class WorkerContext {
 public:
  WorkerContext(const Workspace& ws, const ExecutionLimits& limits) : ws_(ws), limits_(limits) {}

  const Database& db(const std::string& schema_id) {
    auto it = dbs_.find(schema_id);
    if (it == dbs_.end()) {
      auto handle = std::make_unique<Database>(Database::open_read_only(ws_.database_file(schema_id)));
      it = dbs_.emplace(schema_id, std::move(handle)).first;
    }
    return *it->second;
  }

  DatabaseSampler& sampler(const std::string& schema_id) {
    auto it = samplers_.find(schema_id);
    if (it == samplers_.end()) {
      it = samplers_.emplace(schema_id, std::make_unique<DatabaseSampler>(db(schema_id), limits_)).first;
    }
    return *it->second;
  }

  SqlRefiner& refiner(const std::string& schema_id, const Backends& backends) {
    if (backends.shared_refiner) return *backends.shared_refiner;
    auto it = refiners_.find(schema_id);
    if (it == refiners_.end()) {
      it = refiners_.emplace(schema_id, std::make_unique<MockRefiner>(&sampler(schema_id))).first;
    }
    return *it->second;
  }

 private:
  const Workspace& ws_;
  ExecutionLimits limits_;
  std::map<std::string, std::unique_ptr<Database>> dbs_;
  std::map<std::string, std::unique_ptr<DatabaseSampler>> samplers_;
  std::map<std::string, std::unique_ptr<MockRefiner>> refiners_;
};

// Runs fn(i, ctx) for i in [0, n) on up to `workers` threads. Results must go to
// per-index slots so the outcome does not depend on scheduling.
template <class Fn>
void for_each_index(std::size_t n, int workers, const Workspace& ws, const ExecutionLimits& limits, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    WorkerContext ctx(ws, limits);
    for (std::size_t i = 0; i < n; ++i) fn(i, ctx);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t t = 0; t < count; ++t) {
    threads.emplace_back([&] {
      WorkerContext ctx(ws, limits);
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i, ctx);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

struct Candidate {
  std::optional<QueryInstance> accepted;
  std::optional<RejectionRecord> rejected;
};

// draft -> refine loop -> instance or rejection record
Candidate ground_candidate(QueryInstance proto, const std::string& draft_sql, const RunConfig& cfg,
                           const Workspace& ws, WorkerContext& ctx, const Backends& backends) {
  Candidate out;
  const auto& schema = ws.schema(proto.schema_id);
  RejectionRecord rej{proto.id, proto.stage, proto.schema_id, proto.parent_id, proto.operator_applied, {}, draft_sql};
  try {
    auto outcome = refine_until_valid(proto.question, draft_sql, schema, ctx.db(proto.schema_id),
                                      ctx.refiner(proto.schema_id, backends), cfg.max_attempts, cfg.limits);
    if (auto* ok = std::get_if<RefineAccepted>(&outcome)) {
      proto.sql = ok->sql;
      proto.features = features_of(ok->sql);
      proto.all_null_row = ok->feedback.success() && ok->feedback.success()->all_null_row;
      out.accepted = std::move(proto);
      return out;
    }
    const auto& bad = std::get<RefineRejected>(outcome);
    rej.reason = "not acceptable after " + std::to_string(bad.executions) + " executions: " +
                 rejection_reason(bad.feedback);
    rej.last_sql = bad.last_sql;
  } catch (const TransportError& e) {
    rej.reason = std::string("refiner unavailable: ") + e.what();
  } catch (const ResponseFormatError& e) {
    rej.reason = std::string("refiner response malformed: ") + e.what();
  }
  out.rejected = std::move(rej);
  return out;
}

QueryInput as_input(const QueryInstance& inst) { return {inst.question, inst.evidence, inst.sql}; }

}  // namespace

// ---- instances ------------------------------------------------------------------

std::string_view status_name(InstanceStatus s) {
  switch (s) {
    case InstanceStatus::active: return "active";
    case InstanceStatus::rejected: return "rejected";
    case InstanceStatus::dedup_removed: return "dedup-removed";
    case InstanceStatus::cot_kept: return "cot-kept";
    case InstanceStatus::cot_discarded: return "cot-discarded";
  }
  return "active";
}

std::optional<InstanceStatus> parse_status(std::string_view text) {
  for (auto s : {InstanceStatus::active, InstanceStatus::rejected, InstanceStatus::dedup_removed,
                 InstanceStatus::cot_kept, InstanceStatus::cot_discarded}) {
    if (status_name(s) == text) return s;
  }
  return std::nullopt;
}

int stage_rank(std::string_view stage) {
  if (stage == "seed") return 0;
  if (stage == "EQE") return 1;
  if (stage.size() > 4 && stage.substr(0, 4) == "OGE-") {
    try {
      return std::stoi(std::string(stage.substr(4))) + 1;
    } catch (const std::exception&) {
    }
  }
  return 1 << 20;
}

std::string oge_stage_name(int round) { return "OGE-" + std::to_string(round); }

std::string instance_to_json(const QueryInstance& inst) {
  ojson j;
  j["id"] = inst.id;
  j["schema_id"] = inst.schema_id;
  j["question"] = inst.question;
  j["evidence"] = inst.evidence;
  j["sql"] = inst.sql;
  j["stage"] = inst.stage;
  j["parent_id"] = inst.parent_id ? ojson(*inst.parent_id) : ojson(nullptr);
  j["operator_applied"] =
      inst.operator_applied ? ojson(std::string(operator_code(*inst.operator_applied))) : ojson(nullptr);
  j["features"] = features_to_json(inst.features);
  j["status"] = std::string(status_name(inst.status));
  j["all_null_row"] = inst.all_null_row;
  if (inst.cot) j["cot"] = *inst.cot;
  return dump_line(j);
}

QueryInstance instance_from_json(const std::string& line) {
  QueryInstance inst;
  try {
    auto j = json::parse(line);
    inst.id = j.at("id").get<std::string>();
    inst.schema_id = j.at("schema_id").get<std::string>();
    inst.question = j.at("question").get<std::string>();
    inst.evidence = j.value("evidence", std::string());
    inst.sql = j.at("sql").get<std::string>();
    inst.stage = j.at("stage").get<std::string>();
    if (j.contains("parent_id") && !j["parent_id"].is_null()) inst.parent_id = j["parent_id"].get<std::string>();
    if (j.contains("operator_applied") && !j["operator_applied"].is_null()) {
      auto code = j["operator_applied"].get<std::string>();
      inst.operator_applied = parse_operator(code);
      if (!inst.operator_applied) throw ValidationError({"unknown operator " + code + " in instance " + inst.id});
    }
    if (j.contains("features")) {
      inst.features = features_from_json(j["features"]);
    } else {
      inst.features = features_of(inst.sql);
    }
    auto status = j.value("status", std::string("active"));
    auto parsed = parse_status(status);
    if (!parsed) throw ValidationError({"unknown status " + status + " in instance " + inst.id});
    inst.status = *parsed;
    inst.all_null_row = j.value("all_null_row", false);
    if (j.contains("cot") && !j["cot"].is_null()) inst.cot = j["cot"].get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError({std::string("malformed instance line: ") + e.what()});
  }
  return inst;
}

void write_jsonl(const fs::path& file, const std::vector<QueryInstance>& instances) {
  std::vector<std::string> lines;
  lines.reserve(instances.size());
  for (const auto& inst : instances) lines.push_back(instance_to_json(inst));
  write_lines(file, lines);
}

std::vector<QueryInstance> read_jsonl(const fs::path& file) {
  std::vector<QueryInstance> out;
  for (const auto& line : read_lines(file)) out.push_back(instance_from_json(line));
  return out;
}

std::string rejection_to_json(const RejectionRecord& r) {
  ojson j;
  j["candidate_id"] = r.candidate_id;
  j["stage"] = r.stage;
  j["schema_id"] = r.schema_id;
  j["parent_id"] = r.parent_id ? ojson(*r.parent_id) : ojson(nullptr);
  j["operator"] = r.op ? ojson(std::string(operator_code(*r.op))) : ojson(nullptr);
  j["status"] = "rejected";
  j["reason"] = r.reason;
  j["last_sql"] = r.last_sql;
  return dump_line(j);
}

std::uint64_t instance_seed(std::uint64_t global_seed, std::string_view id, std::string_view purpose) {
  std::string key(id);
  key += '/';
  key += purpose;
  return mix_seed(global_seed, stable_hash(key));
}

// ---- configuration ----------------------------------------------------------------

std::vector<std::string> config_violations(const RunConfig& cfg, bool require_seeds) {
  std::vector<std::string> out;
  if (require_seeds && cfg.seed_paths.empty()) out.push_back("at least one seed file is required");
  if (cfg.database_dir.empty()) out.push_back("database_dir is required");
  if (cfg.rounds < 0) out.push_back("rounds T must be >= 0");
  if (cfg.budget < 1) out.push_back("budget K must be >= 1");
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) out.push_back("tau must lie in (0, 1]");
  if (cfg.cot_samples < 1) out.push_back("cot_samples n must be >= 1");
  if (!(cfg.epsilon > 0.0)) out.push_back("epsilon must be positive");
  double sum = std::accumulate(cfg.p_target.begin(), cfg.p_target.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) out.push_back("p_target must sum to 1");
  for (double p : cfg.p_target) {
    if (p < 0) {
      out.push_back("p_target entries must be non-negative");
      break;
    }
  }
  if (cfg.expansions_per_seed < 1) out.push_back("expansions_per_seed must be >= 1");
  if (cfg.max_attempts < 1) out.push_back("max_attempts must be >= 1");
  if (cfg.limits.timeout_ms < 1) out.push_back("timeout_ms must be >= 1");
  if (cfg.limits.max_rows < 1) out.push_back("max_rows must be >= 1");
  if (cfg.workers < 1) out.push_back("workers must be >= 1");
  if (!(cfg.planner.saturation > 0)) out.push_back("planner saturation must be positive");
  if (cfg.planner.value_pool < 1) out.push_back("planner value_pool must be >= 1");

  auto check_backend = [&](const BackendConfig& b, const char* role, std::initializer_list<const char*> kinds) {
    bool known = std::any_of(kinds.begin(), kinds.end(), [&](const char* k) { return b.kind == k; });
    if (!known) out.push_back(std::string("unknown backend kind '") + b.kind + "' for " + role);
    if (b.kind == "http") {
      if (b.endpoint.base_url.empty()) out.push_back(std::string(role) + " backend needs base_url");
      if (b.endpoint.model.empty()) out.push_back(std::string(role) + " backend needs model");
      if (b.endpoint.retries < 0) out.push_back(std::string(role) + " retries must be >= 0");
      if (b.endpoint.timeout_s < 1) out.push_back(std::string(role) + " timeout_s must be >= 1");
    }
  };
  check_backend(cfg.generator, "generator", {"mock", "http"});
  check_backend(cfg.refiner, "refiner", {"mock", "http"});
  check_backend(cfg.strategist, "strategist", {"rule", "http"});
  check_backend(cfg.teacher, "teacher", {"mock", "http"});
  check_backend(cfg.embedder, "embedder", {"lexical", "http"});
  return out;
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where,
                         std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back(where + " must be an object");
    return;
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) errors.push_back("unknown key '" + key + "' in " + where);
  }
}

fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

BackendConfig backend_from_json(const json& j, BackendConfig def, const std::string& role,
                                std::vector<std::string>& errors) {
  reject_unknown_keys(j, {"kind", "base_url", "model", "api_key_env", "timeout_s", "retries", "backoff_ms"},
                      "backends." + role, errors);
  if (!j.is_object()) return def;
  def.kind = j.value("kind", def.kind);
  def.endpoint.base_url = j.value("base_url", def.endpoint.base_url);
  def.endpoint.model = j.value("model", def.endpoint.model);
  def.endpoint.api_key_env = j.value("api_key_env", def.endpoint.api_key_env);
  def.endpoint.timeout_s = j.value("timeout_s", def.endpoint.timeout_s);
  def.endpoint.retries = j.value("retries", def.endpoint.retries);
  def.endpoint.backoff_ms = j.value("backoff_ms", def.endpoint.backoff_ms);
  return def;
}

ojson backend_to_json(const BackendConfig& b) {
  ojson j;
  j["kind"] = b.kind;
  if (b.kind == "http") {
    j["base_url"] = b.endpoint.base_url;
    j["model"] = b.endpoint.model;
    j["api_key_env"] = b.endpoint.api_key_env;
    j["timeout_s"] = b.endpoint.timeout_s;
    j["retries"] = b.endpoint.retries;
    j["backoff_ms"] = b.endpoint.backoff_ms;
  }
  return j;
}

ojson config_json(const RunConfig& cfg, bool with_output_dir) {
  ojson j;
  ojson seeds = ojson::array();
  for (const auto& p : cfg.seed_paths) seeds.push_back(p.generic_string());
  j["seeds"] = seeds;
  j["database_dir"] = cfg.database_dir.generic_string();
  if (with_output_dir) j["output_dir"] = cfg.output_dir.generic_string();
  j["rounds"] = cfg.rounds;
  j["budget"] = cfg.budget;
  j["epsilon"] = cfg.epsilon;
  ojson target = ojson::object();
  for (OperatorId op : kOperators) target[std::string(operator_code(op))] = cfg.p_target[static_cast<std::size_t>(op)];
  j["p_target"] = target;
  j["tau"] = cfg.tau;
  j["cot_samples"] = cfg.cot_samples;
  j["expansions_per_seed"] = cfg.expansions_per_seed;
  j["dedup_before_cot"] = cfg.dedup_before_cot;
  j["limits"] = {{"timeout_ms", cfg.limits.timeout_ms},
                 {"max_rows", cfg.limits.max_rows},
                 {"sample_rows", cfg.limits.sample_rows},
                 {"max_attempts", cfg.max_attempts}};
  j["planner"] = {{"saturation", cfg.planner.saturation},
                  {"value_pool", cfg.planner.value_pool},
                  {"and_probability", cfg.planner.and_probability},
                  {"left_join_probability", cfg.planner.left_join_probability},
                  {"date_patterns", cfg.planner.date_patterns}};
  j["backends"] = {{"generator", backend_to_json(cfg.generator)},
                   {"refiner", backend_to_json(cfg.refiner)},
                   {"strategist", backend_to_json(cfg.strategist)},
                   {"teacher", backend_to_json(cfg.teacher)},
                   {"embedder", backend_to_json(cfg.embedder)}};
  j["global_seed"] = cfg.global_seed;
  j["workers"] = cfg.workers;
  return j;
}

}  // namespace

RunConfig config_from_json(const std::string& text, const fs::path& base_dir) {
  RunConfig cfg;
  std::vector<std::string> errors;
  try {
    auto j = json::parse(text);
    reject_unknown_keys(j,
                        {"seeds", "database_dir", "output_dir", "rounds", "budget", "epsilon", "p_target", "tau",
                         "cot_samples", "expansions_per_seed", "dedup_before_cot", "limits", "planner", "backends",
                         "global_seed", "workers"},
                        "config", errors);
    if (!j.is_object()) throw ValidationError(errors);
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      if (s.is_string()) {
        cfg.seed_paths.push_back(resolve_path(s.get<std::string>(), base_dir));
      } else {
        for (const auto& p : s) cfg.seed_paths.push_back(resolve_path(p.get<std::string>(), base_dir));
      }
    }
    if (j.contains("database_dir")) cfg.database_dir = resolve_path(j["database_dir"].get<std::string>(), base_dir);
    if (j.contains("output_dir")) cfg.output_dir = resolve_path(j["output_dir"].get<std::string>(), base_dir);
    cfg.rounds = j.value("rounds", cfg.rounds);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    if (j.contains("p_target")) {
      const auto& t = j["p_target"];
      std::array<double, 6> p{};
      for (const auto& [key, value] : t.items()) {
        auto op = parse_operator(key);
        if (!op) {
          errors.push_back("unknown operator '" + key + "' in p_target");
          continue;
        }
        p[static_cast<std::size_t>(*op)] = value.get<double>();
      }
      cfg.p_target = p;
    }
    cfg.tau = j.value("tau", cfg.tau);
    cfg.cot_samples = j.value("cot_samples", cfg.cot_samples);
    cfg.expansions_per_seed = j.value("expansions_per_seed", cfg.expansions_per_seed);
    cfg.dedup_before_cot = j.value("dedup_before_cot", cfg.dedup_before_cot);
    if (j.contains("limits")) {
      const auto& l = j["limits"];
      reject_unknown_keys(l, {"timeout_ms", "max_rows", "sample_rows", "max_attempts"}, "limits", errors);
      cfg.limits.timeout_ms = l.value("timeout_ms", cfg.limits.timeout_ms);
      cfg.limits.max_rows = l.value("max_rows", cfg.limits.max_rows);
      cfg.limits.sample_rows = l.value("sample_rows", cfg.limits.sample_rows);
      cfg.max_attempts = l.value("max_attempts", cfg.max_attempts);
    }
    if (j.contains("planner")) {
      const auto& p = j["planner"];
      reject_unknown_keys(p, {"saturation", "value_pool", "and_probability", "left_join_probability", "date_patterns"},
                          "planner", errors);
      cfg.planner.saturation = p.value("saturation", cfg.planner.saturation);
      cfg.planner.value_pool = p.value("value_pool", cfg.planner.value_pool);
      cfg.planner.and_probability = p.value("and_probability", cfg.planner.and_probability);
      cfg.planner.left_join_probability = p.value("left_join_probability", cfg.planner.left_join_probability);
      if (p.contains("date_patterns")) cfg.planner.date_patterns = p["date_patterns"].get<std::vector<std::string>>();
    }
    if (j.contains("backends")) {
      const auto& b = j["backends"];
      reject_unknown_keys(b, {"generator", "refiner", "strategist", "teacher", "embedder"}, "backends", errors);
      if (b.contains("generator")) cfg.generator = backend_from_json(b["generator"], cfg.generator, "generator", errors);
      if (b.contains("refiner")) cfg.refiner = backend_from_json(b["refiner"], cfg.refiner, "refiner", errors);
      if (b.contains("strategist"))
        cfg.strategist = backend_from_json(b["strategist"], cfg.strategist, "strategist", errors);
      if (b.contains("teacher")) cfg.teacher = backend_from_json(b["teacher"], cfg.teacher, "teacher", errors);
      if (b.contains("embedder")) cfg.embedder = backend_from_json(b["embedder"], cfg.embedder, "embedder", errors);
    }
    cfg.global_seed = j.value("global_seed", cfg.global_seed);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    errors.push_back(std::string("malformed configuration: ") + e.what());
  }
  if (!errors.empty()) throw ValidationError(errors);
  return cfg;
}

RunConfig load_config(const fs::path& file) {
  RunConfig cfg = config_from_json(read_file(file), fs::absolute(file).parent_path());
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg, true).dump(2); }

// ---- workspace and backends ---------------------------------------------------------

Workspace::Workspace(const fs::path& database_dir) {
  std::error_code ec;
  if (!fs::is_directory(database_dir, ec)) throw IoError("database directory not found: " + database_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(database_dir)) {
    auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".sqlite" || ext == ".db")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::string id = file.stem().string();
    if (files_.count(id)) throw ValidationError({"two database files for schema " + id});
    std::string notes;
    fs::path notes_file = file.parent_path() / (id + ".evidence.txt");
    if (fs::exists(notes_file)) notes = trim(read_file(notes_file));
    schemas_.emplace(id, load_schema(file, id, notes));
    files_.emplace(id, file);
  }
}

bool Workspace::has_schema(const std::string& schema_id) const { return schemas_.count(schema_id) > 0; }

const DatabaseSchema& Workspace::schema(const std::string& schema_id) const {
  auto it = schemas_.find(schema_id);
  if (it == schemas_.end()) throw PreconditionError("schema not found: " + schema_id);
  return it->second;
}

const fs::path& Workspace::database_file(const std::string& schema_id) const {
  auto it = files_.find(schema_id);
  if (it == files_.end()) throw PreconditionError("schema not found: " + schema_id);
  return it->second;
}

std::vector<std::string> Workspace::schema_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, s] : schemas_) out.push_back(id);
  return out;
}

Backends make_backends(const RunConfig& cfg) {
  Backends b;
  auto chat = [](const BackendConfig& c) { return std::make_shared<HttpChatBackend>(c.endpoint); };
  if (cfg.generator.kind == "http") {
    b.generator = std::make_shared<LiveGenerator>(chat(cfg.generator));
  } else {
    b.generator = std::make_shared<MockGenerator>(cfg.planner);
  }
  if (cfg.refiner.kind == "http") b.shared_refiner = std::make_shared<LiveRefiner>(chat(cfg.refiner));
  if (cfg.strategist.kind == "http") b.strategist = std::make_shared<LiveStrategist>(chat(cfg.strategist), cfg.planner);
  if (cfg.teacher.kind == "http") {
    b.teacher = std::make_shared<LiveTeacher>(chat(cfg.teacher));
  } else {
    b.teacher = std::make_shared<MockTeacher>();
  }
  if (cfg.embedder.kind == "http") b.embedder = std::make_shared<HttpEmbeddingBackend>(cfg.embedder.endpoint);
  return b;
}

// ---- stages ---------------------------------------------------------------------------

IngestResult ingest_seeds(const std::vector<fs::path>& seed_paths, const Workspace& ws, const ExecutionLimits& limits) {
  IngestResult result;
  WorkerContext ctx(ws, limits);
  std::size_t index = 0;
  for (const auto& path : seed_paths) {
    json records;
    try {
      records = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw ValidationError({"seed file " + path.string() + " is not valid JSON: " + e.what()});
    }
    if (!records.is_array()) throw ValidationError({"seed file " + path.string() + " must hold a JSON array"});
    for (const auto& rec : records) {
      ++index;
      char id_buf[16];
      std::snprintf(id_buf, sizeof id_buf, "s%04zu", index);
      QueryInstance inst;
      inst.id = id_buf;
      inst.stage = "seed";
      RejectionRecord q{inst.id, "seed", {}, std::nullopt, std::nullopt, {}, {}};
      auto quarantine = [&](std::string reason) {
        q.reason = std::move(reason);
        result.quarantined.push_back(q);
      };
      if (!rec.is_object()) {
        quarantine("record is not an object");
        continue;
      }
      auto text_field = [&](std::initializer_list<const char*> names) -> std::optional<std::string> {
        for (const char* n : names) {
          if (rec.contains(n) && rec[n].is_string()) return rec[n].get<std::string>();
        }
        return std::nullopt;
      };
      auto question = text_field({"question"});
      auto sql = text_field({"SQL", "sql", "query"});
      auto db_id = text_field({"db_id", "database_id", "schema_id"});
      q.schema_id = db_id.value_or("");
      q.last_sql = sql.value_or("");
      if (!question || !sql || !db_id) {
        quarantine("record lacks question, SQL or database id");
        continue;
      }
      if (!ws.has_schema(*db_id)) {
        quarantine("schema not found");
        continue;
      }
      inst.schema_id = *db_id;
      inst.question = trim(*question);
      inst.evidence = text_field({"evidence"}).value_or("");
      inst.sql = trim(*sql);
      while (!inst.sql.empty() && inst.sql.back() == ';') inst.sql = trim(inst.sql.substr(0, inst.sql.size() - 1));
      try {
        inst.features = features_of(inst.sql);
      } catch (const Error& e) {
        quarantine(std::string("parse error: ") + e.what());
        continue;
      }
      if (auto problem = structural_problem(inst.sql, ws.schema(inst.schema_id))) {
        quarantine(*problem);
        continue;
      }
      auto fb = execute_sql(ctx.db(inst.schema_id), inst.sql, limits);
      if (!is_acceptable(fb)) {
        quarantine(rejection_reason(fb));
        continue;
      }
      inst.all_null_row = fb.success()->all_null_row;
      result.seeds.push_back(std::move(inst));
    }
  }
  spdlog::info("ingest: {} seeds accepted, {} quarantined", result.seeds.size(), result.quarantined.size());
  return result;
}

StageResult run_eqe(const std::vector<QueryInstance>& seeds, const RunConfig& cfg, const Workspace& ws,
                    const Backends& backends) {
  std::size_t per_seed = static_cast<std::size_t>(cfg.expansions_per_seed);
  std::vector<Candidate> slots(seeds.size() * per_seed);
  for_each_index(slots.size(), cfg.workers, ws, cfg.limits, [&](std::size_t i, WorkerContext& ctx) {
    const auto& seed = seeds[i / per_seed];
    QueryInstance proto;
    proto.id = seed.id + ".x" + std::to_string(i % per_seed + 1);
    proto.schema_id = seed.schema_id;
    proto.stage = "EQE";
    proto.parent_id = seed.id;
    const auto& schema = ws.schema(seed.schema_id);
    ExpansionResult draft;
    try {
      draft = backends.generator->expand(as_input(seed), schema, &ctx.sampler(seed.schema_id),
                                         instance_seed(cfg.global_seed, proto.id, "expand"));
    } catch (const Error& e) {
      slots[i].rejected = RejectionRecord{proto.id, "EQE", proto.schema_id, proto.parent_id, std::nullopt,
                                          std::string("generation failed: ") + e.what(), {}};
      return;
    }
    proto.question = trim(draft.question);
    proto.evidence = draft.evidence.empty() ? seed.evidence : draft.evidence;
    slots[i] = ground_candidate(std::move(proto), draft.sql, cfg, ws, ctx, backends);
  });
  StageResult out;
  for (auto& s : slots) {
    if (s.accepted) out.accepted.push_back(std::move(*s.accepted));
    if (s.rejected) out.rejected.push_back(std::move(*s.rejected));
  }
  spdlog::info("EQE: {} accepted, {} rejected", out.accepted.size(), out.rejected.size());
  return out;
}

OgeRoundResult run_oge(const std::vector<QueryInstance>& current, const RunConfig& cfg, const Workspace& ws,
                       const Backends& backends, EvolutionState& state, int round) {
  if (round < 1) throw PreconditionError("OGE rounds are numbered from 1");
  state.budget = cfg.budget;
  validate_state(state);
  SharedEvolutionState shared(state);
  const std::string stage = oge_stage_name(round);

  struct Slot {
    std::vector<Candidate> children;
    bool skipped = false;
  };
  std::vector<Slot> slots(current.size());
  for_each_index(current.size(), cfg.workers, ws, cfg.limits, [&](std::size_t i, WorkerContext& ctx) {
    const QueryInstance& parent = current[i];
    const auto& schema = ws.schema(parent.schema_id);
    ast::SqlAst tree = parse_sql(parent.sql);

    std::map<OperatorId, FeasibilityScore> model;
    if (backends.strategist) {
      try {
        model = backends.strategist->score(as_input(parent), schema);
      } catch (const TransportError& e) {
        spdlog::warn("strategist unavailable for {}: {}", parent.id, e.what());
      }
    }
    // S_feas and W_div from the current counters, U = S_feas * W_div.
    EvolutionState snapshot = shared.snapshot();
    std::map<OperatorId, double> utilities;
    for (OperatorId op : kOperators) {
      double rule = check_applicability(tree, schema, op, cfg.planner).score;
      std::optional<double> from_model;
      if (auto it = model.find(op); it != model.end() && it->second.from_model) from_model = it->second.score;
      utilities[op] = utility(combine_feasibility(rule, from_model), scarcity_weight(snapshot, op));
    }
    auto selected = select_top_k(utilities, cfg.budget);
    if (selected.empty()) {
      slots[i].skipped = true;
      return;
    }
    for (OperatorId op : selected) {
      QueryInstance proto;
      proto.id = parent.id + "." + std::string(operator_slug(op));
      proto.schema_id = parent.schema_id;
      proto.stage = stage;
      proto.parent_id = parent.id;
      proto.operator_applied = op;
      ExpansionResult draft;
      try {
        draft = backends.generator->evolve(as_input(parent), schema, op, &ctx.sampler(parent.schema_id),
                                           instance_seed(cfg.global_seed, proto.id, "evolve"));
      } catch (const Error& e) {
        Candidate c;
        c.rejected = RejectionRecord{proto.id, stage, proto.schema_id, proto.parent_id, op,
                                     std::string("generation failed: ") + e.what(), {}};
        slots[i].children.push_back(std::move(c));
        continue;
      }
      proto.question = trim(draft.question);
      proto.evidence = draft.evidence.empty() ? parent.evidence : draft.evidence;
      Candidate c = ground_candidate(std::move(proto), draft.sql, cfg, ws, ctx, backends);
      if (c.accepted) shared.record(op);
      slots[i].children.push_back(std::move(c));
    }
  });

  OgeRoundResult out;
  for (auto& s : slots) {
    if (s.skipped) ++out.skipped;
    for (auto& c : s.children) {
      if (c.accepted) out.next.push_back(std::move(*c.accepted));
      if (c.rejected) out.rejected.push_back(std::move(*c.rejected));
    }
  }
  state = shared.snapshot();
  state.round = round;
  spdlog::info("{}: {} children accepted, {} rejected, {} instances without a selectable operator", stage,
               out.next.size(), out.rejected.size(), out.skipped);
  return out;
}

CotStageResult run_cot(std::vector<QueryInstance>& instances, const RunConfig& cfg, const Workspace& ws,
                       const Backends& backends) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].status == InstanceStatus::active) todo.push_back(i);
  }
  GoldResultCache cache;
  std::vector<CotOutcome> outcomes(todo.size());
  for_each_index(todo.size(), cfg.workers, ws, cfg.limits, [&](std::size_t k, WorkerContext& ctx) {
    const QueryInstance& inst = instances[todo[k]];
    CotInput input{inst.id,  inst.schema_id, inst.question, inst.evidence,
                   inst.sql, instance_seed(cfg.global_seed, inst.id, "cot")};
    try {
      outcomes[k] = synthesize_cot(input, ctx.db(inst.schema_id), ws.schema(inst.schema_id), *backends.teacher,
                                   cfg.cot_samples, cache, cfg.limits);
    } catch (const PreconditionError& e) {
      outcomes[k] = CotDiscard{inst.id, {e.what()}};
    }
  });

  CotStageResult out;
  out.submitted = todo.size();
  for (std::size_t k = 0; k < todo.size(); ++k) {
    QueryInstance& inst = instances[todo[k]];
    if (auto* rec = std::get_if<CotRecord>(&outcomes[k])) {
      inst.cot = rec->trace;
      inst.status = InstanceStatus::cot_kept;
      ++out.kept;
    } else if (auto* d = std::get_if<CotDiscard>(&outcomes[k])) {
      inst.status = InstanceStatus::cot_discarded;
      ++out.discarded;
      ojson j;
      j["instance_id"] = d->instance_id;
      j["reasons"] = d->reasons;
      out.discard_log.push_back(dump_line(j));
    } else {
      ++out.deferred;
      spdlog::warn("CoT deferred for {}: {}", inst.id, std::get<CotDeferred>(outcomes[k]).reason);
    }
  }
  spdlog::info("CoT: {} submitted, {} kept, {} discarded, {} deferred", out.submitted, out.kept, out.discarded,
               out.deferred);
  return out;
}

DedupStageResult run_dedup(std::vector<QueryInstance>& instances, InstanceStatus eligible, double tau,
                           const Backends& backends) {
  DedupStageResult out;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].status == eligible) groups[instances[i].schema_id].push_back(i);
  }
  bool any_lexical = false;
  bool any_external = false;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < instances.size(); ++i) index_of[instances[i].id] = i;

  for (auto& [schema_id, members] : groups) {
    // Lineage order: earlier stages win, then id order.
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      int ra = stage_rank(instances[a].stage), rb = stage_rank(instances[b].stage);
      if (ra != rb) return ra < rb;
      return instances[a].id < instances[b].id;
    });
    std::vector<std::string> ids, texts;
    for (std::size_t m : members) {
      ids.push_back(instances[m].id);
      texts.push_back(instances[m].question);
    }
    auto vectors = embed_questions(ids, texts, backends.embedder.get(), true);
    for (const auto& v : vectors) (v.source == VectorSource::lexical ? any_lexical : any_external) = true;
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    auto outcome = dedup_schema_group(ids, vectors, order, tau);
    for (const auto& r : outcome.removed) {
      instances[index_of.at(r.removed_id)].status = InstanceStatus::dedup_removed;
      out.removed.push_back(r);
    }
  }
  out.source = (any_lexical || !any_external) ? VectorSource::lexical : VectorSource::external;
  if (any_lexical && backends.embedder) spdlog::warn("dedup used lexical fallback vectors for some groups");
  spdlog::info("dedup: {} removed ({})", out.removed.size(), vector_source_name(out.source));
  return out;
}

// ---- reports ----------------------------------------------------------------------------

namespace {

struct StageRow {
  std::string stage;
  MeanFeatures mean;
};

std::vector<StageRow> stage_means(const std::vector<QueryInstance>& dataset) {
  std::map<std::string, std::vector<FeatureVector>> by_stage;
  for (const auto& inst : dataset) by_stage[inst.stage].push_back(inst.features);
  std::vector<std::string> stages;
  for (const auto& [s, v] : by_stage) stages.push_back(s);
  std::stable_sort(stages.begin(), stages.end(), [](const std::string& a, const std::string& b) {
    int ra = stage_rank(a), rb = stage_rank(b);
    return ra != rb ? ra < rb : a < b;
  });
  std::vector<StageRow> rows;
  for (const auto& s : stages) rows.push_back({s, aggregate_features(by_stage[s])});
  return rows;
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

StatsReport stats_report(const std::vector<QueryInstance>& dataset) {
  StatsReport report;
  auto rows = stage_means(dataset);

  std::ostringstream csv;
  csv << "Stage";
  for (auto c : kFeatureColumns) csv << ',' << c;
  csv << '\n';
  for (const auto& r : rows) {
    csv << r.stage;
    for (double v : r.mean.values) csv << ',' << fixed2(v);
    csv << '\n';
  }
  report.csv = csv.str();

  std::ostringstream text;
  text << "Mean features per SQL\n";
  text << std::left << std::setw(8) << "Stage" << std::right << std::setw(7) << "N";
  for (auto c : kFeatureColumns) text << std::setw(8) << c;
  text << '\n';
  for (const auto& r : rows) {
    text << std::left << std::setw(8) << r.stage << std::right << std::setw(7) << r.mean.count;
    for (double v : r.mean.values) text << std::setw(8) << fixed2(v);
    text << '\n';
  }

  std::map<OperatorId, std::size_t> histogram;
  std::size_t oge_total = 0;
  for (const auto& inst : dataset) {
    if (inst.operator_applied) {
      ++histogram[*inst.operator_applied];
      ++oge_total;
    }
  }
  text << "\nOperator histogram (" << oge_total << " OGE instances)\n";
  for (OperatorId op : kOperators) {
    text << "  " << std::left << std::setw(6) << operator_code(op) << std::right << std::setw(7) << histogram[op]
         << '\n';
  }

  std::map<std::string, std::size_t> statuses;
  for (const auto& inst : dataset) ++statuses[std::string(status_name(inst.status))];
  text << "\nStatus summary\n";
  for (auto s : {InstanceStatus::active, InstanceStatus::cot_kept, InstanceStatus::cot_discarded,
                 InstanceStatus::dedup_removed, InstanceStatus::rejected}) {
    std::string name(status_name(s));
    text << "  " << std::left << std::setw(14) << name << std::right << std::setw(7) << statuses[name] << '\n';
  }
  report.text = text.str();
  return report;
}

StatsReport stats_report(const fs::path& dataset_file) { return stats_report(read_jsonl(dataset_file)); }

// ---- full run ------------------------------------------------------------------------------

namespace {

struct Progress {
  std::vector<QueryInstance> instances;
  std::vector<RejectionRecord> rejections;
  std::vector<std::string> frontier;  // ids feeding the next OGE round
  EvolutionState state;
  std::size_t quarantined = 0;
  std::optional<CotStageResult> cot;
  std::optional<DedupStageResult> dedup;
};

ojson cot_to_json(const CotStageResult& c) {
  return {{"submitted", c.submitted}, {"kept", c.kept}, {"discarded", c.discarded}, {"deferred", c.deferred}};
}

void save_checkpoint(const fs::path& dir, const Progress& p, const std::string& stage) {
  fs::path cp = dir / "checkpoints" / stage;
  fs::create_directories(cp);
  write_jsonl(cp / "instances.jsonl", p.instances);
  std::vector<std::string> rej;
  for (const auto& r : p.rejections) rej.push_back(rejection_to_json(r));
  write_lines(cp / "rejections.jsonl", rej);
  save_state(cp / "state.json", p.state);
  ojson meta;
  meta["stage"] = stage;
  meta["frontier"] = p.frontier;
  meta["quarantined"] = p.quarantined;
  if (p.cot) {
    meta["cot"] = cot_to_json(*p.cot);
    meta["cot_discards"] = p.cot->discard_log;
  }
  if (p.dedup) {
    ojson removed = ojson::array();
    for (const auto& r : p.dedup->removed)
      removed.push_back({{"removed_id", r.removed_id}, {"kept_id", r.kept_id}, {"similarity", r.similarity}});
    meta["dedup"] = {{"source", std::string(vector_source_name(p.dedup->source))}, {"removed", removed}};
  }
  write_file(cp / "progress.json", meta.dump(2) + "\n");
}

Progress load_checkpoint(const fs::path& dir, const std::string& stage) {
  fs::path cp = dir / "checkpoints" / stage;
  if (!fs::exists(cp / "progress.json")) throw IoError("no checkpoint for stage " + stage + " in " + dir.string());
  Progress p;
  p.instances = read_jsonl(cp / "instances.jsonl");
  for (const auto& line : read_lines(cp / "rejections.jsonl")) p.rejections.push_back(rejection_from_json(line));
  p.state = load_state(cp / "state.json");
  auto meta = json::parse(read_file(cp / "progress.json"));
  p.frontier = meta.at("frontier").get<std::vector<std::string>>();
  p.quarantined = meta.at("quarantined").get<std::size_t>();
  if (meta.contains("cot")) {
    CotStageResult c;
    c.submitted = meta["cot"]["submitted"];
    c.kept = meta["cot"]["kept"];
    c.discarded = meta["cot"]["discarded"];
    c.deferred = meta["cot"]["deferred"];
    c.discard_log = meta["cot_discards"].get<std::vector<std::string>>();
    p.cot = c;
  }
  if (meta.contains("dedup")) {
    DedupStageResult d;
    d.source = meta["dedup"]["source"] == "external-embedder" ? VectorSource::external : VectorSource::lexical;
    for (const auto& r : meta["dedup"]["removed"])
      d.removed.push_back({r["removed_id"], r["kept_id"], r["similarity"].get<double>()});
    p.dedup = d;
  }
  return p;
}

}  // namespace

std::vector<std::string> stage_plan(const RunConfig& cfg) {
  std::vector<std::string> plan{"ingest", "EQE"};
  for (int r = 1; r <= cfg.rounds; ++r) plan.push_back(oge_stage_name(r));
  if (cfg.dedup_before_cot) {
    plan.insert(plan.end(), {"dedup", "CoT"});
  } else {
    plan.insert(plan.end(), {"CoT", "dedup"});
  }
  return plan;
}

namespace {

std::string build_manifest(const RunConfig& cfg, const Progress& p, const std::vector<QueryInstance>& final_set) {
  ojson m;
  m["global_seed"] = cfg.global_seed;
  m["config"] = config_json(cfg, false);

  std::vector<std::string> stage_order;
  std::map<std::string, std::size_t> produced;
  for (const auto& inst : p.instances) {
    if (!produced.count(inst.stage)) stage_order.push_back(inst.stage);
    ++produced[inst.stage];
  }
  ojson stages = ojson::array();
  for (const auto& s : stage_order) {
    std::size_t final_count = std::count_if(final_set.begin(), final_set.end(),
                                            [&](const QueryInstance& i) { return i.stage == s; });
    stages.push_back({{"stage", s}, {"produced", produced[s]}, {"final", final_count}});
  }
  m["stages"] = stages;

  ojson ops = ojson::object();
  for (OperatorId op : kOperators) {
    std::size_t accepted = 0, final_count = 0;
    for (const auto& i : p.instances) accepted += i.operator_applied == op;
    for (const auto& i : final_set) final_count += i.operator_applied == op;
    ops[std::string(operator_code(op))] = {{"accepted", accepted}, {"final", final_count}};
  }
  m["operators"] = ops;

  ojson rej = ojson::object();
  rej["quarantined_seeds"] = p.quarantined;
  std::map<std::string, std::size_t> by_stage;
  for (const auto& r : p.rejections) {
    if (r.stage != "seed") ++by_stage[r.stage];
  }
  ojson per_stage = ojson::object();
  for (const auto& s : stage_order) {
    if (s != "seed") per_stage[s] = by_stage[s];
  }
  rej["by_stage"] = per_stage;
  m["rejections"] = rej;

  if (p.cot) {
    ojson c = cot_to_json(*p.cot);
    c["samples_per_instance"] = cfg.cot_samples;
    m["cot"] = c;
  }
  if (p.dedup) {
    m["dedup"] = {{"tau", cfg.tau},
                  {"removed", p.dedup->removed.size()},
                  {"vector_source", std::string(vector_source_name(p.dedup->source))}};
  }
  m["scheduler_state"] = ojson::parse(state_to_json(p.state));

  ojson features = ojson::array();
  for (const auto& row : stage_means(final_set)) {
    ojson f;
    f["stage"] = row.stage;
    f["count"] = row.mean.count;
    for (std::size_t k = 0; k < kFeatureColumns.size(); ++k) f[std::string(kFeatureColumns[k])] = row.mean.values[k];
    features.push_back(f);
  }
  m["feature_report"] = features;
  m["final"] = {{"file", "final.jsonl"}, {"count", final_set.size()}};
  return m.dump(2) + "\n";
}

}  // namespace

RunSummary run_full(const RunConfig& cfg, const std::optional<std::string>& resume_from) {
  auto violations = config_violations(cfg);
  if (!violations.empty()) throw ValidationError(violations);
  Workspace ws(cfg.database_dir);
  Backends backends = make_backends(cfg);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);

  auto plan = stage_plan(cfg);
  std::size_t start = 0;
  Progress p;
  p.state.p_target = cfg.p_target;
  p.state.epsilon = cfg.epsilon;
  p.state.budget = cfg.budget;
  if (resume_from) {
    auto it = std::find(plan.begin(), plan.end(), *resume_from);
    if (it == plan.end()) throw ValidationError({"unknown stage to resume from: " + *resume_from});
    start = static_cast<std::size_t>(it - plan.begin());
    if (start > 0) p = load_checkpoint(out, plan[start - 1]);
  }

  for (std::size_t s = start; s < plan.size(); ++s) {
    const std::string& stage = plan[s];
    if (stage == "ingest") {
      auto ingest = ingest_seeds(cfg.seed_paths, ws, cfg.limits);
      p.instances = ingest.seeds;
      p.quarantined = ingest.quarantined.size();
      p.rejections = ingest.quarantined;
      p.frontier.clear();
      for (const auto& i : p.instances) p.frontier.push_back(i.id);
    } else if (stage == "EQE") {
      std::vector<QueryInstance> seeds;
      for (const auto& i : p.instances) {
        if (i.stage == "seed") seeds.push_back(i);
      }
      auto eqe = run_eqe(seeds, cfg, ws, backends);
      p.frontier.clear();
      for (auto& i : eqe.accepted) {
        p.frontier.push_back(i.id);
        p.instances.push_back(std::move(i));
      }
      p.rejections.insert(p.rejections.end(), eqe.rejected.begin(), eqe.rejected.end());
    } else if (stage.rfind("OGE-", 0) == 0) {
      int round = stage_rank(stage) - 1;
      std::set<std::string> ids(p.frontier.begin(), p.frontier.end());
      std::vector<QueryInstance> current;
      for (const auto& i : p.instances) {
        if (ids.count(i.id)) current.push_back(i);
      }
      auto res = run_oge(current, cfg, ws, backends, p.state, round);
      p.frontier.clear();
      for (auto& i : res.next) {
        p.frontier.push_back(i.id);
        p.instances.push_back(std::move(i));
      }
      p.rejections.insert(p.rejections.end(), res.rejected.begin(), res.rejected.end());
    } else if (stage == "CoT") {
      p.cot = run_cot(p.instances, cfg, ws, backends);
    } else if (stage == "dedup") {
      InstanceStatus eligible = cfg.dedup_before_cot ? InstanceStatus::active : InstanceStatus::cot_kept;
      p.dedup = run_dedup(p.instances, eligible, cfg.tau, backends);
    }
    save_checkpoint(out, p, stage);
  }

  std::vector<QueryInstance> final_set;
  for (const auto& i : p.instances) {
    if (i.status == InstanceStatus::cot_kept) final_set.push_back(i);
  }
  RunSummary summary;
  summary.final_dataset = out / "final.jsonl";
  summary.manifest = out / "manifest.json";
  summary.final_count = final_set.size();
  write_jsonl(summary.final_dataset, final_set);
  write_jsonl(out / "instances.jsonl", p.instances);
  std::vector<std::string> rej;
  for (const auto& r : p.rejections) rej.push_back(rejection_to_json(r));
  write_lines(out / "rejections.jsonl", rej);
  write_lines(out / "cot_discards.jsonl", p.cot ? p.cot->discard_log : std::vector<std::string>{});
  write_file(out / "dedup_report.jsonl", p.dedup ? dedup_report_jsonl(p.dedup->removed) : std::string());
  write_file(summary.manifest, build_manifest(cfg, p, final_set));
  auto stats = stats_report(final_set);
  write_file(out / "stats.txt", stats.text);
  write_file(out / "stats.csv", stats.csv);
  spdlog::info("run complete: {} final instances in {}", final_set.size(), summary.final_dataset.string());
  return summary;
}

}  // namespace sqlforge
