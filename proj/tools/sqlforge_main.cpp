#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sqlforge/error.hpp"
#include "sqlforge/pipeline.hpp"
#include "sqlforge/sqlite_db.hpp"

namespace fs = std::filesystem;
using namespace sqlforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

// Config errors are reported before any stage starts so they map to exit code 1.
struct ConfigFailure {
  std::vector<std::string> messages;
};

struct Overrides {
  std::string config_file;
  std::vector<std::string> seeds;
  std::string db_dir;
  std::string out_dir;
  std::optional<int> rounds, budget, cot_samples, expansions, max_attempts, workers, timeout_ms;
  std::optional<double> epsilon, tau;
  std::optional<std::size_t> max_rows;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend, base_url, model, embedder;
  bool dedup_before_cot = false;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON run configuration");
  cmd->add_option("--seeds", o.seeds, "seed files (JSON arrays)");
  cmd->add_option("--db-dir", o.db_dir, "directory of <schema_id>.sqlite files");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--rounds", o.rounds, "OGE rounds T");
  cmd->add_option("--budget", o.budget, "operators per instance K");
  cmd->add_option("--epsilon", o.epsilon, "scarcity smoothing");
  cmd->add_option("--tau", o.tau, "dedup similarity threshold");
  cmd->add_option("--cot-samples", o.cot_samples, "CoT candidates per instance n");
  cmd->add_option("--expansions-per-seed", o.expansions, "EQE expansions per seed");
  cmd->add_option("--max-attempts", o.max_attempts, "refinement attempts");
  cmd->add_option("--timeout-ms", o.timeout_ms, "per-query timeout");
  cmd->add_option("--max-rows", o.max_rows, "row cap for execution");
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--workers", o.workers, "worker threads per stage");
  cmd->add_option("--backend", o.backend, "mock or http, for generator, refiner and teacher");
  cmd->add_option("--base-url", o.base_url, "chat endpoint for http backends");
  cmd->add_option("--model", o.model, "model name for http backends");
  cmd->add_option("--embedder", o.embedder, "lexical or http");
  cmd->add_flag("--dedup-before-cot", o.dedup_before_cot, "run dedup ahead of CoT synthesis");
}

RunConfig build_config(const Overrides& o, bool require_seeds) {
  RunConfig cfg;
  try {
    if (!o.config_file.empty()) cfg = load_config(o.config_file);
  } catch (const ValidationError& e) {
    throw ConfigFailure{e.violations()};
  } catch (const IoError& e) {
    throw ConfigFailure{{e.what()}};
  }
  if (!o.seeds.empty()) {
    cfg.seed_paths.clear();
    for (const auto& s : o.seeds) cfg.seed_paths.emplace_back(s);
  }
  if (!o.db_dir.empty()) cfg.database_dir = o.db_dir;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (o.rounds) cfg.rounds = *o.rounds;
  if (o.budget) cfg.budget = *o.budget;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.tau) cfg.tau = *o.tau;
  if (o.cot_samples) cfg.cot_samples = *o.cot_samples;
  if (o.expansions) cfg.expansions_per_seed = *o.expansions;
  if (o.max_attempts) cfg.max_attempts = *o.max_attempts;
  if (o.timeout_ms) cfg.limits.timeout_ms = *o.timeout_ms;
  if (o.max_rows) cfg.limits.max_rows = *o.max_rows;
  if (o.seed) cfg.global_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.dedup_before_cot) cfg.dedup_before_cot = true;
  for (BackendConfig* b : {&cfg.generator, &cfg.refiner, &cfg.teacher}) {
    if (o.backend) b->kind = *o.backend;
    if (o.base_url) b->endpoint.base_url = *o.base_url;
    if (o.model) b->endpoint.model = *o.model;
  }
  if (o.embedder) {
    cfg.embedder.kind = *o.embedder;
    if (o.base_url) cfg.embedder.endpoint.base_url = *o.base_url;
    if (o.model) cfg.embedder.endpoint.model = *o.model;
  }
  auto violations = config_violations(cfg, require_seeds);
  if (!violations.empty()) throw ConfigFailure{violations};
  return cfg;
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
}

void write_rejections(const std::string& file, const std::vector<RejectionRecord>& records) {
  if (file.empty()) return;
  std::string text;
  for (const auto& r : records) text += rejection_to_json(r) + "\n";
  write_text(file, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlforge: evolve seed question/SQL pairs into verified training data"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  Overrides o;
  std::string in_file, out_file, aux_file, state_file, resume_stage, script_file;

  auto* ingest = app.add_subcommand("ingest", "validate seed files into seed instances");
  add_config_flags(ingest, o);
  ingest->add_option("-o,--out", out_file, "seed instances JSONL")->required();
  ingest->add_option("--quarantine", aux_file, "quarantined records JSONL");

  auto* eqe = app.add_subcommand("eqe", "exploratory expansion of seed instances");
  add_config_flags(eqe, o);
  eqe->add_option("-i,--in", in_file, "seed instances JSONL")->required();
  eqe->add_option("-o,--out", out_file, "EQE instances JSONL")->required();
  eqe->add_option("--rejections", aux_file, "rejected candidates JSONL");

  auto* oge = app.add_subcommand("oge", "operator-guided evolution rounds");
  add_config_flags(oge, o);
  oge->add_option("-i,--in", in_file, "instances to evolve (JSONL)")->required();
  oge->add_option("-o,--out", out_file, "evolved instances of all rounds (JSONL)")->required();
  oge->add_option("--state", state_file, "scheduler state, loaded when present and saved after the run");
  oge->add_option("--rejections", aux_file, "rejected candidates JSONL");

  auto* cot = app.add_subcommand("cot", "chain-of-thought synthesis by rejection sampling");
  add_config_flags(cot, o);
  cot->add_option("-i,--in", in_file, "instances JSONL")->required();
  cot->add_option("-o,--out", out_file, "instances with traces and statuses (JSONL)")->required();
  cot->add_option("--discards", aux_file, "discard reasons JSONL");

  auto* dedup = app.add_subcommand("dedup", "schema-aware near-duplicate removal");
  add_config_flags(dedup, o);
  dedup->add_option("-i,--in", in_file, "instances JSONL")->required();
  dedup->add_option("-o,--out", out_file, "surviving instances JSONL")->required();
  dedup->add_option("--report", aux_file, "removal report JSONL");

  auto* stats = app.add_subcommand("stats", "feature report for a dataset");
  stats->add_option("-i,--in", in_file, "dataset JSONL")->required();
  stats->add_option("--csv", aux_file, "write the per-stage table as CSV");

  auto* run = app.add_subcommand("run", "full pipeline with checkpoints");
  add_config_flags(run, o);
  run->add_option("--resume", resume_stage, "rerun from this stage using earlier checkpoints");

  auto* mkdb = app.add_subcommand("mkdb", "build a SQLite database from a SQL script");
  mkdb->add_option("--script", script_file, "SQL script")->required()->check(CLI::ExistingFile);
  mkdb->add_option("-o,--out", out_file, "database file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("sqlforge"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*mkdb) {
      std::ifstream in(script_file, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      build_database_from_script(out_file, buf.str());
      return kExitOk;
    }
    if (*stats) {
      auto report = stats_report(fs::path(in_file));
      std::cout << report.text;
      if (!aux_file.empty()) write_text(aux_file, report.csv);
      return kExitOk;
    }
    if (*run) {
      RunConfig cfg = build_config(o, true);
      std::optional<std::string> resume;
      if (!resume_stage.empty()) {
        auto plan = stage_plan(cfg);
        if (std::find(plan.begin(), plan.end(), resume_stage) == plan.end())
          throw ConfigFailure{{"unknown stage to resume from: " + resume_stage}};
        resume = resume_stage;
      }
      auto summary = run_full(cfg, resume);
      std::cout << summary.final_count << " instances written to " << summary.final_dataset.string() << "\n";
      return kExitOk;
    }

    RunConfig cfg = build_config(o, ingest->parsed());
    Workspace ws(cfg.database_dir);
    Backends backends = make_backends(cfg);

    if (*ingest) {
      auto result = ingest_seeds(cfg.seed_paths, ws, cfg.limits);
      write_jsonl(out_file, result.seeds);
      write_rejections(aux_file, result.quarantined);
      std::cout << result.seeds.size() << " seeds, " << result.quarantined.size() << " quarantined\n";
    } else if (*eqe) {
      auto seeds = read_jsonl(in_file);
      auto result = run_eqe(seeds, cfg, ws, backends);
      write_jsonl(out_file, result.accepted);
      write_rejections(aux_file, result.rejected);
      std::cout << result.accepted.size() << " EQE instances, " << result.rejected.size() << " rejected\n";
    } else if (*oge) {
      auto current = read_jsonl(in_file);
      EvolutionState state;
      state.p_target = cfg.p_target;
      state.epsilon = cfg.epsilon;
      state.budget = cfg.budget;
      if (!state_file.empty() && fs::exists(state_file)) state = load_state(state_file);
      std::vector<QueryInstance> evolved;
      std::vector<RejectionRecord> rejected;
      int first = state.round + 1;
      for (int r = first; r < first + cfg.rounds; ++r) {
        auto res = run_oge(current, cfg, ws, backends, state, r);
        evolved.insert(evolved.end(), res.next.begin(), res.next.end());
        rejected.insert(rejected.end(), res.rejected.begin(), res.rejected.end());
        current = std::move(res.next);
      }
      write_jsonl(out_file, evolved);
      write_rejections(aux_file, rejected);
      if (!state_file.empty()) save_state(state_file, state);
      std::cout << evolved.size() << " evolved instances, " << rejected.size() << " rejected\n";
    } else if (*cot) {
      auto instances = read_jsonl(in_file);
      auto result = run_cot(instances, cfg, ws, backends);
      write_jsonl(out_file, instances);
      if (!aux_file.empty()) {
        std::string text;
        for (const auto& l : result.discard_log) text += l + "\n";
        write_text(aux_file, text);
      }
      std::cout << result.kept << " kept, " << result.discarded << " discarded, " << result.deferred
                << " deferred\n";
    } else if (*dedup) {
      auto instances = read_jsonl(in_file);
      bool has_traces = std::any_of(instances.begin(), instances.end(),
                                    [](const QueryInstance& i) { return i.status == InstanceStatus::cot_kept; });
      InstanceStatus eligible = has_traces ? InstanceStatus::cot_kept : InstanceStatus::active;
      auto result = run_dedup(instances, eligible, cfg.tau, backends);
      std::vector<QueryInstance> kept;
      for (const auto& i : instances) {
        if (i.status == eligible) kept.push_back(i);
      }
      write_jsonl(out_file, kept);
      if (!aux_file.empty()) write_text(aux_file, dedup_report_jsonl(result.removed));
      std::cout << kept.size() << " kept, " << result.removed.size() << " removed ("
                << vector_source_name(result.source) << ")\n";
    }
    return kExitOk;
  } catch (const ConfigFailure& f) {
    for (const auto& m : f.messages) std::cerr << "config error: " << m << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    for (const auto& m : e.violations()) std::cerr << "error: " << m << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
}
