#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge {

// Storage classes of the target engine.
enum class Affinity { integer, real, text, blob, numeric };

std::string_view affinity_name(Affinity a);
// SQLite column-affinity rules applied to a declared type string.
Affinity affinity_from_declared_type(std::string_view declared);
bool is_numeric(Affinity a);

struct ColumnDef {
  std::string name;
  Affinity affinity = Affinity::numeric;
  bool nullable = true;
  std::string declared_type;
};

struct ForeignKey {
  std::vector<std::string> columns;
  std::string referenced_table;
  std::vector<std::string> referenced_columns;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  const ColumnDef* find_column(std::string_view column) const;
};

// Immutable after load; safe to share between workers.
struct DatabaseSchema {
  std::string schema_id;
  std::vector<TableDef> tables;
  std::string evidence_notes;

  const TableDef* find_table(std::string_view table) const;
};

// Introspects a database file. schema_id defaults to the file stem.
// Throws IoError for unreadable files and ValidationError when invariants fail.
DatabaseSchema load_schema(const std::filesystem::path& db_file, std::string schema_id = {},
                           std::string evidence_notes = {});

std::vector<std::string> schema_violations(const DatabaseSchema& schema);
void validate_schema(const DatabaseSchema& schema);

struct ColumnPair {
  std::string local;     // column of the table owning the adjacency entry
  std::string neighbor;  // column of the neighbor table
};

struct JoinEdge {
  std::string table;     // owning table (schema spelling)
  std::string neighbor;  // neighbor table (schema spelling)
  std::vector<ColumnPair> columns;

  // "person.id = games_competitor.person_id"
  std::string condition_text() const;
};

// Keyed by lowercase table name. Every table has an entry, possibly empty.
using JoinGraph = std::map<std::string, std::vector<JoinEdge>>;

JoinGraph fk_join_graph(const DatabaseSchema& schema);
const std::vector<JoinEdge>& neighbors(const JoinGraph& graph, std::string_view table);

// CREATE TABLE style rendering used for {DATABASE_SCHEMA}. Pure function of the value.
std::string render_schema_prompt(const DatabaseSchema& schema);

std::span<const std::string> default_date_patterns();
bool is_date_like(const ColumnDef& column,
                  std::span<const std::string> patterns = default_date_patterns());

}  // namespace sqlforge
