#include "sqlforge/schema.hpp"

#include <algorithm>
#include <set>

#include "sqlforge/error.hpp"
#include "sqlforge/sqlite_db.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

std::string_view affinity_name(Affinity a) {
  switch (a) {
    case Affinity::integer: return "integer";
    case Affinity::real: return "real";
    case Affinity::text: return "text";
    case Affinity::blob: return "blob";
    case Affinity::numeric: return "numeric";
  }
  return "numeric";
}

Affinity affinity_from_declared_type(std::string_view declared) {
  std::string t = to_upper(declared);
  if (t.find("INT") != std::string::npos) return Affinity::integer;
  if (t.find("CHAR") != std::string::npos || t.find("CLOB") != std::string::npos ||
      t.find("TEXT") != std::string::npos)
    return Affinity::text;
  if (t.empty() || t.find("BLOB") != std::string::npos) return Affinity::blob;
  if (t.find("REAL") != std::string::npos || t.find("FLOA") != std::string::npos ||
      t.find("DOUB") != std::string::npos)
    return Affinity::real;
  return Affinity::numeric;
}

bool is_numeric(Affinity a) {
  return a == Affinity::integer || a == Affinity::real || a == Affinity::numeric;
}

const ColumnDef* TableDef::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const TableDef* DatabaseSchema::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

namespace {

std::string quote_ident(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

DatabaseSchema load_schema(const std::filesystem::path& db_file, std::string schema_id,
                           std::string evidence_notes) {
  Database db = Database::open_read_only(db_file);
  DatabaseSchema schema;
  schema.schema_id = schema_id.empty() ? db_file.stem().string() : std::move(schema_id);
  schema.evidence_notes = std::move(evidence_notes);

  std::vector<std::string> names;
  {
    Statement st(db,
                 "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
                 "ORDER BY rowid");
    while (st.step()) names.push_back(cell_to_text(st.column(0)));
  }

  for (const auto& name : names) {
    TableDef table;
    table.name = name;
    std::vector<std::pair<int, std::string>> pk;
    {
      Statement st(db, "PRAGMA table_info(" + quote_ident(name) + ")");
      while (st.step()) {
        ColumnDef col;
        col.name = cell_to_text(st.column(1));
        col.declared_type = is_null(st.column(2)) ? "" : cell_to_text(st.column(2));
        col.affinity = affinity_from_declared_type(col.declared_type);
        col.nullable = std::get<std::int64_t>(st.column(3)) == 0;
        auto pk_index = std::get<std::int64_t>(st.column(5));
        if (pk_index > 0) pk.emplace_back(static_cast<int>(pk_index), col.name);
        table.columns.push_back(std::move(col));
      }
    }
    std::sort(pk.begin(), pk.end());
    for (auto& [_, col] : pk) table.primary_key.push_back(col);

    {
      // Rows of one foreign key share an id and are ordered by seq.
      Statement st(db, "PRAGMA foreign_key_list(" + quote_ident(name) + ")");
      std::int64_t current = -1;
      while (st.step()) {
        auto id = std::get<std::int64_t>(st.column(0));
        if (id != current) {
          table.foreign_keys.emplace_back();
          table.foreign_keys.back().referenced_table = cell_to_text(st.column(2));
          current = id;
        }
        auto& fk = table.foreign_keys.back();
        fk.columns.push_back(cell_to_text(st.column(3)));
        fk.referenced_columns.push_back(is_null(st.column(4)) ? "" : cell_to_text(st.column(4)));
      }
    }
    schema.tables.push_back(std::move(table));
  }

  // FOREIGN KEY ... REFERENCES t without a column list targets t's primary key.
  for (auto& table : schema.tables) {
    for (auto& fk : table.foreign_keys) {
      const TableDef* target = schema.find_table(fk.referenced_table);
      if (!target) continue;
      for (std::size_t i = 0; i < fk.referenced_columns.size(); ++i) {
        if (fk.referenced_columns[i].empty() && i < target->primary_key.size())
          fk.referenced_columns[i] = target->primary_key[i];
      }
      if (const TableDef* t = schema.find_table(fk.referenced_table)) fk.referenced_table = t->name;
    }
  }

  validate_schema(schema);
  return schema;
}

std::vector<std::string> schema_violations(const DatabaseSchema& schema) {
  std::vector<std::string> out;
  if (schema.tables.empty()) {
    out.push_back("no tables");
    return out;
  }
  std::set<std::string> table_names;
  for (const auto& t : schema.tables) {
    if (!table_names.insert(to_lower(t.name)).second)
      out.push_back("duplicate table name '" + t.name + "'");
    if (t.columns.empty()) out.push_back("table '" + t.name + "' has no columns");
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (!cols.insert(to_lower(c.name)).second)
        out.push_back("duplicate column '" + t.name + "." + c.name + "'");
    }
    for (const auto& pk : t.primary_key) {
      if (!t.find_column(pk))
        out.push_back("primary key column '" + t.name + "." + pk + "' is not a column");
    }
    for (const auto& fk : t.foreign_keys) {
      std::string label = "foreign key " + t.name + "(" + join(fk.columns, ", ") + ") -> " +
                          fk.referenced_table + "(" + join(fk.referenced_columns, ", ") + ")";
      if (fk.columns.size() != fk.referenced_columns.size()) {
        out.push_back(label + ": arity mismatch");
        continue;
      }
      for (const auto& c : fk.columns) {
        if (!t.find_column(c)) out.push_back(label + ": local column '" + c + "' does not exist");
      }
      const TableDef* target = schema.find_table(fk.referenced_table);
      if (!target) {
        out.push_back(label + ": dangling reference to missing table '" + fk.referenced_table + "'");
        continue;
      }
      for (const auto& c : fk.referenced_columns) {
        if (c.empty() || !target->find_column(c))
          out.push_back(label + ": dangling reference to missing column '" + fk.referenced_table +
                        "." + c + "'");
      }
    }
  }
  return out;
}

void validate_schema(const DatabaseSchema& schema) {
  auto violations = schema_violations(schema);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

std::string JoinEdge::condition_text() const {
  std::vector<std::string> parts;
  for (const auto& p : columns) parts.push_back(table + "." + p.local + " = " + neighbor + "." + p.neighbor);
  return join(parts, " AND ");
}

JoinGraph fk_join_graph(const DatabaseSchema& schema) {
  JoinGraph graph;
  for (const auto& t : schema.tables) graph[to_lower(t.name)];
  for (const auto& t : schema.tables) {
    for (const auto& fk : t.foreign_keys) {
      const TableDef* target = schema.find_table(fk.referenced_table);
      if (!target) continue;
      JoinEdge forward{t.name, target->name, {}};
      JoinEdge backward{target->name, t.name, {}};
      for (std::size_t i = 0; i < fk.columns.size(); ++i) {
        forward.columns.push_back({fk.columns[i], fk.referenced_columns[i]});
        backward.columns.push_back({fk.referenced_columns[i], fk.columns[i]});
      }
      graph[to_lower(t.name)].push_back(std::move(forward));
      graph[to_lower(target->name)].push_back(std::move(backward));
    }
  }
  return graph;
}

const std::vector<JoinEdge>& neighbors(const JoinGraph& graph, std::string_view table) {
  static const std::vector<JoinEdge> empty;
  auto it = graph.find(to_lower(table));
  return it == graph.end() ? empty : it->second;
}

std::string render_schema_prompt(const DatabaseSchema& schema) {
  std::string out;
  for (std::size_t ti = 0; ti < schema.tables.size(); ++ti) {
    const auto& t = schema.tables[ti];
    if (ti) out += "\n";
    out += "CREATE TABLE " + t.name + " (\n";
    std::vector<std::string> lines;
    for (const auto& c : t.columns) {
      std::string line = "  " + c.name;
      if (!c.declared_type.empty()) line += " " + c.declared_type;
      if (!c.nullable) line += " NOT NULL";
      lines.push_back(std::move(line));
    }
    if (!t.primary_key.empty()) lines.push_back("  PRIMARY KEY (" + join(t.primary_key, ", ") + ")");
    for (const auto& fk : t.foreign_keys) {
      lines.push_back("  FOREIGN KEY (" + join(fk.columns, ", ") + ") REFERENCES " +
                      fk.referenced_table + "(" + join(fk.referenced_columns, ", ") + ")");
    }
    out += join(lines, ",\n");
    out += "\n);\n";
  }
  return out;
}

std::span<const std::string> default_date_patterns() {
  static const std::vector<std::string> patterns = {"date", "time", "year"};
  return patterns;
}

bool is_date_like(const ColumnDef& column, std::span<const std::string> patterns) {
  // DATE/DATETIME declarations get numeric affinity but store ISO text.
  bool declared_temporal =
      icontains(column.declared_type, "date") || icontains(column.declared_type, "time");
  if (column.affinity != Affinity::text && !declared_temporal) return false;
  if (declared_temporal) return true;
  for (const auto& p : patterns) {
    if (icontains(column.name, p)) return true;
  }
  return false;
}

}  // namespace sqlforge
