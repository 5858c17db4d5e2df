#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlforge/schema.hpp"
#include "sqlforge/sqlite_db.hpp"

namespace testsupport {

inline std::filesystem::path fixture_dir() { return SQLFORGE_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return SQLFORGE_DATA_DIR; }
inline std::filesystem::path fixture_db(const std::string& name) { return fixture_dir() / (name + ".sqlite"); }

inline const sqlforge::DatabaseSchema& fixture_schema(const std::string& name) {
  static std::map<std::string, sqlforge::DatabaseSchema> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, sqlforge::load_schema(fixture_db(name), name)).first;
  return it->second;
}

inline sqlforge::Database open_fixture(const std::string& name) {
  return sqlforge::Database::open_read_only(fixture_db(name));
}

// Fresh directory unique to this process.
inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("sqlforge-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path make_db(const std::filesystem::path& dir, const std::string& name,
                                     const std::string& script) {
  auto file = dir / (name + ".sqlite");
  sqlforge::build_database_from_script(file, script);
  return file;
}

inline std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct GoldenQuery {
  std::string id;
  std::string db_id;
  std::string sql;
};

inline std::vector<GoldenQuery> golden_corpus() {
  auto j = nlohmann::json::parse(slurp(data_dir() / "corpus" / "golden.json"));
  std::vector<GoldenQuery> out;
  for (const auto& r : j) out.push_back({r.at("id"), r.at("db_id"), r.at("sql")});
  return out;
}

inline std::string golden_sql(const std::string& id) {
  for (const auto& q : golden_corpus()) {
    if (q.id == id) return q.sql;
  }
  return {};
}

}  // namespace testsupport
