#include "sqlforge/prompts.hpp"

#include <regex>
#include <set>

#include "prompt_assets.hpp"
#include "sqlforge/error.hpp"

namespace sqlforge {

namespace {

const std::regex& placeholder_pattern() {
  static const std::regex re(R"(\{([A-Z_]+)\})");
  return re;
}

}  // namespace

std::string_view prompt_asset(std::string_view key) {
  for (const auto& a : generated::kPromptAssets) {
    if (a.key == key) return a.text;
  }
  throw Error("unknown prompt asset '" + std::string(key) + "'");
}

std::vector<std::string> prompt_asset_keys() {
  std::vector<std::string> keys;
  for (const auto& a : generated::kPromptAssets) keys.emplace_back(a.key);
  return keys;
}

std::vector<std::string> template_placeholders(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), placeholder_pattern()); it != std::sregex_iterator(); ++it) {
    std::string name = (*it)[1];
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& bindings) {
  std::vector<std::string> missing;
  for (const auto& name : template_placeholders(text)) {
    if (!bindings.count(name)) missing.push_back("unbound placeholder {" + name + "}");
  }
  if (!missing.empty()) throw ValidationError(missing);

  // Single left-to-right pass so bound values are never themselves rescanned.
  std::string out;
  std::string s(text);
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), placeholder_pattern()); it != std::sregex_iterator(); ++it) {
    out.append(s, last, it->position() - last);
    out += bindings.at((*it)[1]);
    last = it->position() + it->length();
  }
  out.append(s, last, std::string::npos);
  return out;
}

}  // namespace sqlforge
