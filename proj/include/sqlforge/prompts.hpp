#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge {

// Prompt templates shipped with the library, keyed by file stem
// ("expansion", "evolution", "strategy", "cot", "refine", "op_func", ...).
// Throws Error for an unknown key.
std::string_view prompt_asset(std::string_view key);
std::vector<std::string> prompt_asset_keys();

// Placeholders written as {NAME} (upper case and underscores) found in a template.
std::vector<std::string> template_placeholders(std::string_view text);

// Substitutes every placeholder in one pass. Throws ValidationError listing the
// placeholders that have no binding.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& bindings);

}  // namespace sqlforge
