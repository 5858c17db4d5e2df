#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::string trim(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
void replace_all(std::string& s, std::string_view from, std::string_view to);

std::size_t edit_distance(std::string_view a, std::string_view b);

// FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view s);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace sqlforge
