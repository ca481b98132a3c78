#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace placeorigin::text {

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);
/// Collapses runs of whitespace into one space and trims both ends.
std::string collapse_ws(std::string_view s);
std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to);
bool starts_with_icase(std::string_view s, std::string_view prefix);
/// Decodes %XX escapes; malformed escapes are kept verbatim.
std::string percent_decode(std::string_view s);
/// Keeps [A-Za-z0-9._-] and encodes every other byte as %XX.
std::string filename_safe(std::string_view s);

}  // namespace placeorigin::text
