#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace capfuse::tsv {

// Field escaping so tabs and newlines survive a TSV round-trip:
// '\\' -> "\\\\", '\t' -> "\\t", '\n' -> "\\n", '\r' -> "\\r".
std::string escape(std::string_view field);
std::string unescape(std::string_view field, const std::string& origin, std::size_t line_no);

// Splits a raw line on tabs (escaped tabs are no longer raw tabs).
std::vector<std::string> split(std::string_view line);

std::string join(const std::vector<std::string>& fields);

}  // namespace capfuse::tsv
