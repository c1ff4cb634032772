#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mmlhub {

/// Splits on '\n' only. A trailing newline yields a final empty line, so
/// join_lines(split_lines(s)) == s for every s.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

std::string to_lower(std::string_view text);
std::string html_escape(std::string_view text);

bool starts_with_comment(std::string_view line) noexcept;

}  // namespace mmlhub
