#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace itc {

/// Whitespace tokens are the length unit used everywhere in the toolkit:
/// truncation budgets, scripted-backend usage, and corpus lengths.
std::vector<std::string_view> split_whitespace(std::string_view text);
std::size_t whitespace_token_count(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);
std::string to_upper_ascii(std::string_view text);

} // namespace itc
