#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rustmap {

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string> &parts, std::string_view sep);

std::string to_lower(std::string_view s);
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

bool is_ident_start(char c);
bool is_ident_char(char c);
bool is_identifier(std::string_view s);

// Reads a whole file; throws std::runtime_error on failure.
std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view content);

// Indentation depth in columns, tabs counted as `tab_width`.
int indent_width(std::string_view line, int tab_width = 8);

} // namespace rustmap
