#pragma once

// Small text helpers shared by the CSV/JSONL readers and writers.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uqeval::text {

// printf("%.*g") rendering; locale independent for the C locale the library
// assumes.
std::string format_double(double v, int significant_digits);

// Renders an optional ratio as a number or the literal "n/a".
std::string format_optional(const std::optional<double>& v,
                            int significant_digits = 17);

// Splits one CSV record on commas. Quoting is not part of any of our
// formats, so none is handled. A trailing '\r' is stripped.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

// Strict full-field numeric parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Reads a whole file into lines (without terminators). Throws IoError.
std::vector<std::string> read_lines(const std::string& path);

// Writes `content` to `path`, throwing IoError if the path is unwritable.
void write_file(const std::string& path, std::string_view content);

// "path:line: message" style location prefix.
std::string where(const std::string& path, std::size_t line_no);

}  // namespace uqeval::text
