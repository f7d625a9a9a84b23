#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace emosig {

// Reads a whole file; throws Error naming the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Writes bytes verbatim (binary mode, no newline translation), creating parent dirs.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

std::string lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

// 1-based (line, column) of a byte offset.
std::pair<std::size_t, std::size_t> line_col_at(std::string_view text, std::size_t offset);

// Parses JSON, rejecting duplicate object keys. Errors are FormatError with line/column.
nlohmann::json parse_json_strict(std::string_view text, const std::string& source);

// Fixed-point decimal rendering, locale independent.
std::string format_fixed(double value, int decimals);

struct CsvRow {
    std::size_t line;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain separators, quotes ("") and newlines.
// Blank lines are skipped. Unterminated quotes raise FormatError.
std::vector<CsvRow> parse_csv(std::string_view text, const std::string& source, char sep = ',');

std::string csv_escape(std::string_view field, char sep = ',');

// Canonical JSON text: sorted keys, 2-space indent, trailing newline.
std::string dump_canonical(const nlohmann::json& j);

}  // namespace emosig
