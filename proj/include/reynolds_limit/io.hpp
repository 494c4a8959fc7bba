#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace reylim {

/// Shortest text that round-trips a double (17 significant digits).
std::string format_double(double x);

/// Comma-joined values terminated by a newline.
std::string csv_row(std::initializer_list<double> values);
std::string csv_row(const std::vector<double>& values);

/// Parses one CSV line of numbers; throws InputError on malformed fields.
std::vector<double> parse_csv_doubles(std::string_view line);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace reylim
