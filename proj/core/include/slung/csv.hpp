#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace slung {

// Shortest text that parses back to the same double (17 significant digits).
std::string csv_number(double v);
std::string csv_join(const std::vector<std::string>& cells);

// Comma-separated rows without quoting; cells must not contain ',' or newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
double parse_csv_double(const std::string& cell);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace slung
