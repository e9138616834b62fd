#pragma once

// Minimal CSV helpers shared by the trajectory, results and report readers.
// Handles comma-separated numeric tables with a header row; quoted header
// cells are unquoted, embedded commas are not supported.

#include <filesystem>
#include <string>
#include <vector>

namespace cfb::detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_line(const std::string& line);

double parse_double(const std::vector<std::string>& row, std::size_t col, std::size_t line);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cfb::detail
