#include "csv_util.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "cfbench/error.hpp"

namespace cfb::detail {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!have_header) {
      // Strip a UTF-8 byte order mark.
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    table.rows.push_back(split_line(line));
  }
  if (!have_header) throw Error(Errc::Parse, path.string() + " is empty");
  return table;
}

double parse_double(const std::vector<std::string>& row, std::size_t col, std::size_t line) {
  if (col >= row.size()) {
    throw Error(Errc::Parse, "line " + std::to_string(line) + " has too few cells");
  }
  const std::string& cell = row[col];
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(Errc::Parse, "line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  }
  return value;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace cfb::detail
