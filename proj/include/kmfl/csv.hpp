#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace kmfl {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

/// Minimal CSV table: a header row plus rows of numeric cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a comma-separated numeric table with one header line. Throws
/// kmfl::Error(Io) on unreadable files or non-numeric cells.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes `table` with full round-trip precision.
void write_csv(const CsvTable& table, const std::filesystem::path& path);

}  // namespace kmfl
