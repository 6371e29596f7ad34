#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fidhvi::csv {

/// Shortest-safe decimal form: 17 significant digits, round-trips exactly.
std::string format_double(double v);

/// Strict parse; throws ConfigError on trailing garbage or empty input.
double parse_double(std::string_view s);

std::vector<std::string> split_row(std::string_view line);

/// A header plus string cells, the common shape of every table we emit.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(std::string_view name) const;  ///< throws ConfigError
  double number(std::size_t row, std::string_view name) const;
};

void write_table(std::ostream& os, const Table& table);
Table read_table(std::istream& is);

/// Writes to `path`, creating parent directories as needed.
void write_table_file(const std::string& path, const Table& table);
Table read_table_file(const std::string& path);

}  // namespace fidhvi::csv
