#include "fidhvi/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "fidhvi/errors.hpp"

namespace fidhvi::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) throw ConfigError("csv: empty numeric field");
  const std::string buf(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) {
    throw ConfigError("csv: cannot parse number '" + buf + "'");
  }
  return v;
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    auto cell = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    cells.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw ConfigError("csv: row width does not match header");
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("csv: no column named '" + std::string(name) + "'");
}

double Table::number(std::size_t row, std::string_view name) const {
  return parse_double(rows.at(row).at(column(name)));
}

void write_table(std::ostream& os, const Table& table) {
  auto emit = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

Table read_table(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: missing header");
  t.header = split_row(line);
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    t.add_row(split_row(line));
  }
  return t;
}

void write_table_file(const std::string& path, const Table& table) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("csv: cannot open '" + path + "' for writing");
  write_table(os, table);
}

Table read_table_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("csv: cannot open '" + path + "'");
  return read_table(is);
}

}  // namespace fidhvi::csv
