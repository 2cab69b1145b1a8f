#pragma once

// CSV and JSON tables: header always present, RFC 4180 quoting, reals at 17
// significant digits. JSON output mirrors the CSV fields one-to-one.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace topswap {

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_real(double v);
std::string csv_escape(std::string_view field);

void write_csv(const Table& table, std::ostream& os);
/// Array of objects keyed by column name.
void write_json(const Table& table, std::ostream& os);

enum class OutputFormat { Csv, Json };
void write_table(const Table& table, OutputFormat format, std::ostream& os);

}  // namespace topswap
