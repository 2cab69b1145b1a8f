#include "topswap/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace topswap {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the header");
  rows.push_back(std::move(row));
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>)
          return v;
        else if constexpr (std::is_same_v<T, double>)
          return format_real(v);
        else if constexpr (std::is_same_v<T, bool>)
          return v ? "true" : "false";
        else
          return std::to_string(v);
      },
      c);
}

}  // namespace

void write_csv(const Table& table, std::ostream& os) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << csv_escape(table.columns[i]);
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(row[i]));
    os << '\n';
  }
}

void write_json(const Table& table, std::ostream& os) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& key = table.columns[i];
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              // non-finite reals have no JSON literal; keep the CSV spelling
              if (std::isfinite(v))
                obj[key] = v;
              else
                obj[key] = format_real(v);
            } else {
              obj[key] = v;
            }
          },
          row[i]);
    }
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

void write_table(const Table& table, OutputFormat format, std::ostream& os) {
  if (format == OutputFormat::Csv)
    write_csv(table, os);
  else
    write_json(table, os);
}

}  // namespace topswap
