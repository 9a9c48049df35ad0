#include "toff/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "toff/error.hpp"

namespace toff {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::string render(const Cell& cell, NumberFormat format) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return format_number(std::get<double>(cell), format);
}

nlohmann::json to_json(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  const double x = std::get<double>(cell);
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

std::string format_number(double x, NumberFormat format) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.imbue(std::locale::classic());
  if (format.kind == NumberFormat::Kind::Fixed) {
    out << std::fixed << std::setprecision(format.digits) << x;
    std::string s = out.str();
    // Avoid "-0.00000".
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
  }
  out << std::setprecision(format.digits) << x;
  return out.str();
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("row width " + std::to_string(row.size()) + " != column count " +
                           std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "text") return OutputFormat::Text;
  if (text == "csv") return OutputFormat::Csv;
  if (text == "structured" || text == "json") return OutputFormat::Structured;
  throw DomainError("unknown format '" + std::string(text) + "' (expected text, csv or structured)");
}

double relative_error(double analytic, double simulated) {
  return std::abs(analytic - simulated) / std::abs(analytic);
}

void write_csv(const ResultTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << csv_field(table.columns[c].name);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << csv_field(render(row[c], table.columns[c].format));
    }
    out << '\n';
  }
}

void write_structured(const ResultTable& table, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["title"] = table.title;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : table.metadata) doc["metadata"][k] = v;
  doc["columns"] = nlohmann::ordered_json::array();
  for (const Column& c : table.columns) {
    doc["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
  }
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json record = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) record[table.columns[c].name] = to_json(row[c]);
    doc["rows"].push_back(std::move(record));
  }
  doc["notes"] = table.notes;
  if (!table.attachment_name.empty()) doc[table.attachment_name] = table.attachment;
  out << doc.dump(2) << '\n';
}

void write_text(const ResultTable& table, std::ostream& out) {
  if (!table.title.empty()) out << table.title << '\n';
  for (const auto& [k, v] : table.metadata) out << "  " << k << ": " << v << '\n';
  if (!table.title.empty() || !table.metadata.empty()) out << '\n';

  std::vector<std::string> header;
  for (const Column& c : table.columns) {
    header.push_back(c.unit.empty() ? c.name : c.name + " [" + c.unit + "]");
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : table.rows) {
    std::vector<std::string> r;
    for (std::size_t c = 0; c < row.size(); ++c) r.push_back(render(row[c], table.columns[c].format));
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
  }
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      const bool numeric = !table.rows.empty() && &r != &header &&
                           !std::holds_alternative<std::string>(table.rows.front()[c]);
      out << (c ? "  " : "") << (numeric ? std::right : std::left) << std::setw(static_cast<int>(width[c]))
          << r[c];
    }
    out << std::left << '\n';
  };
  line(header);
  for (const auto& r : cells) line(r);
  for (const std::string& n : table.notes) out << "note: " << n << '\n';
  if (!table.attachment.empty()) out << '\n' << table.attachment;
}

void write_table(const ResultTable& table, OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::Csv: write_csv(table, out); break;
    case OutputFormat::Structured: write_structured(table, out); break;
    case OutputFormat::Text: write_text(table, out); break;
  }
}

}  // namespace toff
