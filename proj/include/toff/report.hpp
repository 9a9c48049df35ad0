#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace toff {

struct NumberFormat {
  enum class Kind { Fixed, Significant };
  Kind kind = Kind::Fixed;
  int digits = 5;
};

inline constexpr NumberFormat kFixed5{NumberFormat::Kind::Fixed, 5};
inline constexpr NumberFormat kSignificant10{NumberFormat::Kind::Significant, 10};

/// Locale-independent; non-finite values print as nan / inf / -inf.
std::string format_number(double x, NumberFormat format);

using Cell = std::variant<std::string, double, std::int64_t>;

struct Column {
  std::string name;
  std::string unit;  // empty for dimensionless
  NumberFormat format = kFixed5;
};

/// Column-oriented result records with free-form metadata.
struct ResultTable {
  std::string title;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> notes;
  /// Extra text block carried through every format (e.g. a scenario fragment).
  std::string attachment_name;
  std::string attachment;

  /// Throws std::logic_error on a width mismatch.
  void add_row(std::vector<Cell> row);
};

enum class OutputFormat { Text, Csv, Structured };
/// Accepts text, csv, structured (json is an alias). Throws DomainError.
OutputFormat parse_output_format(std::string_view text);

/// |analytic - simulated| / |analytic|, at full precision.
double relative_error(double analytic, double simulated);

void write_csv(const ResultTable& table, std::ostream& out);
void write_structured(const ResultTable& table, std::ostream& out);
void write_text(const ResultTable& table, std::ostream& out);
void write_table(const ResultTable& table, OutputFormat format, std::ostream& out);

}  // namespace toff
