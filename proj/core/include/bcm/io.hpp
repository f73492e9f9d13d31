#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bcm::io {

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double value);

/// Rounds to the given number of significant decimal digits.
double round_significant(double value, int digits);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

/// Grid from `start:stop:step` (start included, stop included when it is hit
/// within 1e-9 of a step), a comma list, or a single value. Points are
/// rounded to 12 significant digits and must be strictly increasing.
std::vector<double> parse_grid(std::string_view text);

/// Column-oriented result table emitted as CSV or as a JSON array of rows.
class Table {
 public:
  using Value = std::variant<double, std::int64_t, std::string>;

  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Value> row);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Value>>& rows() const { return rows_; }

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Value>> rows_;
};

}  // namespace bcm::io
