#pragma once

// Result tables and their CSV/JSON renderings.
//
// CSV: comma separated, header row, `#`-prefixed metadata lines before it, doubles
// printed with 17 significant digits. JSON: {"meta": {...}, "rows": [{...}, ...]}.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace psg {

using Cell = std::variant<std::int64_t, double, bool, std::string>;

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row);
  void set_meta(const std::string& key, const std::string& value);
  // Canonical JSON text of the spec that produced the table.
  void set_spec(std::string spec_json) { spec_ = std::move(spec_json); }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& meta() const noexcept { return meta_; }
  const std::string& spec() const noexcept { return spec_; }
  const Cell& at(std::size_t row, const std::string& column) const;

  std::string to_csv() const;
  std::string to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::string spec_;
};

// "%.17g", with inf, -inf and nan spelled out.
std::string format_double(double x);

// Recovers the embedded spec JSON from a CSV or JSON rendering.
std::string extract_spec(const std::string& rendered);

}  // namespace psg
