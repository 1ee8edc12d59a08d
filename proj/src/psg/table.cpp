#include "psg/table.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "psg/error.hpp"

namespace psg {

namespace {

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string out = "\"";
          for (char c : v) {
            if (c == '"') out += '"';
            out += c;
          }
          return out + "\"";
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

nlohmann::ordered_json json_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
          return v;
        } else {
          return v;
        }
      },
      cell);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void Table::add_row(std::vector<Cell> row) {
  require(row.size() == columns_.size(), ErrorCode::dimension_mismatch, "table: row width differs from header");
  rows_.push_back(std::move(row));
}

void Table::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta_)
    if (k == key) {
      v = value;
      return;
    }
  meta_.emplace_back(key, value);
}

const Cell& Table::at(std::size_t row, const std::string& column) const {
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c] == column) return rows_.at(row)[c];
  fail(ErrorCode::invalid_argument, "table: no column '" + column + "'");
}

std::string Table::to_csv() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta_) out << "# " << k << ": " << v << '\n';
  if (!spec_.empty()) out << "# spec: " << spec_ << '\n';
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
  return out.str();
}

std::string Table::to_json() const {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta_) meta[k] = v;
  if (!spec_.empty()) meta["spec"] = nlohmann::ordered_json::parse(spec_);
  doc["meta"] = meta;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns_[c]] = json_cell(row[c]);
    doc["rows"].push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

std::string extract_spec(const std::string& rendered) {
  std::size_t first = rendered.find_first_not_of(" \t\r\n");
  require(first != std::string::npos, ErrorCode::invalid_argument, "extract_spec: empty input");
  if (rendered[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(rendered);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::invalid_argument, std::string("extract_spec: ") + e.what());
    }
    require(doc.contains("meta") && doc["meta"].contains("spec"), ErrorCode::invalid_argument,
            "extract_spec: JSON output has no meta.spec");
    return doc["meta"]["spec"].dump();
  }
  std::istringstream in(rendered);
  std::string line;
  const std::string tag = "# spec: ";
  while (std::getline(in, line)) {
    if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
    if (line.empty() || line[0] != '#') break;
  }
  fail(ErrorCode::invalid_argument, "extract_spec: no '# spec:' header line");
}

}  // namespace psg
