#include "ciropt/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "ciropt/error.hpp"

namespace ciropt {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), width_(header.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw SchemaError(path_.string() + ": row width does not match the header");
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out_ << ',';
    out_ << csv_escape(fields[k]);
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto k = find_column(name)) return *k;
  throw SchemaError("missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw SchemaError("unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw SchemaError("empty CSV: no header row");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected, std::string_view what) {
  for (const auto& name : expected)
    if (!table.find_column(name)) throw SchemaError(std::string(what) + ": missing column '" + name + "'");
  if (table.header != expected) throw SchemaError(std::string(what) + ": columns out of order or unexpected");
}

double parse_double(std::string_view field, std::string_view what) {
  const std::string s(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw SchemaError(std::string(what) + ": not a number: '" + s + "'");
  return v;
}

long long parse_integer(std::string_view field, std::string_view what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw SchemaError(std::string(what) + ": not an integer: '" + std::string(field) + "'");
  return v;
}

}  // namespace ciropt
