#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ciropt {

/// "%.9g"; NaN prints as "nan", infinities as "inf" / "-inf".
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

/// Writes a header on construction; every row must match its width.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void write_row(const std::vector<std::string>& fields);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws SchemaError naming it when absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

/// Throws SchemaError unless `table` has exactly `expected` as its header.
void require_header(const CsvTable& table, const std::vector<std::string>& expected, std::string_view what);

double parse_double(std::string_view field, std::string_view what);
long long parse_integer(std::string_view field, std::string_view what);

}  // namespace ciropt
