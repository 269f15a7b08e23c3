#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace gylab::cli {

using Json = nlohmann::ordered_json;

/// 17 significant digits; integral values below 2^53 print without exponent.
std::string format_number(double v);

/// Compact-but-indented JSON with every float at 17 significant digits and
/// non-finite floats as null.
std::string dump_json(const Json& value);

// RFC 4180 table: comma separated, header row, LF line endings. Non-finite
// numbers are written as empty fields.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(const std::string& v);
  CsvTable& empty();
  void end_row();

  std::string str() const;

 private:
  std::size_t columns_;
  std::vector<std::string> current_;
  std::string text_;
};

std::string csv_escape(const std::string& field);

/// Writes bytes verbatim; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& content);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string iso8601_now();

}  // namespace gylab::cli
