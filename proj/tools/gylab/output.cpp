#include "output.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace gylab::cli {

std::string format_number(double v) {
  if (!std::isfinite(v)) return {};
  if (v == std::trunc(v) && std::abs(v) < 9007199254740992.0) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{:.17g}", v);
}

namespace {

void dump(const Json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::null:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(v.get<long long>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<unsigned long long>());
      break;
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
      } else {
        // Keep a float marker so readers see a real-valued field.
        std::string s = fmt::format("{:.17g}", d);
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        out += s;
      }
      break;
    }
    case Json::value_t::string:
      out += Json(v.get<std::string>()).dump();
      break;
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      bool scalar = true;
      for (const auto& e : v) scalar = scalar && !e.is_structured();
      if (scalar) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump(v[i], indent + 1, out);
        }
        out += ']';
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += inner;
        dump(v[i], indent + 1, out);
        out += i + 1 < v.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      break;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, value] : v.items()) {
        out += inner + Json(key).dump() + ": ";
        dump(value, indent + 1, out);
        out += ++i < v.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      break;
    }
    default:
      throw std::runtime_error("dump_json: unsupported value type");
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump(value, 0, out);
  out += '\n';
  return out;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (auto& h : header) current_.push_back(csv_escape(h));
  end_row();
}

CsvTable& CsvTable::cell(double v) {
  current_.push_back(format_number(v));
  return *this;
}

CsvTable& CsvTable::cell(long long v) {
  current_.push_back(std::to_string(v));
  return *this;
}

CsvTable& CsvTable::cell(const std::string& v) {
  current_.push_back(csv_escape(v));
  return *this;
}

CsvTable& CsvTable::empty() {
  current_.emplace_back();
  return *this;
}

void CsvTable::end_row() {
  if (current_.size() != columns_) {
    throw std::logic_error("CsvTable: row has " + std::to_string(current_.size()) +
                           " fields, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < current_.size(); ++i) {
    if (i) text_ += ',';
    text_ += current_[i];
  }
  text_ += '\n';
  current_.clear();
}

std::string CsvTable::str() const { return text_; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string iso8601_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace gylab::cli
