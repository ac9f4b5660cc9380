#include "bcpp/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bcpp/errors.hpp"

namespace bcpp {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw InternalError("could not format a real value");
  return {buf.data(), ptr};
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string_view type_name(ColumnType t) {
  switch (t) {
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
    case ColumnType::text: return "text";
  }
  return "?";
}

}  // namespace

std::string render_csv(const std::vector<CsvRow>& rows, const CsvSchema& schema) {
  std::string out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c > 0) out += ',';
    out += quote(schema[c].name);
  }
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.size() != schema.size()) {
      throw InternalError("CSV row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                          " fields, schema has " + std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].index() != static_cast<std::size_t>(schema[c].type)) {
        throw InternalError("CSV row " + std::to_string(r) + ", column '" + schema[c].name + "' is not of type " +
                            std::string(type_name(schema[c].type)));
      }
      if (c > 0) out += ',';
      switch (schema[c].type) {
        case ColumnType::integer: out += std::to_string(std::get<std::int64_t>(row[c])); break;
        case ColumnType::real: out += format_real(std::get<double>(row[c])); break;
        case ColumnType::text: out += quote(std::get<std::string>(row[c])); break;
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<CsvRow>& rows, const CsvSchema& schema, const std::filesystem::path& path) {
  const std::string text = render_csv(rows, schema);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("CSV has no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
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
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace bcpp
