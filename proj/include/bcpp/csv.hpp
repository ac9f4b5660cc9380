#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bcpp {

enum class ColumnType { integer, real, text };

struct Column {
  std::string name;
  ColumnType type;
};

using CsvSchema = std::vector<Column>;
using Cell = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<Cell>;

// Reals use 17 significant digits so they read back as the same double.
std::string format_real(double v);

// Header plus one line per row, LF endings, fields quoted only when needed.
// Throws InternalError when a row does not match the schema.
std::string render_csv(const std::vector<CsvRow>& rows, const CsvSchema& schema);

// Writes render_csv(...) to path. I/O failures throw std::runtime_error
// naming the path.
void write_csv(const std::vector<CsvRow>& rows, const CsvSchema& schema, const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace bcpp
